//! Statistics of the detector transmission record in the frozen-dot
//! regime.
//!
//! When many probes arrive per tunneling time, the dot does not move
//! during a counting window and the record of transmissions (1) and
//! reflections (0) is a mixture of two Bernoulli processes: with weight
//! `rho_ll` every probe transmits with probability `p_l`, with weight
//! `rho_rr` with probability `p_r`. Everything here follows from that
//! mixture: sequence probabilities, binomial count distributions and
//! their Poisson approximation, the window-correlation measure of
//! telegraph behavior, and a reproducible Monte Carlo sampler.
//!
//! Transmission probabilities come from the barrier angles via
//! [`crate::smatrix::transmission_probability`] and are independent of
//! the current direction, so none of these statistics carry a
//! [`crate::smatrix::Direction`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;
use std::fmt;

use crate::error::{check_range, Error};

/// Largest `n` for which binomial terms are computed by direct exact
/// products; beyond this the log-space route takes over.
const EXACT_MAX_N: usize = 30;

/// Validity thresholds for the Poisson approximation: each occupied
/// mixture component needs at least this many probings and at most this
/// transmission probability.
const POISSON_MIN_N: usize = 100;
const POISSON_MAX_P: f64 = 0.1;

/// Which dot the measured electron occupies during a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dot {
    Left,
    Right,
}

impl fmt::Display for Dot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dot::Left => write!(f, "L"),
            Dot::Right => write!(f, "R"),
        }
    }
}

/// Occupation weights of the two dots and the per-probe transmission
/// probability each dot produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    rho_ll: f64,
    rho_rr: f64,
    p_l: f64,
    p_r: f64,
}

impl MixtureSpec {
    pub fn new(rho_ll: f64, rho_rr: f64, p_l: f64, p_r: f64) -> Result<Self, Error> {
        check_range("rho_ll", rho_ll, 0.0, 1.0)?;
        check_range("rho_rr", rho_rr, 0.0, 1.0)?;
        check_range("p_l", p_l, 0.0, 1.0)?;
        check_range("p_r", p_r, 0.0, 1.0)?;
        if ((rho_ll + rho_rr) - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "rho_rr",
                format!("occupations must sum to 1, got {}", rho_ll + rho_rr),
            ));
        }
        Ok(MixtureSpec {
            rho_ll,
            rho_rr,
            p_l,
            p_r,
        })
    }

    /// Builds a spec from the left-dot occupation alone.
    pub fn from_occupation(rho_ll: f64, p_l: f64, p_r: f64) -> Result<Self, Error> {
        check_range("rho_ll", rho_ll, 0.0, 1.0)?;
        MixtureSpec::new(rho_ll, 1.0 - rho_ll, p_l, p_r)
    }

    pub fn rho_ll(&self) -> f64 {
        self.rho_ll
    }

    pub fn rho_rr(&self) -> f64 {
        self.rho_rr
    }

    pub fn p_l(&self) -> f64 {
        self.p_l
    }

    pub fn p_r(&self) -> f64 {
        self.p_r
    }

    fn p_for(&self, dot: Dot) -> f64 {
        match dot {
            Dot::Left => self.p_l,
            Dot::Right => self.p_r,
        }
    }
}

/// An ordered record of probe outcomes: `true` is a transmission,
/// `false` a reflection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSequence {
    bits: Vec<bool>,
}

impl OutcomeSequence {
    pub fn new(bits: Vec<bool>) -> Result<Self, Error> {
        if bits.is_empty() {
            return Err(Error::InvalidInput(
                "outcome sequence must contain at least one probing".into(),
            ));
        }
        Ok(OutcomeSequence { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of transmissions in the record.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for OutcomeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &bit in &self.bits {
            write!(f, "{}", if bit { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Probability distribution of the transmission count over a window of
/// `n` probings; `probs()[q]` is the probability of exactly `q`
/// transmissions.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    probs: Vec<f64>,
}

impl CountDistribution {
    fn from_probs(probs: Vec<f64>) -> Self {
        debug_assert!(probs.len() >= 2);
        debug_assert!(probs.iter().all(|p| *p >= 0.0));
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        CountDistribution { probs }
    }

    /// Window length; the support is `0..=n()`.
    pub fn n(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, q: usize) -> f64 {
        self.probs.get(q).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(q, p)| q as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(q, p)| (q as f64 - mean).powi(2) * p)
            .sum()
    }

    /// Total-variation distance to another distribution on the same
    /// support.
    pub fn total_variation(&self, other: &CountDistribution) -> f64 {
        assert_eq!(self.n(), other.n(), "supports must match");
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Binomial probability of `q` successes in `n` trials at rate `p`.
///
/// Exact products for small `n`, log-space otherwise.
fn binomial_pmf(n: usize, p: f64, q: usize) -> f64 {
    if q > n {
        return 0.0;
    }
    if p == 0.0 {
        return if q == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if q == n { 1.0 } else { 0.0 };
    }
    if n <= EXACT_MAX_N {
        // C(n, q) stays an exact integer in f64 up to n = 30.
        let mut coeff = 1.0;
        for i in 0..q {
            coeff = coeff * (n - i) as f64 / (i + 1) as f64;
        }
        coeff * p.powi(q as i32) * (1.0 - p).powi((n - q) as i32)
    } else {
        let (n_f, q_f) = (n as f64, q as f64);
        let ln_coeff = ln_gamma(n_f + 1.0) - ln_gamma(q_f + 1.0) - ln_gamma(n_f - q_f + 1.0);
        (ln_coeff + q_f * p.ln() + (n_f - q_f) * (1.0 - p).ln()).exp()
    }
}

/// Probability of one exact sequence of transmissions and reflections:
/// the occupation-weighted product of per-probe probabilities,
/// `rho_ll * prod(p_l | q_l) + rho_rr * prod(p_r | q_r)`.
pub fn sequence_probability(seq: &OutcomeSequence, spec: &MixtureSpec) -> f64 {
    let component = |p: f64| {
        let q = 1.0 - p;
        seq.bits()
            .iter()
            .map(|&bit| if bit { p } else { q })
            .product::<f64>()
    };
    spec.rho_ll * component(spec.p_l) + spec.rho_rr * component(spec.p_r)
}

/// Distribution of the transmission count over `n` probings: the
/// occupation-weighted mixture of the two binomial distributions.
///
/// For distinct `p_l` and `p_r` this is two-peaked — the telegraph
/// signature of the measurement.
pub fn count_distribution(spec: &MixtureSpec, n: usize) -> CountDistribution {
    assert!(n >= 1, "count_distribution requires n >= 1");
    let probs = (0..=n)
        .map(|q| {
            spec.rho_ll * binomial_pmf(n, spec.p_l, q) + spec.rho_rr * binomial_pmf(n, spec.p_r, q)
        })
        .collect();
    CountDistribution::from_probs(probs)
}

/// Poisson approximation of [`count_distribution`] together with its
/// bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonApprox {
    pub distribution: CountDistribution,
    /// Poisson mass beyond `q = n` that was folded into the last bin to
    /// keep the distribution on the finite support.
    pub folded_mass: f64,
    /// Whether the approximation is trustworthy: every occupied
    /// component has `n >= 100` and `p <= 0.1`.
    pub valid: bool,
}

/// Replaces each binomial component with a Poisson distribution of the
/// same mean `p * n`, keeping the mixture weights.
pub fn poisson_approx(spec: &MixtureSpec, n: usize) -> PoissonApprox {
    assert!(n >= 1, "poisson_approx requires n >= 1");
    let (left, tail_l) = poisson_component(n, spec.p_l * n as f64);
    let (right, tail_r) = poisson_component(n, spec.p_r * n as f64);
    let probs = (0..=n)
        .map(|q| spec.rho_ll * left[q] + spec.rho_rr * right[q])
        .collect();
    let component_ok = |weight: f64, p: f64| weight == 0.0 || (n >= POISSON_MIN_N && p <= POISSON_MAX_P);
    PoissonApprox {
        distribution: CountDistribution::from_probs(probs),
        folded_mass: spec.rho_ll * tail_l + spec.rho_rr * tail_r,
        valid: component_ok(spec.rho_ll, spec.p_l) && component_ok(spec.rho_rr, spec.p_r),
    }
}

/// Poisson weights on `0..=n` with the `q > n` tail folded into the last
/// bin; returns the weights and the folded tail mass.
fn poisson_component(n: usize, mean: f64) -> (Vec<f64>, f64) {
    let mut probs = vec![0.0; n + 1];
    if mean == 0.0 {
        probs[0] = 1.0;
        return (probs, 0.0);
    }
    let ln_mean = mean.ln();
    let mut sum = 0.0;
    for (q, slot) in probs.iter_mut().enumerate() {
        let q_f = q as f64;
        *slot = (q_f * ln_mean - mean - ln_gamma(q_f + 1.0)).exp();
        sum += *slot;
    }
    let tail = (1.0 - sum).max(0.0);
    probs[n] += tail;
    (probs, tail)
}

/// Excess probability of seeing `q1` transmissions in a first window of
/// `n1` probings and `q2` in a following window of `n2`, over the
/// product of the marginals:
/// `rho_ll (1 - rho_ll) (P_l(q1) - P_r(q1)) (P_l(q2) - P_r(q2))`.
///
/// Zero when only one dot is occupied or when the current carries no
/// which-dot information (`p_l = p_r`); otherwise it quantifies the
/// telegraph correlations the measurement imprints on the record.
pub fn window_correlation(spec: &MixtureSpec, n1: usize, n2: usize, q1: usize, q2: usize) -> f64 {
    let contrast1 = binomial_pmf(n1, spec.p_l, q1) - binomial_pmf(n1, spec.p_r, q1);
    let contrast2 = binomial_pmf(n2, spec.p_l, q2) - binomial_pmf(n2, spec.p_r, q2);
    // Grouping the window factors first keeps the swap symmetry exact.
    spec.rho_ll * (1.0 - spec.rho_ll) * (contrast1 * contrast2)
}

/// One simulated counting run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSample {
    run_index: u64,
    seed: u64,
    initial_dot: Dot,
    sequence: OutcomeSequence,
}

impl RunSample {
    pub fn run_index(&self) -> u64 {
        self.run_index
    }

    /// Master seed the run ensemble was generated from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn initial_dot(&self) -> Dot {
        self.initial_dot
    }

    pub fn sequence(&self) -> &OutcomeSequence {
        &self.sequence
    }
}

/// Samples `n_runs` independent counting runs of `n` probings each.
///
/// Each run draws its dot from the occupation weights and then `n`
/// Bernoulli outcomes at that dot's transmission probability. Run `i`
/// consumes stream `i` of a counter-mode generator keyed by `seed`, so
/// the output is bit-identical for a given seed regardless of how the
/// runs are scheduled; runs are evaluated in parallel on the current
/// rayon pool.
pub fn simulate_runs(spec: &MixtureSpec, n: usize, n_runs: usize, seed: u64) -> Vec<RunSample> {
    assert!(n >= 1, "simulate_runs requires n >= 1");
    let spec = *spec;
    (0..n_runs as u64)
        .into_par_iter()
        .map(|run_index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run_index);
            let initial_dot = if rng.gen_bool(spec.rho_ll) {
                Dot::Left
            } else {
                Dot::Right
            };
            let p = spec.p_for(initial_dot);
            let bits = (0..n).map(|_| rng.gen_bool(p)).collect();
            RunSample {
                run_index,
                seed,
                initial_dot,
                sequence: OutcomeSequence { bits },
            }
        })
        .collect()
}

/// Normalized histogram of per-run transmission counts.
pub fn empirical_distribution(samples: &[RunSample]) -> Result<CountDistribution, Error> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidInput("no runs provided".into()))?;
    let n = first.sequence.len();
    let mut counts = vec![0u64; n + 1];
    for sample in samples {
        if sample.sequence.len() != n {
            return Err(Error::InvalidInput(format!(
                "runs have unequal lengths: run {} has {} probings, expected {n}",
                sample.run_index,
                sample.sequence.len()
            )));
        }
        counts[sample.sequence.count_ones()] += 1;
    }
    let total = samples.len() as f64;
    Ok(CountDistribution::from_probs(
        counts.iter().map(|&c| c as f64 / total).collect(),
    ))
}

/// Empirical estimate of the window-correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCorrelation {
    n1: usize,
    n2: usize,
    cells: Vec<f64>,
}

impl WindowCorrelation {
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Estimated `Prob(q1, q2) - Prob(q1) Prob(q2)`.
    pub fn get(&self, q1: usize, q2: usize) -> f64 {
        self.cells[q1 * (self.n2 + 1) + q2]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n2 = self.n2;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i / (n2 + 1), i % (n2 + 1), v))
    }
}

/// Estimates `Prob(Q1, Q2) - Prob(Q1) Prob(Q2)` from run frequencies,
/// splitting each run into a first window of `n1` probings and an
/// immediately following window of `n2`.
pub fn empirical_window_correlation(
    samples: &[RunSample],
    n1: usize,
    n2: usize,
) -> Result<WindowCorrelation, Error> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no runs provided".into()));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidInput(
            "window lengths must be at least 1".into(),
        ));
    }
    let mut joint = vec![0u64; (n1 + 1) * (n2 + 1)];
    let mut marginal1 = vec![0u64; n1 + 1];
    let mut marginal2 = vec![0u64; n2 + 1];
    for sample in samples {
        let bits = sample.sequence.bits();
        if bits.len() < n1 + n2 {
            return Err(Error::InvalidInput(format!(
                "run {} is too short: {} probings, windows need {}",
                sample.run_index,
                bits.len(),
                n1 + n2
            )));
        }
        let q1 = bits[..n1].iter().filter(|&&b| b).count();
        let q2 = bits[n1..n1 + n2].iter().filter(|&&b| b).count();
        joint[q1 * (n2 + 1) + q2] += 1;
        marginal1[q1] += 1;
        marginal2[q2] += 1;
    }
    let total = samples.len() as f64;
    let cells = (0..(n1 + 1) * (n2 + 1))
        .map(|i| {
            let (q1, q2) = (i / (n2 + 1), i % (n2 + 1));
            joint[i] as f64 / total
                - (marginal1[q1] as f64 / total) * (marginal2[q2] as f64 / total)
        })
        .collect();
    Ok(WindowCorrelation { n1, n2, cells })
}

/// Splits a count distribution's mass between the two component peaks,
/// assigning each bin to the nearer component mean (`n p_l` vs `n p_r`,
/// ties to the left dot).
///
/// For a well-separated two-peaked distribution the weights read back
/// the occupations `(rho_ll, rho_rr)`.
pub fn two_peak_weights(dist: &CountDistribution, spec: &MixtureSpec) -> (f64, f64) {
    let n = dist.n() as f64;
    let (mean_l, mean_r) = (n * spec.p_l, n * spec.p_r);
    let mut weight_l = 0.0;
    let mut weight_r = 0.0;
    for (q, &p) in dist.probs().iter().enumerate() {
        let q = q as f64;
        if (q - mean_l).abs() <= (q - mean_r).abs() {
            weight_l += p;
        } else {
            weight_r += p;
        }
    }
    (weight_l, weight_r)
}
