//! Dynamics of the measured two-state system's polarization vector.
//!
//! The state of the double dot is a 3-vector `P`; `|P| = 1` is a pure
//! state, `|P| = 0` fully mixed, and `P_z = Prob(L) - Prob(R)`. Under
//! observation it obeys
//!
//! ```text
//! dP/dt = V x P - D * P_tr
//! ```
//!
//! where `V = (V_x, V_y, V_z)` collects the tunneling energies and the
//! level asymmetry (including any detector-induced part), `D` is the
//! decoherence rate, and `P_tr = (P_x, P_y, 0)`. The damping acts only
//! transversely: observation distinguishes the dots along z and cannot
//! itself move the electron, so `P_z` is conserved whenever the
//! tunneling energies vanish.

use crate::error::{check_nonnegative, Error};
use crate::influence::InfluenceResult;

/// Slack allowed on `|P| <= 1` to absorb rounding in user-supplied and
/// integrated states.
const NORM_SLACK: f64 = 1e-9;

/// Ratio implementing the "much greater than" conditions in
/// [`classify_regime`].
pub const ASYMPTOTIC_RATIO: f64 = 10.0;

/// Polarization vector of the measured two-state system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    p: [f64; 3],
}

impl PolarizationState {
    pub fn new(px: f64, py: f64, pz: f64) -> Result<Self, Error> {
        for (name, v) in [("p_x", px), ("p_y", py), ("p_z", pz)] {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        let state = PolarizationState { p: [px, py, pz] };
        if state.norm() > 1.0 + NORM_SLACK {
            return Err(Error::param(
                "p",
                format!("|P| = {} exceeds 1 (unphysical density matrix)", state.norm()),
            ));
        }
        Ok(state)
    }

    pub(crate) fn from_components(p: [f64; 3]) -> Self {
        PolarizationState { p }
    }

    pub fn px(&self) -> f64 {
        self.p[0]
    }

    pub fn py(&self) -> f64 {
        self.p[1]
    }

    pub fn pz(&self) -> f64 {
        self.p[2]
    }

    pub fn components(&self) -> [f64; 3] {
        self.p
    }

    pub fn norm(&self) -> f64 {
        (self.p[0] * self.p[0] + self.p[1] * self.p[1] + self.p[2] * self.p[2]).sqrt()
    }

    /// Magnitude of the transverse part `(P_x, P_y, 0)`.
    pub fn transverse_norm(&self) -> f64 {
        self.p[0].hypot(self.p[1])
    }
}

/// Energies and damping rate entering the equation of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    v: [f64; 3],
    d: f64,
}

impl EvolutionParams {
    pub fn new(v: [f64; 3], d: f64) -> Result<Self, Error> {
        for (name, value) in [("v_x", v[0]), ("v_y", v[1]), ("v_z", v[2])] {
            if !value.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {value}")));
            }
        }
        check_nonnegative("d", d)?;
        Ok(EvolutionParams { v, d })
    }

    pub fn v(&self) -> [f64; 3] {
        self.v
    }

    /// Damping rate `D`.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Tunneling energy magnitude `|(V_x, V_y)|`.
    pub fn v_tr(&self) -> f64 {
        self.v[0].hypot(self.v[1])
    }

    fn v_norm(&self) -> f64 {
        (self.v[0] * self.v[0] + self.v[1] * self.v[1] + self.v[2] * self.v[2]).sqrt()
    }
}

/// An integrated trajectory: strictly increasing time points and the
/// matching states.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PolarizationState>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PolarizationState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &PolarizationState {
        self.states.last().expect("trajectory holds at least t = 0")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &PolarizationState)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// Right-hand side of the equation of motion: `V x P - D * P_tr`.
pub fn derivative(p: &PolarizationState, params: &EvolutionParams) -> [f64; 3] {
    let [vx, vy, vz] = params.v;
    let [px, py, pz] = p.p;
    [
        vy * pz - vz * py - params.d * px,
        vz * px - vx * pz - params.d * py,
        vx * py - vy * px,
    ]
}

/// Adds the detector influence to the intrinsic parameters: the induced
/// shift augments `V_z` and the detector damping adds to `D`.
pub fn effective_params(intrinsic: &EvolutionParams, infl: &InfluenceResult) -> EvolutionParams {
    let [vx, vy, vz] = intrinsic.v;
    EvolutionParams {
        v: [vx, vy, vz + infl.induced_vz()],
        d: intrinsic.d + infl.damping(),
    }
}

/// Largest admissible integration step for `params`:
/// `0.01 / max(|V|, D)`, unbounded when both vanish.
pub fn max_step(params: &EvolutionParams) -> f64 {
    let scale = params.v_norm().max(params.d);
    if scale > 0.0 {
        0.01 / scale
    } else {
        f64::INFINITY
    }
}

/// Integrates the equation of motion with a fixed-step classical
/// fourth-order Runge-Kutta scheme from `t = 0` to `t_end`.
///
/// The final step is shortened to land exactly on `t_end`. `step` must
/// be positive and no larger than [`max_step`].
pub fn evolve(
    p0: &PolarizationState,
    params: &EvolutionParams,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, Error> {
    check_nonnegative("t_end", t_end)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::param(
            "step",
            format!("must be positive and finite, got {step}"),
        ));
    }
    let cap = max_step(params);
    if step > cap {
        return Err(Error::param(
            "step",
            format!("step {step} exceeds stability cap {cap} = 0.01 / max(|V|, D)"),
        ));
    }

    let mut times = vec![0.0];
    let mut states = vec![*p0];
    let mut current = p0.p;
    let mut index: u64 = 0;
    loop {
        let t = index as f64 * step;
        if t >= t_end {
            break;
        }
        let h = step.min(t_end - t);
        current = rk4_step(current, params, h);
        index += 1;
        let t_next = if t + h >= t_end {
            t_end
        } else {
            index as f64 * step
        };
        times.push(t_next);
        states.push(PolarizationState::from_components(current));
    }
    Ok(Trajectory { times, states })
}

fn rk4_step(p: [f64; 3], params: &EvolutionParams, h: f64) -> [f64; 3] {
    let f = |state: [f64; 3]| derivative(&PolarizationState::from_components(state), params);
    let k1 = f(p);
    let k2 = f(advance(p, k1, 0.5 * h));
    let k3 = f(advance(p, k2, 0.5 * h));
    let k4 = f(advance(p, k3, h));
    [
        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        p[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

fn advance(p: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [p[0] + h * k[0], p[1] + h * k[1], p[2] + h * k[2]]
}

/// Relaxation timescale `D / V_tr^2` of the strongly damped (watched)
/// system; strong observation slows the dynamics from `1/V_tr` to this
/// much longer time.
pub fn zeno_timescale(v_tr: f64, d: f64) -> Result<f64, Error> {
    if !(v_tr.is_finite() && v_tr > 0.0) {
        return Err(Error::param(
            "v_tr",
            format!("must be positive (no tunneling, no relaxation), got {v_tr}"),
        ));
    }
    check_nonnegative("d", d)?;
    Ok(d / (v_tr * v_tr))
}

/// Damping strength relative to the tunneling energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingRegime {
    /// `D / V_tr < 1`: coherent oscillations persist.
    Weak,
    /// `D / V_tr >= 1`: observation-dominated, Zeno-slowed dynamics.
    Strong,
}

/// Outcome of [`classify_regime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeReport {
    /// `V_tr = 0`: the system has no internal dynamics to classify.
    Degenerate,
    Classified {
        damping: DampingRegime,
        d_over_v_tr: f64,
        flux_over_v_tr: f64,
        /// Frozen-dot validity: many probes per tunneling time,
        /// `flux / V_tr >= ASYMPTOTIC_RATIO`.
        frozen_dot_valid: bool,
        /// The weakened condition applicable under strong damping:
        /// `(flux / V_tr)^2 >= ASYMPTOTIC_RATIO`.
        weakened_condition_valid: bool,
    },
}

/// Classifies the dynamical regime for tunneling energy `v_tr`, damping
/// `d`, and probing rate `flux`.
///
/// "Much greater than" conditions are implemented as ratio >=
/// [`ASYMPTOTIC_RATIO`] so the report is deterministic.
pub fn classify_regime(v_tr: f64, d: f64, flux: f64) -> RegimeReport {
    assert!(
        v_tr >= 0.0 && d >= 0.0 && flux >= 0.0,
        "classify_regime requires nonnegative inputs"
    );
    if v_tr == 0.0 {
        return RegimeReport::Degenerate;
    }
    let d_over_v_tr = d / v_tr;
    let flux_over_v_tr = flux / v_tr;
    RegimeReport::Classified {
        damping: if d_over_v_tr < 1.0 {
            DampingRegime::Weak
        } else {
            DampingRegime::Strong
        },
        d_over_v_tr,
        flux_over_v_tr,
        frozen_dot_valid: flux_over_v_tr >= ASYMPTOTIC_RATIO,
        weakened_condition_valid: flux_over_v_tr * flux_over_v_tr >= ASYMPTOTIC_RATIO,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(px: f64, py: f64, pz: f64) -> PolarizationState {
        PolarizationState::new(px, py, pz).unwrap()
    }

    fn params(v: [f64; 3], d: f64) -> EvolutionParams {
        EvolutionParams::new(v, d).unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(PolarizationState::new(1.0, 1.0, 1.0).is_err());
        assert!(PolarizationState::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(PolarizationState::new(0.0, 0.0, 1.0).is_ok());
        assert!(EvolutionParams::new([0.0; 3], -0.1).is_err());
        assert!(EvolutionParams::new([f64::INFINITY, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn derivative_cases() {
        // Pointer state aligned with V: stationary.
        let d = derivative(&state(0.0, 0.0, 1.0), &params([0.0, 0.0, 2.0], 0.7));
        assert_eq!(d, [0.0, 0.0, 0.0]);

        // Pure transverse damping.
        let d = derivative(&state(1.0, 0.0, 0.0), &params([0.0; 3], 1.0));
        assert_eq!(d, [-1.0, 0.0, 0.0]);

        // Tunneling rotates P_z into -P_y.
        let v_tr = 1.3;
        let d = derivative(&state(0.0, 0.0, 1.0), &params([v_tr, 0.0, 0.0], 0.0));
        assert_eq!(d, [0.0, -v_tr, 0.0]);
    }

    #[test]
    fn effective_params_combines_influence() {
        let intrinsic = params([0.4, 0.0, -0.2], 0.1);
        assert_eq!(
            effective_params(&intrinsic, &InfluenceResult::zero()),
            intrinsic
        );

        let b_l = crate::smatrix::BarrierParams::new(0.5, 0.3, 0.0).unwrap();
        let b_r = crate::smatrix::BarrierParams::new(0.5, 0.0, 0.0).unwrap();
        let setup =
            crate::influence::DetectorSetup::new(b_l, b_r, 1.0, crate::smatrix::Direction::Forward)
                .unwrap();
        let infl = InfluenceResult::for_setup(&setup);
        let eff = effective_params(&intrinsic, &infl);
        assert_eq!(eff.v()[0], 0.4);
        assert_eq!(eff.v()[1], 0.0);
        assert_eq!(eff.v()[2], -0.2 + infl.induced_vz());
        assert_eq!(eff.d(), 0.1 + infl.damping());

        // Tuning: an intrinsic V_z opposite to the induced one restores
        // degeneracy.
        let tuned = params([0.4, 0.0, -infl.induced_vz()], 0.0);
        assert_eq!(effective_params(&tuned, &infl).v()[2], 0.0);
    }

    #[test]
    fn evolve_rejects_oversized_step() {
        let p = params([1.0, 0.0, 0.0], 50.0);
        assert!((max_step(&p) - 0.01 / 50.0).abs() < 1e-18);
        assert!(evolve(&state(0.0, 0.0, 1.0), &p, 1.0, 0.001).is_err());
        assert!(evolve(&state(0.0, 0.0, 1.0), &p, 1.0, 0.0).is_err());
        assert!(evolve(&state(0.0, 0.0, 1.0), &p, -1.0, 1e-4).is_err());
    }

    #[test]
    fn free_evolution_is_constant() {
        let p0 = state(0.3, -0.2, 0.5);
        let traj = evolve(&p0, &params([0.0; 3], 0.0), 5.0, 0.5).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(traj.states().len(), traj.times().len());
        for pair in traj.times().windows(2) {
            assert!(pair[0] < pair[1]);
        }
        for (_, s) in traj.iter() {
            assert_eq!(s.components(), p0.components());
        }
    }

    #[test]
    fn pure_damping_matches_exponential_decay() {
        let p0 = state(1.0, 0.0, 0.0);
        let traj = evolve(&p0, &params([0.0; 3], 1.0), 1.0, 0.01).unwrap();
        let f = traj.final_state();
        assert!((f.px() - (-1.0f64).exp()).abs() < 1e-6);
        assert_eq!(f.py(), 0.0);
        assert_eq!(f.pz(), 0.0);
        assert!((f.px() - 0.36788).abs() < 1e-5);
    }

    #[test]
    fn damped_oscillation_matches_analytic_solution() {
        // P_z obeys a damped oscillator with decay D/2 and frequency
        // sqrt(V^2 - D^2/4) when P starts on the z axis.
        let (v, d, t_end) = (1.0, 0.2, 10.0);
        let p = params([v, 0.0, 0.0], d);
        let step = 0.005;
        let traj = evolve(&state(0.0, 0.0, 1.0), &p, t_end, step).unwrap();
        let omega = (v * v - d * d / 4.0).sqrt();
        let analytic = (-d * t_end / 2.0).exp()
            * ((omega * t_end).cos() + d / (2.0 * omega) * (omega * t_end).sin());
        assert!((traj.final_state().pz() - analytic).abs() < 1e-6);

        // Halving the step barely moves the result (4th-order scheme).
        let half = evolve(&state(0.0, 0.0, 1.0), &p, t_end, step / 2.0).unwrap();
        assert!((traj.final_state().pz() - half.final_state().pz()).abs() < 1e-8);
    }

    #[test]
    fn pz_is_exactly_conserved_without_tunneling() {
        let p = params([0.0, 0.0, 1.7], 0.8);
        let traj = evolve(&state(0.6, -0.3, 0.5), &p, 3.0, 0.005).unwrap();
        for (_, s) in traj.iter() {
            assert_eq!(s.pz(), 0.5);
        }
    }

    #[test]
    fn norm_is_non_increasing() {
        let p = params([0.7, 0.2, -0.4], 0.5);
        let traj = evolve(&state(0.1, 0.3, 0.9), &p, 20.0, 0.01).unwrap();
        let mut previous = f64::INFINITY;
        for (_, s) in traj.iter() {
            assert!(s.norm() <= previous + 1e-12);
            previous = s.norm();
        }
    }

    #[test]
    fn zeno_timescale_values() {
        assert_eq!(zeno_timescale(1.0, 50.0).unwrap(), 50.0);
        assert_eq!(zeno_timescale(1.0, 1.0).unwrap(), 1.0);
        assert!(zeno_timescale(0.0, 1.0).is_err());
        assert!(zeno_timescale(-1.0, 1.0).is_err());
    }

    #[test]
    fn strong_damping_relaxes_on_zeno_timescale() {
        let (v_tr, d) = (1.0, 50.0);
        let tau = zeno_timescale(v_tr, d).unwrap();
        let p = params([v_tr, 0.0, 0.0], d);

        // P_z follows exp(-t / tau) within 5% relative error over three
        // relaxation times.
        let traj = evolve(&state(0.0, 0.0, 1.0), &p, 3.0 * tau, max_step(&p)).unwrap();
        for (t, s) in traj.iter() {
            let expected = (-t / tau).exp();
            let relative = (s.pz() - expected).abs() / expected;
            assert!(relative < 0.05, "t = {t}: relative deviation {relative}");
        }

        let at_tau = traj
            .iter()
            .find(|(t, _)| (*t - tau).abs() < 1e-9)
            .map(|(_, s)| s.pz())
            .unwrap();
        let expected = (-1.0f64).exp();
        assert!((at_tau - expected).abs() / expected < 0.05);
    }

    #[test]
    fn regime_classification() {
        match classify_regime(1.0, 0.1, 100.0) {
            RegimeReport::Classified {
                damping,
                frozen_dot_valid,
                ..
            } => {
                assert_eq!(damping, DampingRegime::Weak);
                assert!(frozen_dot_valid);
            }
            RegimeReport::Degenerate => panic!("unexpected degenerate report"),
        }

        match classify_regime(1.0, 50.0, 50.0) {
            RegimeReport::Classified {
                damping,
                weakened_condition_valid,
                ..
            } => {
                assert_eq!(damping, DampingRegime::Strong);
                assert!(weakened_condition_valid);
            }
            RegimeReport::Degenerate => panic!("unexpected degenerate report"),
        }

        match classify_regime(1.0, 0.1, 2.0) {
            RegimeReport::Classified {
                frozen_dot_valid, ..
            } => assert!(!frozen_dot_valid),
            RegimeReport::Degenerate => panic!("unexpected degenerate report"),
        }

        assert_eq!(classify_regime(0.0, 1.0, 1.0), RegimeReport::Degenerate);
    }
}
