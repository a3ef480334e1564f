//! Scenario configuration: a flat key-value text format with dotted
//! section prefixes, one scenario per file.
//!
//! ```text
//! scenario = influence
//! barrier_l.theta = 0.6
//! barrier_l.phi = 0.3
//! barrier_r.theta = 0.4
//! flux = 1.0
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Every key is
//! checked against the chosen scenario kind, and every diagnostic names
//! the offending key and line.

use std::collections::BTreeMap;
use std::fmt;

use dephasim_core::bloch::{self, EvolutionParams, PolarizationState};
use dephasim_core::counting::MixtureSpec;
use dephasim_core::influence::{landauer_flux, DetectorSetup, InfluenceResult};
use dephasim_core::smatrix::{transmission_probability, BarrierParams, Direction};

/// A configuration problem, annotated with the line it came from when
/// one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }

    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// The scenario families the runner understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Influence,
    Evolve,
    Counts,
    Simulate,
    Fringe,
    Sweep,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Influence => "influence",
            ScenarioKind::Evolve => "evolve",
            ScenarioKind::Counts => "counts",
            ScenarioKind::Simulate => "simulate",
            ScenarioKind::Fringe => "fringe",
            ScenarioKind::Sweep => "sweep",
        }
    }

    fn parse(value: &str) -> Option<Self> {
        match value {
            "influence" => Some(ScenarioKind::Influence),
            "evolve" => Some(ScenarioKind::Evolve),
            "counts" => Some(ScenarioKind::Counts),
            "simulate" => Some(ScenarioKind::Simulate),
            "fringe" => Some(ScenarioKind::Fringe),
            "sweep" => Some(ScenarioKind::Sweep),
            _ => None,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// A parsed and validated scenario configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    kind: ScenarioKind,
    entries: BTreeMap<String, Entry>,
}

/// A fully resolved, runnable scenario.
#[derive(Debug, Clone)]
pub enum ResolvedScenario {
    /// Detector influence report; rows are emitted for both directions.
    Influence { setup: DetectorSetup },
    Evolve {
        p0: PolarizationState,
        params: EvolutionParams,
        t_end: f64,
        step: f64,
    },
    Counts {
        spec: MixtureSpec,
        n: usize,
        windows: Option<(usize, usize)>,
        poisson: bool,
    },
    Simulate {
        spec: MixtureSpec,
        n: usize,
        runs: usize,
        windows: Option<(usize, usize)>,
    },
    Fringe {
        setup: DetectorSetup,
        v_d: f64,
        dwell_time: f64,
    },
    Sweep {
        kind: ScenarioKind,
        parameter: String,
        min: f64,
        max: f64,
        points: usize,
    },
}

const DETECTOR_KEYS: &[&str] = &[
    "barrier_l.theta",
    "barrier_l.phi",
    "barrier_l.eta",
    "barrier_r.theta",
    "barrier_r.phi",
    "barrier_r.eta",
    "flux",
    "v_d",
    "charge",
    "hbar",
    "direction",
];

const BARRIER_KEYS: &[&str] = &[
    "barrier_l.theta",
    "barrier_l.phi",
    "barrier_l.eta",
    "barrier_r.theta",
    "barrier_r.phi",
    "barrier_r.eta",
];

const EVOLVE_KEYS: &[&str] = &[
    "evolve.p0_x",
    "evolve.p0_y",
    "evolve.p0_z",
    "evolve.v_x",
    "evolve.v_y",
    "evolve.v_z",
    "evolve.d",
    "evolve.t_end",
    "evolve.step",
    "evolve.use_detector",
];

const COUNTS_KEYS: &[&str] = &[
    "counts.n",
    "counts.rho_ll",
    "counts.p_l",
    "counts.p_r",
    "counts.window_n1",
    "counts.window_n2",
    "counts.poisson",
];

/// Keys that are not plain floating-point values and therefore cannot
/// serve as a sweep axis.
const NON_F64_KEYS: &[&str] = &[
    "scenario",
    "seed",
    "out",
    "direction",
    "evolve.use_detector",
    "counts.n",
    "counts.window_n1",
    "counts.window_n2",
    "counts.poisson",
    "simulate.runs",
    "sweep.kind",
    "sweep.parameter",
    "sweep.points",
];

fn allowed_keys(kind: ScenarioKind) -> Vec<&'static str> {
    let mut keys = vec!["scenario", "seed", "out"];
    match kind {
        ScenarioKind::Influence => keys.extend(DETECTOR_KEYS),
        ScenarioKind::Evolve => {
            keys.extend(DETECTOR_KEYS);
            keys.extend(EVOLVE_KEYS);
        }
        ScenarioKind::Counts => {
            keys.extend(BARRIER_KEYS);
            keys.extend(COUNTS_KEYS);
        }
        ScenarioKind::Simulate => {
            keys.extend(BARRIER_KEYS);
            keys.extend(COUNTS_KEYS);
            keys.push("simulate.runs");
        }
        ScenarioKind::Fringe => {
            keys.extend(DETECTOR_KEYS);
            keys.push("fringe.dwell_time");
        }
        ScenarioKind::Sweep => {
            keys.extend([
                "sweep.kind",
                "sweep.parameter",
                "sweep.min",
                "sweep.max",
                "sweep.points",
            ]);
        }
    }
    keys
}

/// Parses and validates a scenario configuration.
///
/// On success every key has been checked against the scenario kind,
/// every value has parsed at its expected type, and for a sweep the
/// inner scenario has been validated at both axis endpoints.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{trimmed}`")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::at(line, "empty key".to_string()));
        }
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("key `{key}` has no value")));
        }
        if let Some(previous) = entries.get(&key) {
            return Err(ConfigError::at(
                line,
                format!("duplicate key `{key}` (first set on line {})", previous.line),
            ));
        }
        entries.insert(key, Entry { value, line });
    }

    let kind_entry = entries
        .get("scenario")
        .ok_or_else(|| ConfigError::new("missing required key `scenario`"))?;
    let kind = ScenarioKind::parse(&kind_entry.value).ok_or_else(|| {
        ConfigError::at(
            kind_entry.line,
            format!(
                "scenario: unknown kind `{}` (expected influence, evolve, counts, simulate, fringe, or sweep)",
                kind_entry.value
            ),
        )
    })?;

    let config = ScenarioConfig { kind, entries };
    config.check_keys()?;
    config.resolve()?;
    Ok(config)
}

impl ScenarioConfig {
    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    /// Output directory requested by the config, if any.
    pub fn out_dir(&self) -> Option<&str> {
        self.entries.get("out").map(|e| e.value.as_str())
    }

    /// Seed requested by the config, if any.
    pub fn seed(&self) -> Result<Option<u64>, ConfigError> {
        match self.entries.get("seed") {
            None => Ok(None),
            Some(entry) => entry
                .value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| {
                    ConfigError::at(
                        entry.line,
                        format!("seed: expected an unsigned 64-bit integer, got `{}`", entry.value),
                    )
                }),
        }
    }

    fn check_keys(&self) -> Result<(), ConfigError> {
        let mut allowed = allowed_keys(self.kind);
        if self.kind == ScenarioKind::Sweep {
            let inner = self.sweep_kind()?;
            allowed.extend(allowed_keys(inner));
        }
        for (key, entry) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError::at(
                    entry.line,
                    format!("unknown key `{key}` for scenario `{}`", self.kind),
                ));
            }
        }
        Ok(())
    }

    fn sweep_kind(&self) -> Result<ScenarioKind, ConfigError> {
        let entry = self.require("sweep.kind")?;
        match ScenarioKind::parse(&entry.value) {
            Some(ScenarioKind::Sweep) => Err(ConfigError::at(
                entry.line,
                "sweep.kind: nested sweeps are not supported".to_string(),
            )),
            Some(kind) => Ok(kind),
            None => Err(ConfigError::at(
                entry.line,
                format!("sweep.kind: unknown kind `{}`", entry.value),
            )),
        }
    }

    /// Resolves the configuration into a runnable scenario, validating
    /// all referenced parameters.
    pub fn resolve(&self) -> Result<ResolvedScenario, ConfigError> {
        match self.kind {
            ScenarioKind::Influence => Ok(ResolvedScenario::Influence {
                setup: self.detector_setup()?,
            }),
            ScenarioKind::Evolve => self.resolve_evolve(),
            ScenarioKind::Counts => Ok(ResolvedScenario::Counts {
                spec: self.mixture_spec()?,
                n: self.require_count("counts.n")?,
                windows: self.windows()?,
                poisson: self.opt_bool("counts.poisson")?.unwrap_or(false),
            }),
            ScenarioKind::Simulate => {
                let n = self.require_count("counts.n")?;
                let windows = self.windows()?;
                if let Some((n1, n2)) = windows {
                    if n1 + n2 > n {
                        return Err(self.error_for_key(
                            "counts.window_n1",
                            format!(
                                "counts.window_n1: windows of {n1} + {n2} probings do not \
                                 fit in runs of length {n}"
                            ),
                        ));
                    }
                }
                Ok(ResolvedScenario::Simulate {
                    spec: self.mixture_spec()?,
                    n,
                    runs: self.require_count("simulate.runs")?,
                    windows,
                })
            }
            ScenarioKind::Fringe => {
                let (setup, v_d) = self.fringe_setup()?;
                let dwell_time = self.require_f64("fringe.dwell_time")?;
                if !dwell_time.is_finite() || dwell_time < 0.0 {
                    return Err(self.error_for_key(
                        "fringe.dwell_time",
                        format!(
                            "fringe.dwell_time: must be finite and nonnegative, got {dwell_time}"
                        ),
                    ));
                }
                Ok(ResolvedScenario::Fringe {
                    setup,
                    v_d,
                    dwell_time,
                })
            }
            ScenarioKind::Sweep => self.resolve_sweep(),
        }
    }

    /// Expands a sweep into `(axis value, resolved inner scenario)`
    /// pairs; non-sweep configs expand to themselves with no axis.
    pub fn expand(&self) -> Result<Vec<(Option<f64>, ResolvedScenario)>, ConfigError> {
        match self.resolve()? {
            ResolvedScenario::Sweep {
                kind,
                parameter,
                min,
                max,
                points,
            } => {
                let mut expanded = Vec::with_capacity(points);
                for i in 0..points {
                    let value = min + (max - min) * i as f64 / (points - 1) as f64;
                    let inner = self.inner_config(kind, &parameter, value);
                    expanded.push((Some(value), inner.resolve()?));
                }
                Ok(expanded)
            }
            scenario => Ok(vec![(None, scenario)]),
        }
    }

    fn inner_config(&self, kind: ScenarioKind, parameter: &str, value: f64) -> ScenarioConfig {
        let mut entries = self.entries.clone();
        for key in ["sweep.kind", "sweep.parameter", "sweep.min", "sweep.max", "sweep.points"] {
            entries.remove(key);
        }
        let line = self.entries.get(parameter).map(|e| e.line).unwrap_or(0);
        entries.insert(
            parameter.to_string(),
            Entry {
                value: format!("{value}"),
                line,
            },
        );
        entries.insert(
            "scenario".to_string(),
            Entry {
                value: kind.as_str().to_string(),
                line: 0,
            },
        );
        ScenarioConfig { kind, entries }
    }

    fn resolve_sweep(&self) -> Result<ResolvedScenario, ConfigError> {
        let kind = self.sweep_kind()?;
        let parameter_entry = self.require("sweep.parameter")?;
        let parameter = parameter_entry.value.clone();
        let sweepable =
            allowed_keys(kind).contains(&parameter.as_str()) && !NON_F64_KEYS.contains(&parameter.as_str());
        if !sweepable {
            return Err(ConfigError::at(
                parameter_entry.line,
                format!("sweep.parameter: `{parameter}` is not a numeric parameter of scenario `{kind}`"),
            ));
        }
        let min = self.require_f64("sweep.min")?;
        let max = self.require_f64("sweep.max")?;
        if min > max {
            return Err(ConfigError::at(
                self.require("sweep.min")?.line,
                format!("sweep.min: {min} exceeds sweep.max = {max}"),
            ));
        }
        let points = self.require_count("sweep.points")?;
        if points < 2 {
            return Err(ConfigError::at(
                self.require("sweep.points")?.line,
                format!("sweep.points: need at least 2 points, got {points}"),
            ));
        }
        // Interval constraints hold on the whole axis if they hold at
        // both endpoints.
        for value in [min, max] {
            self.inner_config(kind, &parameter, value).resolve()?;
        }
        Ok(ResolvedScenario::Sweep {
            kind,
            parameter,
            min,
            max,
            points,
        })
    }

    fn resolve_evolve(&self) -> Result<ResolvedScenario, ConfigError> {
        let p0 = PolarizationState::new(
            self.require_f64("evolve.p0_x")?,
            self.require_f64("evolve.p0_y")?,
            self.require_f64("evolve.p0_z")?,
        )
        .map_err(|e| self.core_error("evolve.p0_x", e))?;
        let v = [
            self.opt_f64("evolve.v_x")?.unwrap_or(0.0),
            self.opt_f64("evolve.v_y")?.unwrap_or(0.0),
            self.opt_f64("evolve.v_z")?.unwrap_or(0.0),
        ];
        let d = self.opt_f64("evolve.d")?.unwrap_or(0.0);
        let intrinsic =
            EvolutionParams::new(v, d).map_err(|e| self.core_error("evolve.d", e))?;
        let params = if self.opt_bool("evolve.use_detector")?.unwrap_or(false) {
            let setup = self.detector_setup()?;
            bloch::effective_params(&intrinsic, &InfluenceResult::for_setup(&setup))
        } else {
            intrinsic
        };
        let t_end = self.require_f64("evolve.t_end")?;
        if !t_end.is_finite() || t_end < 0.0 {
            return Err(self.error_for_key(
                "evolve.t_end",
                format!("evolve.t_end: must be finite and nonnegative, got {t_end}"),
            ));
        }
        let step = self.require_f64("evolve.step")?;
        if !step.is_finite() || step <= 0.0 || step > bloch::max_step(&params) {
            return Err(self.error_for_key(
                "evolve.step",
                format!(
                    "evolve.step: {step} must be positive and no larger than the \
                     stability cap {} = 0.01 / max(|V|, D)",
                    bloch::max_step(&params)
                ),
            ));
        }
        Ok(ResolvedScenario::Evolve {
            p0,
            params,
            t_end,
            step,
        })
    }

    fn barrier(&self, prefix: &str) -> Result<BarrierParams, ConfigError> {
        let theta_key = format!("{prefix}.theta");
        let theta = self.require_f64(&theta_key)?;
        let phi = self.opt_f64(&format!("{prefix}.phi"))?.unwrap_or(0.0);
        let eta = self.opt_f64(&format!("{prefix}.eta"))?.unwrap_or(0.0);
        BarrierParams::new(theta, phi, eta).map_err(|e| {
            let key = match &e {
                dephasim_core::Error::InvalidParameter { name, .. } => format!("{prefix}.{name}"),
                _ => theta_key.clone(),
            };
            self.core_error_for_key(&key, e)
        })
    }

    fn flux(&self) -> Result<f64, ConfigError> {
        let flux = self.opt_f64("flux")?;
        let v_d = self.opt_f64("v_d")?;
        match (flux, v_d) {
            (Some(_), Some(_)) => Err(self.error_for_key(
                "flux",
                "give either `flux` or `v_d`, not both".to_string(),
            )),
            (Some(flux), None) => Ok(flux),
            (None, Some(v_d)) => {
                let e = self.opt_f64("charge")?.unwrap_or(1.0);
                let hbar = self.opt_f64("hbar")?.unwrap_or(1.0);
                landauer_flux(v_d, e, hbar).map_err(|err| self.core_error("v_d", err))
            }
            (None, None) => Err(ConfigError::new(
                "missing probing rate: set `flux` or `v_d`".to_string(),
            )),
        }
    }

    fn direction(&self) -> Result<Direction, ConfigError> {
        match self.entries.get("direction") {
            None => Ok(Direction::Forward),
            Some(entry) => match entry.value.as_str() {
                "forward" => Ok(Direction::Forward),
                "backward" => Ok(Direction::Backward),
                other => Err(ConfigError::at(
                    entry.line,
                    format!("direction: expected `forward` or `backward`, got `{other}`"),
                )),
            },
        }
    }

    fn detector_setup(&self) -> Result<DetectorSetup, ConfigError> {
        let barrier_l = self.barrier("barrier_l")?;
        let barrier_r = self.barrier("barrier_r")?;
        let flux = self.flux()?;
        let direction = self.direction()?;
        DetectorSetup::new(barrier_l, barrier_r, flux, direction)
            .map_err(|e| self.core_error("flux", e))
    }

    fn fringe_setup(&self) -> Result<(DetectorSetup, f64), ConfigError> {
        let v_d = self.require_f64("v_d").map_err(|mut e| {
            e.message = format!("{} (fringe predictions are reported against v_d)", e.message);
            e
        })?;
        let setup = self.detector_setup()?;
        Ok((setup, v_d))
    }

    fn mixture_spec(&self) -> Result<MixtureSpec, ConfigError> {
        let rho_ll = self.require_f64("counts.rho_ll")?;
        let p_l = self.opt_f64("counts.p_l")?;
        let p_r = self.opt_f64("counts.p_r")?;
        let (p_l, p_r) = match (p_l, p_r) {
            (Some(l), Some(r)) => (l, r),
            (None, None) => {
                if self.entries.contains_key("barrier_l.theta") {
                    let l = self.barrier("barrier_l")?;
                    let r = self.barrier("barrier_r")?;
                    (transmission_probability(&l), transmission_probability(&r))
                } else {
                    return Err(ConfigError::new(
                        "missing transmission probabilities: set `counts.p_l`/`counts.p_r` \
                         or `barrier_l.theta`/`barrier_r.theta`"
                            .to_string(),
                    ));
                }
            }
            _ => {
                return Err(ConfigError::new(
                    "`counts.p_l` and `counts.p_r` must be given together".to_string(),
                ))
            }
        };
        MixtureSpec::from_occupation(rho_ll, p_l, p_r)
            .map_err(|e| self.core_error("counts.rho_ll", e))
    }

    fn windows(&self) -> Result<Option<(usize, usize)>, ConfigError> {
        let n1 = self.opt_count("counts.window_n1")?;
        let n2 = self.opt_count("counts.window_n2")?;
        match (n1, n2) {
            (Some(n1), Some(n2)) => Ok(Some((n1, n2))),
            (None, None) => Ok(None),
            _ => Err(ConfigError::new(
                "`counts.window_n1` and `counts.window_n2` must be given together".to_string(),
            )),
        }
    }

    fn require(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.entries
            .get(key)
            .ok_or_else(|| ConfigError::new(format!("missing required key `{key}`")))
    }

    fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        let entry = self.require(key)?;
        entry.value.parse::<f64>().map_err(|_| {
            ConfigError::at(
                entry.line,
                format!("{key}: expected a number, got `{}`", entry.value),
            )
        })
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(_) => self.require_f64(key).map(Some),
        }
    }

    fn require_count(&self, key: &str) -> Result<usize, ConfigError> {
        let entry = self.require(key)?;
        match entry.value.parse::<usize>() {
            Ok(value) if value >= 1 => Ok(value),
            _ => Err(ConfigError::at(
                entry.line,
                format!("{key}: expected a positive integer, got `{}`", entry.value),
            )),
        }
    }

    fn opt_count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(_) => self.require_count(key).map(Some),
        }
    }

    fn opt_bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(entry) => match entry.value.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                other => Err(ConfigError::at(
                    entry.line,
                    format!("{key}: expected `true` or `false`, got `{other}`"),
                )),
            },
        }
    }

    fn error_for_key(&self, key: &str, message: String) -> ConfigError {
        match self.entries.get(key) {
            Some(entry) => ConfigError::at(entry.line, message),
            None => ConfigError::new(message),
        }
    }

    fn core_error(&self, key: &str, error: dephasim_core::Error) -> ConfigError {
        self.core_error_for_key(key, error)
    }

    fn core_error_for_key(&self, key: &str, error: dephasim_core::Error) -> ConfigError {
        let message = match &error {
            dephasim_core::Error::InvalidParameter { message, .. } => {
                format!("{key}: {message}")
            }
            dephasim_core::Error::InvalidInput(message) => format!("{key}: {message}"),
        };
        self.error_for_key(key, message)
    }
}
