//! Scenario execution: dispatches a resolved configuration to the core
//! library and serializes the results.

use std::path::{Path, PathBuf};

use dephasim_core::bloch;
use dephasim_core::counting::{self, CountDistribution};
use dephasim_core::influence::{self, DetectorSetup};
use dephasim_core::smatrix::Direction;

use crate::config::{ConfigError, ResolvedScenario, ScenarioConfig, ScenarioKind};
use crate::output::{fmt_f64, out_path, sha256_hex, Manifest, Table};

/// Execution failure with the exit-code class it maps to.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Runtime(String),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Runtime(e) => write!(f, "runtime error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn io_err(context: &str, e: std::io::Error) -> RunError {
    RunError::Io(format!("{context}: {e}"))
}

fn runtime_err(e: dephasim_core::Error) -> RunError {
    RunError::Runtime(e.to_string())
}

/// Runs a validated configuration and writes its outputs plus a run
/// manifest into `out_dir`. Returns the written file names.
pub fn run_scenario(
    config: &ScenarioConfig,
    config_text: &str,
    out_dir: &Path,
    seed: u64,
) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err("creating output directory", e))?;

    let mut files = match config.resolve()? {
        ResolvedScenario::Influence { setup } => run_influence(&setup, out_dir)?,
        ResolvedScenario::Evolve {
            p0,
            params,
            t_end,
            step,
        } => run_evolve(&p0, &params, t_end, step, out_dir)?,
        ResolvedScenario::Counts {
            spec,
            n,
            windows,
            poisson,
        } => run_counts(&spec, n, windows, poisson, out_dir)?,
        ResolvedScenario::Simulate {
            spec,
            n,
            runs,
            windows,
        } => run_simulate(&spec, n, runs, windows, seed, out_dir)?,
        ResolvedScenario::Fringe {
            setup,
            v_d,
            dwell_time,
        } => run_fringe(&setup, v_d, dwell_time, out_dir)?,
        ResolvedScenario::Sweep { .. } => run_sweep(config, seed, out_dir)?,
    };

    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION"),
        scenario: config.kind().to_string(),
        seed,
        config_sha256: sha256_hex(config_text.as_bytes()),
        outputs: files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
    };
    let manifest_path = out_path(out_dir, "manifest.json");
    manifest
        .write_to(&manifest_path)
        .map_err(|e| io_err("writing manifest.json", e))?;
    files.push(manifest_path);
    Ok(files)
}

fn influence_row(setup: &DetectorSetup) -> Vec<String> {
    let (delta_d, delta_vz) = influence::direction_asymmetry(setup);
    let tag = match setup.direction() {
        Direction::Forward => "forward",
        Direction::Backward => "backward",
    };
    vec![
        tag.to_string(),
        fmt_f64(influence::damping_closed_form(setup)),
        fmt_f64(influence::induced_energy_shift(setup)),
        fmt_f64(delta_d),
        fmt_f64(delta_vz),
    ]
}

fn run_influence(setup: &DetectorSetup, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut table = Table::new(&[
        "direction",
        "damping",
        "induced_vz",
        "delta_damping",
        "delta_induced_vz",
    ]);
    let forward = DetectorSetup::new(
        *setup.barrier_l(),
        *setup.barrier_r(),
        setup.flux(),
        Direction::Forward,
    )
    .map_err(runtime_err)?;
    table.push(&influence_row(&forward));
    table.push(&influence_row(&forward.reversed()));
    let path = out_path(out_dir, "influence.csv");
    table
        .write_to(&path)
        .map_err(|e| io_err("writing influence.csv", e))?;
    Ok(vec![path])
}

fn run_evolve(
    p0: &bloch::PolarizationState,
    params: &bloch::EvolutionParams,
    t_end: f64,
    step: f64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    let trajectory = bloch::evolve(p0, params, t_end, step).map_err(runtime_err)?;
    let mut table = Table::new(&["t", "p_x", "p_y", "p_z", "p_norm"]);
    for (t, state) in trajectory.iter() {
        table.push(&[
            fmt_f64(t),
            fmt_f64(state.px()),
            fmt_f64(state.py()),
            fmt_f64(state.pz()),
            fmt_f64(state.norm()),
        ]);
    }
    let path = out_path(out_dir, "trajectory.csv");
    table
        .write_to(&path)
        .map_err(|e| io_err("writing trajectory.csv", e))?;
    Ok(vec![path])
}

fn distribution_table(dist: &CountDistribution) -> Table {
    let mut table = Table::new(&["q", "prob"]);
    for (q, &p) in dist.probs().iter().enumerate() {
        table.push(&[q.to_string(), fmt_f64(p)]);
    }
    table
}

fn run_counts(
    spec: &counting::MixtureSpec,
    n: usize,
    windows: Option<(usize, usize)>,
    poisson: bool,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    let mut files = Vec::new();

    let exact = counting::count_distribution(spec, n);
    let path = out_path(out_dir, "counts.csv");
    distribution_table(&exact)
        .write_to(&path)
        .map_err(|e| io_err("writing counts.csv", e))?;
    files.push(path);

    if let Some((n1, n2)) = windows {
        let mut table = Table::new(&["q1", "q2", "correlation"]);
        for q1 in 0..=n1 {
            for q2 in 0..=n2 {
                table.push(&[
                    q1.to_string(),
                    q2.to_string(),
                    fmt_f64(counting::window_correlation(spec, n1, n2, q1, q2)),
                ]);
            }
        }
        let path = out_path(out_dir, "correlation.csv");
        table
            .write_to(&path)
            .map_err(|e| io_err("writing correlation.csv", e))?;
        files.push(path);
    }

    if poisson {
        let approx = counting::poisson_approx(spec, n);
        let path = out_path(out_dir, "poisson.csv");
        distribution_table(&approx.distribution)
            .write_to(&path)
            .map_err(|e| io_err("writing poisson.csv", e))?;
        println!(
            "poisson approximation: folded_mass = {}, valid = {}",
            fmt_f64(approx.folded_mass),
            approx.valid
        );
        files.push(path);
    }

    Ok(files)
}

fn run_simulate(
    spec: &counting::MixtureSpec,
    n: usize,
    runs: usize,
    windows: Option<(usize, usize)>,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    let samples = counting::simulate_runs(spec, n, runs, seed);
    let mut files = Vec::new();

    let mut table = Table::new(&["run_index", "initial_dot", "q", "n"]);
    for sample in &samples {
        table.push(&[
            sample.run_index().to_string(),
            sample.initial_dot().to_string(),
            sample.sequence().count_ones().to_string(),
            sample.sequence().len().to_string(),
        ]);
    }
    let path = out_path(out_dir, "runs.csv");
    table
        .write_to(&path)
        .map_err(|e| io_err("writing runs.csv", e))?;
    files.push(path);

    let mut bitstrings = String::with_capacity(samples.len() * (n + 1));
    for sample in &samples {
        bitstrings.push_str(&sample.sequence().to_string());
        bitstrings.push('\n');
    }
    let path = out_path(out_dir, "runs.txt");
    std::fs::write(&path, bitstrings).map_err(|e| io_err("writing runs.txt", e))?;
    files.push(path);

    let empirical = counting::empirical_distribution(&samples).map_err(runtime_err)?;
    let path = out_path(out_dir, "empirical.csv");
    distribution_table(&empirical)
        .write_to(&path)
        .map_err(|e| io_err("writing empirical.csv", e))?;
    files.push(path);

    let exact = counting::count_distribution(spec, n);
    let path = out_path(out_dir, "exact_counts.csv");
    distribution_table(&exact)
        .write_to(&path)
        .map_err(|e| io_err("writing exact_counts.csv", e))?;
    files.push(path);

    if let Some((n1, n2)) = windows {
        let estimate =
            counting::empirical_window_correlation(&samples, n1, n2).map_err(runtime_err)?;
        let mut table = Table::new(&["q1", "q2", "empirical", "exact"]);
        for (q1, q2, value) in estimate.iter() {
            table.push(&[
                q1.to_string(),
                q2.to_string(),
                fmt_f64(value),
                fmt_f64(counting::window_correlation(spec, n1, n2, q1, q2)),
            ]);
        }
        let path = out_path(out_dir, "empirical_correlation.csv");
        table
            .write_to(&path)
            .map_err(|e| io_err("writing empirical_correlation.csv", e))?;
        files.push(path);
    }

    Ok(files)
}

fn run_fringe(
    setup: &DetectorSetup,
    v_d: f64,
    dwell_time: f64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    let (phase_shift, contrast) =
        influence::fringe_prediction(setup, dwell_time).map_err(runtime_err)?;
    let mut table = Table::new(&["v_d", "phase_shift", "contrast_factor"]);
    table.push(&[fmt_f64(v_d), fmt_f64(phase_shift), fmt_f64(contrast)]);
    let path = out_path(out_dir, "fringe.csv");
    table
        .write_to(&path)
        .map_err(|e| io_err("writing fringe.csv", e))?;
    Ok(vec![path])
}

/// Summary columns a swept scenario contributes per axis point.
fn sweep_columns(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::Influence => &["damping", "induced_vz", "delta_damping", "delta_induced_vz"],
        ScenarioKind::Evolve => &["final_p_x", "final_p_y", "final_p_z", "final_p_norm"],
        ScenarioKind::Counts => &["mean_q", "variance_q"],
        ScenarioKind::Simulate => &["mean_q", "variance_q"],
        ScenarioKind::Fringe => &["phase_shift", "contrast_factor"],
        ScenarioKind::Sweep => unreachable!("nested sweeps are rejected at parse time"),
    }
}

fn sweep_row(scenario: &ResolvedScenario, seed: u64) -> Result<Vec<String>, RunError> {
    match scenario {
        ResolvedScenario::Influence { setup } => {
            let (delta_d, delta_vz) = influence::direction_asymmetry(setup);
            Ok(vec![
                fmt_f64(influence::damping_closed_form(setup)),
                fmt_f64(influence::induced_energy_shift(setup)),
                fmt_f64(delta_d),
                fmt_f64(delta_vz),
            ])
        }
        ResolvedScenario::Evolve {
            p0,
            params,
            t_end,
            step,
        } => {
            let trajectory = bloch::evolve(p0, params, *t_end, *step).map_err(runtime_err)?;
            let last = trajectory.final_state();
            Ok(vec![
                fmt_f64(last.px()),
                fmt_f64(last.py()),
                fmt_f64(last.pz()),
                fmt_f64(last.norm()),
            ])
        }
        ResolvedScenario::Counts { spec, n, .. } => {
            let dist = counting::count_distribution(spec, *n);
            Ok(vec![fmt_f64(dist.mean()), fmt_f64(dist.variance())])
        }
        ResolvedScenario::Simulate { spec, n, runs, .. } => {
            let samples = counting::simulate_runs(spec, *n, *runs, seed);
            let dist = counting::empirical_distribution(&samples).map_err(runtime_err)?;
            Ok(vec![fmt_f64(dist.mean()), fmt_f64(dist.variance())])
        }
        ResolvedScenario::Fringe {
            setup, dwell_time, ..
        } => {
            let (phase_shift, contrast) =
                influence::fringe_prediction(setup, *dwell_time).map_err(runtime_err)?;
            Ok(vec![fmt_f64(phase_shift), fmt_f64(contrast)])
        }
        ResolvedScenario::Sweep { .. } => {
            unreachable!("nested sweeps are rejected at parse time")
        }
    }
}

fn run_sweep(
    config: &ScenarioConfig,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    let (kind, parameter) = match config.resolve()? {
        ResolvedScenario::Sweep {
            kind, parameter, ..
        } => (kind, parameter),
        _ => unreachable!("run_sweep is only called for sweep configs"),
    };
    let mut columns = vec![parameter.as_str()];
    columns.extend(sweep_columns(kind));
    let mut table = Table::new(&columns);
    for (axis, scenario) in config.expand()? {
        let axis = axis.expect("sweep expansion provides the axis value");
        let mut row = vec![fmt_f64(axis)];
        row.extend(sweep_row(&scenario, seed)?);
        table.push(&row);
    }
    let path = out_path(out_dir, "sweep.csv");
    table
        .write_to(&path)
        .map_err(|e| io_err("writing sweep.csv", e))?;
    Ok(vec![path])
}
