use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use goodwin_core::analysis::{analyze, AnalysisReport};
use goodwin_core::simulation::{
    classify_oscillation, default_initial_state, estimate_period, integrate, integrate_partial,
    measure_sync, OscillationClass, SimConfig, Trajectory,
};
use goodwin_core::{CouplingTopology, GoodwinParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{LoadedConfig, SimOverrides, MAX_SWEEP_POINTS};
use crate::output::{self, Format};
use crate::report::{Provenance, ReportBundle};
use crate::tables;
use crate::CliError;

/// Environment variable bounding the sweep worker pool.
pub const THREADS_VAR: &str = "GOODWIN_NET_THREADS";

/// `--out` wins over the config's `output`; the default is the working directory.
pub fn output_dir(flag: Option<&Path>, loaded: Option<&LoadedConfig>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| loaded.and_then(|l| l.config.output.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn summarize(a: &AnalysisReport) -> String {
    let mut s = String::new();
    let g = &a.params;
    let _ = writeln!(
        s,
        "parameters     b = ({}, {}, {}), p = {}, n = {}",
        g.b1, g.b2, g.b3, g.p, a.n
    );
    let _ = writeln!(s, "equilibrium    x0 = {:.6}", a.equilibrium.x0);
    let _ = writeln!(s, "slope gain     sigma = {:.6}", a.sigma);
    let _ = writeln!(
        s,
        "oscillation    R = {:.4} -> {}",
        a.r,
        if a.oscillation_predicted {
            "oscillation predicted"
        } else {
            "no oscillation predicted"
        }
    );
    let _ = writeln!(s, "max slope      gamma = {:.6}", a.gamma);
    match a.rho {
        Some(rho) => {
            let _ = writeln!(
                s,
                "connectivity   rho = {rho:.6} (connected: {})",
                a.connected
            );
        }
        None => {
            let _ = writeln!(s, "connectivity   rho = n/a (single oscillator)");
        }
    }
    let verdict = match a.sync_condition_met {
        Some(true) => "sufficient condition met",
        Some(false) => "sufficient condition not met (inconclusive)",
        None => "not applicable (disconnected)",
    };
    let _ = writeln!(s, "sync threshold {:.6} -> {verdict}", a.sync_threshold);
    let _ = writeln!(s, "frequency      w = {:.6}", a.w);
    let _ = writeln!(s, "period         T_collective = {:.4}", a.t_collective);
    if let Some(t) = a.t_dimensional {
        let _ = writeln!(s, "               T_dimensional = {t:.4}");
    }
    s
}

pub fn cmd_analyze(
    loaded: &LoadedConfig,
    out: &Path,
    format: Format,
) -> Result<ReportBundle, CliError> {
    let g = loaded.config.params()?;
    let c = loaded.config.topology()?;
    let report = analyze(&g, &c)?;
    print!("{}", summarize(&report));
    let bundle = ReportBundle::new(
        report,
        Provenance::new(loaded.hash.clone(), loaded.config.sim.seed),
    );
    bundle.validate().map_err(CliError::Numerical)?;
    output::prepare_dir(out)?;
    if format.json() {
        output::write_json(&bundle, &out.join("analysis.json"))?;
    }
    if format.csv() {
        output::write_rows(
            &[AnalysisRow::from(&bundle.analysis)],
            &[],
            &out.join("analysis.csv"),
        )?;
    }
    Ok(bundle)
}

/// Flat view of an [`AnalysisReport`] for CSV output.
#[derive(Debug, Serialize)]
struct AnalysisRow {
    n: usize,
    b1: f64,
    b2: f64,
    b3: f64,
    p: f64,
    x0: f64,
    sigma: f64,
    #[serde(rename = "R")]
    r: f64,
    gamma: f64,
    rho: Option<f64>,
    connected: bool,
    sync_threshold: f64,
    oscillation_predicted: bool,
    sync_condition_met: Option<bool>,
    w: f64,
    #[serde(rename = "T_collective")]
    t_collective: f64,
    #[serde(rename = "T_dimensional")]
    t_dimensional: Option<f64>,
}

impl From<&AnalysisReport> for AnalysisRow {
    fn from(a: &AnalysisReport) -> Self {
        Self {
            n: a.n,
            b1: a.params.b1,
            b2: a.params.b2,
            b3: a.params.b3,
            p: a.params.p,
            x0: a.equilibrium.x0,
            sigma: a.sigma,
            r: a.r,
            gamma: a.gamma,
            rho: a.rho,
            connected: a.connected,
            sync_threshold: a.sync_threshold,
            oscillation_predicted: a.oscillation_predicted,
            sync_condition_met: a.sync_condition_met,
            w: a.w,
            t_collective: a.t_collective,
            t_dimensional: a.t_dimensional,
        }
    }
}

/// Period, synchronization and oscillation measurements of a finished run.
/// Missing measurements are explained in `bundle.notes`.
fn measure(bundle: &mut ReportBundle, traj: &Trajectory, sim: &SimConfig) -> Result<(), CliError> {
    match estimate_period(traj, sim) {
        Ok(p) => bundle.period = Some(p),
        Err(e) => bundle.notes.push(format!("period: {e}")),
    }
    bundle.sync = Some(measure_sync(traj, sim)?);
    bundle.oscillation = Some(classify_oscillation(traj, sim)?);
    Ok(())
}

pub fn cmd_simulate(
    loaded: &LoadedConfig,
    overrides: SimOverrides,
    out: &Path,
    format: Format,
) -> Result<ReportBundle, CliError> {
    let g = loaded.config.params()?;
    let c = loaded.config.topology()?;
    let sim = overrides.apply(loaded.config.sim)?;
    let report = analyze(&g, &c)?;
    let init = default_initial_state(&g, &c, &sim)?;
    let run = integrate_partial(&g, &c, &init, &sim)?;

    output::prepare_dir(out)?;
    if format.csv() {
        output::write_trajectory_file(&run.trajectory, &out.join("trajectory.csv"))?;
    }
    let mut bundle = ReportBundle::new(report, Provenance::new(loaded.hash.clone(), sim.seed));
    bundle.diverged_at = run.diverged_at;
    if run.diverged_at.is_none() {
        measure(&mut bundle, &run.trajectory, &sim)?;
    }
    bundle.validate().map_err(CliError::Numerical)?;
    if format.json() {
        output::write_json(&bundle, &out.join("report.json"))?;
    }

    if let Some(t) = run.diverged_at {
        return Err(CliError::Numerical(format!(
            "integration diverged at t = {t}; partial trajectory written"
        )));
    }
    match &bundle.period {
        Some(p) => println!(
            "period {:.4} +- {:.4} over {} cycles (predicted {:.4})",
            p.period_mean, p.period_std, p.n_cycles, bundle.analysis.t_collective
        ),
        None => println!("no period measured"),
    }
    if let (Some(s), Some(o)) = (&bundle.sync, bundle.oscillation) {
        println!(
            "{}; sync error {:.3e} (synchronized: {})",
            if o == OscillationClass::Oscillatory {
                "oscillatory"
            } else {
                "quiescent"
            },
            s.sync_error,
            s.synchronized
        );
    }
    Ok(bundle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Table {
    Table2,
    Table3,
}

pub fn cmd_reproduce(
    which: Table,
    overrides: SimOverrides,
    out: &Path,
    format: Format,
) -> Result<(), CliError> {
    let sim = overrides.apply(SimConfig::default())?;
    output::prepare_dir(out)?;
    match which {
        Table::Table2 => {
            let rows = tables::oscillation_table(&sim)?;
            print!("{}", tables::format_oscillation_table(&rows));
            if format.csv() {
                output::write_rows(&rows, &tables::OSCILLATION_HEADER, &out.join("table2.csv"))?;
            }
            if format.json() {
                output::write_json(&rows, &out.join("table2.json"))?;
            }
        }
        Table::Table3 => {
            let rows = tables::period_table(&sim)?;
            print!("{}", tables::format_period_table(&rows));
            if format.csv() {
                output::write_rows(&rows, &tables::PERIOD_HEADER, &out.join("table3.csv"))?;
            }
            if format.json() {
                output::write_json(&rows, &out.join("table3.json"))?;
            }
        }
    }
    Ok(())
}

/// One grid point of a sweep. Failures leave the measurement columns empty
/// and set `error`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub p: f64,
    pub coupling_scale: f64,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub oscillation_predicted: Option<bool>,
    pub sync_condition_met: Option<bool>,
    pub t_predicted: Option<f64>,
    pub t_measured: Option<f64>,
    pub period_std: Option<f64>,
    pub oscillation: Option<OscillationClass>,
    pub synchronized: Option<bool>,
    pub sync_error: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: [&str; 16] = [
    "index",
    "b1",
    "b2",
    "b3",
    "p",
    "coupling_scale",
    "R",
    "oscillation_predicted",
    "sync_condition_met",
    "t_predicted",
    "t_measured",
    "period_std",
    "oscillation",
    "synchronized",
    "sync_error",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub b: [f64; 3],
    pub p: f64,
    pub coupling_scale: f64,
}

/// Grid points in row order: `b` outermost, then `p`, then coupling scale.
pub fn sweep_grid(loaded: &LoadedConfig) -> Result<Vec<GridPoint>, CliError> {
    let cfg = &loaded.config;
    let axes = cfg.sweep.clone().unwrap_or_default();
    // the base block may be omitted when both b and p are swept
    let base = match cfg.params() {
        Ok(g) => Some(g),
        Err(_)
            if axes.b.is_some()
                && (axes.p.is_some() || cfg.p.is_some())
                && cfg.dimensional.is_none() =>
        {
            None
        }
        Err(e) => return Err(e),
    };
    let bs: Vec<[f64; 3]> = match (&axes.b, base) {
        (Some(list), _) => list.iter().map(|&b| [b, b, b]).collect(),
        (None, Some(g)) => vec![g.rates()],
        (None, None) => unreachable!("base parameters exist when b is not swept"),
    };
    let ps: Vec<f64> = match (&axes.p, base) {
        (Some(list), _) => list.clone(),
        (None, Some(g)) => vec![g.p],
        (None, None) => vec![cfg.p.expect("checked above")],
    };
    let scales = axes.coupling_scale.unwrap_or_else(|| vec![1.0]);
    let total = bs.len() * ps.len() * scales.len();
    if total > MAX_SWEEP_POINTS {
        return Err(CliError::Config(format!(
            "sweep has {total} points, at most {MAX_SWEEP_POINTS} allowed"
        )));
    }
    let mut grid = Vec::with_capacity(total);
    for &b in &bs {
        for &p in &ps {
            for &coupling_scale in &scales {
                grid.push(GridPoint {
                    b,
                    p,
                    coupling_scale,
                });
            }
        }
    }
    Ok(grid)
}

pub fn sweep_point(
    index: usize,
    pt: GridPoint,
    base: &CouplingTopology,
    sim: &SimConfig,
) -> SweepRow {
    let mut row = SweepRow {
        index,
        b1: pt.b[0],
        b2: pt.b[1],
        b3: pt.b[2],
        p: pt.p,
        coupling_scale: pt.coupling_scale,
        r: None,
        oscillation_predicted: None,
        sync_condition_met: None,
        t_predicted: None,
        t_measured: None,
        period_std: None,
        oscillation: None,
        synchronized: None,
        sync_error: None,
        error: None,
    };
    let fill = |row: &mut SweepRow| -> Result<(), CliError> {
        let g = GoodwinParams::new(pt.b[0], pt.b[1], pt.b[2], pt.p)?;
        let c = base.scaled(pt.coupling_scale)?;
        let a = analyze(&g, &c)?;
        row.r = Some(a.r);
        row.oscillation_predicted = Some(a.oscillation_predicted);
        row.sync_condition_met = a.sync_condition_met;
        row.t_predicted = Some(a.t_collective);
        let init = default_initial_state(&g, &c, sim)?;
        let traj = integrate(&g, &c, &init, sim)?;
        let sync = measure_sync(&traj, sim)?;
        row.synchronized = Some(sync.synchronized);
        row.sync_error = Some(sync.sync_error);
        row.oscillation = Some(classify_oscillation(&traj, sim)?);
        let p = estimate_period(&traj, sim)?;
        row.t_measured = Some(p.period_mean);
        row.period_std = Some(p.period_std);
        Ok(())
    };
    if let Err(e) = fill(&mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn worker_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_VAR} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

pub fn run_sweep(
    loaded: &LoadedConfig,
    overrides: SimOverrides,
) -> Result<Vec<SweepRow>, CliError> {
    let grid = sweep_grid(loaded)?;
    let base = loaded.config.topology()?;
    let sim = overrides.apply(loaded.config.sim)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Numerical(format!("worker pool: {e}")))?;
    // indexed collect keeps grid order regardless of completion order
    Ok(pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, &pt)| sweep_point(i, pt, &base, &sim))
            .collect()
    }))
}

pub fn cmd_sweep(
    loaded: &LoadedConfig,
    overrides: SimOverrides,
    out: &Path,
    format: Format,
) -> Result<Vec<SweepRow>, CliError> {
    let rows = run_sweep(loaded, overrides)?;
    output::prepare_dir(out)?;
    if format.csv() {
        output::write_rows(&rows, &SWEEP_HEADER, &out.join("sweep.csv"))?;
    }
    if format.json() {
        output::write_json(&rows, &out.join("sweep.json"))?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} grid points, {failed} failed", rows.len());
    Ok(rows)
}
