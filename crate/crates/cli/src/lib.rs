//! Experiment runner: trackability checks, law synthesis, closed-loop
//! simulation and ε sweeps driven by TOML configs.

mod config;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use oscitrack::cones::{certify_with_families, sample_states, Certificate, Status};
use oscitrack::dynamics::{
    convergence_table, integrate, svg_chart, tracking_error, write_table_csv, write_trajectory_csv, ControlInput,
    ConvergenceRow, IntegratorStats, Series,
};
use oscitrack::models::Faccs;
use oscitrack::synthesis::{
    eta_schedule, parameterize_h, parameterize_z, recursion_h, recursion_z, ControlLaw, Parameterization, ReferenceCurve,
    Regime,
};

pub use config::*;

/// Exit code of `check` for a given overall status.
pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Satisfied => 0,
        Status::Violated => 2,
        Status::Undecided => 3,
    }
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self { out: out.into(), ..Default::default() }
    }

    fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn certificate(cfg: &ExperimentConfig, system: &Faccs, seed: u64) -> Result<Certificate> {
    let c = &cfg.check;
    let states = sample_states(system, c.samples, c.half_width, seed);
    Ok(certify_with_families(system, c.max_level, &states)?)
}

/// Result of `check`.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub status: Status,
    pub headline: String,
    pub exit_code: i32,
}

/// Certifies trackability and writes `report.txt`, `report.kv`, `report.json`.
pub fn cmd_check(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CheckOutcome> {
    let system = cfg.build_system()?;
    let cert = certificate(cfg, &system, opts.seed(cfg))?;
    let report = &cert.report;
    fs::create_dir_all(&opts.out)?;
    fs::write(opts.out.join("report.txt"), report.to_text())?;
    fs::write(opts.out.join("report.kv"), report.to_kv())?;
    write_json(&opts.out.join("report.json"), report)?;
    let status = report.overall();
    Ok(CheckOutcome { status, headline: report.headline(), exit_code: exit_code(status) })
}

/// A synthesized law with the data it was built from.
pub struct Synthesis {
    pub system: Faccs,
    pub gamma: ReferenceCurve,
    pub param: Parameterization,
    pub law: ControlLaw,
    pub regime: Option<Regime>,
}

fn default_regime(mode: SynthMode, level: usize) -> Regime {
    match (mode, level) {
        (SynthMode::H, _) => Regime::H3,
        (_, 2) => Regime::Const2,
        _ => Regime::Z4,
    }
}

fn candidate_levels(explicit: Option<usize>, max_level: usize) -> Vec<usize> {
    match explicit {
        Some(l) => vec![l],
        None => (0..=max_level).collect(),
    }
}

/// Parameterizes the reference and builds the law at scale `epsilon`.
pub fn synthesize(cfg: &ExperimentConfig, seed: u64, epsilon: f64) -> Result<Synthesis> {
    let sc = cfg.synthesis.as_ref().context("config has no [synthesis] section")?;
    let system = cfg.build_system()?;
    let gamma = cfg.build_reference()?;
    let cert = certificate(cfg, &system, seed)?;
    let report = &cert.report;
    let mode = match sc.mode {
        SynthMode::Auto => {
            if report.corollary_z.status == Status::Satisfied || report.theorem_12_26.status == Status::Satisfied {
                SynthMode::Z
            } else if report.corollary_h.status == Status::Satisfied {
                SynthMode::H
            } else {
                bail!("no trackability certificate holds up to level {}; set synthesis.mode explicitly", cfg.check.max_level)
            }
        }
        m => m,
    };
    if let Some(l) = sc.level {
        if l > cfg.check.max_level {
            bail!("synthesis.level {l} exceeds check.max_level {}", cfg.check.max_level);
        }
    }
    let grid = gamma.grid(sc.grid);
    let mut last_err = None;
    let mut param = None;
    for l in candidate_levels(sc.level, cfg.check.max_level) {
        let fit = match mode {
            SynthMode::H => parameterize_h(&system, &gamma, &cert.h, l, &grid),
            _ => parameterize_z(&system, &gamma, &cert.z, l, &grid),
        };
        match fit {
            Ok(p) => {
                param = Some(p);
                break;
            }
            Err(e) => {
                log::info!("level {l}: {e}");
                last_err = Some(e);
            }
        }
    }
    let param = match param {
        Some(p) => p,
        None => return Err(anyhow!(last_err.expect("at least one level tried")).context("parameterization failed")),
    };
    let l = param.level;
    let regime = (l > 0).then(|| sc.regime.unwrap_or_else(|| default_regime(mode, l)));
    let schedule = regime.map(|r| eta_schedule(epsilon, l, r)).transpose()?;
    let law = match mode {
        SynthMode::H => recursion_h(&system, &cert.h, &param, schedule.as_ref(), gamma.horizon(), sc.period)?,
        _ => recursion_z(&system, &cert.z, &param, &gamma, schedule.as_ref(), sc.period, sc.osc_mode)?,
    };
    Ok(Synthesis { system, gamma, param, law, regime })
}

/// Indices of the phase components named in `output.metric`; defaults to
/// the configuration components.
pub fn metric_indices(cfg: &ExperimentConfig, system: &Faccs) -> Result<Vec<usize>> {
    let names = system.phase_chart().names();
    if cfg.output.metric.is_empty() {
        return Ok((0..system.base_dim()).collect());
    }
    cfg.output
        .metric
        .iter()
        .map(|m| names.iter().position(|n| n == m).ok_or_else(|| anyhow!("unknown metric component `{m}`")))
        .collect()
}

fn initial_state(cfg: &ExperimentConfig, system: &Faccs, gamma: &ReferenceCurve) -> Result<Vec<f64>> {
    let init = match cfg.reference.as_ref().and_then(|r| r.initial.clone()) {
        Some(x) => x,
        None => gamma.eval(gamma.horizon().0),
    };
    if init.len() != system.phase_dim() {
        bail!("initial state has {} components, expected {}", init.len(), system.phase_dim());
    }
    Ok(init)
}

/// Closed-loop run result.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub system: String,
    pub mode: String,
    pub level: usize,
    pub epsilon: f64,
    pub regime: Option<Regime>,
    pub schedule: Option<Vec<f64>>,
    pub labels: Vec<String>,
    pub lambda: Vec<Value>,
    pub metric: Vec<String>,
    pub sup_error: f64,
    pub amplitudes: Vec<f64>,
    pub stats: IntegratorStats,
    pub runtime_s: f64,
}

struct Run {
    synth: Synthesis,
    traj: oscitrack::Trajectory,
    summary: RunSummary,
}

fn run_once(cfg: &ExperimentConfig, seed: u64, epsilon: f64) -> Result<Run> {
    let start = Instant::now();
    let synth = synthesize(cfg, seed, epsilon)?;
    let system = &synth.system;
    let metric = metric_indices(cfg, system)?;
    let init = initial_state(cfg, system, &synth.gamma)?;
    let traj = integrate(system, Some(&synth.law as &dyn ControlInput), &init, synth.gamma.horizon(), &cfg.integrator)
        .context("integration failed")?;
    let sup_error = tracking_error(&traj, &synth.gamma, &metric)?;
    let names = system.phase_chart().names();
    let summary = RunSummary {
        name: cfg.name.clone(),
        system: system.name().to_string(),
        mode: format!("{:?}", synth.param.mode),
        level: synth.param.level,
        epsilon,
        regime: synth.regime,
        schedule: synth.law.schedule.as_ref().map(|s| s.eps.clone()),
        labels: synth.param.labels.clone(),
        lambda: synth.param.coefficients.iter().map(|c| c.to_json()).collect(),
        metric: metric.iter().map(|&i| names[i].clone()).collect(),
        sup_error,
        amplitudes: synth.law.amplitudes(cfg.output.law_points),
        stats: traj.stats,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    Ok(Run { synth, traj, summary })
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Full pipeline for `synthesis.epsilon`; writes `trajectory.csv`,
/// `reference.csv`, `law.csv`, `law.json`, `summary.json` and SVG charts.
pub fn cmd_simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    let sc = cfg.synthesis.as_ref().context("config has no [synthesis] section")?;
    let run = run_once(cfg, opts.seed(cfg), sc.epsilon)?;
    let out = &opts.out;
    fs::create_dir_all(out)?;
    let system = &run.synth.system;
    let names = system.phase_chart().names().to_vec();
    let law = &run.synth.law;
    write_trajectory_csv(create(&out.join("trajectory.csv"))?, &run.traj, &names, Some(law))?;
    let gamma = &run.synth.gamma;
    let rows: Vec<Vec<f64>> = run
        .traj
        .times
        .iter()
        .map(|&t| std::iter::once(t).chain(gamma.eval(t)).collect())
        .collect();
    let mut header = vec!["t"];
    header.extend(names.iter().map(String::as_str));
    write_table_csv(create(&out.join("reference.csv"))?, &header, &rows)?;
    law.write_csv(create(&out.join("law.csv"))?, cfg.output.law_points)?;
    write_json(&out.join("law.json"), &law.to_json())?;
    write_json(&out.join("summary.json"), &run.summary)?;
    if cfg.output.svg {
        write_charts(out, &run, &names, cfg)?;
    }
    Ok(run.summary)
}

fn write_charts(out: &Path, run: &Run, names: &[String], cfg: &ExperimentConfig) -> Result<()> {
    let metric = metric_indices(cfg, &run.synth.system)?;
    let ts = &run.traj.times;
    let reference: Vec<Vec<f64>> = ts.iter().map(|&t| run.synth.gamma.eval(t)).collect();
    let series: Vec<Series> = metric
        .iter()
        .enumerate()
        .flat_map(|(k, &i)| {
            let color = COLORS[k % COLORS.len()];
            [
                Series { label: names[i].clone(), xs: ts.clone(), ys: run.traj.component(i), color },
                Series {
                    label: format!("{} ref", names[i]),
                    xs: ts.clone(),
                    ys: reference.iter().map(|x| x[i]).collect(),
                    color: "#999999",
                },
            ]
        })
        .collect();
    fs::write(out.join("tracking.svg"), svg_chart(&format!("{}: state vs reference", cfg.name), &series))?;
    let law = &run.synth.law;
    let samples = law.sample(cfg.output.law_points);
    let controls: Vec<Series> = (0..law.channels())
        .map(|a| Series {
            label: law.labels[a].clone(),
            xs: samples.iter().map(|r| r[0]).collect(),
            ys: samples.iter().map(|r| r[a + 1]).collect(),
            color: COLORS[a % COLORS.len()],
        })
        .collect();
    fs::write(out.join("controls.svg"), svg_chart(&format!("{}: controls", cfg.name), &controls))?;
    Ok(())
}

/// Reruns the pipeline for every ε of `[sweep].eps_list` on a pool of
/// `jobs` threads; writes `convergence.csv`, `convergence.svg` and
/// `sweep.json`.
pub fn cmd_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ConvergenceRow>> {
    let sweep = cfg.sweep.as_ref().context("config has no [sweep] section")?;
    let eps = &sweep.eps_list;
    if eps.is_empty() || eps.windows(2).any(|w| !(w[1] < w[0])) {
        bail!("sweep.eps_list must be nonempty and strictly decreasing");
    }
    let seed = opts.seed(cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.unwrap_or(0)).build()?;
    let runs: Vec<Result<RunSummary>> = pool.install(|| {
        use rayon::prelude::*;
        eps.par_iter().map(|&e| run_once(cfg, seed, e).map(|r| r.summary)).collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let table = convergence_table(&runs.iter().map(|r| (r.epsilon, r.sup_error, r.runtime_s)).collect::<Vec<_>>());
    fs::create_dir_all(&opts.out)?;
    let rows: Vec<Vec<f64>> = table.iter().map(|r| vec![r.epsilon, r.error, r.order.unwrap_or(f64::NAN)]).collect();
    write_table_csv(create(&opts.out.join("convergence.csv"))?, &["epsilon", "sup_error", "order"], &rows)?;
    let chart = Series {
        label: "log10 sup error".into(),
        xs: table.iter().map(|r| r.epsilon.log10()).collect(),
        ys: table.iter().map(|r| r.error.log10()).collect(),
        color: COLORS[0],
    };
    fs::write(opts.out.join("convergence.svg"), svg_chart(&format!("{}: error vs epsilon (log10)", cfg.name), &[chart]))?;
    write_json(&opts.out.join("sweep.json"), &json!({ "table": table, "runs": runs }))?;
    Ok(table)
}
