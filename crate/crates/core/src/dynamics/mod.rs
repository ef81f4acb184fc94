//! Closed-loop integration, tracking metrics and ε-convergence studies.

mod export;
mod integrator;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::ReferenceCurve;

pub use export::{svg_chart, write_table_csv, write_trajectory_csv, Series};
pub use integrator::{integrate, ControlInput, IntegratorConfig, IntegratorStats, Trajectory};

/// Sup over the output grid of the Euclidean distance between the selected
/// components of the trajectory and of the reference.
pub fn tracking_error(traj: &Trajectory, gamma: &ReferenceCurve, metric: &[usize]) -> Result<f64> {
    let (a, b) = traj.horizon();
    let (ga, gb) = gamma.horizon();
    let tol = 1e-9 * (gb - ga).abs().max(1.0);
    if (a - ga).abs() > tol || (b - gb).abs() > tol {
        return Err(Error::Config(format!("horizon mismatch: trajectory [{a}, {b}], reference [{ga}, {gb}]")));
    }
    let dim = traj.dim();
    if let Some(&i) = metric.iter().find(|&&i| i >= dim) {
        return Err(Error::Dimension { expected: dim, found: i + 1 });
    }
    let mut worst = 0.0_f64;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let g = gamma.eval(*t);
        let d2: f64 = metric.iter().map(|&i| (x[i] - g[i]).powi(2)).sum();
        worst = worst.max(d2.sqrt());
    }
    Ok(worst)
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub error: f64,
    pub runtime_s: f64,
    /// `log(e_{i−1}/e_i) / log(ε_{i−1}/ε_i)`; absent on the first row.
    pub order: Option<f64>,
}

/// Attaches empirical orders to `(ε, error, runtime)` triples.
pub fn convergence_table(rows: &[(f64, f64, f64)]) -> Vec<ConvergenceRow> {
    rows.iter()
        .enumerate()
        .map(|(i, &(epsilon, error, runtime_s))| {
            let order = (i > 0).then(|| {
                let (e0, r0) = (rows[i - 1].0, rows[i - 1].1);
                (r0 / error).ln() / (e0 / epsilon).ln()
            });
            ConvergenceRow { epsilon, error, runtime_s, order }
        })
        .collect()
}

/// Reruns `run(ε)` (synthesis plus integration, returning the sup error) for
/// each ε of a strictly decreasing list.
pub fn convergence_study<F>(eps_list: &[f64], mut run: F) -> Result<Vec<ConvergenceRow>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("epsilon list must be strictly decreasing".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let start = Instant::now();
        let err = run(eps)?;
        rows.push((eps, err, start.elapsed().as_secs_f64()));
    }
    Ok(convergence_table(&rows))
}
