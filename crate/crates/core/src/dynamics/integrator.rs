use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{nearest_rotation, Faccs};

/// Open-loop control signal `t ↦ u(t) ∈ ℝ^k`.
pub trait ControlInput: Send + Sync {
    fn channels(&self) -> usize;
    fn eval_into(&self, t: f64, out: &mut [f64]);
    /// Shortest oscillation period present in the signal, if any.
    fn fastest_period(&self) -> Option<f64>;

    fn eval(&self, t: f64) -> Vec<f64> {
        let mut u = vec![0.0; self.channels()];
        self.eval_into(t, &mut u);
        u
    }
}

/// Settings of the embedded 5(4) Runge–Kutta integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step; further reduced when a law is attached.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    /// Steps per fastest oscillation period when a law is attached.
    pub steps_per_period: f64,
    /// Number of uniform output samples over the horizon.
    pub output_points: usize,
    pub max_steps: u64,
    /// Project the rotation block back onto SO(3) after every accepted step.
    pub project_rotation: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: None,
            initial_step: None,
            steps_per_period: 20.0,
            output_points: 2001,
            max_steps: 50_000_000,
            project_rotation: false,
        }
    }
}

/// Step statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: u64,
    pub rejections: u64,
    pub rhs_evals: u64,
    pub min_step: f64,
    pub max_step_used: f64,
    pub step_cap: f64,
}

/// States sampled on a uniform output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn horizon(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("nonempty"))
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("nonempty")
    }

    /// Component `i` over the output grid.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

const MIN_STEP: f64 = 1e-12;

// Dormand–Prince coefficients.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Rhs<'a> {
    system: &'a Faccs,
    law: Option<&'a dyn ControlInput>,
    u: Vec<f64>,
    evals: u64,
}

impl Rhs<'_> {
    fn eval(&mut self, t: f64, x: &[f64]) -> Vec<f64> {
        self.evals += 1;
        match self.law {
            Some(l) => {
                l.eval_into(t, &mut self.u);
                self.system.rhs(t, x, &self.u)
            }
            None => self.system.rhs(t, x, &[]),
        }
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    let mut s = 0.0;
    for i in 0..err.len() {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        s += r * r;
    }
    (s / err.len() as f64).sqrt()
}

fn hermite(t0: f64, h: f64, y0: &[f64], f0: &[f64], y1: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]).collect()
}

/// Integrates `Υ̇ = Z + Y^V + Σ u_a(t) Y_a^V` on `[t0, t1]` with the
/// Dormand–Prince 5(4) pair, PI step control and cubic Hermite output.
pub fn integrate(
    system: &Faccs,
    law: Option<&dyn ControlInput>,
    init: &[f64],
    horizon: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let dim = system.phase_dim();
    if init.len() != dim {
        return Err(Error::Dimension { expected: dim, found: init.len() });
    }
    let (t0, t1) = horizon;
    if !(t1 > t0) {
        return Err(Error::Config(format!("empty horizon [{t0}, {t1}]")));
    }
    if cfg.output_points < 2 {
        return Err(Error::Config("need at least two output points".into()));
    }
    if let Some(l) = law {
        if l.channels() != system.num_controls() {
            return Err(Error::Dimension { expected: system.num_controls(), found: l.channels() });
        }
    }
    let span = t1 - t0;
    let mut cap = cfg.max_step.unwrap_or(span).min(span);
    if let Some(p) = law.and_then(|l| l.fastest_period()) {
        cap = cap.min(p / cfg.steps_per_period);
    }
    let k = law.map_or(0, |l| l.channels());
    let mut rhs = Rhs { system, law, u: vec![0.0; k], evals: 0 };

    let npts = cfg.output_points;
    let grid: Vec<f64> = (0..npts).map(|i| t0 + span * i as f64 / (npts - 1) as f64).collect();
    let mut out_states = Vec::with_capacity(npts);
    out_states.push(init.to_vec());
    let mut next_out = 1;

    let mut t = t0;
    let mut y = init.to_vec();
    let mut f = rhs.eval(t, &y);
    let mut h = cfg.initial_step.unwrap_or_else(|| {
        let sc: f64 = (y.iter().zip(&f).map(|(yi, fi)| {
            let s = cfg.abs_tol + cfg.rel_tol * yi.abs();
            (fi / s).powi(2)
        }))
        .sum::<f64>()
            / dim as f64;
        let d1 = sc.sqrt();
        if d1 > 1e-10 { 0.01 / d1 } else { 1e-3 * span }
    });
    h = h.min(cap).max(MIN_STEP * 10.0);

    let mut stats = IntegratorStats { min_step: f64::INFINITY, step_cap: cap, ..Default::default() };
    let mut err_old = 1e-4_f64;
    let beta = 0.04;
    let alpha = 0.2 - 0.75 * beta;
    let mut last_rejected = false;
    let mut ks: Vec<Vec<f64>> = vec![Vec::new(); 7];
    let mut stage = vec![0.0; dim];

    while next_out < npts {
        if stats.steps >= cfg.max_steps {
            return Err(Error::Integration { time: t, reason: format!("step budget {} exhausted", cfg.max_steps) });
        }
        let remaining = t1 - t;
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        ks[0] = f.clone();
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in ks.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += h * a * kj[i];
                    }
                }
                stage[i] = acc;
            }
            ks[s] = rhs.eval(t + C[s] * h, &stage);
        }
        // 7th stage was evaluated at the 5th-order solution (FSAL).
        let y_new = stage.clone();
        let err: Vec<f64> = (0..dim).map(|i| h * (0..7).map(|s| E[s] * ks[s][i]).sum::<f64>()).collect();
        let en = error_norm(&err, &y, &y_new, cfg);
        if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            if h <= MIN_STEP {
                return Err(Error::Integration { time: t, reason: "non-finite state".into() });
            }
            h *= 0.25;
            stats.rejections += 1;
            last_rejected = true;
            continue;
        }
        if en <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            let mut y_acc = y_new;
            let mut f_new = ks[6].clone();
            if cfg.project_rotation {
                if let Some(s0) = system.rotation_block() {
                    let r = nearest_rotation(&y_acc[s0..s0 + 9]);
                    y_acc[s0..s0 + 9].copy_from_slice(&r);
                    f_new = rhs.eval(t_new, &y_acc);
                }
            }
            while next_out < npts && grid[next_out] <= t_new + 1e-14 * span {
                let tg = grid[next_out].min(t_new);
                out_states.push(if next_out == npts - 1 && last {
                    y_acc.clone()
                } else {
                    hermite(t, t_new - t, &y, &f, &y_acc, &f_new, tg)
                });
                next_out += 1;
            }
            stats.steps += 1;
            stats.min_step = stats.min_step.min(h);
            stats.max_step_used = stats.max_step_used.max(h);
            t = t_new;
            y = y_acc;
            f = f_new;
            if y.iter().any(|v| v.is_nan()) {
                return Err(Error::Integration { time: t, reason: "NaN state".into() });
            }
            let en_c = en.max(1e-10);
            let mut fac = 0.9 * en_c.powf(-alpha) * err_old.powf(beta);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = en_c;
            last_rejected = false;
            h = (h * fac).min(cap);
        } else {
            stats.rejections += 1;
            let fac = (0.9 * en.powf(-alpha)).clamp(0.2, 1.0);
            h *= fac;
            last_rejected = true;
            if h < MIN_STEP {
                return Err(Error::Integration { time: t, reason: format!("step size underflow ({h:.3e})") });
            }
        }
    }
    stats.rhs_evals = rhs.evals;
    if stats.min_step == f64::INFINITY {
        stats.min_step = 0.0;
    }
    Ok(Trajectory { times: grid, states: out_states, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::flat_system;

    struct Const(Vec<f64>);
    impl ControlInput for Const {
        fn channels(&self) -> usize {
            self.0.len()
        }
        fn eval_into(&self, _t: f64, out: &mut [f64]) {
            out.copy_from_slice(&self.0);
        }
        fn fastest_period(&self) -> Option<f64> {
            None
        }
    }

    #[test]
    fn free_flat_motion_is_a_straight_line() {
        let s = flat_system(2, &[vec![1.0, 0.0]]).unwrap();
        let cfg = IntegratorConfig { output_points: 11, ..Default::default() };
        let tr = integrate(&s, None, &[1.0, -1.0, 0.5, 2.0], (0.0, 2.0), &cfg).unwrap();
        for (t, x) in tr.times.iter().zip(&tr.states) {
            assert!((x[0] - (1.0 + 0.5 * t)).abs() < 1e-13);
            assert!((x[1] - (-1.0 + 2.0 * t)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_forcing_gives_parabola() {
        let s = flat_system(1, &[vec![1.0]]).unwrap();
        let law = Const(vec![2.0]);
        let tr = integrate(&s, Some(&law), &[0.0, 0.0], (0.0, 1.0), &IntegratorConfig::default()).unwrap();
        for (t, x) in tr.times.iter().zip(&tr.states) {
            assert!((x[0] - t * t).abs() < 1e-10, "{t} {}", x[0]);
        }
        assert_eq!(tr.times.len(), 2001);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = flat_system(1, &[vec![1.0]]).unwrap();
        assert!(integrate(&s, None, &[0.0], (0.0, 1.0), &IntegratorConfig::default()).is_err());
    }
}
