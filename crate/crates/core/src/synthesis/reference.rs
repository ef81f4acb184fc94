use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{Faccs, HovercraftParams, SubmarineParams, IDENTITY3};

type CurveFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Reference phase curve `t ↦ (γ(t), ν(t))` on a horizon, with its time
/// derivative.
#[derive(Clone)]
pub struct ReferenceCurve {
    name: String,
    horizon: (f64, f64),
    eval: CurveFn,
    d1: CurveFn,
}

impl fmt::Debug for ReferenceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ReferenceCurve({}, [{}, {}])", self.name, self.horizon.0, self.horizon.1)
    }
}

impl ReferenceCurve {
    pub fn new<E, D>(name: impl Into<String>, horizon: (f64, f64), eval: E, d1: D) -> Self
    where
        E: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        D: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self { name: name.into(), horizon, eval: Arc::new(eval), d1: Arc::new(d1) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn horizon(&self) -> (f64, f64) {
        self.horizon
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (self.eval)(t)
    }

    pub fn d1(&self, t: f64) -> Vec<f64> {
        (self.d1)(t)
    }

    /// Uniform grid of `n ≥ 2` points on the horizon.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.horizon;
        let n = n.max(2);
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    /// Largest relative mismatch between `d1` and a central difference of
    /// `eval` at the given times.
    pub fn derivative_mismatch(&self, times: &[f64]) -> f64 {
        let (a, b) = self.horizon;
        let h = 1e-5 * (b - a).abs().max(1e-3);
        let mut worst = 0.0_f64;
        for &t in times {
            let t = t.clamp(a + h, b - h);
            let (p, m) = (self.eval(t + h), self.eval(t - h));
            let d = self.d1(t);
            for i in 0..d.len() {
                let fd = (p[i] - m[i]) / (2.0 * h);
                worst = worst.max((fd - d[i]).abs() / d[i].abs().max(1.0));
            }
        }
        worst
    }

    /// Largest `|γ̇ − K(γ)ν|` over `times`: zero when the base part of the
    /// curve is compatible with its fiber part.
    pub fn kinematic_defect(&self, system: &Faccs, times: &[f64]) -> Result<f64> {
        let n = system.base_dim();
        let mut worst = 0.0_f64;
        for &t in times {
            let x = self.eval(t);
            if x.len() != system.phase_dim() {
                return Err(Error::Dimension { expected: system.phase_dim(), found: x.len() });
            }
            let k = system.kinematics(&x[..n], &x[n..]);
            let d = self.d1(t);
            for i in 0..n {
                worst = worst.max((k[i] - d[i]).abs());
            }
        }
        Ok(worst)
    }

    /// Fiber forcing the controls must supply: `ν̇ − f(γ, ν) − F(t)`.
    pub fn required_forcing(&self, system: &Faccs, t: f64) -> Result<Vec<f64>> {
        let x = self.eval(t);
        if x.len() != system.phase_dim() {
            return Err(Error::Dimension { expected: system.phase_dim(), found: x.len() });
        }
        let n = system.base_dim();
        let free = system.rhs(t, &x, &[]);
        let d = self.d1(t);
        Ok((n..x.len()).map(|i| d[i] - free[i]).collect())
    }
}

/// `r(t) = (−t, −t, −t)`, `A ≡ I`, `ω ≡ 0`, `v ≡ (−1, −1, −1)` on `[0, 1]`.
pub fn submarine_line(_params: &SubmarineParams) -> ReferenceCurve {
    ReferenceCurve::new(
        "submarine_line",
        (0.0, 1.0),
        |t| {
            let mut s = vec![-t, -t, -t];
            s.extend_from_slice(&IDENTITY3);
            s.extend_from_slice(&[0.0, 0.0, 0.0, -1.0, -1.0, -1.0]);
            s
        },
        |_| {
            let mut d = vec![-1.0; 3];
            d.extend(std::iter::repeat_n(0.0, 15));
            d
        },
    )
}

/// Submarine at rest at the origin, an equilibrium of the free dynamics.
pub fn submarine_rest(horizon: (f64, f64)) -> ReferenceCurve {
    ReferenceCurve::new(
        "submarine_rest",
        horizon,
        |_| {
            let mut s = vec![0.0; 3];
            s.extend_from_slice(&IDENTITY3);
            s.extend(std::iter::repeat_n(0.0, 6));
            s
        },
        |_| vec![0.0; 18],
    )
}

/// Sideways acceleration `θ ≡ 0`, `v₁(t) = (c/e) t`, `x₁(t) = (c/2e) t²`.
pub fn hovercraft_sideways(params: &HovercraftParams, horizon: (f64, f64)) -> ReferenceCurve {
    let k = params.c / params.e;
    ReferenceCurve::new(
        "hovercraft_sideways",
        horizon,
        move |t| vec![0.0, 0.5 * k * t * t, 0.0, 0.0, k * t, 0.0],
        move |t| vec![0.0, k * t, 0.0, 0.0, k, 0.0],
    )
}

/// Hovercraft at rest.
pub fn hovercraft_rest(horizon: (f64, f64)) -> ReferenceCurve {
    ReferenceCurve::new("hovercraft_rest", horizon, |_| vec![0.0; 6], |_| vec![0.0; 6])
}

/// Phase curve given by polynomial coefficients per component,
/// `x_i(t) = Σ_k c_ik t^k`.
pub fn polynomial(name: impl Into<String>, horizon: (f64, f64), coeffs: Vec<Vec<f64>>) -> ReferenceCurve {
    let c1 = Arc::new(coeffs);
    let c2 = c1.clone();
    ReferenceCurve::new(
        name,
        horizon,
        move |t| c1.iter().map(|c| c.iter().rev().fold(0.0, |acc, a| acc * t + a)).collect(),
        move |t| {
            c2.iter()
                .map(|c| {
                    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, a)| acc * t + k as f64 * a)
                })
                .collect()
        },
    )
}
