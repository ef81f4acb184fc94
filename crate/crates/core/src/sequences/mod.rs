//! Periodic oscillation profiles and the Λ_T functional.
//!
//! `Λ_T(α, β) = (1/2T) ∫₀ᵀ (∫₀^τ α)(∫₀^τ β) dτ`. Both bundled sequences are
//! zero-mean and Λ_T-orthonormal.

mod quadrature;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use quadrature::{gauss_legendre, integrate, lambda_adaptive, lambda_on_panels, GL_ORDER, MIN_PANELS};

/// Default period.
pub const DEFAULT_PERIOD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicKind {
    Trig,
    Bump,
    Custom,
}

#[derive(Clone)]
enum Profile {
    Phi { i: usize },
    Psi { seq: Arc<PsiSequence>, j: usize },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A `T`-periodic scalar function of time.
#[derive(Clone)]
pub struct PeriodicFn {
    period: f64,
    profile: Profile,
}

impl fmt::Debug for PeriodicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.profile {
            Profile::Phi { i } => write!(f, "phi_{i}(T={})", self.period),
            Profile::Psi { j, .. } => write!(f, "psi_{j}(T={})", self.period),
            Profile::Custom(_) => write!(f, "custom(T={})", self.period),
        }
    }
}

impl PeriodicFn {
    /// Wraps an arbitrary function; periodicity is the caller's promise.
    pub fn custom<F>(period: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { period, profile: Profile::Custom(Arc::new(f)) }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn kind(&self) -> PeriodicKind {
        match self.profile {
            Profile::Phi { .. } => PeriodicKind::Trig,
            Profile::Psi { .. } => PeriodicKind::Bump,
            Profile::Custom(_) => PeriodicKind::Custom,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self.profile {
            Profile::Phi { i } => Some(i),
            Profile::Psi { j, .. } => Some(j),
            Profile::Custom(_) => None,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Phi { i } => phi_value(*i, self.period, t),
            Profile::Psi { seq, j } => seq.eval(*j, t),
            Profile::Custom(f) => f(t),
        }
    }

    /// `(1/T) ∫₀ᵀ f`.
    pub fn mean(&self) -> f64 {
        integrate(|t| self.eval(t), 0.0, self.period, MIN_PANELS) / self.period
    }
}

#[inline]
pub fn phi_value(i: usize, period: f64, t: f64) -> f64 {
    let w = 2.0 * PI * i as f64 / period;
    2.0 * w * (w * t).cos()
}

/// `φ_i(t) = (4πi/T) cos(2πit/T)`.
pub fn phi(i: usize, period: f64) -> Result<PeriodicFn> {
    if i == 0 || !(period > 0.0) {
        return Err(Error::Precondition(format!("phi needs i >= 1 and T > 0 (got i = {i}, T = {period})")));
    }
    Ok(PeriodicFn { period, profile: Profile::Phi { i } })
}

/// `Λ_T(α, β)` by composite Gauss–Legendre quadrature with panel doubling.
pub fn lambda_t(alpha: &PeriodicFn, beta: &PeriodicFn) -> Result<f64> {
    if (alpha.period - beta.period).abs() > 1e-14 * alpha.period.max(beta.period) {
        return Err(Error::Precondition(format!(
            "lambda_T needs equal periods, got {} and {}",
            alpha.period, beta.period
        )));
    }
    Ok(lambda_adaptive(|t| alpha.eval(t), |t| beta.eval(t), alpha.period))
}

/// Smooth bump on `(0, T/2)`: `exp(−1/(t (T/2 − t)))`, zero elsewhere.
pub fn bump(t: f64, period: f64) -> f64 {
    let h = 0.5 * period;
    if t <= 0.0 || t >= h {
        return 0.0;
    }
    (-1.0 / (t * (h - t))).exp()
}

/// Unnormalized base profile: the bump on `(0, T/2)` (already symmetric about
/// `T/4`), extended by `f(t) = −f(t − T/2)` and `T`-periodically.
pub fn psi_raw(t: f64, period: f64) -> f64 {
    let s = t.rem_euclid(period);
    let h = 0.5 * period;
    if s < h {
        bump(s, period)
    } else {
        -bump(s - h, period)
    }
}

/// The ψ sequence: `ψ_j(t) = 2^j ψ̃(2^j t)` where the base `ψ̃` is the
/// normalized raw profile advanced by a quarter period, so that its primitive
/// from 0 is odd about the origin. This makes the family exactly
/// Λ_T-orthonormal with zero-mean primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSequence {
    period: f64,
    kappa: f64,
}

impl PsiSequence {
    pub fn new(period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Precondition(format!("psi needs T > 0, got {period}")));
        }
        let shift = 0.25 * period;
        let raw = |t: f64| psi_raw(t + shift, period);
        let norm = lambda_adaptive(raw, raw, period);
        Ok(Self { period, kappa: 1.0 / norm.sqrt() })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Normalization constant `κ` with `κ² Λ_T(raw, raw) = 1`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Normalized base profile `ψ̃(t) = κ raw(t + T/4)`.
    #[inline]
    pub fn base(&self, t: f64) -> f64 {
        self.kappa * psi_raw(t + 0.25 * self.period, self.period)
    }

    #[inline]
    pub fn eval(&self, j: usize, t: f64) -> f64 {
        let s = (1u64 << j) as f64;
        s * self.base(s * t)
    }

    pub fn member(self: &Arc<Self>, j: usize) -> Result<PeriodicFn> {
        if j == 0 || j > 40 {
            return Err(Error::Precondition(format!("psi index must be in 1..=40, got {j}")));
        }
        Ok(PeriodicFn { period: self.period, profile: Profile::Psi { seq: self.clone(), j } })
    }
}

/// `ψ_j` with a freshly normalized sequence; prefer [`PsiSequence::member`]
/// when many members are needed.
pub fn psi(j: usize, period: f64) -> Result<PeriodicFn> {
    Arc::new(PsiSequence::new(period)?).member(j)
}

/// Injective map `ℕ×ℕ → ℕ` (Cantor pairing shifted to start at 1).
pub fn pairing(a: usize, b: usize) -> Result<usize> {
    if a == 0 || b == 0 {
        return Err(Error::Precondition(format!("pairing is defined on positive integers, got ({a}, {b})")));
    }
    let (x, y) = (a - 1, b - 1);
    Ok((x + y) * (x + y + 1) / 2 + y + 1)
}

/// `lo(a, b) = Σ_{j=1}^{a−1} (k − j) + (b − a)` for `1 ≤ a < b ≤ k`.
pub fn lo(a: usize, b: usize, k: usize) -> Result<usize> {
    if !(1 <= a && a < b && b <= k) {
        return Err(Error::Precondition(format!("lo needs 1 <= a < b <= k, got a = {a}, b = {b}, k = {k}")));
    }
    Ok((1..a).map(|j| k - j).sum::<usize>() + (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn phi_values() {
        let p = phi(1, 1.0).unwrap();
        assert!((p.eval(0.0) - 4.0 * PI).abs() < 1e-12);
        for i in 1..=5 {
            let f = phi(i, 2.0).unwrap();
            assert!(f.eval(2.0 / (4.0 * i as f64)).abs() < 1e-12);
            assert!(f.mean().abs() < 1e-10);
            assert!((f.eval(0.37) - f.eval(2.37)).abs() < 1e-10);
        }
        assert!(phi(0, 1.0).is_err());
    }

    #[test]
    fn lambda_of_first_phi_from_antiderivative() {
        // primitive 2 sin(2πτ): (1/2)∫₀¹ 4 sin² = 1
        let p = phi(1, 1.0).unwrap();
        assert!((lambda_t(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        let z = PeriodicFn::custom(1.0, |_| 0.0);
        assert_eq!(lambda_t(&z, &p).unwrap(), 0.0);
    }

    #[test]
    fn lambda_rejects_period_mismatch() {
        assert!(lambda_t(&phi(1, 1.0).unwrap(), &phi(1, 2.0).unwrap()).is_err());
    }

    #[test]
    fn psi_members_are_orthonormal() {
        let seq = Arc::new(PsiSequence::new(1.0).unwrap());
        for j in 1..=3 {
            for m in j..=3 {
                let l = lambda_t(&seq.member(j).unwrap(), &seq.member(m).unwrap()).unwrap();
                let want = if j == m { 1.0 } else { 0.0 };
                assert!((l - want).abs() < 1e-6, "({j},{m}) -> {l}");
            }
        }
    }

    #[test]
    fn raw_profile_is_flat_at_zero() {
        let h = 1e-3;
        let f = |t: f64| psi_raw(t, 1.0);
        assert_eq!(f(0.0), 0.0);
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let d3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h);
        for d in [d1, d2, d3] {
            assert!(d.abs() < 1e-6);
        }
        // symmetry about T/4 and odd half-period extension
        assert!((f(0.1) - f(0.4)).abs() < 1e-15);
        assert!((f(0.6) + f(0.1)).abs() < 1e-15);
    }

    #[test]
    fn scaling_law_is_structural() {
        let seq = Arc::new(PsiSequence::new(1.0).unwrap());
        for j in 1..=4 {
            let s = (1 << j) as f64;
            for t in [0.013, 0.29, 0.71] {
                assert_eq!(seq.eval(j, t), s * seq.base(s * t));
            }
        }
    }

    #[test]
    fn pairing_is_injective_and_asymmetric() {
        assert_eq!(pairing(1, 1).unwrap(), 1);
        let mut seen = HashSet::new();
        for a in 1..=20 {
            for b in 1..=20 {
                assert!(seen.insert(pairing(a, b).unwrap()));
                if a != b {
                    assert_ne!(pairing(a, b).unwrap(), pairing(b, a).unwrap());
                }
            }
        }
        assert!(pairing(0, 1).is_err());
    }

    #[test]
    fn lo_values_and_injectivity() {
        assert_eq!([lo(1, 2, 3).unwrap(), lo(1, 3, 3).unwrap(), lo(2, 3, 3).unwrap()], [1, 2, 3]);
        assert_eq!(lo(1, 2, 2).unwrap(), 1);
        let mut seen = HashSet::new();
        for a in 1..=6 {
            for b in (a + 1)..=6 {
                assert!(seen.insert(lo(a, b, 6).unwrap()));
            }
        }
        assert_eq!(seen.len(), 15);
        assert!(seen.iter().all(|v| (1..=15).contains(v)));
        assert!(lo(2, 2, 3).is_err());
    }

    #[test]
    fn averaging_kernel_is_first_order() {
        // ∫₀¹ φ₁(s/ε̂) s ds against its τ-mean (zero)
        let f = phi(1, 1.0).unwrap();
        let mut ratios = Vec::new();
        for eps in [1e-1, 1e-2, 1e-3] {
            let panels = (40.0 / eps) as usize;
            let v = integrate(|s| f.eval(s / eps) * s, 0.0, 1.0, panels);
            ratios.push(v.abs() / eps);
        }
        assert!(ratios.iter().all(|r| *r < 10.0), "{ratios:?}");
    }
}
