use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use super::spline::CubicSpline;
use crate::sequences::{PeriodicFn, PeriodicKind};

/// Scalar coefficient `t ↦ c(t)` built from constants, splines and fast
/// oscillations.
#[derive(Clone)]
pub enum Coef {
    Const(f64),
    Spline(Arc<CubicSpline>),
    /// `(1/ε) f(t/ε)`.
    Osc { f: PeriodicFn, eps: f64 },
    PosPart(Box<Coef>),
    Sqrt(Box<Coef>),
    Product(Vec<Coef>),
    Sum(Vec<Coef>),
}

impl fmt::Debug for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl Default for Coef {
    fn default() -> Self {
        Coef::Const(0.0)
    }
}

/// Shortest period of a profile: `T/i` for `φ_i`, `T/2^j` for `ψ_j`.
pub fn fundamental_period(f: &PeriodicFn) -> f64 {
    match (f.kind(), f.index()) {
        (PeriodicKind::Trig, Some(i)) => f.period() / i as f64,
        (PeriodicKind::Bump, Some(j)) => f.period() / (1u64 << j) as f64,
        _ => f.period(),
    }
}

impl Coef {
    pub fn zero() -> Self {
        Coef::Const(0.0)
    }

    pub fn osc(f: PeriodicFn, eps: f64) -> Self {
        Coef::Osc { f, eps }
    }

    pub fn spline(s: CubicSpline) -> Self {
        Coef::Spline(Arc::new(s))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Coef::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coef::Const(c) if *c == 0.0)
    }

    pub fn add(self, other: Coef) -> Coef {
        Coef::sum(vec![self, other])
    }

    pub fn mul(self, other: Coef) -> Coef {
        Coef::product(vec![self, other])
    }

    pub fn scale(self, c: f64) -> Coef {
        Coef::product(vec![Coef::Const(c), self])
    }

    /// Sum with nested sums flattened, constants folded and zeros dropped.
    pub fn sum(terms: Vec<Coef>) -> Coef {
        let mut c = 0.0;
        let mut rest = Vec::new();
        for t in terms {
            match t {
                Coef::Const(v) => c += v,
                Coef::Sum(inner) => {
                    for u in inner {
                        match u {
                            Coef::Const(v) => c += v,
                            other => rest.push(other),
                        }
                    }
                }
                other => rest.push(other),
            }
        }
        if c != 0.0 {
            rest.insert(0, Coef::Const(c));
        }
        match rest.len() {
            0 => Coef::Const(0.0),
            1 => rest.pop().expect("one term"),
            _ => Coef::Sum(rest),
        }
    }

    /// Product with nested products flattened and constants folded.
    pub fn product(factors: Vec<Coef>) -> Coef {
        let mut c = 1.0;
        let mut rest = Vec::new();
        for f in factors {
            match f {
                Coef::Const(v) => c *= v,
                Coef::Product(inner) => {
                    for u in inner {
                        match u {
                            Coef::Const(v) => c *= v,
                            other => rest.push(other),
                        }
                    }
                }
                other => rest.push(other),
            }
        }
        if c == 0.0 || rest.is_empty() {
            return Coef::Const(if rest.is_empty() { c } else { 0.0 });
        }
        if c != 1.0 {
            rest.insert(0, Coef::Const(c));
        }
        if rest.len() == 1 {
            rest.pop().expect("one factor")
        } else {
            Coef::Product(rest)
        }
    }

    pub fn pos_part(self) -> Coef {
        match self {
            Coef::Const(c) => Coef::Const(c.max(0.0)),
            other => Coef::PosPart(Box::new(other)),
        }
    }

    pub fn sqrt(self) -> Coef {
        match self {
            Coef::Const(c) => Coef::Const(c.max(0.0).sqrt()),
            other => Coef::Sqrt(Box::new(other)),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coef::Const(c) => *c,
            Coef::Spline(s) => s.eval(t),
            Coef::Osc { f, eps } => f.eval(t / eps) / eps,
            Coef::PosPart(c) => c.eval(t).max(0.0),
            Coef::Sqrt(c) => c.eval(t).max(0.0).sqrt(),
            Coef::Product(fs) => {
                let mut p = 1.0;
                for f in fs {
                    p *= f.eval(t);
                    if p == 0.0 {
                        break;
                    }
                }
                p
            }
            Coef::Sum(ts) => ts.iter().map(|c| c.eval(t)).sum(),
        }
    }

    /// Shortest oscillation period among the fast factors.
    pub fn fastest_period(&self) -> Option<f64> {
        match self {
            Coef::Const(_) | Coef::Spline(_) => None,
            Coef::Osc { f, eps } => Some(fundamental_period(f) * eps),
            Coef::PosPart(c) | Coef::Sqrt(c) => c.fastest_period(),
            Coef::Product(cs) | Coef::Sum(cs) => {
                cs.iter().filter_map(|c| c.fastest_period()).min_by(|a, b| a.partial_cmp(b).unwrap())
            }
        }
    }

    /// Largest `|c(t)|` over `n` uniform samples of `[a, b]`.
    pub fn sup_on(&self, a: f64, b: f64, n: usize) -> f64 {
        (0..n.max(2))
            .map(|i| self.eval(a + (b - a) * i as f64 / (n.max(2) - 1) as f64).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        match self {
            Coef::Const(c) => json!({ "const": c }),
            Coef::Spline(s) => json!({
                "spline": { "knots": s.knots().len(), "t0": s.knots()[0], "t1": s.knots()[s.knots().len() - 1] }
            }),
            Coef::Osc { f, eps } => json!({
                "osc": {
                    "kind": f.kind(),
                    "index": f.index(),
                    "period": f.period(),
                    "eps": eps,
                }
            }),
            Coef::PosPart(c) => json!({ "pos": c.to_json() }),
            Coef::Sqrt(c) => json!({ "sqrt": c.to_json() }),
            Coef::Product(cs) => json!({ "product": cs.iter().map(Coef::to_json).collect::<Vec<_>>() }),
            Coef::Sum(cs) => json!({ "sum": cs.iter().map(Coef::to_json).collect::<Vec<_>>() }),
        }
    }
}

impl From<f64> for Coef {
    fn from(c: f64) -> Self {
        Coef::Const(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{phi, psi};

    #[test]
    fn smart_constructors_fold() {
        assert!(Coef::sum(vec![Coef::Const(1.0), Coef::Const(-1.0)]).is_zero());
        assert_eq!(Coef::product(vec![Coef::Const(2.0), Coef::Const(3.0)]).as_const(), Some(6.0));
        let o = Coef::osc(phi(1, 1.0).unwrap(), 0.1);
        assert!(Coef::product(vec![Coef::Const(0.0), o.clone()]).is_zero());
        assert!(matches!(o.clone().scale(1.0), Coef::Osc { .. }));
        assert!(matches!(Coef::sum(vec![o.clone(), Coef::zero()]), Coef::Osc { .. }));
        assert_eq!(Coef::Const(-4.0).pos_part().as_const(), Some(0.0));
        assert_eq!(Coef::Const(9.0).sqrt().as_const(), Some(3.0));
    }

    #[test]
    fn oscillation_scaling_and_period() {
        let f = phi(3, 2.0).unwrap();
        let c = Coef::osc(f.clone(), 0.01);
        assert!((c.eval(0.013) - f.eval(1.3) / 0.01).abs() < 1e-9);
        assert!((c.fastest_period().unwrap() - 2.0 / 3.0 * 0.01).abs() < 1e-15);
        let p = Coef::osc(psi(2, 1.0).unwrap(), 0.1).mul(c);
        assert!((p.fastest_period().unwrap() - 0.01 * 2.0 / 3.0).abs() < 1e-15);
        assert!(Coef::Const(1.0).fastest_period().is_none());
    }

    #[test]
    fn nested_evaluation() {
        let s = CubicSpline::new(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        let c = Coef::sum(vec![Coef::spline(s), Coef::Const(-2.0)]).mul(Coef::Const(0.5));
        assert!((c.eval(0.5) - 0.0).abs() < 1e-15);
        assert!((c.eval(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(c.clone().pos_part().eval(0.25), 0.0);
        assert!((c.sqrt().eval(1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(c_json_has_keys());
    }

    fn c_json_has_keys() -> bool {
        let v = Coef::osc(phi(2, 1.0).unwrap(), 0.5).scale(2.0).to_json();
        v.get("product").is_some()
    }
}
