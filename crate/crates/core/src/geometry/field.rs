use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Central finite-difference step used when a field has no closed-form
/// derivative.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type DirectionalFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// A global coordinate chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    names: Vec<String>,
    note: Option<String>,
}

impl Chart {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Config("a chart needs at least one coordinate".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Config(format!("duplicate coordinate name `{n}`")));
            }
        }
        Ok(Self { names, note: None })
    }

    /// Chart with coordinates `prefix1, …, prefixN`.
    pub fn numbered(prefix: &str, dim: usize) -> Result<Self> {
        Self::new((1..=dim).map(|i| format!("{prefix}{i}")))
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))
    }
}

/// A point of a tangent bundle in split form.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint {
    pub base: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl TangentPoint {
    pub fn new(base: Vec<f64>, velocity: Vec<f64>) -> Self {
        Self { base, velocity }
    }

    pub fn split(state: &[f64], base_dim: usize) -> Self {
        Self { base: state[..base_dim].to_vec(), velocity: state[base_dim..].to_vec() }
    }

    pub fn to_state(&self) -> Vec<f64> {
        let mut s = self.base.clone();
        s.extend_from_slice(&self.velocity);
        s
    }
}

/// How a field's first derivative is obtained.
#[derive(Clone)]
pub enum DerivativeOracle {
    /// Closed-form jacobian `x ↦ ∂f/∂x` (rows: outputs, columns: inputs).
    ClosedForm(JacobianFn),
    /// Closed-form directional derivative `(x, d) ↦ Df(x)·d`.
    Directional(DirectionalFn),
    /// Central finite differences with the given step.
    FiniteDifference { h: f64 },
}

impl fmt::Debug for DerivativeOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ClosedForm(_) => write!(f, "ClosedForm"),
            Self::Directional(_) => write!(f, "Directional"),
            Self::FiniteDifference { h } => write!(f, "FiniteDifference {{ h: {h:e} }}"),
        }
    }
}

/// A smooth map from chart coordinates to `out_dim` components.
///
/// When `out_dim` equals the chart dimension this is an ordinary vector field.
/// Fields on a configuration manifold described in a moving frame have
/// `out_dim` equal to the frame size instead.
#[derive(Clone)]
pub struct VectorField {
    chart: Arc<Chart>,
    out_dim: usize,
    map: MapFn,
    oracle: DerivativeOracle,
    label: String,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("label", &self.label)
            .field("chart", &self.chart.to_string())
            .field("out_dim", &self.out_dim)
            .field("oracle", &self.oracle)
            .finish()
    }
}

impl VectorField {
    pub fn new<F>(chart: Arc<Chart>, out_dim: usize, map: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            chart,
            out_dim,
            map: Arc::new(map),
            oracle: DerivativeOracle::FiniteDifference { h: DEFAULT_FD_STEP },
            label: String::new(),
        }
    }

    /// Field whose components are the same at every point.
    pub fn constant(chart: Arc<Chart>, value: Vec<f64>) -> Self {
        let n = chart.dim();
        let m = value.len();
        Self::new(chart, m, move |_| value.clone())
            .with_jacobian(move |_| DMatrix::zeros(m, n))
    }

    pub fn zero(chart: Arc<Chart>, out_dim: usize) -> Self {
        Self::constant(chart, vec![0.0; out_dim])
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.oracle = DerivativeOracle::ClosedForm(Arc::new(jac));
        self
    }

    pub fn with_directional<D>(mut self, dir: D) -> Self
    where
        D: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.oracle = DerivativeOracle::Directional(Arc::new(dir));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.oracle = DerivativeOracle::FiniteDifference { h };
        self
    }

    /// Same map, derivative forced to finite differences.
    pub fn finite_difference_only(&self, h: f64) -> Self {
        let mut f = self.clone();
        f.oracle = DerivativeOracle::FiniteDifference { h };
        f
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn is_square(&self) -> bool {
        self.out_dim == self.chart.dim()
    }

    pub fn oracle(&self) -> &DerivativeOracle {
        &self.oracle
    }

    pub fn has_closed_form_derivative(&self) -> bool {
        !matches!(self.oracle, DerivativeOracle::FiniteDifference { .. })
    }

    pub fn map_fn(&self) -> MapFn {
        self.map.clone()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.chart.dim(), "field `{}` evaluated off-chart", self.label);
        (self.map)(x)
    }

    /// `Df(x)·d`.
    pub fn directional(&self, x: &[f64], d: &[f64]) -> Vec<f64> {
        match &self.oracle {
            DerivativeOracle::ClosedForm(j) => {
                let jac = j(x);
                mat_vec(&jac, d)
            }
            DerivativeOracle::Directional(dir) => dir(x, d),
            DerivativeOracle::FiniteDifference { h } => fd_directional(&self.map, x, d, *h),
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.oracle {
            DerivativeOracle::ClosedForm(j) => j(x),
            DerivativeOracle::Directional(_) => {
                let n = x.len();
                let mut jac = DMatrix::zeros(self.out_dim, n);
                let mut e = vec![0.0; n];
                for c in 0..n {
                    e[c] = 1.0;
                    let col = self.directional(x, &e);
                    for (r, v) in col.into_iter().enumerate() {
                        jac[(r, c)] = v;
                    }
                    e[c] = 0.0;
                }
                jac
            }
            DerivativeOracle::FiniteDifference { h } => self.fd_jacobian(x, *h),
        }
    }

    /// Central finite-difference jacobian regardless of the oracle.
    pub fn fd_jacobian(&self, x: &[f64], h: f64) -> DMatrix<f64> {
        let n = x.len();
        let mut jac = DMatrix::zeros(self.out_dim, n);
        let mut xp = x.to_vec();
        for c in 0..n {
            let orig = xp[c];
            xp[c] = orig + h;
            let fp = (self.map)(&xp);
            xp[c] = orig - h;
            let fm = (self.map)(&xp);
            xp[c] = orig;
            for r in 0..self.out_dim {
                jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        jac
    }

    /// Pointwise linear combination `Σ cᵢ Xᵢ` with constant weights.
    pub fn linear_combination(terms: &[(f64, VectorField)]) -> Result<VectorField> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Config("empty linear combination".into()))?;
        let chart = first.1.chart.clone();
        let m = first.1.out_dim;
        for (_, f) in terms {
            ensure_same_chart(&chart, f.chart())?;
            if f.out_dim != m {
                return Err(Error::Dimension { expected: m, found: f.out_dim });
            }
        }
        let t1: Vec<(f64, VectorField)> = terms.to_vec();
        let t2 = t1.clone();
        Ok(VectorField::new(chart, m, move |x| {
            let mut out = vec![0.0; m];
            for (c, f) in &t1 {
                axpy(*c, &f.eval(x), &mut out);
            }
            out
        })
        .with_directional(move |x, d| {
            let mut out = vec![0.0; m];
            for (c, f) in &t2 {
                axpy(*c, &f.directional(x, d), &mut out);
            }
            out
        }))
    }
}

pub(crate) fn ensure_same_chart(expected: &Chart, found: &Chart) -> Result<()> {
    if expected != found {
        return Err(Error::ChartMismatch { expected: expected.to_string(), found: found.to_string() });
    }
    Ok(())
}

pub(crate) fn fd_directional(map: &MapFn, x: &[f64], d: &[f64], h: f64) -> Vec<f64> {
    let scale = d.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        let m = map(x).len();
        return vec![0.0; m];
    }
    let step = h / scale;
    let xp: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + step * b).collect();
    let xm: Vec<f64> = x.iter().zip(d).map(|(a, b)| a - step * b).collect();
    let fp = map(&xp);
    let fm = map(&xm);
    fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect()
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum()).collect()
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Arc<Chart> {
        Arc::new(Chart::numbered("q", 2).unwrap())
    }

    #[test]
    fn chart_rejects_duplicates_and_empty() {
        assert!(Chart::new(["a", "a"]).is_err());
        assert!(Chart::new(Vec::<String>::new()).is_err());
        assert_eq!(Chart::numbered("x", 3).unwrap().dim(), 3);
    }

    #[test]
    fn fd_and_closed_form_jacobians_agree() {
        let c = plane();
        let f = VectorField::new(c.clone(), 2, |x| vec![x[0].sin() * x[1], x[0] * x[0] * x[1].exp()]);
        let g = f.clone().with_jacobian(|x| {
            DMatrix::from_row_slice(
                2,
                2,
                &[x[0].cos() * x[1], x[0].sin(), 2.0 * x[0] * x[1].exp(), x[0] * x[0] * x[1].exp()],
            )
        });
        let h = DEFAULT_FD_STEP;
        for p in [[0.3, -0.7], [1.1, 0.4], [-1.9, 1.5]] {
            let a = f.jacobian(&p);
            let b = g.jacobian(&p);
            for (u, v) in a.iter().zip(b.iter()) {
                assert!((u - v).abs() < 10.0 * h * h, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn directional_matches_jacobian_product() {
        let c = plane();
        let f = VectorField::new(c, 2, |x| vec![x[0] * x[1], x[1] * x[1]]);
        let p = [0.5, -1.2];
        let d = [0.3, 2.0];
        let jd = mat_vec(&f.fd_jacobian(&p, 1e-6), &d);
        let dd = f.directional(&p, &d);
        for (a, b) in jd.iter().zip(&dd) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}
