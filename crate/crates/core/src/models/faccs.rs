use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    tangent_chart, vertical_lift, Chart, Connection, TangentPoint, VectorField,
};

use super::rotation::nearest_rotation;

/// Time-dependent fiber force `(t, state) ↦ F(t, state) ∈ ℝ^m`.
pub type TimeForce = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Tolerance for the verticality of nested brackets.
pub const VERTICALITY_TOL: f64 = 1e-6;

/// A forced affine connection control system in first-order form.
///
/// The phase state is `(q, ν)` with `q` in the base chart and `ν ∈ ℝ^m` the
/// velocity components in the system's frame. The drift is `Z + Y^V`; its
/// base part must be linear in `ν` and its fiber part quadratic in `ν`.
/// Control fields are stored as base fields `Y_a : q ↦ ℝ^m` and act through
/// their vertical lifts.
#[derive(Clone)]
pub struct Faccs {
    name: String,
    base_chart: Arc<Chart>,
    phase_chart: Arc<Chart>,
    fiber_dim: usize,
    drift: VectorField,
    controls: Vec<VectorField>,
    lifts: Vec<VectorField>,
    connection: Option<Connection>,
    time_force: Option<TimeForce>,
    control_bound: Option<Vec<(f64, f64)>>,
    rotation_block: Option<usize>,
}

impl fmt::Debug for Faccs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Faccs")
            .field("name", &self.name)
            .field("phase_chart", &self.phase_chart.to_string())
            .field("fiber_dim", &self.fiber_dim)
            .field("controls", &self.controls.len())
            .field("connection", &self.connection.is_some())
            .finish()
    }
}

impl Faccs {
    pub fn new(
        name: impl Into<String>,
        base_chart: Arc<Chart>,
        fiber_names: &[String],
        drift: VectorField,
        controls: Vec<VectorField>,
    ) -> Result<Self> {
        if controls.is_empty() {
            return Err(Error::Config("a control system needs at least one control field".into()));
        }
        Self::build(name.into(), base_chart, fiber_names, drift, controls)
    }

    fn build(
        name: String,
        base_chart: Arc<Chart>,
        fiber_names: &[String],
        drift: VectorField,
        controls: Vec<VectorField>,
    ) -> Result<Self> {
        let phase_chart = Arc::new(tangent_chart(&base_chart, fiber_names)?);
        if drift.chart().as_ref() != phase_chart.as_ref() || !drift.is_square() {
            return Err(Error::ChartMismatch { expected: phase_chart.to_string(), found: drift.chart().to_string() });
        }
        let m = fiber_names.len();
        let mut lifts = Vec::with_capacity(controls.len());
        for y in &controls {
            if y.chart().as_ref() != base_chart.as_ref() {
                return Err(Error::ChartMismatch { expected: base_chart.to_string(), found: y.chart().to_string() });
            }
            if y.out_dim() != m {
                return Err(Error::Dimension { expected: m, found: y.out_dim() });
            }
            lifts.push(vertical_lift(y, &phase_chart)?);
        }
        Ok(Self {
            name,
            base_chart,
            phase_chart,
            fiber_dim: m,
            drift,
            controls,
            lifts,
            connection: None,
            time_force: None,
            control_bound: None,
            rotation_block: None,
        })
    }

    pub fn with_connection(mut self, conn: Connection) -> Result<Self> {
        conn.ensure_chart(&self.base_chart)?;
        if conn.fiber_dim() != self.fiber_dim {
            return Err(Error::Dimension { expected: self.fiber_dim, found: conn.fiber_dim() });
        }
        self.connection = Some(conn);
        Ok(self)
    }

    pub fn with_control_bound(mut self, bound: Vec<(f64, f64)>) -> Result<Self> {
        if bound.len() != self.controls.len() || bound.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::Config("control bound must give lo ≤ hi for every channel".into()));
        }
        self.control_bound = Some(bound);
        Ok(self)
    }

    /// Marks `base[start..start + 9]` as a row-major rotation matrix.
    pub fn with_rotation_block(mut self, start: usize) -> Self {
        self.rotation_block = Some(start);
        self
    }

    pub fn with_time_force(mut self, force: TimeForce) -> Self {
        self.time_force = Some(force);
        self
    }

    /// Copy of the system with the same dynamics and no control fields.
    pub fn without_controls(&self) -> Self {
        let mut s = self.clone();
        s.controls.clear();
        s.lifts.clear();
        s.control_bound = None;
        s
    }

    /// Same maps with every derivative oracle replaced by central differences.
    pub fn with_finite_difference_oracles(&self, h: f64) -> Self {
        let mut s = self.clone();
        s.drift = s.drift.finite_difference_only(h);
        s.controls = s.controls.iter().map(|y| y.finite_difference_only(h)).collect();
        s.lifts = s.controls.iter().map(|y| vertical_lift(y, &s.phase_chart).expect("chart checked")).collect();
        s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_chart(&self) -> &Arc<Chart> {
        &self.base_chart
    }

    pub fn phase_chart(&self) -> &Arc<Chart> {
        &self.phase_chart
    }

    pub fn base_dim(&self) -> usize {
        self.base_chart.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn phase_dim(&self) -> usize {
        self.phase_chart.dim()
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn drift(&self) -> &VectorField {
        &self.drift
    }

    pub fn controls(&self) -> &[VectorField] {
        &self.controls
    }

    pub fn control(&self, a: usize) -> Option<&VectorField> {
        self.controls.get(a)
    }

    pub(crate) fn control_checked(&self, a: usize) -> Result<&VectorField> {
        self.controls
            .get(a)
            .ok_or_else(|| Error::Config(format!("control index {a} out of range (k = {})", self.controls.len())))
    }

    pub fn control_lift(&self, a: usize) -> Result<VectorField> {
        self.control_checked(a)?;
        Ok(self.lifts[a].clone())
    }

    pub fn connection(&self) -> Option<&Connection> {
        self.connection.as_ref()
    }

    pub fn control_bound(&self) -> Option<&[(f64, f64)]> {
        self.control_bound.as_deref()
    }

    pub fn rotation_block(&self) -> Option<usize> {
        self.rotation_block
    }

    pub fn has_time_force(&self) -> bool {
        self.time_force.is_some()
    }

    /// `Z + Y^V + F(t) + Σ u_a Y_a^V` at `(t, x)`.
    pub fn rhs(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        let n = self.base_dim();
        let mut out = self.drift.eval(x);
        if !u.is_empty() {
            let q = &x[..n];
            for (ua, y) in u.iter().zip(&self.controls) {
                if *ua != 0.0 {
                    for (o, yi) in out[n..].iter_mut().zip(y.eval(q)) {
                        *o += ua * yi;
                    }
                }
            }
        }
        if let Some(f) = &self.time_force {
            for (o, fi) in out[n..].iter_mut().zip(f(t, x)) {
                *o += fi;
            }
        }
        out
    }

    /// Base velocity `K(q) ν` of the frame components `ν`.
    pub fn kinematics(&self, q: &[f64], nu: &[f64]) -> Vec<f64> {
        let n = self.base_dim();
        let a = self.drift.eval(&join(q, nu));
        let b = self.drift.eval(&join(q, &vec![0.0; self.fiber_dim]));
        a[..n].iter().zip(&b[..n]).map(|(x, y)| x - y).collect()
    }

    /// Fiber part of the drift at `(q, ν)`.
    pub fn fiber_drift(&self, q: &[f64], nu: &[f64]) -> Vec<f64> {
        let n = self.base_dim();
        self.drift.eval(&join(q, nu)).split_off(n)
    }

    /// Second `ν`-derivative of the base and fiber drift parts along `(x, y)`,
    /// computed by polarization at `ν = 0`.
    fn second_variation(&self, q: &[f64], x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.base_dim();
        let m = self.fiber_dim;
        let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let e = |nu: &[f64]| self.drift.eval(&join(q, nu));
        let (fxy, fx, fy, f0) = (e(&xy), e(x), e(y), e(&vec![0.0; m]));
        let d: Vec<f64> = (0..n + m).map(|i| fxy[i] - fx[i] - fy[i] + f0[i]).collect();
        let (b, f) = d.split_at(n);
        (b.to_vec(), f.to_vec())
    }

    /// Fiber part of `[X^V, [Z, Y^V]]` at base point `q`, together with the
    /// sup-norm of its base part.
    pub fn nested_bracket(&self, x: &VectorField, y: &VectorField, q: &[f64]) -> (Vec<f64>, f64) {
        let xv = x.eval(q);
        let yv = y.eval(q);
        let kx = self.kinematics(q, &xv);
        let ky = self.kinematics(q, &yv);
        let (base, d2) = self.second_variation(q, &xv, &yv);
        let mut out = y.directional(q, &kx);
        for ((o, a), b) in out.iter_mut().zip(x.directional(q, &ky)).zip(&d2) {
            *o += a - b;
        }
        (out, base.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Symmetric product of two base fields, obtained as the vertical part of
    /// `[X^V, [Z, Y^V]]`. Works without a connection.
    pub fn symmetric_product(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        for f in [x, y] {
            if f.chart().as_ref() != self.base_chart.as_ref() {
                return Err(Error::ChartMismatch { expected: self.base_chart.to_string(), found: f.chart().to_string() });
            }
            if f.out_dim() != self.fiber_dim {
                return Err(Error::Dimension { expected: self.fiber_dim, found: f.out_dim() });
            }
        }
        let probe: Vec<f64> = (0..self.base_dim()).map(|i| 0.1 + 0.05 * i as f64).collect();
        let (_, defect) = self.nested_bracket(x, y, &self.project_base(probe));
        if defect > VERTICALITY_TOL {
            return Err(Error::Structure(format!(
                "nested bracket has base part {defect:.3e}; kinematics are not linear in the fiber"
            )));
        }
        let sys = self.clone();
        let (xf, yf) = (x.clone(), y.clone());
        Ok(VectorField::new(self.base_chart.clone(), self.fiber_dim, move |q| sys.nested_bracket(&xf, &yf, q).0)
            .with_label(format!("<{}:{}>", x.label(), y.label())))
    }

    /// Uniform sample in `[−half_width, half_width]^dim`, rotation block
    /// projected to the nearest rotation matrix.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R, half_width: f64) -> Vec<f64> {
        let x: Vec<f64> = (0..self.phase_dim()).map(|_| rng.gen_range(-half_width..=half_width)).collect();
        self.project_phase(x)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, half_width: f64) -> TangentPoint {
        TangentPoint::split(&self.sample_state(rng, half_width), self.base_dim())
    }

    fn project_base(&self, mut q: Vec<f64>) -> Vec<f64> {
        if let Some(s) = self.rotation_block {
            let r = nearest_rotation(&q[s..s + 9]);
            q[s..s + 9].copy_from_slice(&r);
        }
        q
    }

    /// Projects the rotation block (if any) of a phase state onto SO(3).
    pub fn project_phase(&self, mut x: Vec<f64>) -> Vec<f64> {
        if let Some(s) = self.rotation_block {
            let r = nearest_rotation(&x[s..s + 9]);
            x[s..s + 9].copy_from_slice(&r);
        }
        x
    }

    /// Largest deviation between the drift's quadratic fiber part and
    /// `−Γ(ν, ν)`, and between its base part and `K(q) ν`, over `states`.
    pub fn connection_consistency(&self, states: &[Vec<f64>]) -> Result<f64> {
        let conn = self
            .connection
            .as_ref()
            .ok_or_else(|| Error::ResidualUndefined(format!("`{}` has no connection", self.name)))?;
        let n = self.base_dim();
        let mut worst = 0.0_f64;
        for s in states {
            let (q, nu) = s.split_at(n);
            let f = self.fiber_drift(q, nu);
            let f0 = self.fiber_drift(q, &vec![0.0; self.fiber_dim]);
            let g = conn.christoffel(q).contract(nu, nu);
            for i in 0..self.fiber_dim {
                worst = worst.max((f[i] - f0[i] + g[i]).abs());
            }
            let k = self.kinematics(q, nu);
            for (a, b) in k.iter().zip(conn.frame_apply(q, nu)) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

pub(crate) fn join(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

pub(crate) fn fiber_names(prefix: &str, m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("{prefix}{i}")).collect()
}

/// Fully-actuated-or-not flat system on ℝ^n: `q̈ = Σ u_a Y_a` with constant
/// control directions.
pub fn flat_system(n: usize, directions: &[Vec<f64>]) -> Result<Faccs> {
    let base = Arc::new(Chart::numbered("q", n)?);
    let names = fiber_names("v", n);
    let phase = Arc::new(tangent_chart(&base, &names)?);
    let drift = VectorField::new(phase, 2 * n, move |s| {
        let mut out = s[n..].to_vec();
        out.extend(std::iter::repeat_n(0.0, n));
        out
    })
    .with_jacobian(move |_| {
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
        }
        j
    })
    .with_label("Z");
    let mut controls = Vec::new();
    for (a, d) in directions.iter().enumerate() {
        if d.len() != n {
            return Err(Error::Dimension { expected: n, found: d.len() });
        }
        controls.push(VectorField::constant(base.clone(), d.clone()).with_label(format!("Y{}", a + 1)));
    }
    let conn = Connection::flat(base.clone());
    Faccs::new(format!("flat R^{n}"), base, &names, drift, controls)?.with_connection(conn)
}
