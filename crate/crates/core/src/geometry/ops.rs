use std::sync::Arc;

use super::connection::Connection;
use super::field::{axpy, ensure_same_chart, Chart, TangentPoint, VectorField};
use crate::error::{Error, Result};
use crate::models::Faccs;

/// Phase chart of `TQ` (or of `Q × ℝ^m` for a moving frame): base names
/// followed by `fiber_names`.
pub fn tangent_chart(base: &Chart, fiber_names: &[String]) -> Result<Chart> {
    let mut names = base.names().to_vec();
    names.extend_from_slice(fiber_names);
    Chart::new(names)
}

fn default_fiber_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("v{i}")).collect()
}

fn check_pair(conn: &Connection, x: &VectorField, y: &VectorField) -> Result<()> {
    conn.ensure_chart(x.chart())?;
    conn.ensure_chart(y.chart())?;
    for f in [x, y] {
        if f.out_dim() != conn.fiber_dim() {
            return Err(Error::Dimension { expected: conn.fiber_dim(), found: f.out_dim() });
        }
    }
    Ok(())
}

/// `∇_X Y`, with `X, Y` given by their frame components.
pub fn covariant_derivative(conn: &Connection, x: &VectorField, y: &VectorField) -> Result<VectorField> {
    check_pair(conn, x, y)?;
    let (c, xf, yf) = (conn.clone(), x.clone(), y.clone());
    let m = conn.fiber_dim();
    Ok(VectorField::new(conn.chart().clone(), m, move |q| {
        let xv = xf.eval(q);
        let yv = yf.eval(q);
        let kx = c.frame_apply(q, &xv);
        let mut out = yf.directional(q, &kx);
        axpy(1.0, &c.christoffel(q).contract(&xv, &yv), &mut out);
        out
    })
    .with_label(format!("nabla_{{{}}}{}", x.label(), y.label())))
}

/// `⟨X:Y⟩ = ∇_X Y + ∇_Y X`.
pub fn symmetric_product(conn: &Connection, x: &VectorField, y: &VectorField) -> Result<VectorField> {
    let a = covariant_derivative(conn, x, y)?;
    let b = covariant_derivative(conn, y, x)?;
    let m = conn.fiber_dim();
    Ok(VectorField::new(conn.chart().clone(), m, move |q| {
        let mut out = a.eval(q);
        axpy(1.0, &b.eval(q), &mut out);
        out
    })
    .with_label(format!("<{}:{}>", x.label(), y.label())))
}

/// `[X, Y] = DY·X − DX·Y`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    ensure_same_chart(x.chart(), y.chart())?;
    for f in [x, y] {
        if !f.is_square() {
            return Err(Error::Dimension { expected: f.dim(), found: f.out_dim() });
        }
    }
    let (xf, yf) = (x.clone(), y.clone());
    let n = x.dim();
    Ok(VectorField::new(x.chart().clone(), n, move |s| {
        let xv = xf.eval(s);
        let yv = yf.eval(s);
        let mut out = yf.directional(s, &xv);
        axpy(-1.0, &xf.directional(s, &yv), &mut out);
        out
    })
    .with_label(format!("[{},{}]", x.label(), y.label())))
}

/// Geodesic spray `(q, v) ↦ (K(q) v, −Γ(q)(v, v))` on the tangent chart.
pub fn geodesic_spray(conn: &Connection) -> Result<VectorField> {
    let n = conn.chart().dim();
    let m = conn.fiber_dim();
    let chart = Arc::new(tangent_chart(conn.chart(), &default_fiber_names(m))?);
    let c = conn.clone();
    Ok(VectorField::new(chart, n + m, move |s| {
        let (q, v) = s.split_at(n);
        let mut out = c.frame_apply(q, v);
        out.extend(c.christoffel(q).contract(v, v).into_iter().map(|g| -g));
        out
    })
    .with_label("Z"))
}

/// Vertical lift `Y^V(q, v) = (0, Y(q))` on the given phase chart.
pub fn vertical_lift(y: &VectorField, phase: &Arc<Chart>) -> Result<VectorField> {
    let n = y.dim();
    let m = y.out_dim();
    if phase.dim() != n + m || phase.names()[..n] != y.chart().names()[..] {
        return Err(Error::ChartMismatch {
            expected: format!("{} followed by {m} fiber coordinates", y.chart()),
            found: phase.to_string(),
        });
    }
    let (a, b) = (y.clone(), y.clone());
    Ok(VectorField::new(phase.clone(), n + m, move |s| {
        let mut out = vec![0.0; n];
        out.extend(a.eval(&s[..n]));
        out
    })
    .with_directional(move |s, d| {
        let mut out = vec![0.0; n];
        out.extend(b.directional(&s[..n], &d[..n]));
        out
    })
    .with_label(format!("{}^V", y.label())))
}

/// Outcome of comparing `[Y_a^V, [Z + Y^V, Y_b^V]]` with `⟨Y_a:Y_b⟩^V`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleBracketCheck {
    /// `‖nested − product^V‖∞` over the whole phase vector.
    pub residual: f64,
    /// Nested bracket evaluated through generic Lie brackets.
    pub nested: Vec<f64>,
    /// Fiber components of `⟨Y_a:Y_b⟩` evaluated through the connection.
    pub product: Vec<f64>,
}

/// Cross-checks the triple-bracket identity at one phase point. Indices are
/// zero-based. Systems without a connection only have the first-order form,
/// where the identity is the definition of the symmetric product.
pub fn verify_triple_bracket(system: &Faccs, a: usize, b: usize, point: &TangentPoint) -> Result<TripleBracketCheck> {
    let conn = system.connection().ok_or_else(|| {
        Error::ResidualUndefined(format!("`{}` is given in first-order form only", system.name()))
    })?;
    let ya = system.control_checked(a)?;
    let yb = system.control_checked(b)?;
    let lift_a = system.control_lift(a)?;
    let lift_b = system.control_lift(b)?;
    let inner = lie_bracket(system.drift(), &lift_b)?;
    let nested_field = lie_bracket(&lift_a, &inner)?;
    let state = point.to_state();
    if state.len() != system.phase_dim() {
        return Err(Error::Dimension { expected: system.phase_dim(), found: state.len() });
    }
    let nested = nested_field.eval(&state);
    let product = symmetric_product(conn, ya, yb)?.eval(&point.base);
    let n = system.base_dim();
    let residual = nested[..n]
        .iter()
        .map(|v| v.abs())
        .chain(nested[n..].iter().zip(&product).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max);
    Ok(TripleBracketCheck { residual, nested, product })
}
