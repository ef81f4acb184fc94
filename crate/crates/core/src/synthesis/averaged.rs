use std::sync::Arc;

use super::coef::Coef;
use crate::error::{Error, Result};
use crate::geometry::VectorField;
use crate::models::Faccs;

/// Uncontrolled system driven by the averaged force
/// `−Σ_{a,b} δ_{n_a n_b} w_a(t) w_b(t) ⟨Y_a:Y_b⟩` of the oscillatory inputs
/// `u_a = (1/ε) w_a(t) φ_{n_a}(t/ε)`.
pub fn averaged_counterpart(system: &Faccs, amplitudes: &[Coef], indices: &[usize]) -> Result<Faccs> {
    let k = system.num_controls();
    if amplitudes.len() != k || indices.len() != k {
        return Err(Error::Dimension { expected: k, found: amplitudes.len().min(indices.len()) });
    }
    let mut terms: Vec<(Coef, Coef, f64, VectorField)> = Vec::new();
    for a in 0..k {
        for b in a..k {
            if indices[a] != indices[b] || amplitudes[a].is_zero() || amplitudes[b].is_zero() {
                continue;
            }
            let field = system.symmetric_product(&system.controls()[a], &system.controls()[b])?;
            let mult = if a == b { 1.0 } else { 2.0 };
            terms.push((amplitudes[a].clone(), amplitudes[b].clone(), mult, field));
        }
    }
    let base = system.without_controls();
    if terms.is_empty() {
        return Ok(base);
    }
    let n = system.base_dim();
    let m = system.fiber_dim();
    let terms = Arc::new(terms);
    Ok(base.with_time_force(Arc::new(move |t, x| {
        let q = &x[..n];
        let mut f = vec![0.0; m];
        for (wa, wb, mult, field) in terms.iter() {
            let c = mult * wa.eval(t) * wb.eval(t);
            if c != 0.0 {
                for (fi, v) in f.iter_mut().zip(field.eval(q)) {
                    *fi -= c * v;
                }
            }
        }
        f
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{submarine, SubmarineParams, IDENTITY3};

    fn state() -> Vec<f64> {
        let mut s = vec![0.1, 0.2, 0.3];
        s.extend_from_slice(&IDENTITY3);
        s.extend_from_slice(&[0.0; 6]);
        s
    }

    #[test]
    fn shared_index_pair_force() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let w = [Coef::zero(), Coef::Const(1.0), Coef::Const(1.0)];
        let avg = averaged_counterpart(&s, &w, &[1, 2, 2]).unwrap();
        assert_eq!(avg.num_controls(), 0);
        let r = avg.rhs(0.0, &state(), &[]);
        let want = [0.0, 0.0, 0.0, -6.0, 0.0, 0.0];
        assert!(r[12..].iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-8), "{:?}", &r[12..]);
    }

    #[test]
    fn distinct_indices_give_no_force() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let w = [Coef::Const(1.0), Coef::Const(1.0), Coef::Const(1.0)];
        let avg = averaged_counterpart(&s, &w, &[1, 2, 3]).unwrap();
        let r = avg.rhs(0.0, &state(), &[]);
        assert!(r[12..].iter().all(|v| v.abs() < 1e-8));
        let zero = averaged_counterpart(&s, &[Coef::zero(), Coef::zero(), Coef::zero()], &[1, 1, 1]).unwrap();
        assert_eq!(zero.rhs(0.0, &state(), &[]), s.rhs(0.0, &state(), &[]));
    }
}
