use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::faccs::Faccs;
use crate::error::{Error, Result};
use crate::geometry::{Chart, Christoffel, Connection, VectorField};

/// Added-inertia entries of the planar hovercraft, `𝓜 = [[a,0,c],[0,e,0],[c,0,e]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HovercraftParams {
    pub a: f64,
    pub c: f64,
    pub e: f64,
}

impl Default for HovercraftParams {
    fn default() -> Self {
        Self { a: 2.0, c: 0.5, e: 1.0 }
    }
}

impl HovercraftParams {
    pub fn inertia(&self) -> Matrix3<f64> {
        Matrix3::new(self.a, 0.0, self.c, 0.0, self.e, 0.0, self.c, 0.0, self.e)
    }

    pub fn validate(&self) -> Result<Matrix3<f64>> {
        if !(self.a > 0.0 && self.c > 0.0 && self.e > 0.0) {
            return Err(Error::Config(format!("hovercraft parameters must be positive, got {self:?}")));
        }
        let m = self.inertia();
        let det = m.determinant();
        if det.abs() < 1e-12 * (self.a * self.e * self.e).abs() {
            return Err(Error::Config(format!("hovercraft inertia matrix is singular (a·e = c² = {})", self.c * self.c)));
        }
        Ok(m.try_inverse().expect("determinant checked"))
    }
}

/// `g(ν) = (P·v^⊥, ω P^⊥)` with `(Π, P₁, P₂) = 𝓜ν`, `w^⊥ = (−w₂, w₁)`.
fn momentum_rate(p: &HovercraftParams, nu: &[f64]) -> [f64; 3] {
    let (w, v1, v2) = (nu[0], nu[1], nu[2]);
    let p1 = p.e * v1;
    let p2 = p.c * w + p.e * v2;
    [-p1 * v2 + p2 * v1, -w * p2, w * p1]
}

/// Hessians `∂²g^l/∂ν_j∂ν_r`.
fn momentum_hessian(p: &HovercraftParams) -> [[[f64; 3]; 3]; 3] {
    let mut h = [[[0.0; 3]; 3]; 3];
    // g1 = c ω v1
    h[0][0][1] = p.c;
    h[0][1][0] = p.c;
    // g2 = −c ω² − e ω v2
    h[1][0][0] = -2.0 * p.c;
    h[1][0][2] = -p.e;
    h[1][2][0] = -p.e;
    // g3 = e ω v1
    h[2][0][1] = p.e;
    h[2][1][0] = p.e;
    h
}

/// Elliptic hovercraft on the plane. State `(θ, x₁, x₂, ω, v₁, v₂)` with body
/// velocities in the fiber; controls `Y₁ = ∂ω`, `Y₂ = ∂v₂`.
pub fn hovercraft(params: HovercraftParams) -> Result<Faccs> {
    let minv = params.validate()?;
    let base = Arc::new(Chart::new(["theta", "x1", "x2"])?.with_note("planar pose, body-frame velocities"));
    let names = vec!["omega".to_string(), "v1".to_string(), "v2".to_string()];
    let phase = Arc::new(crate::geometry::tangent_chart(&base, &names)?);
    let p = params;
    let drift = VectorField::new(phase, 6, move |s| {
        let (st, ct) = s[0].sin_cos();
        let g = momentum_rate(&p, &s[3..]);
        let f = minv * nalgebra::Vector3::from(g);
        vec![s[3], ct * s[4] - st * s[5], st * s[4] + ct * s[5], f[0], f[1], f[2]]
    })
    .with_directional(move |s, d| {
        let (st, ct) = s[0].sin_cos();
        let (v1, v2) = (s[4], s[5]);
        let h = momentum_hessian(&p);
        let mut dg = [0.0; 3];
        for (l, dgl) in dg.iter_mut().enumerate() {
            for j in 0..3 {
                for r in 0..3 {
                    *dgl += h[l][j][r] * s[3 + j] * d[3 + r];
                }
            }
        }
        let df = minv * nalgebra::Vector3::from(dg);
        vec![
            d[3],
            (-st * v1 - ct * v2) * d[0] + ct * d[4] - st * d[5],
            (ct * v1 - st * v2) * d[0] + st * d[4] + ct * d[5],
            df[0],
            df[1],
            df[2],
        ]
    })
    .with_label("Z");
    let y1 = VectorField::constant(base.clone(), vec![1.0, 0.0, 0.0]).with_label("Y1");
    let y2 = VectorField::constant(base.clone(), vec![0.0, 0.0, 1.0]).with_label("Y2");
    let conn = Connection::moving_frame(
        base.clone(),
        3,
        |q| {
            let (st, ct) = q[0].sin_cos();
            nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, ct, -st, 0.0, st, ct])
        },
        move |_| {
            let h = momentum_hessian(&p);
            let mut g = Christoffel::zeros(3);
            for i in 0..3 {
                for j in 0..3 {
                    for r in 0..3 {
                        let s: f64 = (0..3).map(|l| minv[(i, l)] * h[l][j][r]).sum();
                        g.set(i, j, r, -0.5 * s);
                    }
                }
            }
            g
        },
        true,
    );
    Faccs::new("hovercraft", base, &names, drift, vec![y1, y2])?.with_connection(conn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn rest_state_has_zero_drift() {
        let h = hovercraft(HovercraftParams::default()).unwrap();
        assert_eq!(h.drift().eval(&[0.7, 1.0, -2.0, 0.0, 0.0, 0.0]), vec![0.0; 6]);
    }

    #[test]
    fn singular_inertia_is_rejected() {
        assert!(hovercraft(HovercraftParams { a: 1.0, c: 1.0, e: 1.0 }).is_err());
        assert!(hovercraft(HovercraftParams { a: -1.0, c: 1.0, e: 1.0 }).is_err());
    }

    #[test]
    fn self_product_of_first_control() {
        for p in [HovercraftParams::default(), HovercraftParams { a: 3.0, c: 0.7, e: 1.3 }] {
            let h = hovercraft(p).unwrap();
            let y = &h.controls()[0];
            let s = h.symmetric_product(y, y).unwrap();
            let v = s.eval(&[0.4, -1.0, 0.5]);
            assert!(close(&v, &[0.0, 2.0 * p.c / p.e, 0.0], 1e-9), "{v:?}");
        }
    }

    #[test]
    fn fiber_drift_is_quadratic() {
        let h = hovercraft(HovercraftParams::default()).unwrap();
        let q = [0.2, 0.0, 0.0];
        let nu = [0.3, -0.8, 1.1];
        let f1 = h.fiber_drift(&q, &nu);
        let nu3: Vec<f64> = nu.iter().map(|x| 3.0 * x).collect();
        let f3 = h.fiber_drift(&q, &nu3);
        assert!(close(&f3, &f1.iter().map(|x| 9.0 * x).collect::<Vec<_>>(), 1e-12));
    }

    #[test]
    fn connection_matches_drift() {
        let h = hovercraft(HovercraftParams::default()).unwrap();
        let states = vec![vec![0.3, 0.1, -0.2, 0.5, -1.0, 2.0], vec![-1.2, 0.0, 0.4, -0.7, 0.3, 0.9]];
        assert!(h.connection_consistency(&states).unwrap() < 1e-12);
    }
}
