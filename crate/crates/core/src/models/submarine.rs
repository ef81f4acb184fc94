use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::faccs::Faccs;
use super::rotation::{mat3, orthogonality_defect};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{tangent_chart, Chart, Christoffel, Connection, VectorField};

/// Phase-state index of `A₃₃`.
pub const A33_INDEX: usize = 11;
/// Start of the rotation block in the submarine state.
pub const ROTATION_START: usize = 3;
pub const SUBMARINE_DIM: usize = 18;

/// Inertia of the ellipsoidal vehicle, `𝓜 = diag(J₁, J₁, J₃, M₁, M₂, M₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmarineParams {
    pub j1: f64,
    pub j3: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl Default for SubmarineParams {
    fn default() -> Self {
        Self { j1: 1.0, j3: 3.0, m1: 1.0, m2: 2.0, m3: 3.0 }
    }
}

impl SubmarineParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.j1, self.j3, self.m1, self.m2, self.m3];
        if all.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Config(format!("submarine inertia entries must be positive, got {self:?}")));
        }
        if self.m1 == self.m2 {
            return Err(Error::Config("submarine needs M1 != M2".into()));
        }
        Ok(())
    }

    fn j(&self) -> Vector3<f64> {
        Vector3::new(self.j1, self.j1, self.j3)
    }

    fn m(&self) -> Vector3<f64> {
        Vector3::new(self.m1, self.m2, self.m3)
    }

    /// Momenta `(Π, P)` of body velocities `(ω, v)`.
    pub fn momenta(&self, omega: &[f64], v: &[f64]) -> ([f64; 3], [f64; 3]) {
        let (j, m) = (self.j(), self.m());
        (
            [j[0] * omega[0], j[1] * omega[1], j[2] * omega[2]],
            [m[0] * v[0], m[1] * v[1], m[2] * v[2]],
        )
    }

    /// Body velocities `(ω, v)` of momenta `(Π, P)`.
    pub fn velocities(&self, pi: &[f64], p: &[f64]) -> ([f64; 3], [f64; 3]) {
        let (j, m) = (self.j(), self.m());
        ([pi[0] / j[0], pi[1] / j[1], pi[2] / j[2]], [p[0] / m[0], p[1] / m[1], p[2] / m[2]])
    }
}

fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

fn v3(s: &[f64]) -> Vector3<f64> {
    Vector3::new(s[0], s[1], s[2])
}

/// `(ω̇, v̇)` of the Kirchhoff equations in body velocities.
fn fiber_rate(p: &SubmarineParams, omega: &Vector3<f64>, v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let (j, m) = (p.j(), p.m());
    let pi = j.component_mul(omega);
    let pm = m.component_mul(v);
    let dpi = pi.cross(omega) + pm.cross(v);
    let dp = pm.cross(omega);
    (dpi.component_div(&j), dp.component_div(&m))
}

/// Symmetric bilinear form `B` with `(ω̇, v̇) = B(ν, ν)`.
fn fiber_bilinear(p: &SubmarineParams, x: &[f64], y: &[f64]) -> [f64; 6] {
    let (j, m) = (p.j(), p.m());
    let (xw, xv, yw, yv) = (v3(&x[..3]), v3(&x[3..]), v3(&y[..3]), v3(&y[3..]));
    let dpi = 0.5 * (j.component_mul(&xw).cross(&yw) + j.component_mul(&yw).cross(&xw))
        + 0.5 * (m.component_mul(&xv).cross(&yv) + m.component_mul(&yv).cross(&xv));
    let dp = 0.5 * (m.component_mul(&xv).cross(&yw) + m.component_mul(&yv).cross(&xw));
    let a = dpi.component_div(&j);
    let b = dp.component_div(&m);
    [a[0], a[1], a[2], b[0], b[1], b[2]]
}

/// Neutrally buoyant ellipsoidal vehicle in an ideal fluid.
///
/// State `(r, A, ω, v)`: position, attitude (nine row-major entries), body
/// angular and linear velocities. Controls are the unit velocity directions
/// `Y₁ = ∂ω₁`, `Y₂ = ∂ω₂`, `Y₃ = ∂v₃`.
pub fn submarine(params: SubmarineParams) -> Result<Faccs> {
    params.validate()?;
    let mut names: Vec<String> = ["r1", "r2", "r3"].iter().map(|s| s.to_string()).collect();
    for i in 1..=3 {
        for j in 1..=3 {
            names.push(format!("A{i}{j}"));
        }
    }
    let base = Arc::new(Chart::new(names)?.with_note("A11..A33 form a row-major 3x3 rotation matrix"));
    let fiber: Vec<String> = ["w1", "w2", "w3", "v1", "v2", "v3"].iter().map(|s| s.to_string()).collect();
    let phase = Arc::new(tangent_chart(&base, &fiber)?);
    let p = params;
    let drift = VectorField::new(phase, SUBMARINE_DIM, move |s| {
        let a = mat3(&s[3..12]);
        let w = v3(&s[12..15]);
        let v = v3(&s[15..18]);
        let dr = a * v;
        let da = a * skew(&w);
        let (dw, dv) = fiber_rate(&p, &w, &v);
        let mut out = Vec::with_capacity(SUBMARINE_DIM);
        out.extend_from_slice(dr.as_slice());
        for i in 0..3 {
            for j in 0..3 {
                out.push(da[(i, j)]);
            }
        }
        out.extend_from_slice(dw.as_slice());
        out.extend_from_slice(dv.as_slice());
        out
    })
    .with_directional(move |s, d| {
        let a = mat3(&s[3..12]);
        let w = v3(&s[12..15]);
        let v = v3(&s[15..18]);
        let da = mat3(&d[3..12]);
        let dw = v3(&d[12..15]);
        let dv = v3(&d[15..18]);
        let ddr = da * v + a * dv;
        let dda = da * skew(&w) + a * skew(&dw);
        let b = fiber_bilinear(&p, &s[12..18], &d[12..18]);
        let mut out = Vec::with_capacity(SUBMARINE_DIM);
        out.extend_from_slice(ddr.as_slice());
        for i in 0..3 {
            for j in 0..3 {
                out.push(dda[(i, j)]);
            }
        }
        out.extend(b.iter().map(|x| 2.0 * x));
        out
    })
    .with_label("Z");
    let unit = |i: usize, label: &str| {
        let mut e = vec![0.0; 6];
        e[i] = 1.0;
        VectorField::constant(base.clone(), e).with_label(label)
    };
    let controls = vec![unit(0, "Y1"), unit(1, "Y2"), unit(5, "Y3")];
    let conn = Connection::moving_frame(
        base.clone(),
        6,
        |q| {
            let a = mat3(&q[3..12]);
            let mut k = nalgebra::DMatrix::zeros(12, 6);
            for i in 0..3 {
                for j in 0..3 {
                    k[(i, 3 + j)] = a[(i, j)];
                }
            }
            // d/dt A_ij = Σ_k A_ik S(ω)_kj; S(e_c) columns give the frame.
            for c in 0..3 {
                let mut e = Vector3::zeros();
                e[c] = 1.0;
                let das = a * skew(&e);
                for i in 0..3 {
                    for j in 0..3 {
                        k[(3 + 3 * i + j, c)] = das[(i, j)];
                    }
                }
            }
            k
        },
        move |_| {
            let mut g = Christoffel::zeros(6);
            for jj in 0..6 {
                for rr in 0..6 {
                    let mut x = [0.0; 6];
                    let mut y = [0.0; 6];
                    x[jj] = 1.0;
                    y[rr] = 1.0;
                    let b = fiber_bilinear(&p, &x, &y);
                    for (i, bi) in b.iter().enumerate() {
                        g.set(i, jj, rr, -bi);
                    }
                }
            }
            g
        },
        true,
    );
    Ok(Faccs::new("submarine", base, &fiber, drift, controls)?
        .with_connection(conn)?
        .with_rotation_block(ROTATION_START))
}

/// Phase state from position, attitude and momenta `(Π, P)`.
pub fn submarine_state(params: &SubmarineParams, r: [f64; 3], a: [f64; 9], pi: [f64; 3], p: [f64; 3]) -> Vec<f64> {
    let (w, v) = params.velocities(&pi, &p);
    let mut s = Vec::with_capacity(SUBMARINE_DIM);
    s.extend_from_slice(&r);
    s.extend_from_slice(&a);
    s.extend_from_slice(&w);
    s.extend_from_slice(&v);
    s
}

pub const IDENTITY3: [f64; 9] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];

/// Largest `‖AᵀA − I‖∞` along a submarine trajectory.
pub fn orthogonality_drift(traj: &Trajectory) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s in &traj.states {
        if s.len() != SUBMARINE_DIM {
            return Err(Error::Dimension { expected: SUBMARINE_DIM, found: s.len() });
        }
        worst = worst.max(orthogonality_defect(&s[ROTATION_START..ROTATION_START + 9]));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn rest_is_equilibrium() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let x = submarine_state(&SubmarineParams::default(), [1.0, 2.0, 3.0], IDENTITY3, [0.0; 3], [0.0; 3]);
        assert_eq!(s.drift().eval(&x), vec![0.0; SUBMARINE_DIM]);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = SubmarineParams::default();
        p.m2 = p.m1;
        assert!(submarine(p).is_err());
        p.m2 = -1.0;
        assert!(submarine(p).is_err());
    }

    #[test]
    fn reference_forcing_in_momentum_form() {
        // P = (−1,−2,−3), v = (−1,−1,−1): P×v = (−1, 2, −1), P×ω = 0.
        let p = SubmarineParams::default();
        let x = submarine_state(&p, [0.0; 3], IDENTITY3, [0.0; 3], [-1.0, -2.0, -3.0]);
        let s = submarine(p).unwrap();
        let d = s.drift().eval(&x);
        assert!(close(&d[..3], &[-1.0, -1.0, -1.0], 1e-15));
        let dpi = [d[12] * p.j1, d[13] * p.j1, d[14] * p.j3];
        assert!(close(&dpi, &[-1.0, 2.0, -1.0], 1e-15));
        assert!(close(&d[15..], &[0.0; 3], 1e-15));
    }

    #[test]
    fn kirchhoff_momentum_equations_hold() {
        let p = SubmarineParams { j1: 1.3, j3: 0.7, m1: 1.1, m2: 2.5, m3: 0.9 };
        let s = submarine(p).unwrap();
        let w = [0.3, -0.4, 0.8];
        let v = [-0.2, 0.6, 1.1];
        let (pi, pm) = p.momenta(&w, &v);
        let mut x = vec![0.0; 3];
        x.extend_from_slice(&IDENTITY3);
        x.extend_from_slice(&w);
        x.extend_from_slice(&v);
        let d = s.drift().eval(&x);
        let (pi3, pm3, w3, vv3) = (v3(&pi), v3(&pm), v3(&w), v3(&v));
        let want_pi = pi3.cross(&w3) + pm3.cross(&vv3);
        let want_p = pm3.cross(&w3);
        let got_pi = [d[12] * p.j1, d[13] * p.j1, d[14] * p.j3];
        let got_p = [d[15] * p.m1, d[16] * p.m2, d[17] * p.m3];
        assert!(close(&got_pi, want_pi.as_slice(), 1e-14));
        assert!(close(&got_p, want_p.as_slice(), 1e-14));
    }

    #[test]
    fn first_level_products() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let y = s.controls();
        let q = {
            let mut q = vec![0.5, -0.3, 0.2];
            q.extend_from_slice(&IDENTITY3);
            q
        };
        let p23 = s.symmetric_product(&y[1], &y[2]).unwrap().eval(&q);
        let p13 = s.symmetric_product(&y[0], &y[2]).unwrap().eval(&q);
        let p12 = s.symmetric_product(&y[0], &y[1]).unwrap().eval(&q);
        assert!(close(&p23, &[0.0, 0.0, 0.0, 3.0, 0.0, 0.0], 1e-9), "{p23:?}");
        assert!(close(&p13, &[0.0, 0.0, 0.0, 0.0, -1.5, 0.0], 1e-9), "{p13:?}");
        assert!(close(&p12, &[0.0; 6], 1e-9));
        for a in 0..3 {
            let d = s.symmetric_product(&y[a], &y[a]).unwrap().eval(&q);
            assert!(close(&d, &[0.0; 6], 1e-9));
        }
    }

    #[test]
    fn connection_matches_drift() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let states: Vec<Vec<f64>> = (0..5).map(|_| s.sample_state(&mut rng, 2.0)).collect();
        assert!(s.connection_consistency(&states).unwrap() < 1e-12);
    }
}
