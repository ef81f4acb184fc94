use serde::{Deserialize, Serialize};

use super::coef::Coef;
use super::reference::ReferenceCurve;
use super::spline::CubicSpline;
use crate::cones::linalg::{columns, lstsq, nnls, residual_inf};
use crate::cones::{HFamily, ZFamily};
use crate::error::{Error, Result};
use crate::models::Faccs;

/// Relative fit tolerance for the required forcing.
pub const FIT_TOL: f64 = 1e-6;
/// Spread below which a fitted coefficient is emitted as a constant.
pub const CONST_TOL: f64 = 1e-9;
/// Default number of grid samples.
pub const DEFAULT_GRID: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// Real coefficients on `𝒵_l`.
    Z,
    /// Nonnegative coefficients on the conic generators of `𝓗_l`.
    H,
}

/// Coefficients `λ_a(t)` with `R(t) = Σ λ_a(t) X_a(γ(t))`, indexed like the
/// family they were fitted on.
#[derive(Debug, Clone)]
pub struct Parameterization {
    pub mode: ParamMode,
    /// Family level the coefficients refer to.
    pub level: usize,
    pub labels: Vec<String>,
    pub coefficients: Vec<Coef>,
    pub grid: Vec<f64>,
    /// Largest sup-norm reconstruction error on the grid.
    pub residual: f64,
}

impl Parameterization {
    /// Number of coefficients that are not identically zero.
    pub fn active(&self) -> usize {
        self.coefficients.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn all_constant(&self) -> bool {
        self.coefficients.iter().all(|c| c.as_const().is_some())
    }
}

/// Builds a coefficient from grid samples: exact constant when the spread is
/// below [`CONST_TOL`], cubic spline otherwise.
pub fn coefficient_from_samples(grid: &[f64], values: &[f64]) -> Result<Coef> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= CONST_TOL {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let c = if mean.abs() <= CONST_TOL { 0.0 } else { mean };
        return Ok(Coef::Const(c));
    }
    Ok(Coef::spline(CubicSpline::new(grid.to_vec(), values.to_vec())?))
}

fn forcing_on_grid(system: &Faccs, gamma: &ReferenceCurve, grid: &[f64]) -> Result<(Vec<Vec<f64>>, f64)> {
    let rs: Vec<Vec<f64>> = grid.iter().map(|&t| gamma.required_forcing(system, t)).collect::<Result<_>>()?;
    let norm = rs.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
    Ok((rs, norm))
}

fn check_grid(gamma: &ReferenceCurve, grid: &[f64]) -> Result<()> {
    let (a, b) = gamma.horizon();
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("parameterization grid must be strictly increasing with ≥ 2 points".into()));
    }
    if grid[0] < a - 1e-12 || grid[grid.len() - 1] > b + 1e-12 {
        return Err(Error::Config(format!("grid leaves the reference horizon [{a}, {b}]")));
    }
    Ok(())
}

/// Pointwise minimum-norm least squares of `R(t)` on the members of `𝒵_l`.
pub fn parameterize_z(
    system: &Faccs,
    gamma: &ReferenceCurve,
    family: &ZFamily,
    level: usize,
    grid: &[f64],
) -> Result<Parameterization> {
    check_grid(gamma, grid)?;
    let members = family.level(level);
    let n = system.base_dim();
    let (rs, norm) = forcing_on_grid(system, gamma, grid)?;
    let tol = (FIT_TOL * norm).max(1e-12);
    let mut samples = vec![Vec::with_capacity(grid.len()); members.len()];
    let mut worst = (0.0_f64, grid[0]);
    for (&t, r) in grid.iter().zip(&rs) {
        let q = &gamma.eval(t)[..n];
        let vals: Vec<Vec<f64>> = members.iter().map(|m| m.eval(q)).collect();
        let a = columns(&vals, system.fiber_dim());
        let x = lstsq(&a, r);
        let res = residual_inf(&a, &x, r);
        if res > worst.0 {
            worst = (res, t);
        }
        for (s, v) in samples.iter_mut().zip(x) {
            s.push(v);
        }
    }
    if worst.0 > tol {
        return Err(Error::Unfittable { time: worst.1, residual: worst.0 });
    }
    let coefficients = samples.iter().map(|s| coefficient_from_samples(grid, s)).collect::<Result<_>>()?;
    Ok(Parameterization {
        mode: ParamMode::Z,
        level,
        labels: members.iter().map(|m| m.label().to_string()).collect(),
        coefficients,
        grid: grid.to_vec(),
        residual: worst.0,
    })
}

/// Pointwise nonnegative least squares of `R(t)` on the conic generators of
/// `𝓗_l`.
pub fn parameterize_h(
    system: &Faccs,
    gamma: &ReferenceCurve,
    family: &HFamily,
    level: usize,
    grid: &[f64],
) -> Result<Parameterization> {
    check_grid(gamma, grid)?;
    let gens = family.level(level);
    let n = system.base_dim();
    let (rs, norm) = forcing_on_grid(system, gamma, grid)?;
    let tol = (FIT_TOL * norm).max(1e-12);
    let mut samples = vec![Vec::with_capacity(grid.len()); gens.len()];
    let mut worst = (0.0_f64, grid[0]);
    for (&t, r) in grid.iter().zip(&rs) {
        let q = &gamma.eval(t)[..n];
        let vals: Vec<Vec<f64>> = gens.iter().map(|g| g.tree.eval(q)).collect();
        let a = columns(&vals, system.fiber_dim());
        let x = sparsest_nonnegative(&a, r, tol);
        let res = residual_inf(&a, &x, r);
        if res > worst.0 {
            worst = (res, t);
        }
        for (s, v) in samples.iter_mut().zip(x) {
            s.push(v.max(0.0));
        }
    }
    if worst.0 > tol {
        return Err(Error::ConicInfeasible { time: worst.1, residual: worst.0 });
    }
    let coefficients = samples
        .iter()
        .map(|s| {
            let c = coefficient_from_samples(grid, s)?;
            Ok(if c.as_const().is_some() { c } else { c.pos_part() })
        })
        .collect::<Result<_>>()?;
    Ok(Parameterization {
        mode: ParamMode::H,
        level,
        labels: gens.iter().map(|g| g.label().to_string()).collect(),
        coefficients,
        grid: grid.to_vec(),
        residual: worst.0,
    })
}

/// NNLS solution; a zero right-hand side gives the zero vector.
fn sparsest_nonnegative(a: &nalgebra::DMatrix<f64>, b: &[f64], tol: f64) -> Vec<f64> {
    if b.iter().all(|x| x.abs() <= tol * 1e-3) {
        return vec![0.0; a.ncols()];
    }
    nnls(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{generate_h, generate_z, sample_states, DEDUPE_TOL};
    use crate::models::{hovercraft, submarine, HovercraftParams, SubmarineParams};
    use crate::synthesis::reference::{hovercraft_sideways, submarine_line, submarine_rest};

    #[test]
    fn submarine_line_coefficients() {
        let p = SubmarineParams::default();
        let s = submarine(p).unwrap();
        let z = generate_z(&s, 2, DEDUPE_TOL, &sample_states(&s, 10, 2.0, 1)).unwrap();
        let g = submarine_line(&p);
        let par = parameterize_z(&s, &g, &z, 2, &g.grid(21)).unwrap();
        assert!(par.all_constant());
        let want = [1.0, -2.0, 0.0, 0.0, 0.0, -2.0 / 9.0];
        for (c, w) in par.coefficients.iter().zip(want) {
            assert!((c.as_const().unwrap() - w).abs() < 1e-12, "{:?}", par.coefficients);
        }
        // level 1 cannot reach the ω₃ direction
        assert!(matches!(parameterize_z(&s, &g, &z, 1, &g.grid(21)), Err(Error::Unfittable { .. })));
    }

    #[test]
    fn admissible_reference_has_zero_coefficients() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let z = generate_z(&s, 2, DEDUPE_TOL, &sample_states(&s, 10, 2.0, 1)).unwrap();
        let g = submarine_rest((0.0, 1.0));
        let par = parameterize_z(&s, &g, &z, 2, &g.grid(11)).unwrap();
        assert_eq!(par.active(), 0);
    }

    #[test]
    fn hovercraft_conic_coefficient() {
        let p = HovercraftParams::default();
        let h = hovercraft(p).unwrap();
        let fam = generate_h(&h, 1, DEDUPE_TOL, &sample_states(&h, 10, 2.0, 1)).unwrap();
        let g = hovercraft_sideways(&p, (0.0, 1.0));
        let par = parameterize_h(&h, &g, &fam, 1, &g.grid(11)).unwrap();
        assert!(par.all_constant());
        let nz: Vec<(usize, f64)> = par
            .coefficients
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_const().filter(|v| *v != 0.0).map(|v| (i, v)))
            .collect();
        assert_eq!(nz.len(), 1, "{nz:?}");
        let (i, lam) = nz[0];
        // the chosen generator is (0, 2c/e, 0), so λ = 1/2
        let v = fam.generators[i].tree.eval(&[0.0, 0.0, 0.0]);
        assert!((v[1] - 2.0 * p.c / p.e).abs() < 1e-8);
        assert!((lam - 0.5).abs() < 1e-9);
        // without cone elements the forcing is infeasible
        assert!(matches!(parameterize_h(&h, &g, &fam, 0, &g.grid(11)), Err(Error::ConicInfeasible { .. })));
    }

    #[test]
    fn constants_detected() {
        let grid = [0.0, 0.5, 1.0];
        let c = coefficient_from_samples(&grid, &[2.0, 2.0 + 1e-12, 2.0]).unwrap().as_const().unwrap();
        assert!((c - 2.0).abs() < 1e-11);
        assert!(coefficient_from_samples(&grid, &[0.0, 1.0, 0.0]).unwrap().as_const().is_none());
    }
}
