use nalgebra::{DMatrix, DVector};

/// Default relative singular-value threshold for rank decisions.
pub const SIGMA_TOL: f64 = 1e-8;

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, vectors.len());
    for (c, v) in vectors.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            m[(r, c)] = *x;
        }
    }
    m
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Number of singular values above `sigma_tol · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>, sigma_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > sigma_tol * smax).count(),
        _ => 0,
    }
}

/// Minimum-norm least-squares solution through the SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    if a.ncols() == 0 {
        return Vec::new();
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (1e-12 * smax).max(1e-300);
    let rhs = DVector::from_column_slice(b);
    match svd.solve(&rhs, eps) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => vec![0.0; a.ncols()],
    }
}

pub fn residual_inf(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    (0..a.nrows())
        .map(|r| {
            let fit: f64 = (0..a.ncols()).map(|c| a[(r, c)] * x[c]).sum();
            (b[r] - fit).abs()
        })
        .fold(0.0, f64::max)
}

/// Lawson–Hanson nonnegative least squares: `min ‖Ax − b‖₂` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    let bv = DVector::from_column_slice(b);
    let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1e-300) * bv.amax().max(1.0);
    let tol = 1e-12 * scale * (m.max(n) as f64);
    let mut passive = vec![false; n];
    let gradient = |x: &[f64]| -> DVector<f64> {
        let ax = a * DVector::from_column_slice(x);
        a.transpose() * (&bv - ax)
    };
    let mut w = gradient(&x);
    let mut outer = 0;
    while outer < 3 * n + 10 {
        outer += 1;
        let cand = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        let Some(j) = cand else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;
        let mut inner = 0;
        loop {
            inner += 1;
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let sub = a.select_columns(idx.iter());
            let sp = lstsq(&sub, b);
            let mut s = vec![0.0; n];
            for (k, &i) in idx.iter().enumerate() {
                s[i] = sp[k];
            }
            if idx.iter().all(|&i| s[i] > 0.0) || inner > 3 * n + 10 {
                x = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &i in &idx {
                if s[i] <= 0.0 {
                    let d = x[i] - s[i];
                    if d > 0.0 {
                        alpha = alpha.min(x[i] / d);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for i in 0..n {
                x[i] += alpha * (s[i] - x[i]);
            }
            for &i in &idx {
                if x[i] <= 1e-15 * scale {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
        w = gradient(&x);
    }
    for v in &mut x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_dependent_columns() {
        let m = columns(&[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 3);
        assert_eq!(numerical_rank(&m, SIGMA_TOL), 2);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 2), SIGMA_TOL), 0);
    }

    #[test]
    fn lstsq_min_norm() {
        let m = columns(&[vec![1.0, 0.0], vec![1.0, 0.0]], 2);
        let x = lstsq(&m, &[2.0, 0.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_matches_brute_force_on_small_problems() {
        // brute force: enumerate supports, keep feasible lstsq solutions
        let a = columns(&[vec![1.0, 0.2], vec![0.3, 1.0], vec![-1.0, 0.5], vec![0.0, -1.0]], 2);
        for b in [[1.0, 1.0], [-1.0, 2.0], [0.5, -3.0], [-2.0, -2.0]] {
            let x = nnls(&a, &b);
            assert!(x.iter().all(|v| *v >= 0.0));
            let r = |x: &[f64]| {
                (0..2)
                    .map(|r| (b[r] - (0..4).map(|c| a[(r, c)] * x[c]).sum::<f64>()).powi(2))
                    .sum::<f64>()
            };
            let mut best = f64::INFINITY;
            for mask in 0u32..16 {
                let idx: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
                let sub = a.select_columns(idx.iter());
                let s = lstsq(&sub, &b);
                if s.iter().all(|v| *v >= -1e-12) {
                    let mut full = vec![0.0; 4];
                    for (k, &i) in idx.iter().enumerate() {
                        full[i] = s[k].max(0.0);
                    }
                    best = best.min(r(&full));
                }
            }
            assert!((r(&x) - best).abs() < 1e-10, "{b:?}: {} vs {best}", r(&x));
        }
    }
}
