use nalgebra::Matrix3;

/// Row-major 3×3 matrix from nine entries.
pub fn mat3(a: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&a[..9])
}

/// Nearest rotation matrix in the Frobenius norm (polar factor), row-major.
pub fn nearest_rotation(a: &[f64]) -> [f64; 9] {
    let m = mat3(a);
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u2 = u;
        for i in 0..3 {
            u2[(i, 2)] = -u2[(i, 2)];
        }
        r = u2 * vt;
    }
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = r[(i, j)];
        }
    }
    out
}

/// `‖AᵀA − I‖∞` (largest entry in absolute value).
pub fn orthogonality_defect(a: &[f64]) -> f64 {
    let m = mat3(a);
    (m.transpose() * m - Matrix3::identity()).abs().max()
}
