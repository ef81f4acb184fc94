use std::sync::OnceLock;

/// Points per Gauss–Legendre panel.
pub const GL_ORDER: usize = 10;
/// Starting panel count for the double-integral functional.
pub const MIN_PANELS: usize = 256;
const MAX_PANELS: usize = 1 << 14;
/// Stop when successive panel doublings agree to this.
pub const DOUBLING_TOL: f64 = 1e-10;

/// Nodes and weights on `[−1, 1]`.
pub fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut x = [0.0; GL_ORDER];
        let mut w = [0.0; GL_ORDER];
        for i in 0..n {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    let (mut q0, mut q1) = (1.0, z);
                    for k in 2..=n {
                        let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                        q0 = q1;
                        q1 = q2;
                    }
                    let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                    x[i] = -z;
                    w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                    break;
                }
            }
        }
        (x, w)
    })
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]` with `panels` panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for k in 0..GL_ORDER {
            s += w[k] * f(mid + 0.5 * h * x[k]);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `(1/2T) ∫₀ᵀ (∫₀^τ α)(∫₀^τ β) dτ` on a fixed panel count.
pub fn lambda_on_panels<A, B>(alpha: A, beta: B, period: f64, panels: usize) -> f64
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    let (x, w) = gauss_legendre();
    let h = period / panels as f64;
    let (mut ia, mut ib) = (0.0, 0.0);
    let mut total = 0.0;
    for p in 0..panels {
        let lo = p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for k in 0..GL_ORDER {
            let tk = mid + 0.5 * h * x[k];
            // primitives at tk: running value plus ∫_lo^tk by a sub-rule
            let sub = tk - lo;
            let (mut pa, mut pb) = (0.0, 0.0);
            for m in 0..GL_ORDER {
                let u = lo + 0.5 * sub * (1.0 + x[m]);
                pa += w[m] * alpha(u);
                pb += w[m] * beta(u);
            }
            let a_k = ia + 0.5 * sub * pa;
            let b_k = ib + 0.5 * sub * pb;
            s += w[k] * a_k * b_k;
        }
        total += 0.5 * h * s;
        let (mut pa, mut pb) = (0.0, 0.0);
        for m in 0..GL_ORDER {
            let u = mid + 0.5 * h * x[m];
            pa += w[m] * alpha(u);
            pb += w[m] * beta(u);
        }
        ia += 0.5 * h * pa;
        ib += 0.5 * h * pb;
    }
    total / (2.0 * period)
}

/// Panel-doubling driver for [`lambda_on_panels`].
pub fn lambda_adaptive<A, B>(alpha: A, beta: B, period: f64) -> f64
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    let mut panels = MIN_PANELS;
    let mut prev = lambda_on_panels(&alpha, &beta, period, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = lambda_on_panels(&alpha, &beta, period, panels);
        if (next - prev).abs() < DOUBLING_TOL {
            return next;
        }
        prev = next;
    }
    log::warn!("lambda quadrature stopped at {panels} panels without meeting {DOUBLING_TOL:e}");
    prev
}
