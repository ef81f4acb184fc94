use std::collections::HashSet;
use std::f64::consts::PI;

use proptest::prelude::*;

use oscitrack::sequences::{lambda_t, lo, pairing, phi, psi, PeriodicFn};

fn trig(period: f64, a: f64, b: f64, k: u32) -> PeriodicFn {
    let w = 2.0 * PI * k as f64 / period;
    PeriodicFn::custom(period, move |t| a * (w * t).sin() + b * (w * t).cos())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phi_zero_mean_and_periodic(i in 1usize..=8, period in 0.5..3.0f64, t in 0.0..1.0f64) {
        let f = phi(i, period).unwrap();
        prop_assert!(f.mean().abs() < 1e-8);
        prop_assert!((f.eval(t) - f.eval(t + period)).abs() < 1e-8 * (1.0 + f.eval(t).abs()));
    }

    #[test]
    fn psi_zero_mean_and_periodic(j in 1usize..=4, period in 0.5..3.0f64, t in 0.0..1.0f64) {
        let f = psi(j, period).unwrap();
        prop_assert!(f.mean().abs() < 1e-8);
        let scale = 1.0 + f.eval(t).abs();
        prop_assert!((f.eval(t) - f.eval(t + period)).abs() < 1e-8 * scale);
    }

    #[test]
    fn psi_doubling(j in 1usize..=5, t in -1.0..1.0f64) {
        let (a, b) = (psi(j + 1, 1.0).unwrap(), psi(j, 1.0).unwrap());
        prop_assert_eq!(a.eval(t), 2.0 * b.eval(2.0 * t));
    }

    #[test]
    fn lambda_is_bilinear(
        alpha in -2.0..2.0f64,
        c in prop::collection::vec(-1.0..1.0f64, 6),
        k in prop::collection::vec(1u32..4, 3),
    ) {
        let period = 1.0;
        let f = trig(period, c[0], c[1], k[0]);
        let g = trig(period, c[2], c[3], k[1]);
        let h = trig(period, c[4], c[5], k[2]);
        let (f2, g2) = (f.clone(), g.clone());
        let comb = PeriodicFn::custom(period, move |t| alpha * f2.eval(t) + g2.eval(t));
        let lhs = lambda_t(&comb, &h).unwrap();
        let rhs = alpha * lambda_t(&f, &h).unwrap() + lambda_t(&g, &h).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }
}

#[test]
fn pairing_injective_on_a_block() {
    let mut seen = HashSet::new();
    for a in 1..=40 {
        for b in 1..=40 {
            assert!(seen.insert(pairing(a, b).unwrap()));
        }
    }
}

#[test]
fn lo_injective_for_each_k() {
    for k in 2..=8 {
        let mut seen = HashSet::new();
        for a in 1..=k {
            for b in a + 1..=k {
                assert!(seen.insert(lo(a, b, k).unwrap()), "k={k} ({a},{b})");
            }
        }
    }
}
