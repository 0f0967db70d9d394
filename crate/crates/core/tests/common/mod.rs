#![allow(dead_code)]

/// Gauss-Legendre nodes and weights on `[a, b]` (`order >= 2`), by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    assert!(order >= 2);
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=order {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, order as f64 * (x * p1 - p0) / (x * x - 1.0))
    };
    let half = (b - a) / 2.0;
    (0..order)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(x);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(x);
            (a + half * (x + 1.0), half * 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Minimizer of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    (lo + hi) / 2.0
}

#[test]
fn quadrature_integrates_polynomials() {
    let rule = gauss_legendre(6, 0.0, 2.0);
    let integral: f64 = rule.iter().map(|(x, w)| w * x.powi(7)).sum();
    assert!((integral - 2f64.powi(8) / 8.0).abs() < 1e-11);
}
