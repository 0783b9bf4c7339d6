//! Oracles shared by the integration tests, written independently of the
//! library's numerics.
#![allow(dead_code)]

/// `Φ(x)` by composite Simpson quadrature of the density over a window of
/// width 12 ending at `-|x|`; the neglected tail is below `e^{-72}` relative.
pub fn normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        return 1.0 - normal_cdf(-x);
    }
    let (lo, hi) = (x - 12.0, x);
    let panels = 20_000;
    let h = (hi - lo) / panels as f64;
    let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// `Φ^{-1}(y)` by bisection on [`normal_cdf`].
pub fn normal_inv(y: f64) -> f64 {
    assert!(y > 0.0 && y < 1.0);
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `p ∈ (0, 1/2]` with `h(p) = y`, by bisection.
pub fn binary_entropy_inv(y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(γ, α, R0, R)` recomputed from the definitions.
pub fn rate_oracle(p: f64, delta: f64) -> (f64, f64, f64, f64) {
    let y = 1.0 - binary_entropy(p) - 2.0 * delta;
    let gamma = normal_inv(y) / 2.0;
    let alpha = 2.0 * gamma - (9.0 / 32.0 * (2.0 / (delta * delta)).ln()).sqrt();
    let r0 = normal_cdf(2.0 * alpha);
    (gamma, alpha, r0, (1.0 - delta) * r0)
}
