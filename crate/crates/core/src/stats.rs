//! Scalar helpers: the standard normal CDF and its inverse, binary entropy,
//! Wilson intervals, compensated sums and per-trial random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `Φ(x)`.
pub fn gaussian(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    standard_normal().cdf(x)
}

/// `Φ^{-1}(p)` for `p ∈ [0, 1]` (infinite at the endpoints).
pub fn gaussian_inv(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("Φ^-1 needs p in [0, 1], got {p}")));
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let mut x = standard_normal().inverse_cdf(p);
    // Two Newton steps tighten the tails to ~1e-15 relative.
    for _ in 0..2 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf > 0.0 {
            x -= (gaussian(x) - p) / pdf;
        }
    }
    Ok(x)
}

/// Binary entropy in bits, `h(0) = h(1) = 0`.
pub fn entropy_h(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("h needs p in [0, 1], got {p}")));
    }
    Ok(h2(p))
}

pub(crate) fn h2(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// The unique `p ∈ [0, 1/2]` with `h(p) = y`.
pub fn entropy_h_inv(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("h^-1 needs y in [0, 1], got {y}")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A binomial proportion with its Wilson 95% score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

pub const Z95: f64 = 1.959963984540054;

pub fn wilson(successes: u64, trials: u64) -> Proportion {
    if trials == 0 {
        return Proportion { successes, trials, estimate: 0.0, ci_low: 0.0, ci_high: 1.0 };
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Proportion {
        successes,
        trials,
        estimate: phat,
        ci_low: (centre - half).max(0.0).min(phat),
        ci_high: (centre + half).min(1.0).max(phat),
    }
}

/// Kahan–Babuška compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Independent random stream for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn normal_values() {
        assert_eq!(gaussian(0.0), 0.5);
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-9] {
            let x = gaussian_inv(p).unwrap();
            assert!((gaussian(x) - p).abs() <= 1e-12, "p={p}");
        }
        assert!(gaussian_inv(1.5).is_err());
        assert_eq!(gaussian_inv(0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_h(0.5).unwrap(), 1.0);
        assert_eq!(entropy_h(0.0).unwrap(), 0.0);
        let p = entropy_h_inv(0.5).unwrap();
        assert!((p - 0.11).abs() < 0.001, "{p}");
        assert!((h2(p) - 0.5).abs() < 1e-14);
        assert!(entropy_h(-0.1).is_err());
    }

    #[test]
    fn wilson_contains_estimate() {
        for &(s, n) in &[(0, 10), (10, 10), (3, 1000), (500, 1000)] {
            let w = wilson(s, n);
            assert!(w.ci_low <= w.estimate && w.estimate <= w.ci_high);
        }
        let w = wilson(0, 1_000_000);
        assert!(w.ci_high < 1e-5);
    }

    #[test]
    fn kahan_beats_naive() {
        let xs = std::iter::once(1.0).chain(std::iter::repeat(1e-16).take(10_000));
        let k: KahanSum = xs.collect();
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: u64 = trial_rng(7, 3).random();
        let b: u64 = trial_rng(7, 3).random();
        let c: u64 = trial_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
