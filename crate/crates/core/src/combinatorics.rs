//! Binomial coefficients in machine and arbitrary precision.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` in `u128`, zero when `k > n`. Panics on overflow, which cannot
/// happen for `n <= 120`.
pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is always integral at this point.
        acc = acc.checked_mul((n - i) as u128).expect("binomial overflow") / (i as u128 + 1);
    }
    acc
}

/// `C(n, k)` with `C(n, k) = 0` for `k < 0` or `k > n`.
pub fn binom_i(n: i64, k: i64) -> u128 {
    if n < 0 || k < 0 || k > n {
        0
    } else {
        binom(n as u64, k as u64)
    }
}

/// Exact `C(n, k)` for any size, zero outside `0 <= k <= n`.
pub fn binom_big(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// All binomials `C(n, 0..=n)` as big integers.
pub fn binom_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for j in 0..n {
        c = c * (n - j) / (j + 1);
        row.push(c.clone());
    }
    row
}

/// `C(n, <= k)`; clamps `k` into range.
pub fn binom_cumulative(n: u64, k: i64) -> BigUint {
    if k < 0 {
        return BigUint::zero();
    }
    let k = (k as u64).min(n);
    binom_row(n).into_iter().take(k as usize + 1).fold(BigUint::zero(), |a, b| a + b)
}

/// Converts a big integer ratio to `f64` without overflowing either side.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if den.is_zero() {
        return f64::NAN;
    }
    if num.is_zero() {
        return 0.0;
    }
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Serde adapter writing `u128` counts as decimal strings (JSON numbers stop
/// at 64 bits).
pub mod u128_str {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
