//! Ballot-style walk tails, good-set probabilities and the pair-domination
//! bounds, with Monte Carlo checks.
//!
//! A set `A` of size `r` is read as the ±1 walk `S_i = 2|A ∩ [i]| - i`, which
//! is a uniform walk conditioned on `S_m = 2r - m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binom_big, binom_row};
use crate::error::{Error, Result};
use crate::orders::LargeSetChecker;
use crate::stats::{trial_rng, wilson, Proportion};

pub use crate::stats::{entropy_h, entropy_h_inv, gaussian, gaussian_inv};

/// An exact probability with its float rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactProbability {
    pub exact: BigRational,
    pub value: f64,
}

impl ExactProbability {
    fn from_ratio(exact: BigRational) -> Self {
        let value = rational_to_f64(&exact);
        Self { exact, value }
    }

    /// `"num/den"`, always with an explicit denominator.
    pub fn fraction_string(&self) -> String {
        fraction_string(&self.exact)
    }
}

pub fn fraction_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    let (n, d) = (q.numer().magnitude(), q.denom().magnitude());
    let sign = if q.numer() < &BigInt::zero() { -1.0 } else { 1.0 };
    sign * crate::combinatorics::ratio_to_f64(n, d)
}

fn binom_ratio(m: u64, top: i64, bottom: i64) -> BigRational {
    let num = BigInt::from(binom_big(m, top));
    let den = BigInt::from(binom_big(m, bottom));
    BigRational::new(num, den)
}

/// A walk of `m` steps conditioned to end at `s`, with threshold `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkQuery {
    pub m: u32,
    pub s: i64,
    pub d: i64,
}

impl WalkQuery {
    pub fn new(m: u32, s: i64, d: i64) -> Result<Self> {
        if s.unsigned_abs() > m as u64 {
            return Err(Error::Domain(format!("|s| = {} exceeds m = {m}", s.abs())));
        }
        if (m as i64 + s) % 2 != 0 {
            return Err(Error::Domain(format!("m = {m} and s = {s} differ in parity")));
        }
        Ok(Self { m, s, d })
    }

    /// Number of up-steps, `(m + s) / 2`.
    pub fn r(&self) -> i64 {
        (self.m as i64 + self.s) / 2
    }
}

/// `Pr[max_i S_i >= d | S_m = s] = C(m, r - d) / C(m, r)`.
pub fn max_tail_exact(q: WalkQuery) -> Result<ExactProbability> {
    if q.d < q.s.max(0) {
        return Err(Error::Precondition(format!("reflection needs d >= max(s, 0); got d = {}, s = {}", q.d, q.s)));
    }
    Ok(ExactProbability::from_ratio(binom_ratio(q.m as u64, q.r() - q.d, q.r())))
}

/// Fraction of size-`r` subsets of `[m]` that are not `d`-good:
/// `C(m, r - 2d - 1) / C(m, r)`.
pub fn prob_not_good(m: u32, r: u32, d: u32) -> Result<ExactProbability> {
    if r > m {
        return Err(Error::Precondition(format!("r = {r} exceeds m = {m}")));
    }
    if 2 * d as i64 + 1 < 2 * r as i64 - m as i64 {
        return Err(Error::Precondition(format!("need 2d + 1 >= 2r - m (m = {m}, r = {r}, d = {d})")));
    }
    let top = r as i64 - 2 * d as i64 - 1;
    Ok(ExactProbability::from_ratio(binom_ratio(m as u64, top, r as i64)))
}

fn range_limit(m: u32) -> f64 {
    (m as f64).powf(1.0 / 12.0)
}

/// `exp(8αγ - 8γ² + C/m^{1/4})`, the Gaussian-scale bound on not being
/// `γ√m`-good at size `m/2 + α√m`.
pub fn bound_not_good(m: u32, alpha: f64, gamma: f64, c: f64) -> Result<f64> {
    let lim = range_limit(m);
    if alpha.abs() > lim || gamma > lim {
        return Err(Error::Precondition(format!("need |alpha|, gamma <= m^(1/12) = {lim:.4}")));
    }
    bound_not_good_unchecked(m, alpha, gamma, c)
}

/// [`bound_not_good`] without the `m^{1/12}` range guard.
pub fn bound_not_good_unchecked(m: u32, alpha: f64, gamma: f64, c: f64) -> Result<f64> {
    if m == 0 || !(c >= 0.0) {
        return Err(Error::Domain(format!("need m >= 1 and C >= 0 (m = {m}, C = {c})")));
    }
    let m4 = (m as f64).powf(0.25);
    Ok((8.0 * alpha * gamma - 8.0 * gamma * gamma + c / m4).exp())
}

/// The two addends of the union bound on `Pr[¬(A ≪ B)]` and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairBound {
    pub total: f64,
    /// Term for `Ā` failing to be `d₁`-good.
    pub complement_term: f64,
    /// Term for `B` failing to be `d₂`-good.
    pub set_term: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub d1: u64,
    pub d2: u64,
    /// Whether `|α| + β <= m^{1/12}`.
    pub within_range: bool,
}

/// Bound on `Pr[¬(A ≪ B)]` for `|B| = m/2 + α√m`, `|A| = |B| + β√m`.
pub fn pair_bound(m: u32, alpha: f64, beta: f64, c: f64) -> Result<PairBound> {
    let b = pair_bound_unchecked(m, alpha, beta, c)?;
    if !b.within_range {
        return Err(Error::Precondition(format!("need |alpha| + beta <= m^(1/12) = {:.4}", range_limit(m))));
    }
    Ok(b)
}

/// [`pair_bound`] reporting, rather than rejecting, the `m^{1/12}` range.
pub fn pair_bound_unchecked(m: u32, alpha: f64, beta: f64, c: f64) -> Result<PairBound> {
    if beta < alpha.max(-alpha / 2.0) {
        return Err(Error::Precondition(format!("need beta >= max(alpha, -alpha/2) (alpha = {alpha}, beta = {beta})")));
    }
    let gamma1 = (beta - alpha) / 3.0;
    let gamma2 = (2.0 * beta + alpha) / 3.0;
    // |Ā| = m/2 - (α + β)√m.
    let complement_term = bound_not_good_unchecked(m, -(alpha + beta), gamma1, c)?;
    let set_term = bound_not_good_unchecked(m, alpha, gamma2, c)?;
    let sqrt_m = (m as f64).sqrt();
    Ok(PairBound {
        total: complement_term + set_term,
        complement_term,
        set_term,
        gamma1,
        gamma2,
        d1: (gamma1 * sqrt_m).floor().max(0.0) as u64,
        d2: (gamma2 * sqrt_m).floor().max(0.0) as u64,
        within_range: alpha.abs() + beta <= range_limit(m),
    })
}

/// `(16/9)(β - α)(2β + α)`, the exponent of the pair bound.
pub fn pair_exponent(alpha: f64, beta: f64) -> f64 {
    16.0 / 9.0 * (beta - alpha) * (2.0 * beta + alpha)
}

/// Smallest `C >= 0` with `estimate <= 2 exp(-E + C/m^{1/4})` at every point
/// `(m, α, β, estimate)`.
pub fn fit_pair_constant(points: &[(u32, f64, f64, f64)]) -> f64 {
    points
        .iter()
        .filter(|p| p.3 > 0.0)
        .map(|&(m, a, b, est)| (m as f64).powf(0.25) * ((est / 2.0).ln() + pair_exponent(a, b)))
        .fold(0.0, f64::max)
}

/// Smallest `C >= 0` making [`bound_not_good`] dominate the exact values at
/// every point `(m, α, γ, exact)`.
pub fn fit_not_good_constant(points: &[(u32, f64, f64, f64)]) -> f64 {
    points
        .iter()
        .filter(|p| p.3 > 0.0)
        .map(|&(m, a, g, p)| (m as f64).powf(0.25) * (p.ln() - 8.0 * a * g + 8.0 * g * g))
        .fold(0.0, f64::max)
}

/// Sizes for the pair experiment: `r = round(m/2 + α√m)`, `k = ⌊β√m⌋`.
pub fn pair_sizes(m: u32, alpha: f64, beta: f64) -> (u32, u32) {
    let sqrt_m = (m as f64).sqrt();
    let r = (m as f64 / 2.0 + alpha * sqrt_m).round().max(0.0) as u32;
    let k = (beta * sqrt_m).floor().max(0.0) as u32;
    (r, k)
}

/// Seeded estimate of `Pr[¬(A ≪ B)]` for independent uniform `A` of size
/// `r + k` and `B` of size `r`. Trial `t` draws from its own stream, so the
/// count does not depend on how trials are scheduled.
pub fn mc_pair_not_constructible(m: u32, r: u32, k: u32, trials: u64, seed: u64) -> Result<Proportion> {
    if r + k > m {
        return Err(Error::Precondition(format!("r + k = {} exceeds m = {m}", r + k)));
    }
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    let (m_us, na, nb) = (m as usize, (r + k) as usize, r as usize);
    let failures = (0..trials)
        .into_par_iter()
        .map_init(
            || (LargeSetChecker::new(), Vec::with_capacity(na), Vec::with_capacity(nb)),
            |(checker, a, b), t| {
                let mut rng = trial_rng(seed, t);
                a.clear();
                a.extend(sample(&mut rng, m_us, na).iter().map(|i| i + 1));
                b.clear();
                b.extend(sample(&mut rng, m_us, nb).iter().map(|i| i + 1));
                a.sort_unstable();
                b.sort_unstable();
                u64::from(!checker.constructible(m_us, a, b))
            },
        )
        .sum();
    Ok(wilson(failures, trials))
}

/// Smallest degree `r` with `C(m, <= r) >= R·2^m`, and `α̂ = (r - m/2)/√m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeForRate {
    pub r: u32,
    pub alpha_hat: f64,
    pub alpha_limit: f64,
}

pub fn smallest_r_for_rate(m: u32, rate: f64) -> Result<DegreeForRate> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Domain(format!("rate must lie in (0, 1], got {rate}")));
    }
    let target =
        BigRational::from_float(rate).expect("finite rate") * BigRational::from_integer(BigInt::one() << m as usize);
    let mut acc = BigInt::zero();
    let mut r = m;
    for (j, c) in binom_row(m as u64).into_iter().enumerate() {
        acc += BigInt::from(c);
        if BigRational::from_integer(acc.clone()) >= target {
            r = j as u32;
            break;
        }
    }
    let sqrt_m = (m as f64).sqrt();
    Ok(DegreeForRate { r, alpha_hat: (r as f64 - m as f64 / 2.0) / sqrt_m, alpha_limit: gaussian_inv(rate)? / 2.0 })
}

/// First failure found by [`gaussian_tail_bound_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailViolation {
    pub x: f64,
    pub inequality: String,
}

/// Checks `exp(-x²/2)/(C max(x, 1)) <= Φ(-x) <= C exp(-x²/2)` and
/// `Φ^{-1}(y) >= -√(2 ln(C/y))` at `y = Φ(-x)`, for every `x` in the grid.
pub fn gaussian_tail_bound_check(c: f64, grid: &[f64]) -> Result<Option<TailViolation>> {
    if !(c >= 1.0) {
        return Err(Error::Domain(format!("C must be >= 1, got {c}")));
    }
    for &x in grid {
        if !(0.0..=10.0).contains(&x) {
            return Err(Error::Domain(format!("grid point {x} outside [0, 10]")));
        }
        let tail = gaussian(-x);
        let g = (-x * x / 2.0).exp();
        let violation = |what: &str| Some(TailViolation { x, inequality: what.to_string() });
        if g / (c * x.max(1.0)) > tail {
            return Ok(violation("lower"));
        }
        if tail > c * g {
            return Ok(violation("upper"));
        }
        if tail > 0.0 && gaussian_inv(tail)? < -(2.0 * (c / tail).ln()).sqrt() - 1e-12 {
            return Ok(violation("inverse"));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn tail_examples() {
        let q = WalkQuery::new(4, 0, 1).unwrap();
        assert_eq!(max_tail_exact(q).unwrap().exact, frac(2, 3));
        assert_eq!(max_tail_exact(q).unwrap().fraction_string(), "2/3");
        assert_eq!(max_tail_exact(WalkQuery::new(6, 0, 0).unwrap()).unwrap().exact, frac(1, 1));
        assert_eq!(max_tail_exact(WalkQuery::new(6, 0, 0).unwrap()).unwrap().fraction_string(), "1/1");
        assert!(max_tail_exact(WalkQuery::new(6, 2, 1).unwrap()).is_err());
        assert!(WalkQuery::new(5, 0, 1).is_err());
        assert!(WalkQuery::new(3, 5, 1).is_err());
        let k = 5;
        for d in 0..=k {
            let got = max_tail_exact(WalkQuery::new(2 * k, 0, d as i64).unwrap()).unwrap().exact;
            assert_eq!(got, binom_ratio(2 * k as u64, k as i64 - d as i64, k as i64));
        }
    }

    #[test]
    fn not_good_examples() {
        assert_eq!(prob_not_good(2, 1, 0).unwrap().exact, frac(1, 2));
        assert_eq!(prob_not_good(10, 5, 1).unwrap().exact, frac(45, 252));
        assert!(prob_not_good(10, 2, 1).unwrap().exact.is_zero());
        assert!(prob_not_good(10, 9, 1).is_err());
    }

    #[test]
    fn bound_examples() {
        assert!(bound_not_good(100, 0.5, 0.25, 0.0).unwrap() >= 1.0);
        let b = bound_not_good(100, 0.0, 0.5, 0.0).unwrap();
        assert!((b - (-2.0f64).exp()).abs() < 1e-15);
        assert!(bound_not_good(100, 3.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn fitted_constant_dominates_at_400() {
        let exact = prob_not_good(400, 200, 10).unwrap().value;
        let c = fit_not_good_constant(&[(400, 0.0, 0.5, exact)]);
        assert!(bound_not_good(400, 0.0, 0.5, c).unwrap() >= exact * (1.0 - 1e-12));
    }

    #[test]
    fn pair_bound_examples() {
        let b = pair_bound_unchecked(1, 0.0, 1.0, 0.0).unwrap();
        assert!((b.total - 2.0 * (-32.0f64 / 9.0).exp()).abs() < 1e-15);
        assert!((b.complement_term - b.set_term).abs() < 1e-15);
        let flat = pair_bound_unchecked(16, 0.5, 0.5, 1.0).unwrap();
        assert!(flat.total >= 2.0);
        assert!(pair_bound(100, 0.0, 2.0, 0.0).is_err());
        assert!(pair_bound(100, 0.0, 1.0, 0.0).is_ok());
        assert!(pair_bound_unchecked(100, 1.0, 0.5, 0.0).is_err());
        for &(a, bt) in &[(0.3, 0.7), (-0.4, 1.1), (0.0, 0.2)] {
            let p = pair_bound_unchecked(300, a, bt, 0.7).unwrap();
            let want = (-pair_exponent(a, bt) + 0.7 / 300f64.powf(0.25)).exp();
            assert!((p.complement_term - want).abs() < 1e-12 * want.max(1.0));
            assert!((p.set_term - want).abs() < 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn mc_pair_examples() {
        let p = mc_pair_not_constructible(60, 10, 10, 2000, 3).unwrap();
        assert_eq!(p.successes, 0);
        let q = mc_pair_not_constructible(100, 50, 0, 2000, 3).unwrap();
        assert!(q.estimate > 0.0);
        assert_eq!(q, mc_pair_not_constructible(100, 50, 0, 2000, 3).unwrap());
        assert!(mc_pair_not_constructible(10, 6, 5, 10, 0).is_err());
    }

    #[test]
    fn rate_degree_examples() {
        assert_eq!(smallest_r_for_rate(7, 1.0).unwrap().r, 7);
        assert_eq!(smallest_r_for_rate(4, 0.5).unwrap().r, 2);
        assert!(smallest_r_for_rate(4, 0.0).is_err());
        let far = smallest_r_for_rate(10_000, 0.3).unwrap();
        assert!((far.alpha_hat - far.alpha_limit).abs() < 0.02, "{far:?}");
    }

    #[test]
    fn tail_bound_examples() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        assert_eq!(gaussian_tail_bound_check(5.0, &grid).unwrap(), None);
        let v = gaussian_tail_bound_check(1.0, &[3.0]).unwrap().unwrap();
        assert_eq!(v.inequality, "lower");
        assert_eq!(gaussian_tail_bound_check(2.0, &[0.0]).unwrap(), None);
        assert!(gaussian_tail_bound_check(0.5, &grid).is_err());
    }
}
