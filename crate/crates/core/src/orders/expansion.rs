//! Expansion of `≪` from size `r` to size `r + k`.
//!
//! `A ≪ B` with `|A| = r + k`, `|B| = r` holds iff `T = Ã^{(k)}` lies
//! componentwise below `B`. So `𝒜(𝓑)` is the set of `A` whose `T` falls in
//! the componentwise down-closure of `𝓑`, which is computed once.

use std::collections::{HashMap, HashSet};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{subsets_of_size, tilde_iter, SubsetMask};
use crate::combinatorics::binom;
use crate::error::{Error, Result};
use crate::stats::{trial_rng, wilson};

/// Above this many candidate sets, exact enumeration gives way to sampling.
pub const EXACT_ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEstimate {
    pub ratio: f64,
    pub exact: bool,
    /// Dominating sets found (exact) or sampled hits.
    pub hits: u64,
    /// `C(m, r + k)` (exact) or the sample count.
    pub total: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// All size-`r` sets `T` with `T ≤ B` componentwise for some `B ∈ family`.
/// Componentwise order on equal-size sets is generated by moving one element
/// down by one into a free slot.
pub(crate) fn down_closure(family: &[SubsetMask]) -> HashSet<u64> {
    let mut seen: HashSet<u64> = family.iter().map(|b| b.mask()).collect();
    let mut stack: Vec<u64> = seen.iter().copied().collect();
    while let Some(x) = stack.pop() {
        let mut rest = x;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest &= rest - 1;
            if bit > 1 && x & (bit >> 1) == 0 {
                let y = (x & !bit) | bit >> 1;
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
    }
    seen
}

fn validate(m: u32, r: u32, k: u32, family: &[SubsetMask]) -> Result<()> {
    if r + k > m {
        return Err(Error::Precondition(format!("r + k = {} exceeds m = {m}", r + k)));
    }
    for b in family {
        if b.m() != m {
            return Err(Error::Dimension { expected: m as usize, actual: b.m() as usize });
        }
        if b.len() != r {
            return Err(Error::Precondition(format!("family member {b} has size != {r}")));
        }
    }
    Ok(())
}

/// `|𝒜(𝓑)| / C(m, r + k)` where `𝒜(𝓑) = {A : |A| = r + k, ∃B ∈ 𝓑 : A ≪ B}`.
///
/// Exact when `C(m, r + k) <= EXACT_ENUMERATION_LIMIT`; otherwise samples
/// `samples` uniform sets (per-trial streams of `seed`) if `allow_sampling`.
pub fn expansion_ratio(
    m: u32,
    r: u32,
    k: u32,
    family: &[SubsetMask],
    allow_sampling: bool,
    samples: u64,
    seed: u64,
) -> Result<ExpansionEstimate> {
    validate(m, r, k, family)?;
    let total = binom(m as u64, (r + k) as u64);
    if family.is_empty() {
        return Ok(ExpansionEstimate {
            ratio: 0.0,
            exact: true,
            hits: 0,
            total: total.min(u64::MAX as u128) as u64,
            ci_low: 0.0,
            ci_high: 0.0,
        });
    }
    if binom(m as u64, r as u64) > EXACT_ENUMERATION_LIMIT {
        return Err(Error::Size(format!("C({m}, {r}) too large to close the family")));
    }
    let below = down_closure(family);
    let dominated = |a: SubsetMask| {
        let t = tilde_iter(a, k).expect("size r + k >= k + 1 when r >= 1");
        below.contains(&t.mask())
    };
    if r == 0 {
        // Only ∅ has size 0, and ∅ is reached from ∅ alone.
        let hits = u64::from(k == 0);
        let ratio = hits as f64;
        return Ok(ExpansionEstimate { ratio, exact: true, hits, total: total as u64, ci_low: ratio, ci_high: ratio });
    }
    if total <= EXACT_ENUMERATION_LIMIT {
        let hits = subsets_of_size(m, r + k).filter(|a| dominated(*a)).count() as u64;
        let ratio = hits as f64 / total as f64;
        return Ok(ExpansionEstimate { ratio, exact: true, hits, total: total as u64, ci_low: ratio, ci_high: ratio });
    }
    if !allow_sampling {
        return Err(Error::Infeasible(format!(
            "C({m}, {}) = {total} exceeds the exact limit and sampling is disabled",
            r + k
        )));
    }
    let hits = (0..samples)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, t);
            let mask = sample(&mut rng, m as usize, (r + k) as usize).iter().fold(0u64, |acc, i| acc | 1 << i);
            dominated(SubsetMask::from_raw(m, mask))
        })
        .count() as u64;
    let w = wilson(hits, samples);
    Ok(ExpansionEstimate {
        ratio: w.estimate,
        exact: false,
        hits,
        total: samples,
        ci_low: w.ci_low,
        ci_high: w.ci_high,
    })
}

/// Number of size-`r` sets `B` with `b_i >= t_i`, i.e. `|B ∩ [j]| <= |T ∩ [j]|`
/// for every prefix.
fn count_dominating(m: u32, t: u64, r: u32) -> u128 {
    let r = r as usize;
    let mut ways = vec![0u128; r + 1];
    ways[0] = 1;
    for j in 0..m {
        let cap = (t & ((2u128 << j) - 1) as u64).count_ones() as usize;
        for c in (1..=r.min(j as usize + 1)).rev() {
            ways[c] += ways[c - 1];
        }
        for w in ways.iter_mut().skip(cap + 1) {
            *w = 0;
        }
    }
    ways[r]
}

/// Exact `Pr[A ≪ B]` for independent uniform `A` of size `r + k` and `B` of
/// size `r`, as `(favourable pairs, all pairs)`.
pub fn constructible_pair_fraction(m: u32, r: u32, k: u32) -> Result<(u128, u128)> {
    if r + k > m {
        return Err(Error::Precondition(format!("r + k = {} exceeds m = {m}", r + k)));
    }
    let na = binom(m as u64, (r + k) as u64);
    let nb = binom(m as u64, r as u64);
    if na > EXACT_ENUMERATION_LIMIT {
        return Err(Error::Size(format!("C({m}, {}) too large to enumerate", r + k)));
    }
    if r == 0 {
        return Ok((u128::from(k == 0), na * nb));
    }
    let mut by_t: HashMap<u64, u128> = HashMap::new();
    for a in subsets_of_size(m, r + k) {
        *by_t.entry(tilde_iter(a, k)?.mask()).or_default() += 1;
    }
    let good = by_t.iter().map(|(&t, &c)| c * count_dominating(m, t, r)).sum();
    Ok((good, na * nb))
}
