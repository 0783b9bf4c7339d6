//! Threshold families, the run-plus-one sandwich, set families whose
//! `≪`-closure is small, and the greedy entropy assignment built on them.
//!
//! With `ℓ = ⌊m/2⌋` and `S_ℓ(B) = 2|B ∩ [ℓ]| − ℓ`, the threshold family is
//! `𝓑_{m,r,k} = {B ∈ C(m,r) : S_ℓ(B) > k}`. Its closure is easy to test:
//! `A ≪ B` for some `B ∈ 𝓑_{m,r0,s}` iff `|A| ≥ r0` and
//! `S_ℓ(Ã^{(|A|−r0)}) > s`, because the only constraint on `B` is prefix
//! domination by `Ã^{(|A|−r0)}`, which can only lower `S_ℓ`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::{Error, Result};
use crate::orders::constructible::tilde_raw;
use crate::orders::expansion::down_closure;
use crate::orders::{
    constructible, decoding_order, rule_instances, subsets_of_size, SubsetMask, EXACT_ENUMERATION_LIMIT,
    MATERIALIZE_MAX_M,
};
use crate::stats::{gaussian_inv, trial_rng};
use crate::walk::smallest_r_for_rate;

/// Largest `m` for which the construction returns the families themselves.
pub const FAMILY_MAX_M: u32 = 20;
/// Largest `m` for [`entropy_assignment`] (one `f64` and one counter per set).
pub const ASSIGN_MAX_M: u32 = 16;
/// Largest `m` at which order consistency is checked on every pair.
pub const EXHAUSTIVE_PAIR_MAX_M: u32 = 10;
/// Sampled pairs above [`EXHAUSTIVE_PAIR_MAX_M`].
pub const DEFAULT_SAMPLED_PAIRS: u64 = 1_000_000;

const SAMPLING_SEED: u64 = 0x6c6f_7765_725f_6264;

fn ell(m: u32) -> u32 {
    m / 2
}

fn s_ell(m: u32, mask: u64) -> i64 {
    let l = ell(m);
    2 * (mask & ((1u64 << l) - 1)).count_ones() as i64 - l as i64
}

fn check_m(m: u32, limit: u32) -> Result<()> {
    if m == 0 || m > limit {
        return Err(Error::Size(format!("m = {m} outside 1..={limit}")));
    }
    Ok(())
}

/// `|𝓑_{m,r,k}| = Σ_{2j−ℓ > k} C(ℓ, j) C(m−ℓ, r−j)`.
pub fn threshold_count(m: u32, r: i64, k: i64) -> u128 {
    if r < 0 || r > m as i64 {
        return 0;
    }
    let l = ell(m) as i64;
    (0..=l.min(r))
        .filter(|&j| 2 * j - l > k)
        .map(|j| binom(l as u64, j as u64) * binom((m as i64 - l) as u64, (r - j) as u64))
        .sum()
}

/// `𝓑_{m,r,k}`; `members` is materialized when `C(m, r) ≤ 10^7`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdFamily {
    pub m: u32,
    pub r: u32,
    pub k: i64,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub count: u128,
    pub members: Option<BTreeSet<SubsetMask>>,
}

impl ThresholdFamily {
    pub fn contains(&self, b: &SubsetMask) -> bool {
        b.m() == self.m && b.len() == self.r && s_ell(self.m, b.mask()) > self.k
    }

    pub fn is_materialized(&self) -> bool {
        self.members.is_some()
    }
}

pub fn threshold_family(m: u32, r: u32, k: i64) -> Result<ThresholdFamily> {
    check_m(m, crate::orders::MAX_M)?;
    if r > m {
        return Err(Error::Domain(format!("r = {r} exceeds m = {m}")));
    }
    let members = if m <= MATERIALIZE_MAX_M && binom(m as u64, r as u64) <= EXACT_ENUMERATION_LIMIT {
        Some(subsets_of_size(m, r).filter(|b| s_ell(m, b.mask()) > k).collect())
    } else {
        None
    };
    Ok(ThresholdFamily { m, r, k, count: threshold_count(m, r as i64, k), members })
}

/// Every size-`target` set that is `≪` some member of `family`.
pub fn closure_up(m: u32, family: &[SubsetMask], target: u32) -> Result<BTreeSet<SubsetMask>> {
    check_m(m, MATERIALIZE_MAX_M)?;
    if target > m {
        return Err(Error::Domain(format!("target size {target} exceeds m = {m}")));
    }
    if binom(m as u64, target as u64) > EXACT_ENUMERATION_LIMIT {
        return Err(Error::Size(format!("C({m}, {target}) sets is too many to enumerate")));
    }
    let mut by_size: BTreeMap<u32, Vec<SubsetMask>> = BTreeMap::new();
    for b in family {
        if b.m() != m {
            return Err(Error::Dimension { expected: m as usize, actual: b.m() as usize });
        }
        if b.len() <= target {
            by_size.entry(b.len()).or_default().push(*b);
        }
    }
    let mut out = BTreeSet::new();
    for (size, members) in by_size {
        if size == 0 {
            // Only ∅ ≪ ∅.
            if target == 0 {
                out.insert(SubsetMask::empty(m)?);
            }
            continue;
        }
        let dominated = down_closure(&members);
        for a in subsets_of_size(m, target) {
            let mut t = a.mask();
            for _ in size..target {
                t = tilde_raw(m, t);
            }
            if dominated.contains(&t) {
                out.insert(a);
            }
        }
    }
    Ok(out)
}

/// Membership in the `≪`-closure of `𝓑_{m,r0,s}`.
pub fn in_threshold_closure(a: &SubsetMask, r0: u32, s: i64) -> bool {
    let m = a.m();
    let size = a.len();
    if size < r0 {
        return false;
    }
    if r0 == 0 {
        return size == 0 && -(ell(m) as i64) > s;
    }
    let mut t = a.mask();
    for _ in r0..size {
        t = tilde_raw(m, t);
    }
    s_ell(m, t) > s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichWitness {
    /// `"left"` for `𝓑_{m,r+1,k} ⊄ 𝒜`, `"right"` for `𝒜 ⊄ 𝓑_{m,r+1,k−2}`.
    pub containment: String,
    pub set: SubsetMask,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichOutcome {
    pub m: u32,
    pub r: u32,
    pub k: i64,
    pub holds: bool,
    /// The left containment is only claimed when `ℓ + k < 2r`.
    pub left_checked: bool,
    pub closure_size: usize,
    pub witness: Option<SandwichWitness>,
}

/// Checks `𝓑_{m,r+1,k} ⊆ 𝒜_{m,r,k} ⊆ 𝓑_{m,r+1,k−2}` by enumeration.
pub fn sandwich_check(m: u32, r: u32, k: i64) -> Result<SandwichOutcome> {
    check_m(m, MATERIALIZE_MAX_M)?;
    if r >= m {
        return Err(Error::Domain(format!("need r < m, got r = {r}, m = {m}")));
    }
    let base = threshold_family(m, r, k)?;
    let members: Vec<SubsetMask> = base
        .members
        .ok_or_else(|| Error::Size(format!("C({m}, {r}) sets is too many to enumerate")))?
        .into_iter()
        .collect();
    let closure = closure_up(m, &members, r + 1)?;
    let left_checked = (ell(m) as i64) + k < 2 * r as i64;
    let mut witness = None;
    if left_checked {
        witness = subsets_of_size(m, r + 1)
            .find(|a| s_ell(m, a.mask()) > k && !closure.contains(a))
            .map(|set| SandwichWitness { containment: "left".into(), set });
    }
    if witness.is_none() {
        witness = closure
            .iter()
            .find(|a| s_ell(m, a.mask()) <= k - 2)
            .map(|&set| SandwichWitness { containment: "right".into(), set });
    }
    Ok(SandwichOutcome { m, r, k, holds: witness.is_none(), left_checked, closure_size: closure.len(), witness })
}

/// The parameter choice `k = ⌈4√m⌉`, `s = ⌈γ√m⌉` with the smallest
/// admissible `γ′` and then `γ` (both clamped at 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticChoice {
    pub k: u32,
    pub gamma_prime: f64,
    pub gamma: f64,
    pub s: i64,
    /// `r − k ≥ 0` and the resulting family meets both constraints at this `m`.
    pub feasible: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerSetsReport {
    pub m: u32,
    pub rate: f64,
    pub eps: f64,
    pub r: u32,
    pub alpha: f64,
    pub asymptotic: AsymptoticChoice,
    /// `"asymptotic"` or `"search"`.
    pub source: String,
    pub k: u32,
    pub s: i64,
    pub r0: u32,
    /// Exact counts by enumeration; otherwise certified bounds (`b_count` a
    /// lower bound, `a_count` an upper bound).
    pub exact: bool,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub n: u128,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub low_total: u128,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub b0_count: u128,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub b_count: u128,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub a_count: u128,
    pub delta_hat: f64,
    pub a_fraction: f64,
    pub within_eps: bool,
}

/// The families `𝓑 = 𝒜 ∩ C(m, ≤ r)` and `𝒜`, in decoding order.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerSets {
    pub report: LowerSetsReport,
    pub b_family: Option<Vec<SubsetMask>>,
    pub a_family: Option<Vec<SubsetMask>>,
}

/// Per `r0`, histograms of `S_ℓ(Ã^{(|A|−r0)})` over all `A` and over `|A| ≤ r`.
struct ClosureHistogram {
    all: Vec<Vec<u128>>,
    low: Vec<Vec<u128>>,
}

impl ClosureHistogram {
    fn build(m: u32, r: u32) -> Self {
        let l = ell(m) as usize;
        let width = 2 * l + 1;
        let empty = || (vec![vec![0u128; width]; m as usize + 1], vec![vec![0u128; width]; m as usize + 1]);
        let (all, low) = (0..1u64 << m)
            .into_par_iter()
            .fold(empty, |(mut all, mut low), a| {
                let size = a.count_ones();
                let mut t = a;
                let mut cur = size;
                loop {
                    let h = (s_ell(m, t) + l as i64) as usize;
                    all[cur as usize][h] += 1;
                    if size <= r {
                        low[cur as usize][h] += 1;
                    }
                    if cur < 2 {
                        break;
                    }
                    t = tilde_raw(m, t);
                    cur -= 1;
                }
                (all, low)
            })
            .reduce(empty, |(mut a1, mut l1), (a2, l2)| {
                for (x, y) in a1.iter_mut().flatten().zip(a2.iter().flatten()) {
                    *x += y;
                }
                for (x, y) in l1.iter_mut().flatten().zip(l2.iter().flatten()) {
                    *x += y;
                }
                (a1, l1)
            });
        // Sets of size 1 stop at r0 = 1, so r0 = 0 only ever sees ∅.
        Self { all, low }
    }

    fn above(row: &[u128], m: u32, s: i64) -> u128 {
        let l = ell(m) as i64;
        row.iter().enumerate().filter(|(h, _)| *h as i64 - l > s).map(|(_, c)| c).sum()
    }

    fn counts(&self, m: u32, r0: u32, s: i64) -> (u128, u128) {
        (Self::above(&self.low[r0 as usize], m, s), Self::above(&self.all[r0 as usize], m, s))
    }
}

/// Certified `(lower bound on |𝓑|, upper bound on |𝒜|)` from the sandwich.
fn bounded_counts(m: u32, r: u32, r0: u32, s: i64) -> (u128, u128) {
    let l = ell(m) as i64;
    let mut b = threshold_count(m, r0 as i64, s);
    for size in r0 + 1..=r {
        // A singleton is not ≪ ∅, so the chain cannot start at size 0.
        if size == 1 || l + s >= 2 * (size as i64 - 1) {
            break;
        }
        b += threshold_count(m, size as i64, s);
    }
    let a = (r0..=m).map(|size| threshold_count(m, size as i64, s - 2 * (size - r0) as i64)).sum();
    (b, a)
}

fn asymptotic_choice(m: u32, alpha: f64, eps: f64) -> Result<(u32, f64, f64, i64)> {
    let sqrt_m = (m as f64).sqrt();
    let k = (4.0 * sqrt_m).ceil() as u32;
    let q = gaussian_inv((eps / 3.0).min(1.0))?;
    let gamma_prime = ((8.0 - 2.0 * alpha - q) / 2.0).max(0.0);
    let gamma = (2.0 * gamma_prime - q / std::f64::consts::SQRT_2).max(0.0);
    Ok((k, gamma_prime, gamma, (gamma * sqrt_m).ceil() as i64))
}

/// Builds `𝓑₀ = 𝓑_{m, r−k, s}` and its closures. The asymptotic parameter
/// choice is tried first; when it is infeasible at this `m` the pair
/// `(k, s)` is searched to maximize `δ̂` subject to `|𝒜| ≤ εn`, preferring
/// smaller `k` and then smaller `s`.
pub fn lower_sets_construction(m: u32, rate: f64, eps: f64) -> Result<LowerSets> {
    check_m(m, crate::orders::MAX_M)?;
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Domain(format!("rate must lie in (0, 1), got {rate}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    let r = smallest_r_for_rate(m, rate)?.r;
    let alpha = gaussian_inv(rate)? / 2.0;
    let n: u128 = 1u128 << m;
    let low_total: u128 = (0..=r).map(|j| binom(m as u64, j as u64)).sum();
    let exact = m <= MATERIALIZE_MAX_M;
    let hist = exact.then(|| ClosureHistogram::build(m, r));
    let counts = |r0: u32, s: i64| match &hist {
        Some(h) => h.counts(m, r0, s),
        None => bounded_counts(m, r, r0, s),
    };
    let budget = eps * n as f64;
    let admissible = |b: u128, a: u128| b > 0 && a as f64 <= budget;

    let (ak, gamma_prime, gamma, as_) = asymptotic_choice(m, alpha, eps)?;
    let mut asymptotic = AsymptoticChoice { k: ak, gamma_prime, gamma, s: as_, feasible: false, reason: None };
    let mut chosen = None;
    if ak > r {
        asymptotic.reason = Some(format!("k = {ak} exceeds r = {r}"));
    } else {
        let (b, a) = counts(r - ak, as_);
        if admissible(b, a) {
            asymptotic.feasible = true;
            chosen = Some(("asymptotic", ak, as_, b, a));
        } else {
            asymptotic.reason = Some(format!("|B| = {b}, |A| = {a} against eps*n = {budget}"));
        }
    }
    if chosen.is_none() {
        let l = ell(m) as i64;
        for k in 0..=r {
            for s in -l - 1..=l {
                let (b, a) = counts(r - k, s);
                if admissible(b, a) && chosen.map_or(true, |c: (&str, u32, i64, u128, u128)| b > c.3) {
                    chosen = Some(("search", k, s, b, a));
                }
            }
        }
    }
    let (source, k, s, b_count, a_count) = chosen.ok_or_else(|| {
        Error::Infeasible(format!("no (k, s) gives |A| <= eps*n with |B| > 0 at m = {m}, R = {rate}, eps = {eps}"))
    })?;
    let r0 = r - k;
    let report = LowerSetsReport {
        m,
        rate,
        eps,
        r,
        alpha,
        asymptotic,
        source: source.into(),
        k,
        s,
        r0,
        exact,
        n,
        low_total,
        b0_count: threshold_count(m, r0 as i64, s),
        b_count,
        a_count,
        delta_hat: b_count as f64 / low_total as f64,
        a_fraction: a_count as f64 / n as f64,
        within_eps: a_count as f64 <= budget,
    };
    let (b_family, a_family) = if m <= FAMILY_MAX_M {
        let a: Vec<SubsetMask> = decoding_order(m)?.into_iter().filter(|x| in_threshold_closure(x, r0, s)).collect();
        let b = a.iter().copied().filter(|x| x.len() <= r).collect();
        (Some(b), Some(a))
    } else {
        (None, None)
    };
    Ok(LowerSets { report, b_family, a_family })
}

/// Successors of `x` under a generating set of `≪`: adjacent Rule-1 moves
/// and Rule-2 steps that insert the smallest free element. Every rule step
/// is a chain of these.
fn generator_successors(m: u32, x: u64) -> impl Iterator<Item = u64> {
    let adjacent = (0..m.saturating_sub(1))
        .filter(move |&i| x >> i & 1 == 1 && x >> (i + 1) & 1 == 0)
        .map(move |i| x ^ (0b11 << i));
    let bits: Vec<u32> = (0..m).filter(|&i| x >> i & 1 == 1).collect();
    let pairs = (0..bits.len()).flat_map(move |i| {
        let bits = bits.clone();
        (i + 1..bits.len()).map(move |j| {
            let rest = x & !(1 << bits[i]) & !(1 << bits[j]);
            rest | 1 << (!rest).trailing_zeros()
        })
    });
    adjacent.chain(pairs)
}

/// Entropy values `H(A) ∈ [0, 1]`, indexed by mask.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyAssignment {
    pub m: u32,
    values: Vec<f64>,
}

impl EntropyAssignment {
    pub fn zeros(m: u32) -> Result<Self> {
        check_m(m, ASSIGN_MAX_M)?;
        Ok(Self { m, values: vec![0.0; 1 << m] })
    }

    pub fn get(&self, a: &SubsetMask) -> f64 {
        self.values[a.mask() as usize]
    }

    pub fn set(&mut self, a: &SubsetMask, value: f64) -> Result<()> {
        if a.m() != self.m {
            return Err(Error::Dimension { expected: self.m as usize, actual: a.m() as usize });
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!("H must lie in [0, 1], got {value}")));
        }
        self.values[a.mask() as usize] = value;
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().copied().collect::<crate::stats::KahanSum>().value()
    }

    pub fn fractional_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0 && v != 1.0).count()
    }

    /// CSV with header `set,value`, rows in decoding order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["set", "value"]).map_err(csv_error)?;
        for a in decoding_order(self.m)? {
            w.write_record([a.to_string(), self.get(&a).to_string()]).map_err(csv_error)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses [`Self::to_csv`] output; omitted sets are 0.
    pub fn from_csv(m: u32, text: &str) -> Result<Self> {
        let mut out = Self::zeros(m)?;
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("expected 2 fields, got {}", rec.len())));
            }
            let a = SubsetMask::parse(m, &rec[0])?;
            let v: f64 = rec[1].trim().parse().map_err(|e| Error::Parse(format!("{e}")))?;
            out.set(&a, v)?;
        }
        Ok(out)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Starts from `H = 1` on `ones` (which must be closed under `≪`-predecessors)
/// and fills `≪`-minimal remaining sets, latest in decoding order first,
/// until the total reaches `target`.
pub fn greedy_entropy_fill(m: u32, ones: &BTreeSet<SubsetMask>, target: f64) -> Result<EntropyAssignment> {
    check_m(m, ASSIGN_MAX_M)?;
    let n = 1usize << m;
    if !(0.0..=n as f64).contains(&target) {
        return Err(Error::Domain(format!("target {target} outside [0, {n}]")));
    }
    if ones.len() as f64 > target + 1e-9 {
        return Err(Error::Infeasible(format!("|A| = {} exceeds the entropy budget {target}", ones.len())));
    }
    let mut filled = vec![false; n];
    for a in ones {
        if a.m() != m {
            return Err(Error::Dimension { expected: m as usize, actual: a.m() as usize });
        }
        filled[a.mask() as usize] = true;
    }
    // Number of generator predecessors not yet filled.
    let mut pending = vec![0u32; n];
    for x in 0..n as u64 {
        for y in generator_successors(m, x) {
            if !filled[x as usize] {
                if filled[y as usize] {
                    return Err(Error::Precondition(format!(
                        "initial family is not closed: {} ≪ {} but only the latter is included",
                        SubsetMask::new(m, x)?,
                        SubsetMask::new(m, y)?
                    )));
                }
                pending[y as usize] += 1;
            }
        }
    }
    let mut out = EntropyAssignment::zeros(m)?;
    let mut ready = BTreeSet::new();
    for x in 0..n as u64 {
        if filled[x as usize] {
            out.values[x as usize] = 1.0;
        } else if pending[x as usize] == 0 {
            ready.insert(SubsetMask::new(m, x)?);
        }
    }
    let mut total = ones.len() as f64;
    while target - total > 1e-12 {
        let a =
            ready.pop_last().ok_or_else(|| Error::Infeasible("ran out of sets before reaching the target".into()))?;
        let h = (target - total).min(1.0);
        out.values[a.mask() as usize] = h;
        total += h;
        for y in generator_successors(m, a.mask()) {
            pending[y as usize] -= 1;
            if pending[y as usize] == 0 {
                ready.insert(SubsetMask::new(m, y)?);
            }
        }
    }
    Ok(out)
}

/// [`lower_sets_construction`] followed by [`greedy_entropy_fill`] to `εn`.
pub fn entropy_assignment(m: u32, rate: f64, eps: f64) -> Result<(EntropyAssignment, LowerSetsReport)> {
    check_m(m, ASSIGN_MAX_M)?;
    let sets = lower_sets_construction(m, rate, eps)?;
    let a: BTreeSet<SubsetMask> = sets.a_family.expect("materialized below FAMILY_MAX_M").into_iter().collect();
    let assignment = greedy_entropy_fill(m, &a, eps * (1u64 << m) as f64)?;
    Ok((assignment, sets.report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub sampled_pairs: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { sampled_pairs: DEFAULT_SAMPLED_PAIRS, seed: SAMPLING_SEED }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// 1 order consistency, 2 fractional count, 3 total, 4 density at sizes `≤ r`.
    pub bullet: u8,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentCheck {
    pub ok: bool,
    pub violation: Option<Violation>,
    pub pairs_checked: u64,
    pub exhaustive: bool,
    pub fractional: usize,
    pub sum: f64,
    pub target: f64,
    pub r: u32,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub ones_low: u128,
    #[serde(with = "crate::combinatorics::u128_str")]
    pub low_total: u128,
    pub delta_hat: f64,
}

pub fn verify_assignment(h: &EntropyAssignment, rate: f64, eps: f64, delta: f64) -> Result<AssignmentCheck> {
    verify_assignment_with(h, rate, eps, delta, VerifyOptions::default())
}

fn order_violation(h: &EntropyAssignment, a: SubsetMask, b: SubsetMask) -> Option<Violation> {
    (h.get(&a) < h.get(&b)).then(|| Violation {
        bullet: 1,
        detail: format!("{a} ≪ {b} but H({a}) = {} < H({b}) = {}", h.get(&a), h.get(&b)),
    })
}

/// Order consistency: every pair when `m ≤ 10`; above that every generator
/// edge (which implies all pairs) plus sampled pairs as an independent check.
pub fn verify_assignment_with(
    h: &EntropyAssignment,
    rate: f64,
    eps: f64,
    delta: f64,
    opts: VerifyOptions,
) -> Result<AssignmentCheck> {
    let m = h.m;
    let n = 1u64 << m;
    let r = smallest_r_for_rate(m, rate)?.r;
    let sets: Vec<SubsetMask> = (0..n).map(|x| SubsetMask::new(m, x)).collect::<Result<_>>()?;
    let exhaustive = m <= EXHAUSTIVE_PAIR_MAX_M;
    let mut violation = None;
    let mut pairs_checked = 0u64;
    if exhaustive {
        violation =
            sets.par_iter().find_map_first(|&a| {
                sets.iter().find_map(|&b| {
                    if constructible(&a, &b).unwrap_or(false) {
                        order_violation(h, a, b)
                    } else {
                        None
                    }
                })
            });
        pairs_checked = n * n;
    } else {
        for &a in &sets {
            for y in generator_successors(m, a.mask()) {
                pairs_checked += 1;
                if let Some(v) = order_violation(h, a, sets[y as usize]) {
                    violation = Some(v);
                    break;
                }
            }
            if violation.is_some() {
                break;
            }
        }
        if violation.is_none() {
            violation = (0..opts.sampled_pairs).into_par_iter().find_map_first(|t| {
                let mut rng = trial_rng(opts.seed, t);
                let a = sets[rng.random_range(0..n) as usize];
                let b = if t % 2 == 0 {
                    sets[rng.random_range(0..n) as usize]
                } else {
                    // Walk a few rule steps so that a ≪ b.
                    let mut b = a;
                    for _ in 0..rng.random_range(1..=4) {
                        let next = rule_instances(b);
                        if next.is_empty() {
                            break;
                        }
                        b = next[rng.random_range(0..next.len())].1;
                    }
                    b
                };
                if constructible(&a, &b).unwrap_or(false) {
                    order_violation(h, a, b)
                } else {
                    None
                }
            });
            pairs_checked += opts.sampled_pairs;
        }
    }
    let fractional = h.fractional_count();
    let sum = h.sum();
    let target = eps * n as f64;
    let low_total: u128 = (0..=r).map(|j| binom(m as u64, j as u64)).sum();
    let ones_low = sets.iter().filter(|a| a.len() <= r && h.get(a) == 1.0).count() as u128;
    let delta_hat = ones_low as f64 / low_total as f64;
    if violation.is_none() && fractional > 1 {
        violation = Some(Violation { bullet: 2, detail: format!("{fractional} fractional values") });
    }
    if violation.is_none() && (sum - target).abs() > 1e-9 {
        violation = Some(Violation { bullet: 3, detail: format!("sum {sum} differs from eps*n = {target}") });
    }
    if violation.is_none() && (ones_low as f64) < delta * low_total as f64 {
        violation = Some(Violation {
            bullet: 4,
            detail: format!("{ones_low} of {low_total} sets of size <= {r} have H = 1, below delta = {delta}"),
        });
    }
    Ok(AssignmentCheck {
        ok: violation.is_none(),
        violation,
        pairs_checked,
        exhaustive,
        fractional,
        sum,
        target,
        r,
        ones_low,
        low_total,
        delta_hat,
    })
}
