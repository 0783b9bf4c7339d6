//! Exact bit-channel statistics on the BSC for small `m`.
//!
//! With frozen bits at zero, bit `A` sees `U_A + W_A` together with
//! `W_{<A} = (W_B)_{B<A}`, where `W_B = Σ_z E_z ∏_{i∉B} z_i`. Everything here
//! is a functional of the joint law `q` of `(W_A, W_{<A})`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gf2::{monomial_evaluation, subset_sum_transform, AffineCoset, F2Matrix, F2Vector, RowSpace};
use crate::orders::{decoding_order, sets_preceding, RuleInstance, SubsetMask};
use crate::stats::{h2, KahanSum};

/// Largest `m` for the convolution engine.
pub const EXACT_MAX_M: u32 = 4;
/// Largest `m` for the whole-space enumeration engine.
pub const ENUMERATION_MAX_M: u32 = 5;
/// Largest number of directions in a [`PmfTable`].
pub const PMF_MAX_DIRECTIONS: usize = 20;
/// Largest `m` for coset and certificate computations.
pub const COSET_MAX_M: u32 = 12;

/// A binary symmetric channel with crossover probability `p ∈ [0, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    p: f64,
}

impl ChannelSpec {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::Domain(format!("crossover probability {p} outside [0, 1/2]")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p = 0` (noiseless) or `p = 1/2` (useless).
    pub fn is_degenerate(&self) -> bool {
        self.p == 0.0 || self.p == 0.5
    }
}

/// A distribution on `GF(2)^k`, keyed by packed bits (bit `j` = coordinate `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct PmfTable {
    k: usize,
    probs: Vec<f64>,
}

impl PmfTable {
    pub fn point_mass(k: usize) -> Result<Self> {
        if k > PMF_MAX_DIRECTIONS {
            return Err(Error::Size(format!("{k} directions exceed {PMF_MAX_DIRECTIONS}")));
        }
        let mut probs = vec![0.0; 1 << k];
        probs[0] = 1.0;
        Ok(Self { k, probs })
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if !probs.len().is_power_of_two() {
            return Err(Error::Size("table length must be a power of two".into()));
        }
        if probs.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Domain("probabilities must be non-negative".into()));
        }
        let total: KahanSum = probs.iter().copied().collect();
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {}", total.value())));
        }
        Ok(Self { k: probs.len().trailing_zeros() as usize, probs })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, key: usize) -> f64 {
        self.probs[key]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().copied().collect::<KahanSum>().value()
    }

    /// Law of the coordinates listed in `keep` (new bit `j` = old bit `keep[j]`).
    pub fn marginal(&self, keep: &[usize]) -> Result<PmfTable> {
        if keep.iter().any(|&j| j >= self.k) {
            return Err(Error::Domain("marginal coordinate out of range".into()));
        }
        let mut probs = vec![0.0; 1 << keep.len()];
        for (key, &p) in self.probs.iter().enumerate() {
            let new = keep.iter().enumerate().fold(0, |acc, (j, &src)| acc | (key >> src & 1) << j);
            probs[new] += p;
        }
        Ok(PmfTable { k: keep.len(), probs })
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.probs.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    /// `Z` of the binary input `u` observed through `(u + x_0, x_1, …)` with
    /// `x` drawn from this table and `u` uniform.
    pub fn bhattacharyya(&self) -> f64 {
        let s: KahanSum = self.pairs().map(|(a, b)| 2.0 * (a * b).sqrt()).collect();
        s.value().clamp(0.0, 1.0)
    }

    /// Conditional entropy `H(u | observation)` in bits.
    pub fn entropy(&self) -> f64 {
        let s: KahanSum = self.pairs().filter(|(a, b)| a + b > 0.0).map(|(a, b)| (a + b) * h2(a / (a + b))).collect();
        s.value().clamp(0.0, 1.0)
    }

    /// MAP error probability.
    pub fn map_error(&self) -> f64 {
        let s: KahanSum = self.pairs().map(|(a, b)| a.min(b)).collect();
        s.value().clamp(0.0, 0.5)
    }
}

/// Law of `(⟨E, d_0⟩, …, ⟨E, d_{k-1}⟩)` for `E` i.i.d. `Ber(p)`.
pub fn joint_pmf(directions: &[F2Vector], channel: ChannelSpec) -> Result<PmfTable> {
    let k = directions.len();
    let mut table = PmfTable::point_mass(k)?;
    let Some(first) = directions.first() else {
        return Ok(table);
    };
    let n = first.len();
    for d in directions {
        check_dim(n, d.len())?;
    }
    // Coordinates with the same pattern act together: an odd number of
    // flips among t of them has probability (1 - (1-2p)^t) / 2.
    let mut multiplicity = vec![0u32; 1 << k];
    for z in 0..n {
        let pattern = directions.iter().enumerate().fold(0usize, |acc, (j, d)| acc | (d.get(z) as usize) << j);
        multiplicity[pattern] += 1;
    }
    let p = channel.p();
    let mut next = vec![0.0; 1 << k];
    for (pattern, &t) in multiplicity.iter().enumerate().skip(1) {
        if t == 0 {
            continue;
        }
        let q = 0.5 * (1.0 - (1.0 - 2.0 * p).powi(t as i32));
        for (x, slot) in next.iter_mut().enumerate() {
            *slot = (1.0 - q) * table.probs[x] + q * table.probs[x ^ pattern];
        }
        std::mem::swap(&mut table.probs, &mut next);
    }
    Ok(table)
}

/// Coefficient vector of `E` in `W_A`: the evaluation of `x_Ā`.
pub fn w_vector(a: SubsetMask) -> Result<F2Vector> {
    monomial_evaluation(a.complement())
}

/// Joint law of `(W_A, W_{<A})`: bit 0 is `W_A`, bit `j >= 1` is the `j`-th
/// set before `A` in decoding order.
pub fn bit_channel_pmf(a: SubsetMask, channel: ChannelSpec) -> Result<PmfTable> {
    if a.m() > EXACT_MAX_M {
        return Err(Error::Size(format!("pmf engine needs m <= {EXACT_MAX_M}")));
    }
    let mut dirs = vec![w_vector(a)?];
    for b in sets_preceding(a) {
        dirs.push(w_vector(b)?);
    }
    joint_pmf(&dirs, channel)
}

/// `Z_A`, `H_A` and the MAP error of bit `A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitChannelStats {
    pub z: f64,
    pub h: f64,
    pub pe: f64,
}

impl BitChannelStats {
    fn from_pmf(t: &PmfTable) -> Self {
        Self { z: t.bhattacharyya(), h: t.entropy(), pe: t.map_error() }
    }
}

fn check_engine(m: u32, allow_high_cost: bool) -> Result<()> {
    if m <= EXACT_MAX_M || (m == ENUMERATION_MAX_M && allow_high_cost) {
        Ok(())
    } else if m == ENUMERATION_MAX_M {
        Err(Error::Size("m = 5 needs the high-cost flag (about 2^32 steps)".into()))
    } else {
        Err(Error::Size(format!("exact statistics need m <= {ENUMERATION_MAX_M}")))
    }
}

/// Exact statistics of bit `A`. `m = 5` runs the enumeration engine and
/// requires `allow_high_cost`.
pub fn bit_channel_stats(a: SubsetMask, channel: ChannelSpec, allow_high_cost: bool) -> Result<BitChannelStats> {
    check_engine(a.m(), allow_high_cost)?;
    if a.m() <= EXACT_MAX_M {
        return Ok(BitChannelStats::from_pmf(&bit_channel_pmf(a, channel)?));
    }
    let all = enumeration_stats(a.m(), channel)?;
    Ok(all[a.decoding_rank() as usize])
}

pub fn bhattacharyya_exact(a: SubsetMask, channel: ChannelSpec, allow_high_cost: bool) -> Result<f64> {
    Ok(bit_channel_stats(a, channel, allow_high_cost)?.z)
}

pub fn entropy_exact(a: SubsetMask, channel: ChannelSpec, allow_high_cost: bool) -> Result<f64> {
    Ok(bit_channel_stats(a, channel, allow_high_cost)?.h)
}

pub fn map_error_exact(a: SubsetMask, channel: ChannelSpec, allow_high_cost: bool) -> Result<f64> {
    Ok(bit_channel_stats(a, channel, allow_high_cost)?.pe)
}

/// Statistics of every bit, in decoding order.
pub fn all_bit_channel_stats(
    m: u32,
    channel: ChannelSpec,
    allow_high_cost: bool,
) -> Result<Vec<(SubsetMask, BitChannelStats)>> {
    check_engine(m, allow_high_cost)?;
    let order = decoding_order(m)?;
    let stats = if m <= EXACT_MAX_M {
        order
            .iter()
            .map(|&a| Ok(BitChannelStats::from_pmf(&bit_channel_pmf(a, channel)?)))
            .collect::<Result<Vec<_>>>()?
    } else {
        enumeration_stats(m, channel)?
    };
    Ok(order.into_iter().zip(stats).collect())
}

/// Statistics of every bit (decoding order) by one pass over all `2^n`
/// values of `W`. With `W` packed so that the first set is the most
/// significant bit, the conditional law of `W_A` given `W_{<A}` is a pair of
/// sibling subtree sums; `E = V^{-1} W` is updated in O(1) per step.
pub fn enumeration_stats(m: u32, channel: ChannelSpec) -> Result<Vec<BitChannelStats>> {
    if m == 0 || m > ENUMERATION_MAX_M {
        return Err(Error::Size(format!("enumeration engine needs 1 <= m <= {ENUMERATION_MAX_M}")));
    }
    let n = 1usize << m;
    let order = decoding_order(m)?;
    let v = F2Matrix::from_rows(order.iter().map(|&b| w_vector(b)).collect::<Result<_>>()?)?;
    let vinv = v.inverse()?.ok_or_else(|| Error::Domain("W map is singular".into()))?;
    // Column of V^{-1} for coordinate i, as a mask over z.
    let column = |i: usize| (0..n).fold(0u64, |acc, z| acc | (vinv.get(z, i) as u64) << z);
    // cum[t]: XOR of the columns for the t + 1 least significant bits.
    let mut cum = vec![0u64; n];
    let mut acc = 0u64;
    for (t, slot) in cum.iter_mut().enumerate() {
        acc ^= column(n - 1 - t);
        *slot = acc;
    }
    let p = channel.p();
    let weight_prob: Vec<f64> = (0..=n).map(|w| p.powi(w as i32) * (1.0 - p).powi((n - w) as i32)).collect();

    let mut z_acc = vec![KahanSum::default(); n];
    let mut h_acc = vec![KahanSum::default(); n];
    let mut pe_acc = vec![KahanSum::default(); n];
    let mut pending = vec![0.0f64; n + 1];
    let mut e = 0u64;
    let last: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut w = 0u64;
    loop {
        let mut carry = weight_prob[e.count_ones() as usize];
        let mut j = 0;
        while w >> j & 1 == 1 {
            let (l, r) = (pending[j], carry);
            let i = n - 1 - j;
            z_acc[i].add(2.0 * (l * r).sqrt());
            if l + r > 0.0 {
                h_acc[i].add((l + r) * h2(l / (l + r)));
            }
            pe_acc[i].add(l.min(r));
            carry += l;
            j += 1;
        }
        pending[j] = carry;
        if w == last {
            break;
        }
        e ^= cum[w.trailing_ones() as usize];
        w += 1;
    }
    Ok((0..n)
        .map(|i| BitChannelStats {
            z: z_acc[i].value().clamp(0.0, 1.0),
            h: h_acc[i].value().clamp(0.0, 1.0),
            pe: pe_acc[i].value().clamp(0.0, 0.5),
        })
        .collect())
}

/// A multilinear polynomial over GF(2) as its set of monomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultilinearPoly {
    m: u32,
    monomials: BTreeSet<SubsetMask>,
}

impl MultilinearPoly {
    pub fn zero(m: u32) -> Result<Self> {
        SubsetMask::empty(m)?;
        Ok(Self { m, monomials: BTreeSet::new() })
    }

    pub fn monomial(s: SubsetMask) -> Self {
        Self { m: s.m(), monomials: [s].into() }
    }

    /// Sum of monomials; repeated ones cancel.
    pub fn from_monomials<I: IntoIterator<Item = SubsetMask>>(m: u32, monomials: I) -> Result<Self> {
        let mut p = Self::zero(m)?;
        for s in monomials {
            if s.m() != m {
                return Err(Error::Dimension { expected: m as usize, actual: s.m() as usize });
            }
            p.toggle(s);
        }
        Ok(p)
    }

    /// Algebraic normal form of a function given by its evaluation vector.
    pub fn from_evaluation(v: &F2Vector) -> Result<Self> {
        if !v.len().is_power_of_two() {
            return Err(Error::Size("evaluation length must be 2^m".into()));
        }
        let m = v.len().trailing_zeros();
        let mut table = v.to_bytes();
        subset_sum_transform(&mut table);
        Self::from_monomials(
            m,
            table.iter().enumerate().filter(|(_, &c)| c == 1).map(|(s, _)| SubsetMask::from_raw(m, s as u64)),
        )
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn monomials(&self) -> &BTreeSet<SubsetMask> {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.monomials.iter().map(SubsetMask::len).max()
    }

    fn toggle(&mut self, s: SubsetMask) {
        if !self.monomials.remove(&s) {
            self.monomials.insert(s);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.m as usize, other.m as usize)?;
        let monomials = self.monomials.symmetric_difference(&other.monomials).copied().collect();
        Ok(Self { m: self.m, monomials })
    }

    pub fn evaluation(&self) -> Result<F2Vector> {
        let mut table = vec![0u8; 1 << self.m];
        for s in &self.monomials {
            table[s.mask() as usize] ^= 1;
        }
        subset_sum_transform(&mut table);
        F2Vector::from_bytes(&table)
    }
}

impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> =
            self.monomials.iter().map(|s| if s.is_empty() { "1".to_string() } else { format!("x_{{{s}}}") }).collect();
        f.write_str(&terms.join(" + "))
    }
}

/// A bijection of `{0,1}^m`, acting on points `z` (1-based coordinates).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PointTransform {
    /// Swap `z_a` and `z_b`.
    Transposition { a: u32, b: u32 },
    /// `z_b ← z_b + z_a z_{a2}`.
    Shear { b: u32, a: u32, a2: u32 },
    /// Applies the listed maps first to last.
    Composition { steps: Vec<PointTransform> },
    /// `z ↦ image[z]`.
    Explicit { image: Vec<u64> },
}

impl PointTransform {
    pub fn identity() -> Self {
        PointTransform::Composition { steps: Vec::new() }
    }

    pub fn validate(&self, m: u32) -> Result<()> {
        let idx = |i: u32| {
            if i >= 1 && i <= m {
                Ok(())
            } else {
                Err(Error::Domain(format!("coordinate {i} not in [1, {m}]")))
            }
        };
        match self {
            PointTransform::Transposition { a, b } => {
                idx(*a)?;
                idx(*b)?;
                if a == b {
                    return Err(Error::Domain("transposition needs a != b".into()));
                }
            }
            PointTransform::Shear { b, a, a2 } => {
                idx(*a)?;
                idx(*a2)?;
                idx(*b)?;
                if a == a2 || b == a || b == a2 {
                    return Err(Error::Domain("shear needs distinct b, a, a2".into()));
                }
            }
            PointTransform::Composition { steps } => {
                for s in steps {
                    s.validate(m)?;
                }
            }
            PointTransform::Explicit { image } => {
                if image.len() != 1 << m {
                    return Err(Error::Dimension { expected: 1 << m, actual: image.len() });
                }
                let mut seen = vec![false; image.len()];
                for &x in image {
                    if x as usize >= image.len() || std::mem::replace(&mut seen[x as usize], true) {
                        return Err(Error::Domain("explicit map is not a permutation".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// `τ(z)`.
    pub fn map_point(&self, z: u64) -> u64 {
        match self {
            PointTransform::Transposition { a, b } => {
                let (ia, ib) = (a - 1, b - 1);
                let diff = (z >> ia ^ z >> ib) & 1;
                z ^ (diff << ia | diff << ib)
            }
            PointTransform::Shear { b, a, a2 } => z ^ ((z >> (a - 1)) & (z >> (a2 - 1)) & 1) << (b - 1),
            PointTransform::Composition { steps } => steps.iter().fold(z, |acc, s| s.map_point(acc)),
            PointTransform::Explicit { image } => image[z as usize],
        }
    }

    /// `x_S ∘ τ` for the elementary maps; `None` for explicit ones.
    fn monomial_image(&self, s: SubsetMask, out: &mut Vec<SubsetMask>) -> bool {
        match self {
            PointTransform::Transposition { a, b } => {
                let (ha, hb) = (s.contains(*a), s.contains(*b));
                let mut t = s.without(*a).without(*b);
                if ha {
                    t = t.with(*b);
                }
                if hb {
                    t = t.with(*a);
                }
                out.push(t);
                true
            }
            PointTransform::Shear { b, a, a2 } => {
                out.push(s);
                if s.contains(*b) {
                    out.push(s.without(*b).with(*a).with(*a2));
                }
                true
            }
            _ => false,
        }
    }

    fn is_symbolic(&self) -> bool {
        match self {
            PointTransform::Transposition { .. } | PointTransform::Shear { .. } => true,
            PointTransform::Composition { steps } => steps.iter().all(Self::is_symbolic),
            PointTransform::Explicit { .. } => false,
        }
    }
}

fn compose_symbolic(t: &PointTransform, poly: &MultilinearPoly) -> MultilinearPoly {
    match t {
        PointTransform::Composition { steps } => {
            // (P ∘ t_n ∘ … ∘ t_1): substitute the last map first.
            steps.iter().rev().fold(poly.clone(), |p, s| compose_symbolic(s, &p))
        }
        _ => {
            let mut out = MultilinearPoly { m: poly.m, monomials: BTreeSet::new() };
            let mut buf = Vec::with_capacity(2);
            for &s in &poly.monomials {
                buf.clear();
                t.monomial_image(s, &mut buf);
                for &x in &buf {
                    out.toggle(x);
                }
            }
            out
        }
    }
}

/// Evaluation of `P ∘ τ`: entry `z` is entry `τ(z)` of `P`'s evaluation.
pub fn permute_evaluation(t: &PointTransform, v: &F2Vector) -> Result<F2Vector> {
    F2Vector::from_bits((0..v.len() as u64).map(|z| v.get(t.map_point(z) as usize)))
}

/// `P ∘ τ` in multilinear normal form.
pub fn apply_transform(t: &PointTransform, poly: &MultilinearPoly) -> Result<MultilinearPoly> {
    t.validate(poly.m)?;
    if t.is_symbolic() {
        return Ok(compose_symbolic(t, poly));
    }
    MultilinearPoly::from_evaluation(&permute_evaluation(t, &poly.evaluation()?)?)
}

fn check_coset_m(m: u32) -> Result<()> {
    if m == 0 || m > COSET_MAX_M {
        return Err(Error::Size(format!("coset computations need m <= {COSET_MAX_M}")));
    }
    Ok(())
}

/// `𝒞_A = x_Ā + Span{x_B̄ : B < A}` on evaluation vectors.
pub fn monomial_coset(a: SubsetMask) -> Result<AffineCoset> {
    check_coset_m(a.m())?;
    let n = 1usize << a.m();
    let mut space = RowSpace::new(n)?;
    for b in sets_preceding(a) {
        space.insert(&monomial_evaluation(b.complement())?)?;
    }
    AffineCoset::new(&monomial_evaluation(a.complement())?, space)
}

/// `P_C = x_C̄`.
fn p_poly(c: SubsetMask) -> MultilinearPoly {
    MultilinearPoly::monomial(c.complement())
}

/// Checks `P_A ∘ τ ∈ P_B + Span{P_{<B}}` and `P_{<A} ∘ τ ⊆ Span{P_{<B}}`.
///
/// Monomials form a basis, so membership reduces to the support of each
/// image: `x_S` lies in `Span{P_{<B}}` iff `S̄ < B`.
pub fn certify_degradation(a: SubsetMask, b: SubsetMask, t: &PointTransform) -> Result<bool> {
    crate::orders::compare_decoding(&a, &b)?;
    check_coset_m(a.m())?;
    t.validate(a.m())?;
    let before_b = |s: &SubsetMask| s.complement() < b;
    let image_a = apply_transform(t, &p_poly(a))?;
    let target = b.complement();
    if !image_a.monomials.contains(&target) || !image_a.monomials.iter().filter(|s| **s != target).all(before_b) {
        return Ok(false);
    }
    for c in sets_preceding(a) {
        if !apply_transform(t, &p_poly(c))?.monomials.iter().all(before_b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [`certify_degradation`] by row reduction of evaluation vectors.
pub fn certify_degradation_row_space(a: SubsetMask, b: SubsetMask, t: &PointTransform) -> Result<bool> {
    crate::orders::compare_decoding(&a, &b)?;
    t.validate(a.m())?;
    let coset_b = monomial_coset(b)?;
    let image = |c: SubsetMask| permute_evaluation(t, &monomial_evaluation(c.complement())?);
    if !coset_b.contains(&image(a)?)? {
        return Ok(false);
    }
    for c in sets_preceding(a) {
        if !coset_b.space().contains(&image(c)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The point map certifying one rule step from `A`, or `None` for a Rule-2
/// step with `b ∈ {a, a2}` (a deletion, covered by containment instead).
pub fn rule_transform(a: SubsetMask, rule: RuleInstance) -> Result<Option<PointTransform>> {
    rule.apply(a)?;
    Ok(match rule {
        RuleInstance::Rule1 { a, b } => Some(PointTransform::Transposition { a, b }),
        RuleInstance::Rule2 { a, a2, b } if b != a && b != a2 => Some(PointTransform::Shear { b, a, a2 }),
        RuleInstance::Rule2 { .. } => None,
    })
}

/// Searches single transpositions and shears for a certificate of `Z_A >= Z_B`.
pub fn find_elementary_certificate(a: SubsetMask, b: SubsetMask) -> Result<Option<PointTransform>> {
    let m = a.m();
    let mut candidates = vec![PointTransform::identity()];
    for x in 1..=m {
        for y in x + 1..=m {
            candidates.push(PointTransform::Transposition { a: x, b: y });
        }
    }
    for tb in 1..=m {
        for x in 1..=m {
            for y in x + 1..=m {
                if tb != x && tb != y {
                    candidates.push(PointTransform::Shear { b: tb, a: x, a2: y });
                }
            }
        }
    }
    for t in candidates {
        if certify_degradation(a, b, &t)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::entropy_h;

    fn set(m: u32, s: &str) -> SubsetMask {
        SubsetMask::parse(m, s).unwrap()
    }

    fn ch(p: f64) -> ChannelSpec {
        ChannelSpec::new(p).unwrap()
    }

    fn v(s: &str) -> F2Vector {
        s.parse().unwrap()
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelSpec::new(0.6).is_err());
        assert!(ChannelSpec::new(-0.1).is_err());
        assert!(ch(0.0).is_degenerate());
        assert!(!ch(0.1).is_degenerate());
    }

    #[test]
    fn w_vector_examples() {
        assert_eq!(w_vector(set(1, "1")).unwrap(), v("11"));
        assert_eq!(w_vector(set(1, "empty")).unwrap(), v("01"));
    }

    #[test]
    fn joint_pmf_examples() {
        let p = 0.3;
        let t = joint_pmf(&[v("11")], ch(p)).unwrap();
        assert!((t.prob(0) - ((1.0 - p) * (1.0 - p) + p * p)).abs() < 1e-15);
        assert!((t.prob(1) - 2.0 * p * (1.0 - p)).abs() < 1e-15);
        let u = joint_pmf(&[v("1100"), v("0110"), v("0001")], ch(0.5)).unwrap();
        assert!(u.probs().iter().all(|&x| (x - 0.125).abs() < 1e-15));
        let z = joint_pmf(&[v("1101"), v("0111")], ch(0.0)).unwrap();
        assert_eq!(z.prob(0), 1.0);
        let too_many = vec![v("1"); 21];
        assert!(joint_pmf(&too_many, ch(0.1)).is_err());
    }

    #[test]
    fn m1_closed_forms() {
        let z1 = bhattacharyya_exact(set(1, "1"), ch(0.25), false).unwrap();
        assert!((z1 - 15f64.sqrt() / 4.0).abs() < 1e-12);
        let z0 = bhattacharyya_exact(set(1, "empty"), ch(0.25), false).unwrap();
        assert!((z0 - 0.75).abs() < 1e-12);
        let h1 = entropy_exact(set(1, "1"), ch(0.25), false).unwrap();
        assert!((h1 - entropy_h(0.375).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn useless_channel() {
        for (_, s) in all_bit_channel_stats(3, ch(0.5), false).unwrap() {
            assert!((s.z - 1.0).abs() < 1e-12);
            assert!((s.h - 1.0).abs() < 1e-12);
            assert!((s.pe - 0.5).abs() < 1e-12);
        }
        assert!(bhattacharyya_exact(set(5, "1"), ch(0.1), false).is_err());
        assert!(bhattacharyya_exact(set(6, "1"), ch(0.1), true).is_err());
    }

    #[test]
    fn enumeration_matches_pmf_engine() {
        for m in 1..=4 {
            for &p in &[0.05, 0.11, 0.3] {
                let a = all_bit_channel_stats(m, ch(p), false).unwrap();
                let b = enumeration_stats(m, ch(p)).unwrap();
                for ((set, x), y) in a.iter().zip(&b) {
                    assert!((x.z - y.z).abs() < 1e-12, "m={m} p={p} {set}");
                    assert!((x.h - y.h).abs() < 1e-12);
                    assert!((x.pe - y.pe).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn standard_relations() {
        for &p in &[0.02, 0.11, 0.25, 0.4] {
            for (_, s) in all_bit_channel_stats(3, ch(p), false).unwrap() {
                assert!(s.pe <= s.z / 2.0 + 1e-12);
                assert!(s.z * s.z <= s.h + 1e-12);
            }
        }
    }

    #[test]
    fn coset_examples() {
        let x = |s: &str| monomial_evaluation(set(4, s)).unwrap();
        let c = monomial_coset(set(4, "1,2,3,4")).unwrap();
        assert_eq!(c.space().rank(), 0);
        assert!(c.contains(&x("empty")).unwrap());
        let c123 = monomial_coset(set(4, "1,2,3")).unwrap();
        let want = AffineCoset::new(&x("4"), RowSpace::from_vectors(16, [&x("empty")]).unwrap()).unwrap();
        assert_eq!(c123, want);
        let c12 = monomial_coset(set(4, "1,2")).unwrap();
        let span: Vec<F2Vector> = ["empty", "4", "3", "2", "1"].iter().map(|s| x(s)).collect();
        let want = AffineCoset::new(&x("3,4"), RowSpace::from_vectors(16, &span).unwrap()).unwrap();
        assert_eq!(c12, want);
        assert!(!c123.is_subset_of(&monomial_coset(set(4, "1,2,4")).unwrap()).unwrap());
    }

    #[test]
    fn transform_examples() {
        let x = |s: &str| MultilinearPoly::monomial(set(4, s));
        let t = PointTransform::Transposition { a: 3, b: 4 };
        assert_eq!(apply_transform(&t, &x("4")).unwrap(), x("3"));
        let sh = PointTransform::Shear { b: 1, a: 3, a2: 4 };
        assert_eq!(apply_transform(&sh, &x("1")).unwrap(), x("1").add(&x("3,4")).unwrap());
        assert_eq!(apply_transform(&sh, &x("1,2")).unwrap(), x("1,2").add(&x("2,3,4")).unwrap());
        assert_eq!(apply_transform(&sh, &x("2,3")).unwrap(), x("2,3"));
        assert!(apply_transform(&PointTransform::Shear { b: 1, a: 1, a2: 4 }, &x("1")).is_err());
        assert!(apply_transform(&PointTransform::Transposition { a: 2, b: 5 }, &x("1")).is_err());
    }

    #[test]
    fn symbolic_matches_permuted_evaluation() {
        let m = 4;
        let steps = vec![
            PointTransform::Shear { b: 2, a: 1, a2: 3 },
            PointTransform::Transposition { a: 1, b: 4 },
            PointTransform::Shear { b: 4, a: 2, a2: 3 },
        ];
        let comp = PointTransform::Composition { steps };
        let image: Vec<u64> = (0..16).map(|z| comp.map_point(z)).collect();
        let explicit = PointTransform::Explicit { image };
        for seed in 1u32..200 {
            let mons = (0..16).filter(|i| seed.wrapping_mul(2654435761) >> (i + 8) & 1 == 1);
            let p = MultilinearPoly::from_monomials(m, mons.map(|s| SubsetMask::new(m, s).unwrap())).unwrap();
            let sym = apply_transform(&comp, &p).unwrap();
            let gen = apply_transform(&explicit, &p).unwrap();
            assert_eq!(sym, gen);
            let permuted = permute_evaluation(&comp, &p.evaluation().unwrap()).unwrap();
            assert_eq!(sym.evaluation().unwrap(), permuted);
        }
        let bad = PointTransform::Explicit { image: vec![0, 0, 1, 2] };
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn certificate_examples() {
        let t = PointTransform::Transposition { a: 3, b: 4 };
        assert!(certify_degradation(set(4, "1,2,3"), set(4, "1,2,4"), &t).unwrap());
        let sh = PointTransform::Shear { b: 1, a: 3, a2: 4 };
        assert!(certify_degradation(set(4, "2,3,4"), set(4, "1,2"), &sh).unwrap());
        let id = PointTransform::identity();
        assert!(!certify_degradation(set(4, "1,2,3"), set(4, "1,2,4"), &id).unwrap());
        assert!(certify_degradation(set(4, "1,2"), set(4, "1,2"), &id).unwrap());
    }

    #[test]
    fn certificate_routes_agree() {
        let m = 4;
        let order = decoding_order(m).unwrap();
        let ts = [
            PointTransform::identity(),
            PointTransform::Transposition { a: 1, b: 2 },
            PointTransform::Transposition { a: 3, b: 4 },
            PointTransform::Shear { b: 1, a: 3, a2: 4 },
            PointTransform::Shear { b: 2, a: 1, a2: 4 },
        ];
        for a in &order {
            for b in &order {
                for t in &ts {
                    assert_eq!(
                        certify_degradation(*a, *b, t).unwrap(),
                        certify_degradation_row_space(*a, *b, t).unwrap(),
                        "{a} {b} {t:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn rule_transform_examples() {
        let a = set(4, "1,2,3");
        assert_eq!(
            rule_transform(a, RuleInstance::Rule1 { a: 3, b: 4 }).unwrap(),
            Some(PointTransform::Transposition { a: 3, b: 4 })
        );
        assert_eq!(
            rule_transform(set(4, "2,3,4"), RuleInstance::Rule2 { a: 3, a2: 4, b: 1 }).unwrap(),
            Some(PointTransform::Shear { b: 1, a: 3, a2: 4 })
        );
        assert_eq!(rule_transform(a, RuleInstance::Rule2 { a: 2, a2: 3, b: 3 }).unwrap(), None);
        assert!(rule_transform(a, RuleInstance::Rule1 { a: 4, b: 1 }).is_err());
        let found = find_elementary_certificate(set(4, "1,2,3"), set(4, "1,2,4")).unwrap();
        assert!(found.is_some());
    }

    #[test]
    fn pmf_table_properties() {
        let t = PmfTable::from_probs(vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let coarse = t.marginal(&[0]).unwrap();
        assert!(t.bhattacharyya() <= coarse.bhattacharyya() + 1e-15);
        assert!(PmfTable::from_probs(vec![0.5, 0.6]).is_err());
        assert!(PmfTable::from_probs(vec![0.5, 0.2, 0.3]).is_err());
    }

    #[test]
    #[ignore = "about 2^32 steps"]
    fn m5_entropy_sum() {
        let p = 0.11;
        let all = all_bit_channel_stats(5, ch(p), true).unwrap();
        let total: f64 = all.iter().map(|(_, s)| s.h).sum();
        assert!((total - 32.0 * entropy_h(p).unwrap()).abs() < 1e-8, "{total}");
        assert!(all_bit_channel_stats(5, ch(p), false).is_err());
    }

    #[test]
    fn poly_display() {
        let p = MultilinearPoly::from_monomials(4, [set(4, "empty"), set(4, "3,4")]).unwrap();
        assert_eq!(p.to_string(), "x_{3,4} + 1");
        assert_eq!(MultilinearPoly::zero(4).unwrap().to_string(), "0");
    }
}
