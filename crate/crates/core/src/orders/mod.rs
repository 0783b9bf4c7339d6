//! Subsets of `[m]`, the decoding order, and the constructible order.
//!
//! Elements are 1-based (`i ∈ [m]`) and stored as bit `i - 1` of a mask.
//! The derived [`Ord`] on [`SubsetMask`] *is* the decoding order: larger sets
//! come first, and equal-size sets are compared reverse-lexicographically,
//! which for masks is plain numeric order.

pub(crate) mod constructible;
pub(crate) mod expansion;

pub use constructible::{
    constructible, constructible_bfs_oracle, dominance_sufficient, is_d_good, reachable_from, rule1_successors,
    rule2_successors, rule_instances, tilde, tilde_iter, LargeSetChecker, RuleInstance, BFS_MAX_M,
};
pub use expansion::{constructible_pair_fraction, expansion_ratio, ExpansionEstimate, EXACT_ENUMERATION_LIMIT};

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::{Error, Result};

/// Largest `m` a [`SubsetMask`] can represent.
pub const MAX_M: u32 = 64;

/// Largest `m` for which the full decoding order is materialized.
pub const MATERIALIZE_MAX_M: u32 = 24;

/// A subset `A ⊆ [m]` packed into a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SubsetMask {
    m: u8,
    mask: u64,
}

fn full_mask(m: u32) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl SubsetMask {
    pub fn new(m: u32, mask: u64) -> Result<Self> {
        if m == 0 || m > MAX_M {
            return Err(Error::Size(format!("m = {m} outside 1..={MAX_M}")));
        }
        if mask & !full_mask(m) != 0 {
            return Err(Error::Domain(format!("mask {mask:#x} has bits beyond m = {m}")));
        }
        Ok(Self { m: m as u8, mask })
    }

    pub fn empty(m: u32) -> Result<Self> {
        Self::new(m, 0)
    }

    pub fn full(m: u32) -> Result<Self> {
        Self::new(m, full_mask(m))
    }

    /// Builds a set from 1-based elements.
    pub fn from_elements<I: IntoIterator<Item = u32>>(m: u32, elements: I) -> Result<Self> {
        let mut mask = 0u64;
        for e in elements {
            if e == 0 || e > m {
                return Err(Error::Domain(format!("element {e} not in [1, {m}]")));
            }
            mask |= 1 << (e - 1);
        }
        Self::new(m, mask)
    }

    pub(crate) fn from_raw(m: u32, mask: u64) -> Self {
        debug_assert!(mask & !full_mask(m) == 0);
        Self { m: m as u8, mask }
    }

    pub fn m(&self) -> u32 {
        self.m as u32
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, i: u32) -> bool {
        i >= 1 && i <= self.m() && self.mask >> (i - 1) & 1 == 1
    }

    /// Elements in ascending order.
    pub fn elements(&self) -> impl Iterator<Item = u32> + '_ {
        let mut rest = self.mask;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros();
                rest &= rest - 1;
                Some(i + 1)
            }
        })
    }

    pub fn complement(&self) -> Self {
        Self::from_raw(self.m(), !self.mask & full_mask(self.m()))
    }

    pub fn with(&self, i: u32) -> Self {
        Self::from_raw(self.m(), self.mask | 1 << (i - 1))
    }

    pub fn without(&self, i: u32) -> Self {
        Self::from_raw(self.m(), self.mask & !(1 << (i - 1)))
    }

    pub fn is_superset_of(&self, other: &Self) -> bool {
        self.mask & other.mask == other.mask
    }

    /// `|A ∩ [i]|`.
    pub fn prefix_count(&self, i: u32) -> u32 {
        (self.mask & full_mask(i.min(self.m()))).count_ones()
    }

    /// Height `S_i(A) = 2|A ∩ [i]| - i` of the ±1 walk that steps up on members.
    pub fn walk_height(&self, i: u32) -> i64 {
        2 * self.prefix_count(i) as i64 - i as i64
    }

    /// Parses `"2,3"` or `"empty"`.
    pub fn parse(m: u32, s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "empty" {
            return Self::empty(m);
        }
        let mut elements = Vec::new();
        for part in s.split(',') {
            let e: u32 = part.trim().parse().map_err(|_| Error::Parse(format!("bad set element {part:?} in {s:?}")))?;
            if elements.contains(&e) {
                return Err(Error::Parse(format!("duplicate element {e} in {s:?}")));
            }
            elements.push(e);
        }
        Self::from_elements(m, elements)
    }

    /// Zero-based position of this set in the decoding order of `P(m)`.
    pub fn decoding_rank(&self) -> u128 {
        let m = self.m() as u64;
        let size = self.len() as u64;
        let larger: u128 = (size + 1..=m).map(|j| binom(m, j)).sum();
        let within: u128 = self.elements().enumerate().map(|(i, e)| binom(e as u64 - 1, i as u64 + 1)).sum();
        larger + within
    }
}

impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.m.cmp(&other.m).then_with(|| other.len().cmp(&self.len())).then_with(|| self.mask.cmp(&other.mask))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Serialized as its display form (`"1,3"`, `"empty"`); `m` travels separately.
impl Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("empty");
        }
        let mut first = true;
        for e in self.elements() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

/// Outcome of comparing two sets under an order.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderRelation {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl From<Ordering> for OrderRelation {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => OrderRelation::Less,
            Ordering::Equal => OrderRelation::Equal,
            Ordering::Greater => OrderRelation::Greater,
        }
    }
}

pub(crate) fn same_m(a: &SubsetMask, b: &SubsetMask) -> Result<()> {
    if a.m == b.m {
        Ok(())
    } else {
        Err(Error::Dimension { expected: a.m() as usize, actual: b.m() as usize })
    }
}

/// Compares two sets in the decoding order (a total order).
pub fn compare_decoding(a: &SubsetMask, b: &SubsetMask) -> Result<OrderRelation> {
    same_m(a, b)?;
    Ok(a.cmp(b).into())
}

/// Masks of popcount `size` below `2^m`, ascending.
pub(crate) fn masks_of_size(m: u32, size: u32) -> impl Iterator<Item = u64> {
    let limit: u128 = 1u128 << m;
    let mut next: Option<u128> = if size > m { None } else { Some((1u128 << size) - 1) };
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit {
            next = None;
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur as u64)
    })
}

/// All size-`size` subsets of `[m]` in decoding order.
pub fn subsets_of_size(m: u32, size: u32) -> impl Iterator<Item = SubsetMask> {
    masks_of_size(m, size).map(move |mask| SubsetMask::from_raw(m, mask))
}

/// Every subset of `[m]` in decoding order (first `[m]`, last `∅`).
pub fn decoding_order(m: u32) -> Result<Vec<SubsetMask>> {
    if m == 0 || m > MATERIALIZE_MAX_M {
        return Err(Error::Size(format!("m = {m} outside 1..={MATERIALIZE_MAX_M}")));
    }
    let mut out = Vec::with_capacity(1 << m);
    for size in (0..=m).rev() {
        out.extend(subsets_of_size(m, size));
    }
    Ok(out)
}

/// The sets `B < A`, streamed in decoding order.
pub fn sets_preceding(a: SubsetMask) -> impl Iterator<Item = SubsetMask> {
    let m = a.m();
    let size = a.len();
    ((size + 1)..=m)
        .rev()
        .flat_map(move |s| subsets_of_size(m, s))
        .chain(subsets_of_size(m, size).take_while(move |b| b.mask < a.mask))
}
