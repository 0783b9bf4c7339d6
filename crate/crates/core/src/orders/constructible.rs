//! The constructible order `A ≪ B`: `B` is reachable from `A` by finitely
//! many applications of
//!
//! * Rule 1: replace some `a ∈ A` by a larger `b ∉ A`;
//! * Rule 2: remove two distinct `a, a' ∈ A` and insert one `b ∉ A ∖ {a, a'}`.
//!
//! Rule 2 is read literally, so `b ∈ {a, a'}` is allowed and a Rule-2 step can
//! be a plain single deletion.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{same_m, SubsetMask};
use crate::error::{Error, Result};

/// State-space guard for the breadth-first oracle.
pub const BFS_MAX_M: u32 = 14;

/// One concrete application of Rule 1 or Rule 2 (1-based elements).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum RuleInstance {
    /// `A ∖ {a} ∪ {b}` with `a ∈ A`, `b ∉ A`, `a < b`.
    Rule1 { a: u32, b: u32 },
    /// `A ∖ {a, a2} ∪ {b}` with distinct `a, a2 ∈ A` and `b ∉ A ∖ {a, a2}`.
    Rule2 { a: u32, a2: u32, b: u32 },
}

impl RuleInstance {
    /// Applies the rule to `set`, rejecting instances that are not valid for it.
    pub fn apply(&self, set: SubsetMask) -> Result<SubsetMask> {
        let m = set.m();
        let in_range = |x: u32| x >= 1 && x <= m;
        match *self {
            RuleInstance::Rule1 { a, b } => {
                if !in_range(a) || !in_range(b) || a >= b || !set.contains(a) || set.contains(b) {
                    return Err(Error::Precondition(format!(
                        "rule 1 needs a < b, a ∈ A, b ∉ A (a={a}, b={b}, A={set})"
                    )));
                }
                Ok(set.without(a).with(b))
            }
            RuleInstance::Rule2 { a, a2, b } => {
                if !in_range(a) || !in_range(a2) || !in_range(b) || a == a2 {
                    return Err(Error::Precondition(format!("rule 2 needs distinct a, a2 in [m] (a={a}, a2={a2})")));
                }
                let rest = set.without(a).without(a2);
                if !set.contains(a) || !set.contains(a2) || rest.contains(b) {
                    return Err(Error::Precondition(format!("rule 2 needs a, a2 ∈ A and b ∉ A ∖ {{a, a2}} (A={set})")));
                }
                Ok(rest.with(b))
            }
        }
    }
}

/// Every valid rule instance for `a` together with its result.
pub fn rule_instances(a: SubsetMask) -> Vec<(RuleInstance, SubsetMask)> {
    let m = a.m();
    let members: Vec<u32> = a.elements().collect();
    let mut out = Vec::new();
    for &x in &members {
        for y in (x + 1)..=m {
            if !a.contains(y) {
                out.push((RuleInstance::Rule1 { a: x, b: y }, a.without(x).with(y)));
            }
        }
    }
    for (i, &x) in members.iter().enumerate() {
        for &x2 in &members[i + 1..] {
            let rest = a.without(x).without(x2);
            for b in 1..=m {
                if !rest.contains(b) {
                    out.push((RuleInstance::Rule2 { a: x, a2: x2, b }, rest.with(b)));
                }
            }
        }
    }
    out
}

pub fn rule1_successors(a: SubsetMask) -> BTreeSet<SubsetMask> {
    rule_instances(a).into_iter().filter(|(r, _)| matches!(r, RuleInstance::Rule1 { .. })).map(|(_, b)| b).collect()
}

pub fn rule2_successors(a: SubsetMask) -> BTreeSet<SubsetMask> {
    rule_instances(a).into_iter().filter(|(r, _)| matches!(r, RuleInstance::Rule2 { .. })).map(|(_, b)| b).collect()
}

pub(crate) fn tilde_raw(m: u32, mask: u64) -> u64 {
    let top = 63 - mask.leading_zeros();
    let rest = mask & !(1 << top);
    let next = 63 - rest.leading_zeros();
    let rest = rest & !(1 << next);
    // Smallest element of Ā ∪ {a, a'}: the first hole of A, unless that lies
    // above a (then it is a itself).
    let hole = (!mask).trailing_zeros();
    let b = if hole < m && hole < next { hole } else { next };
    rest | 1 << b
}

/// `Ã = A ∖ {a, a'} ∪ {b}` with `a < a'` the two largest elements of `A` and
/// `b` the smallest element of `Ā ∪ {a, a'}`.
pub fn tilde(a: SubsetMask) -> Result<SubsetMask> {
    if a.len() < 2 {
        return Err(Error::Domain(format!("tilde needs |A| >= 2, got A = {a}")));
    }
    Ok(SubsetMask::from_raw(a.m(), tilde_raw(a.m(), a.mask())))
}

/// `Ã^{(k)}`.
pub fn tilde_iter(a: SubsetMask, k: u32) -> Result<SubsetMask> {
    if k > 0 && a.len() < k + 1 {
        return Err(Error::Domain(format!("cannot apply tilde {k} times to {a}")));
    }
    let mut mask = a.mask();
    for _ in 0..k {
        mask = tilde_raw(a.m(), mask);
    }
    Ok(SubsetMask::from_raw(a.m(), mask))
}

/// For equal sizes, `t_i <= b_i` for all `i` (sorted) is the same as
/// `|T ∩ [j]| >= |B ∩ [j]|` for every prefix `j`.
fn dominates_componentwise(m: u32, t: u64, b: u64) -> bool {
    let mut mask = 0u64;
    for j in 0..m {
        mask |= 1 << j;
        if (t & mask).count_ones() < (b & mask).count_ones() {
            return false;
        }
    }
    true
}

/// Decides `A ≪ B` in `O(m)` word operations.
pub fn constructible(a: &SubsetMask, b: &SubsetMask) -> Result<bool> {
    same_m(a, b)?;
    let (na, nb) = (a.len(), b.len());
    if na < nb {
        return Ok(false);
    }
    if nb == 0 {
        return Ok(na == 0);
    }
    let t = tilde_iter(*a, na - nb)?;
    Ok(dominates_componentwise(a.m(), t.mask(), b.mask()))
}

/// Every set reachable from `a` (including `a`) by rule applications, in
/// breadth-first discovery order.
pub fn reachable_from(a: SubsetMask) -> Result<Vec<SubsetMask>> {
    let m = a.m();
    if m > BFS_MAX_M {
        return Err(Error::Size(format!("breadth-first closure needs m <= {BFS_MAX_M}")));
    }
    let mut seen = vec![false; 1 << m];
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    seen[a.mask() as usize] = true;
    queue.push_back(a);
    while let Some(x) = queue.pop_front() {
        out.push(x);
        for (_, y) in rule_instances(x) {
            if !seen[y.mask() as usize] {
                seen[y.mask() as usize] = true;
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// Ground truth for `A ≪ B` by explicit closure under the two rules.
pub fn constructible_bfs_oracle(a: &SubsetMask, b: &SubsetMask) -> Result<bool> {
    same_m(a, b)?;
    Ok(reachable_from(*a)?.contains(b))
}

/// `∀ 1 <= i <= r - k: a_i <= b_{i+k}` for `|A| = |B| + k`, `r = |B|`.
/// Sufficient (not necessary) for `A ≪ B`. For `B = ∅` the condition is
/// taken as `A = ∅`, since no rule produces the empty set.
pub fn dominance_sufficient(a: &SubsetMask, b: &SubsetMask) -> Result<bool> {
    same_m(a, b)?;
    if a.len() < b.len() {
        return Err(Error::Precondition(format!("|A| = {} < |B| = {}", a.len(), b.len())));
    }
    let r = b.len() as usize;
    let k = (a.len() - b.len()) as usize;
    if r == 0 {
        return Ok(a.is_empty());
    }
    if k >= r {
        return Ok(true);
    }
    let av: Vec<u32> = a.elements().collect();
    let bv: Vec<u32> = b.elements().collect();
    Ok((0..r - k).all(|i| av[i] <= bv[i + k]))
}

/// `|A ∩ [i]| <= i/2 + d` for every `i ∈ [m]`, i.e. the walk never exceeds `2d`.
pub fn is_d_good(a: &SubsetMask, d: u32) -> bool {
    (1..=a.m()).all(|i| a.walk_height(i) <= 2 * d as i64)
}

/// Constructibility test for sets too large for a mask, given as ascending
/// 1-based element lists. Keeps its scratch buffer between calls.
#[derive(Debug, Default, Clone)]
pub struct LargeSetChecker {
    present: Vec<bool>,
}

impl LargeSetChecker {
    pub fn new() -> Self {
        Self::default()
    }

    /// `A ≪ B` for subsets of `[m]`; elements must be sorted and distinct.
    pub fn constructible(&mut self, m: usize, a: &[usize], b: &[usize]) -> bool {
        if a.len() < b.len() {
            return false;
        }
        if b.is_empty() {
            return a.is_empty();
        }
        let present = &mut self.present;
        present.clear();
        present.resize(m + 2, false);
        for &x in a {
            present[x] = true;
        }
        // Smallest absent element and a pointer at (or above) the largest present one.
        let mut lo = 1;
        while lo <= m && present[lo] {
            lo += 1;
        }
        let mut hi = m;
        for _ in 0..(a.len() - b.len()) {
            while !present[hi] {
                hi -= 1;
            }
            let top = hi;
            present[top] = false;
            while !present[hi] {
                hi -= 1;
            }
            let next = hi;
            present[next] = false;
            if lo < next {
                present[lo] = true;
                while lo <= m && present[lo] {
                    lo += 1;
                }
            } else {
                // Everything below `next` is present: the step just drops `top`.
                present[next] = true;
                lo = next + 1;
            }
        }
        let mut count_t = 0usize;
        let mut count_b = 0usize;
        let mut bi = 0;
        for (j, &here) in present.iter().enumerate().take(m + 1).skip(1) {
            if here {
                count_t += 1;
            }
            if bi < b.len() && b[bi] == j {
                count_b += 1;
                bi += 1;
            }
            if count_b > count_t {
                return false;
            }
        }
        true
    }
}
