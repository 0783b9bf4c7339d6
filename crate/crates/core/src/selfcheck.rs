//! Fast oracle checks over small instances, one per module. Each compares a
//! library routine with an independent brute-force computation.

use serde::Serialize;

use crate::channel::{all_bit_channel_stats, certify_degradation, rule_transform, ChannelSpec};
use crate::code::{build_code, CodeSpec, ZOracle};
use crate::decoder::{exact_block_error, mc_block_error};
use crate::error::Result;
use crate::gf2::{build_rm_inverse, build_rm_matrix, encode, F2Vector};
use crate::lower_bound::sandwich_check;
use crate::orders::{
    constructible, constructible_bfs_oracle, decoding_order, rule_instances, RuleInstance, SubsetMask,
};
use crate::stats::h2;
use crate::walk::{max_tail_exact, prob_not_good, WalkQuery};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, outcome: Result<(bool, String)>) -> Check {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
    Check { name: name.into(), passed, detail }
}

fn matrix_identity() -> Result<(bool, String)> {
    for m in 1..=6 {
        if !build_rm_matrix(m)?.mul(&build_rm_inverse(m)?)?.is_identity() {
            return Ok((false, format!("M·M^-1 != I at m = {m}")));
        }
    }
    Ok((true, "m <= 6".into()))
}

fn encoder_matches_matrix() -> Result<(bool, String)> {
    for m in 1..=5u32 {
        let order = decoding_order(m)?;
        let g = build_rm_matrix(m)?;
        for seed in 0..16u64 {
            let bits: Vec<bool> =
                order.iter().enumerate().map(|(i, _)| (seed * 7919 + i as u64 * 31) % 3 == 0).collect();
            let fast = encode(m, order.iter().copied().zip(bits.iter().copied()))?;
            let slow = g.left_mul(&F2Vector::from_bits(bits)?)?;
            if fast != slow {
                return Ok((false, format!("encoder mismatch at m = {m}")));
            }
        }
    }
    Ok((true, "m <= 5".into()))
}

fn entropy_conservation() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for m in 1..=3 {
        for p in [0.11, 0.25, 0.4] {
            let total: f64 = all_bit_channel_stats(m, ChannelSpec::new(p)?, false)?.iter().map(|(_, s)| s.h).sum();
            worst = worst.max((total - h2(p) * (1u32 << m) as f64).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max |Σ H_A − n h(p)| = {worst:.2e}")))
}

fn order_matches_bfs() -> Result<(bool, String)> {
    for m in 1..=5 {
        let all = decoding_order(m)?;
        for a in &all {
            for b in &all {
                if constructible(a, b)? != constructible_bfs_oracle(a, b)? {
                    return Ok((false, format!("disagree on ({a}, {b})")));
                }
                if constructible(a, b)? && a > b {
                    return Ok((false, format!("{a} ≪ {b} but {a} comes later")));
                }
            }
        }
    }
    Ok((true, "all pairs, m <= 5".into()))
}

fn binom_f(n: u32, k: i64) -> f64 {
    if k < 0 || k > n as i64 {
        return 0.0;
    }
    (0..k as u32).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn walk_formulas() -> Result<(bool, String)> {
    for m in 1..=10u32 {
        let mut tails = std::collections::HashMap::<(i64, i64), u64>::new();
        let mut finals = std::collections::HashMap::<i64, u64>::new();
        for path in 0..1u64 << m {
            let (mut s, mut max) = (0i64, 0i64);
            for i in 0..m {
                s += if path >> i & 1 == 1 { 1 } else { -1 };
                max = max.max(s);
            }
            *finals.entry(s).or_default() += 1;
            for d in 0..=m as i64 {
                if max >= d {
                    *tails.entry((s, d)).or_default() += 1;
                }
            }
        }
        for (&s, &count) in &finals {
            for d in s.max(0)..=m as i64 {
                let brute = *tails.get(&(s, d)).unwrap_or(&0) as f64 / count as f64;
                let exact = max_tail_exact(WalkQuery::new(m, s, d)?)?.value;
                if (brute - exact).abs() > 1e-12 {
                    return Ok((false, format!("tail mismatch at m = {m}, s = {s}, d = {d}")));
                }
            }
        }
        for r in 0..=m {
            for d in 0..=m {
                if 2 * d as i64 + 1 < 2 * r as i64 - m as i64 {
                    continue;
                }
                let bad =
                    crate::orders::subsets_of_size(m, r).filter(|a| !crate::orders::is_d_good(a, d)).count() as f64;
                let brute = bad / binom_f(m, r as i64);
                if (brute - prob_not_good(m, r, d)?.value).abs() > 1e-12 {
                    return Ok((false, format!("not-good mismatch at m = {m}, r = {r}, d = {d}")));
                }
            }
        }
    }
    Ok((true, "m <= 10".into()))
}

fn certificates() -> Result<(bool, String)> {
    let mut count = 0;
    for m in 2..=5 {
        for a in decoding_order(m)? {
            for (rule, b) in rule_instances(a) {
                if let Some(t) = rule_transform(a, rule)? {
                    count += 1;
                    if !certify_degradation(a, b, &t)? {
                        return Ok((false, format!("{rule:?} on {a} not certified")));
                    }
                } else if !matches!(rule, RuleInstance::Rule2 { .. }) {
                    return Ok((false, format!("no transform for {rule:?}")));
                }
            }
        }
    }
    Ok((true, format!("{count} rule instances, m <= 5")))
}

fn sandwich() -> Result<(bool, String)> {
    // At r = 0 singletons are not ≪ ∅, so only r >= 1 is checked here.
    let mut triples = 0;
    for m in 2..=8u32 {
        for r in 1..m {
            for k in -(m as i64)..=m as i64 {
                triples += 1;
                let out = sandwich_check(m, r, k)?;
                if !out.holds {
                    return Ok((false, format!("m = {m}, r = {r}, k = {k}: {:?}", out.witness)));
                }
            }
        }
    }
    Ok((true, format!("{triples} triples, m <= 8, r >= 1")))
}

fn decoder_exact_vs_mc() -> Result<(bool, String)> {
    let p = 0.15;
    let ch = ChannelSpec::new(p)?;
    let code = build_code(3, 2, 0.3, &ZOracle::Exact { channel: ch, allow_high_cost: false })?;
    let exact = exact_block_error(&code, ch)?;
    let mc = mc_block_error(&code, ch, 40_000, 1)?;
    let tol = 4.0 * mc.half_width() + 1e-3;
    Ok(((mc.estimate - exact).abs() <= tol, format!("exact {exact:.5}, mc {:.5}", mc.estimate)))
}

fn code_round_trip() -> Result<(bool, String)> {
    let code = build_code(4, 2, 0.2, &ZOracle::Exact { channel: ChannelSpec::new(0.11)?, allow_high_cost: false })?;
    let back = CodeSpec::from_text(&code.to_text())?;
    Ok((back == code, format!("{} sets", code.family.len())))
}

fn empty_set_is_last() -> Result<(bool, String)> {
    let order = decoding_order(4)?;
    let last = *order.last().expect("nonempty");
    Ok((last == SubsetMask::empty(4)?, format!("last = {last}")))
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("matrix_identity", matrix_identity()),
        check("encoder_matches_matrix", encoder_matches_matrix()),
        check("decoding_order_ends_with_empty", empty_set_is_last()),
        check("constructible_matches_bfs", order_matches_bfs()),
        check("walk_formulas", walk_formulas()),
        check("entropy_conservation", entropy_conservation()),
        check("rule_certificates", certificates()),
        check("code_text_round_trip", code_round_trip()),
        check("decoder_exact_vs_mc", decoder_exact_vs_mc()),
        check("sandwich", sandwich()),
    ]
}
