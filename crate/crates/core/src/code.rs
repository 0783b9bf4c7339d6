//! δ-almost Reed–Muller codes: rate formulas, parameter selection and the
//! code builder with its text format.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::{all_bit_channel_stats, ChannelSpec};
use crate::combinatorics::{binom, binom_big, binom_row, ratio_to_f64};
use crate::error::{Error, Result};
use crate::orders::{subsets_of_size, SubsetMask, MAX_M};
use crate::stats::{gaussian, gaussian_inv, h2};
use crate::walk::smallest_r_for_rate;

/// Largest number of sets a built code may enumerate.
pub const BUILD_MAX_SETS: u128 = 10_000_000;

/// Slack absorbing float noise in `⌈(1 - δ) N⌉` (so `δ = 0.3`, `N = 10` gives 7).
const CEIL_SLACK: f64 = 1e-9;

/// Quantum used to detect equal Bhattacharyya values.
const Z_QUANTUM: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub p: f64,
    pub delta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub r0: f64,
    pub r: f64,
    pub valid: bool,
    pub reason: Option<String>,
}

fn rate_domain(p: f64, delta: f64) -> std::result::Result<f64, String> {
    if !(p > 0.0 && p < 0.5) {
        return Err(format!("need 0 < p < 1/2, got p = {p}"));
    }
    if !(delta > 0.0) {
        return Err(format!("need delta > 0, got {delta}"));
    }
    let y = 1.0 - h2(p) - 2.0 * delta;
    if !(y > 0.0) {
        return Err(format!("need h(p) + 2 delta < 1, got {}", h2(p) + 2.0 * delta));
    }
    if y > 0.5 + 1e-15 {
        return Err(format!("need 1 - h(p) - 2 delta <= 1/2, got {y}"));
    }
    Ok(y.min(0.5))
}

/// `γ = Φ^{-1}(1 - h(p) - 2δ)/2`, `α = 2γ - √((9/32) ln(2/δ²))`,
/// `R0 = Φ(2α)`, `R = (1 - δ) R0`. Out-of-domain inputs give an invalid
/// report carrying the reason.
pub fn rate_parameters(p: f64, delta: f64) -> RateReport {
    let mut report = RateReport {
        p,
        delta,
        gamma: f64::NAN,
        alpha: f64::NAN,
        r0: f64::NAN,
        r: f64::NAN,
        valid: false,
        reason: None,
    };
    let y = match rate_domain(p, delta) {
        Ok(y) => y,
        Err(reason) => {
            report.reason = Some(reason);
            return report;
        }
    };
    let gamma = gaussian_inv(y).expect("y in (0, 1/2]") / 2.0;
    let alpha = 2.0 * gamma - (9.0 / 32.0 * (2.0 / (delta * delta)).ln()).sqrt();
    let r0 = gaussian(2.0 * alpha);
    RateReport { gamma, alpha, r0, r: (1.0 - delta) * r0, valid: true, ..report }
}

impl RateReport {
    pub fn into_result(self) -> Result<Self> {
        if self.valid {
            Ok(self)
        } else {
            Err(Error::Domain(self.reason.clone().unwrap_or_default()))
        }
    }
}

/// `(1 - δ) Φ(-2√(2 ln(C/y)) - √((9/8) ln(2/δ²)))` with `y = 1 - h(p) - 2δ`;
/// a lower bound on `R` whenever `Φ^{-1}(y) >= -√(2 ln(C/y))`.
pub fn rate_asymptotic_lower(p: f64, delta: f64, c: f64) -> Result<f64> {
    let y = rate_domain(p, delta).map_err(Error::Domain)?;
    if !(c >= 1.0) {
        return Err(Error::Domain(format!("C must be >= 1, got {c}")));
    }
    let arg = -2.0 * (2.0 * (c / y).ln()).sqrt() - (9.0 / 8.0 * (2.0 / (delta * delta)).ln()).sqrt();
    Ok((1.0 - delta) * gaussian(arg))
}

/// Parameters of the main construction at a finite `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainParameters {
    pub m: u32,
    pub rate: RateReport,
    pub beta: f64,
    /// Smallest `r` with `C(m, <= r) >= R0 · 2^m`.
    pub r: u32,
    /// `⌊β√m⌋`.
    pub k: u32,
    /// `(r - m/2)/√m` and `k/√m`.
    pub alpha_m: f64,
    pub beta_m: f64,
    /// `|α_m| + β_m <= m^{1/12}`.
    pub range_ok: bool,
    /// `β_m >= max(α_m, -α_m/2)`.
    pub beta_ok: bool,
    /// `C(m, >= r + k)/2^m`, its limit `Φ(-2γ) = h(p) + 2δ`, and the
    /// threshold `h(p)/(1 - δ)` it must exceed.
    pub upper_tail: f64,
    pub upper_tail_limit: f64,
    pub upper_tail_threshold: f64,
}

pub fn main_theorem_parameters(p: f64, delta: f64, m: u32) -> Result<MainParameters> {
    if m == 0 {
        return Err(Error::Size("m must be positive".into()));
    }
    let rate = rate_parameters(p, delta).into_result()?;
    let beta = rate.gamma - rate.alpha;
    let sqrt_m = (m as f64).sqrt();
    let r = smallest_r_for_rate(m, rate.r0)?.r;
    let k = (beta * sqrt_m).floor() as u32;
    let alpha_m = (r as f64 - m as f64 / 2.0) / sqrt_m;
    let beta_m = k as f64 / sqrt_m;
    let row = binom_row(m as u64);
    let tail = row.iter().skip((r + k) as usize).fold(num_bigint::BigUint::default(), |a, b| a + b);
    let upper_tail = ratio_to_f64(&tail, &(num_bigint::BigUint::from(1u8) << m as usize));
    Ok(MainParameters {
        m,
        beta,
        r,
        k,
        alpha_m,
        beta_m,
        range_ok: alpha_m.abs() + beta_m <= (m as f64).powf(1.0 / 12.0),
        beta_ok: beta_m >= alpha_m.max(-alpha_m / 2.0),
        upper_tail,
        upper_tail_limit: gaussian(-2.0 * rate.gamma),
        upper_tail_threshold: h2(p) / (1.0 - delta),
        rate,
    })
}

/// Source of the ranking used to drop sets.
#[derive(Clone, Debug, PartialEq)]
pub enum ZOracle {
    /// Exact `Z_A` (m <= 4, or m = 5 with `allow_high_cost`).
    Exact { channel: ChannelSpec, allow_high_cost: bool },
    /// Decoding-order rank: earlier sets count as worse.
    Proxy,
    /// Caller-supplied values; must cover every set of size <= r.
    Custom(BTreeMap<SubsetMask, f64>),
}

impl ZOracle {
    fn label(&self) -> String {
        match self {
            ZOracle::Exact { channel, .. } => format!("exact p={}", channel.p()),
            ZOracle::Proxy => "proxy".into(),
            ZOracle::Custom(_) => "custom".into(),
        }
    }
}

/// `RM(m, 𝒜)` with `𝒜` a `(1 - δ)` fraction of the sets of size `<= r`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    pub m: u32,
    pub r: u32,
    pub delta: f64,
    /// `"exact p=…"`, `"proxy"` or `"custom"`.
    pub oracle: String,
    pub family: BTreeSet<SubsetMask>,
    pub z_values: Option<BTreeMap<SubsetMask, f64>>,
}

/// `⌈(1 - δ) N⌉`, clamped to `[0, N]`.
pub fn kept_count(n: u128, delta: f64) -> u128 {
    let x = (1.0 - delta) * n as f64;
    ((x - CEIL_SLACK).ceil().max(0.0) as u128).min(n)
}

fn candidate_sets(m: u32, r: u32) -> Result<Vec<SubsetMask>> {
    if m == 0 || m > MAX_M || r > m {
        return Err(Error::Size(format!("need 1 <= m <= {MAX_M} and r <= m (m = {m}, r = {r})")));
    }
    let total: u128 = (0..=r).map(|j| binom(m as u64, j as u64)).sum();
    if total > BUILD_MAX_SETS {
        return Err(Error::Size(format!("C({m}, <= {r}) = {total} sets is too many to enumerate")));
    }
    let mut out = Vec::with_capacity(total as usize);
    for size in (0..=r).rev() {
        out.extend(subsets_of_size(m, size));
    }
    Ok(out)
}

fn quantize(z: f64) -> i64 {
    (z / Z_QUANTUM).round() as i64
}

/// Keeps the `⌈(1 - δ) C(m, <= r)⌉` sets with the smallest `Z`. Among equal
/// values the set earlier in decoding order is dropped first.
pub fn build_code(m: u32, r: u32, delta: f64, oracle: &ZOracle) -> Result<CodeSpec> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta must lie in [0, 1], got {delta}")));
    }
    let sets = candidate_sets(m, r)?;
    let keep = kept_count(sets.len() as u128, delta) as usize;
    let z_values: Option<BTreeMap<SubsetMask, f64>> = match oracle {
        ZOracle::Exact { channel, allow_high_cost } => {
            let all = all_bit_channel_stats(m, *channel, *allow_high_cost).map_err(|e| match e {
                Error::Size(msg) => Error::Size(format!("{msg}; use the proxy oracle")),
                other => other,
            })?;
            Some(all.into_iter().filter(|(a, _)| a.len() <= r).map(|(a, s)| (a, s.z)).collect())
        }
        ZOracle::Proxy => None,
        ZOracle::Custom(map) => {
            let mut z = BTreeMap::new();
            for a in &sets {
                let v = map.get(a).ok_or_else(|| Error::Missing(format!("no Z value for {a}")))?;
                z.insert(*a, *v);
            }
            Some(z)
        }
    };
    let mut ranked = sets;
    match &z_values {
        Some(z) => ranked.sort_by_key(|a| (quantize(z[a]), Reverse(*a))),
        None => ranked.sort_by_key(|a| Reverse(*a)),
    }
    ranked.truncate(keep);
    Ok(CodeSpec { m, r, delta, oracle: oracle.label(), family: ranked.into_iter().collect(), z_values })
}

const FORMAT_HEADER: &str = "almost-rm-code v1";

impl CodeSpec {
    /// `|𝒜| / 2^m`.
    pub fn rate(&self) -> f64 {
        self.family.len() as f64 / (self.m as f64).exp2()
    }

    /// Number of sets of size `<= r`.
    pub fn candidates(&self) -> u128 {
        (0..=self.r).map(|j| binom(self.m as u64, j as u64)).sum()
    }

    pub fn is_proxy(&self) -> bool {
        self.oracle == "proxy"
    }

    /// Checks the size and selection invariants.
    pub fn validate(&self) -> Result<()> {
        if self.family.iter().any(|a| a.m() != self.m || a.len() > self.r) {
            return Err(Error::Precondition("family has a set of the wrong shape".into()));
        }
        let want = kept_count(self.candidates(), self.delta);
        if self.family.len() as u128 != want {
            return Err(Error::Precondition(format!("family has {} sets, expected {want}", self.family.len())));
        }
        if let Some(z) = &self.z_values {
            let kept_max = self.family.iter().map(|a| quantize(z[a])).max();
            let dropped_min = z.iter().filter(|(a, _)| !self.family.contains(a)).map(|(_, v)| quantize(*v)).min();
            if let (Some(k), Some(d)) = (kept_max, dropped_min) {
                if k > d {
                    return Err(Error::Precondition("a kept set has larger Z than a dropped one".into()));
                }
            }
        }
        Ok(())
    }

    /// Versioned text form; floats use the shortest round-trip rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{FORMAT_HEADER}").unwrap();
        writeln!(s, "m {}", self.m).unwrap();
        writeln!(s, "r {}", self.r).unwrap();
        writeln!(s, "delta {:?}", self.delta).unwrap();
        writeln!(s, "oracle {}", self.oracle).unwrap();
        writeln!(s, "family {}", self.family.len()).unwrap();
        for a in &self.family {
            writeln!(s, "{a}").unwrap();
        }
        if let Some(z) = &self.z_values {
            writeln!(s, "z {}", z.len()).unwrap();
            for (a, v) in z {
                writeln!(s, "{a} {v:?}").unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse(format!("missing {what} line")));
        if next("header")?.trim() != FORMAT_HEADER {
            return Err(Error::Parse(format!("expected header {FORMAT_HEADER:?}")));
        }
        fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .ok_or_else(|| Error::Parse(format!("expected {key:?} line, got {line:?}")))
        }
        fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
            s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
        }
        let m: u32 = num(field(next("m")?, "m")?)?;
        let r: u32 = num(field(next("r")?, "r")?)?;
        let delta: f64 = num(field(next("delta")?, "delta")?)?;
        let oracle = field(next("oracle")?, "oracle")?.to_string();
        let count: usize = num(field(next("family")?, "family")?)?;
        let mut family = BTreeSet::new();
        for _ in 0..count {
            family.insert(SubsetMask::parse(m, next("set")?)?);
        }
        let z_values = match next("z") {
            Ok(line) => {
                let n: usize = num(field(line, "z")?)?;
                let mut z = BTreeMap::new();
                for _ in 0..n {
                    let line = next("z value")?;
                    let (set, value) =
                        line.rsplit_once(' ').ok_or_else(|| Error::Parse(format!("bad z line {line:?}")))?;
                    z.insert(SubsetMask::parse(m, set)?, num(value)?);
                }
                Some(z)
            }
            Err(_) => None,
        };
        Ok(CodeSpec { m, r, delta, oracle, family, z_values })
    }
}

/// `C(m, <= r) / 2^m` as a float.
pub fn rm_rate(m: u32, r: u32) -> f64 {
    let num = (0..=r as i64).fold(num_bigint::BigUint::default(), |a, j| a + binom_big(m as u64, j));
    ratio_to_f64(&num, &(num_bigint::BigUint::from(1u8) << m as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bhattacharyya_exact;

    fn set(m: u32, s: &str) -> SubsetMask {
        SubsetMask::parse(m, s).unwrap()
    }

    #[test]
    fn rate_boundary_and_errors() {
        // 1 - h(p) - 2δ = 1/2 exactly when h(p) = 1/2 - 2δ.
        let delta = 0.05;
        let p = crate::stats::entropy_h_inv(0.5 - 2.0 * delta).unwrap();
        let rep = rate_parameters(p, delta);
        assert!(rep.valid, "{rep:?}");
        assert!(rep.gamma.abs() < 1e-7);
        let want = -(9.0 / 32.0 * (2.0 / (delta * delta)).ln()).sqrt();
        assert!((rep.alpha - want).abs() < 1e-7);
        assert!(!rate_parameters(0.3, 0.2).valid);
        assert!(!rate_parameters(0.01, 0.1).valid);
        assert!(rate_parameters(0.3, 0.2).into_result().is_err());
        assert!(!rate_parameters(0.6, 0.1).valid);
    }

    #[test]
    fn rate_example() {
        let rep = rate_parameters(0.11, 0.1);
        assert!(rep.valid);
        assert!((rep.gamma + 0.262).abs() < 1e-3);
        assert!((rep.alpha + 1.745).abs() < 1e-3);
        assert!((rep.r0 - 2.4e-4).abs() < 0.1e-4, "{}", rep.r0);
        assert!((rep.r - 0.9 * rep.r0).abs() < 1e-18);
        assert!(rep.gamma <= 0.0 && rep.alpha < 2.0 * rep.gamma);
    }

    #[test]
    fn lower_rate_below_rate() {
        for &p in &[0.11, 0.15, 0.2] {
            for &d in &[0.01, 0.05, 0.1] {
                let rep = rate_parameters(p, d);
                if rep.valid {
                    assert!(rate_asymptotic_lower(p, d, 5.0).unwrap() <= rep.r);
                }
            }
        }
        assert!(rate_asymptotic_lower(0.11, 0.1, 0.5).is_err());
    }

    #[test]
    fn main_parameters_example() {
        let mp = main_theorem_parameters(0.11, 0.1, 100).unwrap();
        assert!((mp.beta - 1.483).abs() < 1e-3);
        assert_eq!(mp.k, 14);
        assert!(mp.beta > 0.0);
        assert!((mp.upper_tail_limit - (h2(0.11) + 0.2)).abs() < 1e-9);
    }

    #[test]
    fn kept_count_slack() {
        assert_eq!(kept_count(10, 0.3), 7);
        assert_eq!(kept_count(5, 0.3), 4);
        assert_eq!(kept_count(5, 0.0), 5);
        assert_eq!(kept_count(5, 1.0), 0);
    }

    #[test]
    fn build_examples() {
        let oracle = ZOracle::Exact { channel: ChannelSpec::new(0.25).unwrap(), allow_high_cost: false };
        let full = build_code(4, 2, 0.0, &oracle).unwrap();
        assert_eq!(full.family.len(), 11);
        let c = build_code(4, 1, 0.3, &oracle).unwrap();
        let dropped: Vec<_> = [set(4, "1"), set(4, "2"), set(4, "3"), set(4, "4"), set(4, "empty")]
            .into_iter()
            .filter(|a| !c.family.contains(a))
            .collect();
        assert_eq!(dropped, vec![set(4, "1")]);
        c.validate().unwrap();
        assert!(build_code(4, 2, 1.0, &oracle).unwrap().family.is_empty());
        assert!(build_code(6, 2, 0.1, &oracle).is_err());
        let proxy = build_code(6, 2, 0.1, &ZOracle::Proxy).unwrap();
        assert!(proxy.is_proxy());
        proxy.validate().unwrap();
        assert!(build_code(4, 1, 1.5, &oracle).is_err());
    }

    #[test]
    fn ties_drop_earlier_set() {
        let mut z = BTreeMap::new();
        for a in candidate_sets(3, 1).unwrap() {
            z.insert(a, 0.5);
        }
        let c = build_code(3, 1, 0.5, &ZOracle::Custom(z.clone())).unwrap();
        // Keep ⌈2⌉ = 2 sets; all tie, so the two latest survive.
        assert_eq!(c.family, [set(3, "3"), set(3, "empty")].into());
        z.remove(&set(3, "2"));
        assert!(matches!(build_code(3, 1, 0.5, &ZOracle::Custom(z)), Err(Error::Missing(_))));
    }

    #[test]
    fn exact_selection_respects_z() {
        let ch = ChannelSpec::new(0.11).unwrap();
        let c = build_code(4, 3, 0.2, &ZOracle::Exact { channel: ch, allow_high_cost: false }).unwrap();
        c.validate().unwrap();
        let kept_max = c.family.iter().map(|a| bhattacharyya_exact(*a, ch, false).unwrap()).fold(0.0, f64::max);
        for a in candidate_sets(4, 3).unwrap() {
            if !c.family.contains(&a) {
                assert!(bhattacharyya_exact(a, ch, false).unwrap() >= kept_max - 1e-12);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let ch = ChannelSpec::new(0.11).unwrap();
        for code in [
            build_code(4, 2, 0.3, &ZOracle::Exact { channel: ch, allow_high_cost: false }).unwrap(),
            build_code(7, 3, 0.1, &ZOracle::Proxy).unwrap(),
        ] {
            let text = code.to_text();
            let back = CodeSpec::from_text(&text).unwrap();
            assert_eq!(back, code);
            assert_eq!(back.to_text(), text);
        }
        assert!(CodeSpec::from_text("nope").is_err());
    }

    #[test]
    fn rm_rate_values() {
        assert_eq!(rm_rate(4, 2), 11.0 / 16.0);
        assert_eq!(rm_rate(4, 4), 1.0);
    }
}
