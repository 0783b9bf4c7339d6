//! Successive MAP decoding of `RM(m, 𝒜)` on the BSC and block-error
//! estimation.
//!
//! With `y = uM + e`, the transform `t = yM^{-1}` gives `t_B = u_B + e'_B`
//! where `e'_B = Σ_{z ⊆ B} e_z`. Bit `A` is decided from the exact joint law
//! of `(e'_A, e'_{<A})`, feeding decoded bits forward and treating later bits
//! as uniform (they only enter through `t_C`, `C > A`, which are then pure
//! noise and can be dropped).

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{joint_pmf, ChannelSpec, PmfTable, EXACT_MAX_M};
use crate::code::CodeSpec;
use crate::error::{check_dim, Error, Result};
use crate::gf2::{encode, monomial_evaluation, subset_sum_transform, F2Vector};
use crate::orders::{sets_preceding, SubsetMask};
use crate::stats::{trial_rng, wilson, KahanSum};

/// Stream domain separating message bits from noise bits.
const MESSAGE_DOMAIN: u64 = 0x6d65_7373_6167_6521;

/// Largest `m` for [`exact_block_error`].
pub const EXACT_BLOCK_MAX_M: u32 = 3;

/// A received word `y = x + e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoisyWord {
    pub y: F2Vector,
}

/// `E` with i.i.d. `Ber(p)` bits, determined by `(seed, trial)`.
pub fn sample_noise(m: u32, channel: ChannelSpec, seed: u64, trial: u64) -> Result<F2Vector> {
    if m == 0 || m > crate::orders::MATERIALIZE_MAX_M {
        return Err(Error::Size(format!("m = {m} out of range")));
    }
    let mut rng = trial_rng(seed, trial);
    let p = channel.p();
    F2Vector::from_bits((0..1usize << m).map(|_| rng.random_bool(p)))
}

/// Column `B` of `M^{-1}`: the indicator of `{z : z ⊆ B}`.
fn inverse_column(b: SubsetMask) -> Result<F2Vector> {
    let n = 1usize << b.m();
    F2Vector::from_bits((0..n as u64).map(|z| z & !b.mask() == 0))
}

struct BitDecision {
    set: SubsetMask,
    /// Masks of the sets before `set`, in decoding order (bit `j + 1` of the key).
    preceding: Vec<u64>,
    table: PmfTable,
}

/// Precomputed successive MAP decoder for one code and channel.
pub struct SuccessiveDecoder {
    m: u32,
    bits: Vec<BitDecision>,
}

impl SuccessiveDecoder {
    pub fn new(code: &CodeSpec, channel: ChannelSpec) -> Result<Self> {
        let m = code.m;
        if m == 0 || m > EXACT_MAX_M {
            return Err(Error::Size(format!("successive decoding needs m <= {EXACT_MAX_M}")));
        }
        let mut bits = Vec::with_capacity(code.family.len());
        for &a in &code.family {
            let preceding: Vec<SubsetMask> = sets_preceding(a).collect();
            let mut dirs = vec![inverse_column(a)?];
            for &b in &preceding {
                dirs.push(inverse_column(b)?);
            }
            bits.push(BitDecision {
                set: a,
                preceding: preceding.iter().map(SubsetMask::mask).collect(),
                table: joint_pmf(&dirs, channel)?,
            });
        }
        Ok(Self { m, bits })
    }

    /// Decoded bits for the code's sets, in decoding order.
    pub fn decode(&self, y: &F2Vector) -> Result<Vec<(SubsetMask, bool)>> {
        check_dim(1 << self.m, y.len())?;
        let mut t = y.to_bytes();
        subset_sum_transform(&mut t);
        // Frozen bits stay 0.
        let mut u_hat = vec![0u8; 1 << self.m];
        let mut out = Vec::with_capacity(self.bits.len());
        for bit in &self.bits {
            let mut key = 0usize;
            for (j, &b) in bit.preceding.iter().enumerate() {
                key |= ((t[b as usize] ^ u_hat[b as usize]) as usize) << (j + 1);
            }
            let ta = t[bit.set.mask() as usize] as usize;
            let if_zero = bit.table.prob(key | ta);
            let if_one = bit.table.prob(key | (ta ^ 1));
            let decided = if_one > if_zero;
            u_hat[bit.set.mask() as usize] = decided as u8;
            out.push((bit.set, decided));
        }
        Ok(out)
    }

    fn fails(&self, message: &[(SubsetMask, bool)], y: &F2Vector) -> Result<bool> {
        Ok(self.decode(y)?.iter().zip(message).any(|(a, b)| a.1 != b.1))
    }
}

/// One-shot successive decoding of `y`.
pub fn successive_decode(code: &CodeSpec, y: &NoisyWord, channel: ChannelSpec) -> Result<Vec<(SubsetMask, bool)>> {
    SuccessiveDecoder::new(code, channel)?.decode(&y.y)
}

/// Monte Carlo block error with its Wilson 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub m: u32,
    pub r: u32,
    pub delta: f64,
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub union_bound: Option<f64>,
}

impl SimReport {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

fn random_message(code: &CodeSpec, seed: u64, trial: u64) -> Vec<(SubsetMask, bool)> {
    let mut rng = trial_rng(seed ^ MESSAGE_DOMAIN, trial);
    code.family.iter().map(|&a| (a, rng.random::<bool>())).collect()
}

/// Uniform messages, `Ber(p)` noise, successive decoding; trial `t` uses its
/// own streams so the count is independent of scheduling.
pub fn mc_block_error(code: &CodeSpec, channel: ChannelSpec, trials: u64, seed: u64) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    let decoder = SuccessiveDecoder::new(code, channel)?;
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let message = random_message(code, seed, t);
            let mut y = encode(code.m, message.iter().copied())?;
            y.xor_assign(&sample_noise(code.m, channel, seed, t)?)?;
            Ok(decoder.fails(&message, &y)? as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let w = wilson(failures, trials);
    Ok(SimReport {
        m: code.m,
        r: code.r,
        delta: code.delta,
        p: channel.p(),
        trials,
        failures,
        estimate: w.estimate,
        ci_low: w.ci_low,
        ci_high: w.ci_high,
        seed,
        union_bound: None,
    })
}

/// `Σ_{A ∈ 𝒜} Z_A`, unclipped.
pub fn union_bound(code: &CodeSpec, z_values: &BTreeMap<SubsetMask, f64>) -> Result<f64> {
    let mut acc = KahanSum::default();
    for a in &code.family {
        acc.add(*z_values.get(a).ok_or_else(|| Error::Missing(format!("no Z value for {a}")))?);
    }
    Ok(acc.value())
}

/// Exact block error by summing over every message and noise pattern.
pub fn exact_block_error(code: &CodeSpec, channel: ChannelSpec) -> Result<f64> {
    let m = code.m;
    if m == 0 || m > EXACT_BLOCK_MAX_M {
        return Err(Error::Size(format!("exact block error needs m <= {EXACT_BLOCK_MAX_M}")));
    }
    let n = 1usize << m;
    let decoder = SuccessiveDecoder::new(code, channel)?;
    let sets: Vec<SubsetMask> = code.family.iter().copied().collect();
    let rows: Vec<F2Vector> = sets.iter().map(|&a| monomial_evaluation(a)).collect::<Result<_>>()?;
    let p = channel.p();
    let messages = 1u64 << sets.len();
    let mut total = KahanSum::default();
    for msg in 0..messages {
        let message: Vec<(SubsetMask, bool)> = sets.iter().enumerate().map(|(i, &a)| (a, msg >> i & 1 == 1)).collect();
        let mut x = F2Vector::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if msg >> i & 1 == 1 {
                x.xor_assign(row)?;
            }
        }
        for e in 0..1u64 << n {
            let w = e.count_ones() as i32;
            let pe = p.powi(w) * (1.0 - p).powi(n as i32 - w);
            if pe == 0.0 {
                continue;
            }
            let mut y = x.clone();
            for z in 0..n {
                if e >> z & 1 == 1 {
                    y.flip(z);
                }
            }
            if decoder.fails(&message, &y)? {
                total.add(pe);
            }
        }
    }
    Ok(total.value() / messages as f64)
}
