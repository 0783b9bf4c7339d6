//! Bit-packed linear algebra over GF(2) and the Reed–Muller matrix.
//!
//! Column `z` of the RM matrix is the point of `{0,1}^m` whose bit `i - 1`
//! is `z_i`. Rows follow the decoding order, so the rows of all sets
//! preceding `A` form a prefix.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::orders::{decoding_order, SubsetMask, MATERIALIZE_MAX_M};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A vector in `GF(2)^len`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct F2Vector {
    len: usize,
    words: Vec<u64>,
}

impl F2Vector {
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Size("vector length must be positive".into()));
        }
        Ok(Self { len, words: vec![0; words_for(len)] })
    }

    pub fn ones(len: usize) -> Result<Self> {
        let mut v = Self::zeros(len)?;
        for i in 0..len {
            v.set(i, true);
        }
        Ok(v)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len())?;
        for (i, b) in bits.into_iter().enumerate() {
            v.set(i, b);
        }
        Ok(v)
    }

    /// Packs a byte-per-bit slice (nonzero = 1).
    pub fn from_bytes(bits: &[u8]) -> Result<Self> {
        Self::from_bits(bits.iter().map(|&b| b != 0))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// `self += other`.
    pub fn xor_assign(&mut self, other: &Self) -> Result<()> {
        check_dim(self.len, other.len)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> Result<bool> {
        check_dim(self.len, other.len)?;
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        Ok(ones % 2 == 1)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(i * WORD + b)
                }
            })
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Display for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for F2Vector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bad bit {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(bits)
    }
}

/// A dense matrix over GF(2), stored by rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct F2Matrix {
    cols: usize,
    rows: Vec<F2Vector>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Size("matrix needs at least one row".into()));
        }
        Ok(Self { cols, rows: vec![F2Vector::zeros(cols)?; rows] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut out = Self::zeros(n, n)?;
        for i in 0..n {
            out.rows[i].set(i, true);
        }
        Ok(out)
    }

    pub fn from_rows(rows: Vec<F2Vector>) -> Result<Self> {
        let cols = rows.first().ok_or_else(|| Error::Size("no rows".into()))?.len();
        for r in &rows {
            check_dim(cols, r.len())?;
        }
        Ok(Self { cols, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn row(&self, i: usize) -> &F2Vector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[F2Vector] {
        &self.rows
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &F2Matrix) -> Result<F2Matrix> {
        check_dim(self.cols, rhs.n_rows())?;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = F2Vector::zeros(rhs.cols)?;
                for j in r.ones_iter() {
                    acc.xor_assign(&rhs.rows[j])?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(F2Matrix { cols: rhs.cols, rows })
    }

    /// Row vector times matrix: `v · self`.
    pub fn left_mul(&self, v: &F2Vector) -> Result<F2Vector> {
        check_dim(self.n_rows(), v.len())?;
        let mut acc = F2Vector::zeros(self.cols)?;
        for i in v.ones_iter() {
            acc.xor_assign(&self.rows[i])?;
        }
        Ok(acc)
    }

    pub fn is_identity(&self) -> bool {
        self.n_rows() == self.cols && self.rows.iter().enumerate().all(|(i, r)| r.weight() == 1 && r.get(i))
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Result<Option<F2Matrix>> {
        let n = self.n_rows();
        check_dim(n, self.cols)?;
        let mut a = self.rows.clone();
        let mut inv = F2Matrix::identity(n)?.rows;
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| a[i].get(col)) else {
                return Ok(None);
            };
            a.swap(col, p);
            inv.swap(col, p);
            let (pa, pi) = (a[col].clone(), inv[col].clone());
            for i in 0..n {
                if i != col && a[i].get(col) {
                    a[i].xor_assign(&pa)?;
                    inv[i].xor_assign(&pi)?;
                }
            }
        }
        Ok(Some(F2Matrix { cols: n, rows: inv }))
    }
}

/// A subspace of `GF(2)^n` in fully reduced row-echelon form. The pivot of a
/// basis vector is its lowest set bit; no other basis vector has that bit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RowSpace {
    ambient_dim: usize,
    /// Sorted by pivot.
    basis: Vec<F2Vector>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(ambient_dim: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::Size("ambient dimension must be positive".into()));
        }
        Ok(Self { ambient_dim, basis: Vec::new(), pivots: Vec::new() })
    }

    pub fn from_vectors<'a, I: IntoIterator<Item = &'a F2Vector>>(ambient_dim: usize, vectors: I) -> Result<Self> {
        let mut space = Self::new(ambient_dim)?;
        for v in vectors {
            space.insert(v)?;
        }
        Ok(space)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[F2Vector] {
        &self.basis
    }

    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivots
    }

    /// The unique representative of `v + span` with zeros in all pivots.
    pub fn reduce(&self, v: &F2Vector) -> Result<F2Vector> {
        check_dim(self.ambient_dim, v.len())?;
        let mut out = v.clone();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(b)?;
            }
        }
        Ok(out)
    }

    pub fn contains(&self, v: &F2Vector) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }

    /// Adds `v` to the spanning set; returns whether the rank grew.
    pub fn insert(&mut self, v: &F2Vector) -> Result<bool> {
        let r = self.reduce(v)?;
        let Some(p) = r.first_one() else {
            return Ok(false);
        };
        for b in &mut self.basis {
            if b.get(p) {
                b.xor_assign(&r)?;
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.basis.insert(at, r);
        Ok(true)
    }

    pub fn is_subspace_of(&self, other: &RowSpace) -> Result<bool> {
        check_dim(self.ambient_dim, other.ambient_dim)?;
        for b in &self.basis {
            if !other.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Canonical reduced row space of a list of equal-length vectors.
pub fn reduce_to_row_space(vectors: &[F2Vector]) -> Result<RowSpace> {
    let n = vectors.first().map(F2Vector::len).unwrap_or(0);
    RowSpace::from_vectors(n, vectors)
}

/// `representative + space`, with the representative reduced modulo the space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffineCoset {
    space: RowSpace,
    representative: F2Vector,
}

impl AffineCoset {
    pub fn new(representative: &F2Vector, space: RowSpace) -> Result<Self> {
        let representative = space.reduce(representative)?;
        Ok(Self { space, representative })
    }

    pub fn space(&self) -> &RowSpace {
        &self.space
    }

    pub fn representative(&self) -> &F2Vector {
        &self.representative
    }

    pub fn contains(&self, v: &F2Vector) -> Result<bool> {
        Ok(self.space.reduce(v)? == self.representative)
    }

    pub fn is_subset_of(&self, outer: &AffineCoset) -> Result<bool> {
        Ok(self.space.is_subspace_of(&outer.space)? && outer.contains(&self.representative)?)
    }
}

pub fn coset_contains(c: &AffineCoset, v: &F2Vector) -> Result<bool> {
    c.contains(v)
}

pub fn coset_subset(inner: &AffineCoset, outer: &AffineCoset) -> Result<bool> {
    inner.is_subset_of(outer)
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 || m > MATERIALIZE_MAX_M {
        return Err(Error::Size(format!("m = {m} outside 1..={MATERIALIZE_MAX_M}")));
    }
    Ok(())
}

/// Evaluation vector of the monomial `∏_{i∈A} z_i`: the indicator of `z ⊇ A`.
pub fn monomial_evaluation(a: SubsetMask) -> Result<F2Vector> {
    let m = a.m();
    check_m(m)?;
    let mut v = F2Vector::zeros(1 << m)?;
    let free = a.complement().mask();
    let mut sub = free;
    loop {
        v.set((a.mask() | sub) as usize, true);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    Ok(v)
}

/// The `2^m × 2^m` matrix `M_{A,z} = ∏_{i∈A} z_i`, rows in decoding order.
pub fn build_rm_matrix(m: u32) -> Result<F2Matrix> {
    check_m(m)?;
    let rows = decoding_order(m)?.into_iter().map(monomial_evaluation).collect::<Result<Vec<_>>>()?;
    F2Matrix::from_rows(rows)
}

/// `M^{-1}` with rows indexed by `z` and columns by sets in decoding order:
/// entry `(z, A)` is 1 iff `support(z) ⊆ A`.
pub fn build_rm_inverse(m: u32) -> Result<F2Matrix> {
    check_m(m)?;
    let n = 1usize << m;
    let mut position = vec![0usize; n];
    for (i, a) in decoding_order(m)?.iter().enumerate() {
        position[a.mask() as usize] = i;
    }
    let full = (n - 1) as u64;
    let rows = (0..n as u64)
        .map(|z| {
            let mut row = F2Vector::zeros(n)?;
            let free = full & !z;
            let mut sub = free;
            loop {
                row.set(position[(z | sub) as usize], true);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    F2Matrix::from_rows(rows)
}

/// In-place transform `x_z ← Σ_{y ⊆ z} x_y` over GF(2) on a table indexed by
/// mask. It is its own inverse, and computes both `u ↦ uM` and `y ↦ yM^{-1}`.
pub fn subset_sum_transform(values: &mut [u8]) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let mut bit = 1;
    while bit < n {
        for z in 0..n {
            if z & bit != 0 {
                values[z] ^= values[z ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// `X = Σ_A U_A v_A` for the message bits set to 1.
pub fn encode<I: IntoIterator<Item = (SubsetMask, bool)>>(m: u32, message: I) -> Result<F2Vector> {
    check_m(m)?;
    let mut table = vec![0u8; 1 << m];
    for (a, bit) in message {
        if a.m() != m {
            return Err(Error::Dimension { expected: m as usize, actual: a.m() as usize });
        }
        table[a.mask() as usize] ^= bit as u8;
    }
    subset_sum_transform(&mut table);
    F2Vector::from_bytes(&table)
}
