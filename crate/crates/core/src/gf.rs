//! Arithmetic and linear algebra over the prime field F_b.
//!
//! Digits are stored as `u8`; with `b <= 31` every product of two digits fits in a `u16`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A prime base `2 <= b <= 31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeBase(u8);

impl PrimeBase {
    pub fn new(b: u32) -> Result<Self> {
        if !(2..=31).contains(&b) || !(2..b).take_while(|d| d * d <= b).all(|d| b % d != 0) {
            return Err(Error::InvalidBase(b));
        }
        Ok(PrimeBase(b as u8))
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn add(self, a: u8, c: u8) -> u8 {
        ((a as u16 + c as u16) % self.0 as u16) as u8
    }

    #[inline]
    pub fn sub(self, a: u8, c: u8) -> u8 {
        ((a as u16 + self.0 as u16 - c as u16) % self.0 as u16) as u8
    }

    #[inline]
    pub fn mul(self, a: u8, c: u8) -> u8 {
        ((a as u16 * c as u16) % self.0 as u16) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        self.sub(0, a)
    }

    fn check_digit(self, d: u8) -> Result<()> {
        if d < self.0 {
            Ok(())
        } else {
            Err(Error::DigitOutOfRange { digit: d as u32, base: self.0 })
        }
    }
}

impl fmt::Display for PrimeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Multiplicative inverse by Fermat exponentiation `a^(b-2) mod b`.
pub fn gf_inv(b: PrimeBase, a: u8) -> Result<u8> {
    if a % b.get() == 0 {
        return Err(Error::NoInverse);
    }
    let modulus = b.get() as u32;
    let mut base = (a as u32) % modulus;
    let mut exp = modulus - 2;
    let mut acc = 1u32;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    Ok(acc as u8)
}

/// Dense row-major matrix over F_b.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GfMatrix {
    base: PrimeBase,
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl GfMatrix {
    pub fn zeros(base: PrimeBase, rows: usize, cols: usize) -> Self {
        GfMatrix { base, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(base: PrimeBase, n: usize) -> Self {
        let mut m = Self::zeros(base, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn from_entries(base: PrimeBase, rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: entries.len() });
        }
        for &e in &entries {
            base.check_digit(e)?;
        }
        Ok(GfMatrix { base, rows, cols, entries })
    }

    /// Builds a matrix from equally long rows. All rows must have the same length.
    pub fn from_rows<R: AsRef<[u8]>>(base: PrimeBase, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Self::from_entries(base, rows.len(), cols, entries)
    }

    #[inline]
    pub fn base(&self) -> PrimeBase {
        self.base
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.cols + j]
    }

    /// Panics if `v` is not a digit of the base.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        assert!(v < self.base.get(), "digit {v} out of range");
        self.entries[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> GfMatrix {
        let mut t = Self::zeros(self.base, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// Matrix product `self * rhs` over F_b.
    pub fn mul(&self, rhs: &GfMatrix) -> Result<GfMatrix> {
        if self.base != rhs.base {
            return Err(Error::BaseMismatch(self.base.get(), rhs.base.get()));
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: rhs.rows });
        }
        let b = self.base.get() as u32;
        let mut out = Self::zeros(self.base, self.rows, rhs.cols);
        let mut acc = vec![0u32; rhs.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &c) in acc.iter_mut().zip(rhs.row(k)) {
                    *slot += a as u32 * c as u32;
                }
            }
            for (j, a) in acc.iter().enumerate() {
                out.entries[i * rhs.cols + j] = (a % b) as u8;
            }
        }
        Ok(out)
    }

    /// Keeps the first `n` rows.
    pub fn top_rows(&self, n: usize) -> GfMatrix {
        let n = n.min(self.rows);
        GfMatrix { base: self.base, rows: n, cols: self.cols, entries: self.entries[..n * self.cols].to_vec() }
    }
}

impl fmt::Debug for GfMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GfMatrix(b={}, {}x{})", self.base, self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// `w = C v` over F_b.
pub fn mat_vec(c: &GfMatrix, v: &[u8]) -> Result<Vec<u8>> {
    if v.len() != c.cols {
        return Err(Error::DimensionMismatch { expected: c.cols, got: v.len() });
    }
    for &d in v {
        c.base.check_digit(d)?;
    }
    let b = c.base.get() as u32;
    Ok((0..c.rows)
        .map(|i| {
            let s: u32 = c.row(i).iter().zip(v).map(|(&a, &x)| a as u32 * x as u32).sum();
            (s % b) as u8
        })
        .collect())
}

/// Rank by Gauss elimination, pivoting on the first nonzero entry of each column.
pub fn rank(m: &GfMatrix) -> usize {
    let mut echelon = RowEchelon::new(m.base, m.cols);
    (0..m.rows).filter(|&i| echelon.insert(m.row(i))).count()
}

/// Incrementally maintained row-echelon basis of a subspace of F_b^n.
///
/// Each stored row is normalized so that its pivot entry is 1 and all earlier pivot columns
/// of later rows are cleared, which makes a membership test a single forward sweep.
#[derive(Debug, Clone)]
pub struct RowEchelon {
    base: PrimeBase,
    width: usize,
    rows: Vec<(usize, Vec<u8>)>,
}

impl RowEchelon {
    pub fn new(base: PrimeBase, width: usize) -> Self {
        RowEchelon { base, width, rows: Vec::new() }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Reduces `v` against the basis; returns the residual.
    pub fn reduce(&self, v: &[u8]) -> Vec<u8> {
        debug_assert_eq!(v.len(), self.width);
        let b = self.base;
        let mut r = v.to_vec();
        for (pivot, row) in &self.rows {
            let coef = r[*pivot];
            if coef == 0 {
                continue;
            }
            let neg = b.neg(coef);
            for (x, &y) in r.iter_mut().zip(row) {
                if y != 0 {
                    *x = b.add(*x, b.mul(neg, y));
                }
            }
        }
        r
    }

    /// Adds `v` to the basis; returns whether it was independent of the rows so far.
    pub fn insert(&mut self, v: &[u8]) -> bool {
        let mut r = self.reduce(v);
        let Some(pivot) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = gf_inv(self.base, r[pivot]).expect("pivot is nonzero");
        for x in r.iter_mut() {
            *x = self.base.mul(*x, inv);
        }
        self.rows.push((pivot, r));
        true
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}
