//! Randomized generating-matrix designs.

mod sobol;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{GfMatrix, PrimeBase};
use crate::rng::{digit, RngSeed};

pub use sobol::{sobol_matrices, sobol_table_checksum, SOBOL_MAX_DIM};

/// Largest `E` with `b^E <= 2^53`, so every grid value `k b^-E` is exact in an `f64`.
pub fn default_precision(b: PrimeBase) -> usize {
    let b = b.get() as u64;
    let mut e = 0;
    let mut p = 1u64;
    while p * b <= 1u64 << 53 {
        p *= b;
        e += 1;
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignKind {
    Hrd,
    Urd,
    LmsSobol,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Hrd => "hrd",
            DesignKind::Urd => "urd",
            DesignKind::LmsSobol => "lms-sobol",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hrd" => Ok(DesignKind::Hrd),
            "urd" => Ok(DesignKind::Urd),
            "lms-sobol" | "lms_sobol" | "lms" => Ok(DesignKind::LmsSobol),
            _ => Err(Error::InvalidParameter("design must be one of hrd, urd, lms-sobol")),
        }
    }
}

/// A digital net: `s` generating matrices of size `E x m` over F_b and an optional digital
/// shift per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDesign {
    base: PrimeBase,
    m: usize,
    precision: usize,
    matrices: Vec<GfMatrix>,
    shifts: Option<Vec<Vec<u8>>>,
}

impl NetDesign {
    pub fn new(
        base: PrimeBase,
        m: usize,
        precision: usize,
        matrices: Vec<GfMatrix>,
        shifts: Option<Vec<Vec<u8>>>,
    ) -> Result<Self> {
        if m == 0 || m > precision {
            return Err(Error::InvalidDesign("need 1 <= m <= E"));
        }
        if precision > default_precision(base) {
            return Err(Error::InvalidDesign("b^E must not exceed 2^53"));
        }
        if matrices.is_empty() {
            return Err(Error::InvalidDesign("dimension must be at least 1"));
        }
        for c in &matrices {
            if c.base() != base {
                return Err(Error::BaseMismatch(c.base().get(), base.get()));
            }
            if c.rows() != precision || c.cols() != m {
                return Err(Error::InvalidDesign("every generating matrix must be E x m"));
            }
        }
        if let Some(sh) = &shifts {
            if sh.len() != matrices.len() {
                return Err(Error::DimensionMismatch { expected: matrices.len(), got: sh.len() });
            }
            for d in sh {
                if d.len() != precision {
                    return Err(Error::DimensionMismatch { expected: precision, got: d.len() });
                }
                if let Some(&bad) = d.iter().find(|&&x| x >= base.get()) {
                    return Err(Error::DigitOutOfRange { digit: bad as u32, base: base.get() });
                }
            }
        }
        Ok(NetDesign { base, m, precision, matrices, shifts })
    }

    #[inline]
    pub fn base(&self) -> PrimeBase {
        self.base
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of digit rows `E`.
    #[inline]
    pub fn precision(&self) -> usize {
        self.precision
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// `b^m`.
    #[inline]
    pub fn n_points(&self) -> usize {
        (self.base.get() as usize).pow(self.m as u32)
    }

    #[inline]
    pub fn matrices(&self) -> &[GfMatrix] {
        &self.matrices
    }

    #[inline]
    pub fn shifts(&self) -> Option<&[Vec<u8>]> {
        self.shifts.as_deref()
    }

    pub fn without_shift(&self) -> NetDesign {
        NetDesign { shifts: None, ..self.clone() }
    }

    /// Restriction to the coordinates listed in `dims` (0-based).
    pub fn project(&self, dims: &[usize]) -> Result<NetDesign> {
        let mut matrices = Vec::with_capacity(dims.len());
        let mut shifts = self.shifts.as_ref().map(|_| Vec::with_capacity(dims.len()));
        for &j in dims {
            if j >= self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: j + 1 });
            }
            matrices.push(self.matrices[j].clone());
            if let (Some(out), Some(src)) = (shifts.as_mut(), self.shifts.as_ref()) {
                out.push(src[j].clone());
            }
        }
        NetDesign::new(self.base, self.m, self.precision, matrices, shifts)
    }
}

/// The `E + m - 1` digits filling one Hankel generating matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HankelSeed {
    base: PrimeBase,
    digits: Vec<u8>,
}

impl HankelSeed {
    pub fn new(base: PrimeBase, digits: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = digits.iter().find(|&&x| x >= base.get()) {
            return Err(Error::DigitOutOfRange { digit: bad as u32, base: base.get() });
        }
        Ok(HankelSeed { base, digits })
    }

    pub fn draw<R: Rng + ?Sized>(rng: &mut R, base: PrimeBase, precision: usize, m: usize) -> Self {
        let digits = (0..precision + m - 1).map(|_| digit(rng, base.get())).collect();
        HankelSeed { base, digits }
    }

    #[inline]
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }
}

/// Hankel matrix with entry `(j, r)` (0-based) equal to `u[j + r]`.
pub fn hankel_matrix(u: &HankelSeed, precision: usize, m: usize) -> Result<GfMatrix> {
    let expected = precision + m - 1;
    if m == 0 || u.digits.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: u.digits.len() });
    }
    let mut entries = Vec::with_capacity(precision * m);
    for j in 0..precision {
        entries.extend_from_slice(&u.digits[j..j + m]);
    }
    GfMatrix::from_entries(u.base, precision, m, entries)
}

fn draw_shifts(seed: RngSeed, base: PrimeBase, precision: usize, s: usize) -> Vec<Vec<u8>> {
    (0..s)
        .map(|j| {
            let mut rng = seed.derive("shift", j as u64).rng();
            (0..precision).map(|_| digit(&mut rng, base.get())).collect()
        })
        .collect()
}

fn check_shape(precision: usize, m: usize, s: usize) -> Result<()> {
    if m == 0 || m > precision {
        return Err(Error::InvalidDesign("need 1 <= m <= E"));
    }
    if s == 0 {
        return Err(Error::InvalidDesign("dimension must be at least 1"));
    }
    Ok(())
}

/// Hankel random design: one independent uniform [`HankelSeed`] per coordinate.
pub fn draw_hrd(
    seed: RngSeed,
    base: PrimeBase,
    precision: usize,
    m: usize,
    s: usize,
    with_shift: bool,
) -> Result<NetDesign> {
    check_shape(precision, m, s)?;
    let matrices = (0..s)
        .map(|j| {
            let mut rng = seed.derive("dim", j as u64).rng();
            hankel_matrix(&HankelSeed::draw(&mut rng, base, precision, m), precision, m)
        })
        .collect::<Result<Vec<_>>>()?;
    let shifts = with_shift.then(|| draw_shifts(seed, base, precision, s));
    NetDesign::new(base, m, precision, matrices, shifts)
}

/// Uniform random design: every matrix entry independent and uniform on F_b.
pub fn draw_urd(
    seed: RngSeed,
    base: PrimeBase,
    precision: usize,
    m: usize,
    s: usize,
    with_shift: bool,
) -> Result<NetDesign> {
    check_shape(precision, m, s)?;
    let matrices = (0..s)
        .map(|j| {
            let mut rng = seed.derive("dim", j as u64).rng();
            let entries = (0..precision * m).map(|_| digit(&mut rng, base.get())).collect();
            GfMatrix::from_entries(base, precision, m, entries)
        })
        .collect::<Result<Vec<_>>>()?;
    let shifts = with_shift.then(|| draw_shifts(seed, base, precision, s));
    NetDesign::new(base, m, precision, matrices, shifts)
}

/// Random `E x E` lower-triangular scrambler with nonzero diagonal.
///
/// Entries are drawn row by row (strictly-lower entries, then the diagonal), so the leading
/// `L x L` block of a draw equals `lms_matrix` with size `L` from the same stream.
pub fn lms_matrix<R: Rng + ?Sized>(rng: &mut R, base: PrimeBase, precision: usize) -> GfMatrix {
    let b = base.get();
    let mut m = GfMatrix::zeros(base, precision, precision);
    for i in 0..precision {
        for j in 0..i {
            m.set(i, j, digit(rng, b));
        }
        m.set(i, i, 1 + digit(rng, b - 1));
    }
    m
}

/// Scrambled matrix `M C`.
pub fn apply_lms(scrambler: &GfMatrix, c: &GfMatrix) -> Result<GfMatrix> {
    if scrambler.rows() != scrambler.cols() {
        return Err(Error::DimensionMismatch { expected: scrambler.rows(), got: scrambler.cols() });
    }
    scrambler.mul(c)
}

/// Sobol' matrices (base 2) scrambled by independent [`lms_matrix`] draws.
pub fn draw_lms_sobol(seed: RngSeed, precision: usize, m: usize, s: usize, with_shift: bool) -> Result<NetDesign> {
    check_shape(precision, m, s)?;
    let base = PrimeBase::new(2)?;
    let matrices = sobol_matrices(m, s, precision)?
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut rng = seed.derive("lms", j as u64).rng();
            apply_lms(&lms_matrix(&mut rng, base, precision), c)
        })
        .collect::<Result<Vec<_>>>()?;
    let shifts = with_shift.then(|| draw_shifts(seed, base, precision, s));
    NetDesign::new(base, m, precision, matrices, shifts)
}

/// Dispatches on `kind`. [`DesignKind::LmsSobol`] requires base 2.
pub fn draw_design(
    kind: DesignKind,
    seed: RngSeed,
    base: PrimeBase,
    precision: usize,
    m: usize,
    s: usize,
    with_shift: bool,
) -> Result<NetDesign> {
    match kind {
        DesignKind::Hrd => draw_hrd(seed, base, precision, m, s, with_shift),
        DesignKind::Urd => draw_urd(seed, base, precision, m, s, with_shift),
        DesignKind::LmsSobol => {
            if base.get() != 2 {
                return Err(Error::InvalidParameter("lms-sobol requires base 2"));
            }
            draw_lms_sobol(seed, precision, m, s, with_shift)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::rank;

    fn b(n: u32) -> PrimeBase {
        PrimeBase::new(n).unwrap()
    }

    #[test]
    fn precision_defaults() {
        assert_eq!(default_precision(b(2)), 53);
        assert_eq!(default_precision(b(3)), 33);
        assert_eq!(default_precision(b(5)), 22);
        assert_eq!(default_precision(b(7)), 18);
        for n in [2, 3, 5, 7, 11, 31] {
            let e = default_precision(b(n)) as u32;
            assert!((n as u128).pow(e) <= 1 << 53);
            assert!((n as u128).pow(e + 1) > 1 << 53);
        }
    }

    #[test]
    fn hankel_examples() {
        let u = HankelSeed::new(b(2), vec![1, 0, 1, 1]).unwrap();
        assert_eq!(hankel_matrix(&u, 3, 2).unwrap(), GfMatrix::from_rows(b(2), &[[1, 0], [0, 1], [1, 1]]).unwrap());
        let u = HankelSeed::new(b(2), vec![0, 0, 0]).unwrap();
        assert_eq!(hankel_matrix(&u, 2, 2).unwrap(), GfMatrix::zeros(b(2), 2, 2));
        let u = HankelSeed::new(b(3), vec![2, 1, 0]).unwrap();
        assert_eq!(hankel_matrix(&u, 2, 2).unwrap(), GfMatrix::from_rows(b(3), &[[2, 1], [1, 0]]).unwrap());
        assert!(hankel_matrix(&u, 3, 2).is_err());
    }

    #[test]
    fn hrd_is_deterministic_and_hankel() {
        let seed = RngSeed::new(11);
        let d1 = draw_hrd(seed, b(2), 4, 2, 3, false).unwrap();
        let d2 = draw_hrd(seed, b(2), 4, 2, 3, false).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(d1.dim(), 3);
        for c in d1.matrices() {
            assert_eq!((c.rows(), c.cols()), (4, 2));
        }
        let d = draw_hrd(RngSeed::new(5), b(5), 22, 6, 4, true).unwrap();
        for c in d.matrices() {
            for j in 1..c.rows() {
                for r in 0..c.cols() - 1 {
                    assert_eq!(c.get(j, r), c.get(j - 1, r + 1));
                }
            }
        }
        assert_eq!(d.shifts().unwrap().len(), 4);
    }

    #[test]
    fn earlier_dimensions_do_not_depend_on_dimension_count() {
        let seed = RngSeed::new(99);
        let small = draw_hrd(seed, b(3), 10, 4, 2, true).unwrap();
        let large = draw_hrd(seed, b(3), 10, 4, 7, true).unwrap();
        assert_eq!(small.matrices(), &large.matrices()[..2]);
        assert_eq!(small.shifts().unwrap(), &large.shifts().unwrap()[..2]);
        let small = draw_urd(seed, b(3), 10, 4, 2, false).unwrap();
        let large = draw_urd(seed, b(3), 10, 4, 5, false).unwrap();
        assert_eq!(small.matrices(), &large.matrices()[..2]);
    }

    fn within_4_sigma(count: usize, n: usize, p: f64) -> bool {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - n as f64 * p).abs() <= 4.0 * sigma
    }

    #[test]
    fn hrd_seed_digits_are_uniform() {
        let mut counts = [0usize; 3];
        let mut total = 0;
        let mut i = 0;
        while total < 100_000 {
            let mut rng = RngSeed::new(1).derive("t", i).rng();
            for &d in HankelSeed::draw(&mut rng, b(3), 30, 5).digits() {
                counts[d as usize] += 1;
                total += 1;
            }
            i += 1;
        }
        for c in counts {
            assert!(within_4_sigma(c, total, 1.0 / 3.0), "{counts:?}");
        }
    }

    #[test]
    fn urd_entries_are_uniform() {
        let mut counts = [0usize; 3];
        let mut total = 0;
        let mut i = 0;
        while total < 100_000 {
            let d = draw_urd(RngSeed::new(2).derive("t", i), b(3), 20, 10, 5, false).unwrap();
            for c in d.matrices() {
                for &e in c.entries() {
                    counts[e as usize] += 1;
                    total += 1;
                }
            }
            i += 1;
        }
        let d = draw_urd(RngSeed::new(2), b(3), 20, 10, 5, true).unwrap();
        assert_eq!(d, draw_urd(RngSeed::new(2), b(3), 20, 10, 5, true).unwrap());
        for c in counts {
            assert!(within_4_sigma(c, total, 1.0 / 3.0), "{counts:?}");
        }
    }

    #[test]
    fn lms_structure() {
        let mut rng = RngSeed::new(3).rng();
        let m2 = lms_matrix(&mut rng, b(2), 20);
        for i in 0..20 {
            assert_eq!(m2.get(i, i), 1);
            for j in i + 1..20 {
                assert_eq!(m2.get(i, j), 0);
            }
        }
        assert_eq!(rank(&m2), 20);
        let mut diag = [0usize; 3];
        let mut total = 0;
        let mut rng = RngSeed::new(4).rng();
        while total < 100_000 {
            let m = lms_matrix(&mut rng, b(3), 50);
            assert_eq!(rank(&m), 50);
            for i in 0..50 {
                diag[m.get(i, i) as usize] += 1;
                total += 1;
                for j in i + 1..50 {
                    assert_eq!(m.get(i, j), 0);
                }
            }
        }
        assert_eq!(diag[0], 0);
        assert!(within_4_sigma(diag[1], total, 0.5) && within_4_sigma(diag[2], total, 0.5));
    }

    #[test]
    fn lms_leading_block_matches_smaller_draw() {
        let seed = RngSeed::new(8);
        let full = lms_matrix(&mut seed.rng(), b(5), 30);
        let small = lms_matrix(&mut seed.rng(), b(5), 7);
        for i in 0..7 {
            assert_eq!(&full.row(i)[..7], small.row(i));
        }
    }

    #[test]
    fn apply_lms_examples() {
        let c = GfMatrix::from_rows(b(3), &[[1, 2], [0, 1], [2, 2]]).unwrap();
        assert_eq!(apply_lms(&GfMatrix::identity(b(3), 3), &c).unwrap(), c);
        let m = GfMatrix::from_rows(b(2), &[[1, 0], [1, 1]]).unwrap();
        let c = GfMatrix::from_rows(b(2), &[[1], [0]]).unwrap();
        assert_eq!(apply_lms(&m, &c).unwrap(), GfMatrix::from_rows(b(2), &[[1], [1]]).unwrap());
        assert!(apply_lms(&GfMatrix::identity(b(2), 3), &c).is_err());
        for i in 0..50 {
            let d = draw_urd(RngSeed::new(i), b(3), 12, 5, 1, false).unwrap();
            let c = &d.matrices()[0];
            let m = lms_matrix(&mut RngSeed::new(1000 + i).rng(), b(3), 12);
            assert_eq!(rank(&apply_lms(&m, c).unwrap()), rank(c));
        }
    }

    #[test]
    fn lms_sobol_is_deterministic() {
        let d1 = draw_design(DesignKind::LmsSobol, RngSeed::new(1), b(2), 53, 6, 5, true).unwrap();
        let d2 = draw_design(DesignKind::LmsSobol, RngSeed::new(1), b(2), 53, 6, 5, true).unwrap();
        assert_eq!(d1, d2);
        assert!(draw_design(DesignKind::LmsSobol, RngSeed::new(1), b(3), 33, 6, 5, true).is_err());
    }

    #[test]
    fn design_invariants_are_enforced() {
        let c = GfMatrix::zeros(b(2), 3, 2);
        assert!(NetDesign::new(b(2), 2, 3, vec![c.clone()], None).is_ok());
        assert!(NetDesign::new(b(2), 0, 3, vec![c.clone()], None).is_err());
        assert!(NetDesign::new(b(2), 4, 3, vec![c.clone()], None).is_err());
        assert!(NetDesign::new(b(2), 2, 3, vec![], None).is_err());
        assert!(NetDesign::new(b(2), 2, 3, vec![c.clone()], Some(vec![vec![0, 1]])).is_err());
        assert!(NetDesign::new(b(2), 2, 3, vec![c.clone()], Some(vec![vec![0, 1, 2]])).is_err());
        assert!(NetDesign::new(b(3), 2, 3, vec![c], None).is_err());
        assert_eq!("LMS-Sobol".parse::<DesignKind>().unwrap(), DesignKind::LmsSobol);
    }
}
