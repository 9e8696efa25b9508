//! Digit weights, Walsh functions, dual-net membership, t-parameters and inclusion
//! probabilities.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gf::{GfMatrix, PrimeBase, RowEchelon};
use crate::netgen::{default_precision, draw_design, DesignKind, NetDesign};
use crate::pointgen::index_digits;
use crate::rng::RngSeed;

/// Cap on the number of base-`b` digits of an index component in the exact probability maps.
pub const MAX_INDEX_DIGITS: usize = 32;

/// Guard on the number of compositions enumerated by [`t_parameter`].
pub const COMPOSITION_GUARD: u128 = 1_000_000;

/// A frequency vector `k = (k_1, ..., k_s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexVector(pub Vec<u64>);

impl IndexVector {
    pub fn new(k: Vec<u64>) -> Self {
        IndexVector(k)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn components(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// `sum_j mu_alpha(k_j)`.
    pub fn mu_alpha(&self, alpha: usize, b: PrimeBase) -> usize {
        self.0.iter().map(|&k| mu_alpha(k, alpha, b)).sum()
    }
}

impl From<Vec<u64>> for IndexVector {
    fn from(k: Vec<u64>) -> Self {
        IndexVector(k)
    }
}

/// Number of base-`b` digits of `k` (0 for `k = 0`).
pub fn digit_len(k: u64, b: PrimeBase) -> usize {
    let b = b.get() as u64;
    let mut n = 0;
    let mut v = k;
    while v > 0 {
        v /= b;
        n += 1;
    }
    n
}

/// 1-based positions of the nonzero digits of `k`, ascending.
pub fn kappa(k: u64, b: PrimeBase) -> Vec<usize> {
    let digits = index_digits(k, b.get(), digit_len(k, b));
    digits.iter().enumerate().filter(|(_, &d)| d != 0).map(|(i, _)| i + 1).collect()
}

/// Sum of the `alpha` largest positions in `kappa(k)`.
pub fn mu_alpha(k: u64, alpha: usize, b: PrimeBase) -> usize {
    kappa(k, b).iter().rev().take(alpha).sum()
}

/// Grid integer `Y` with `x = Y b^-E`, for `x` in `[0, 1)`; off-grid values are truncated.
pub fn coordinate_to_grid(x: f64, b: PrimeBase, precision: usize) -> u64 {
    let scale = (b.get() as u64).pow(precision as u32);
    let sf = scale as f64;
    let mut y = ((x * sf) as u64).min(scale - 1);
    while y > 0 && y as f64 / sf > x {
        y -= 1;
    }
    while y + 1 < scale && (y + 1) as f64 / sf <= x {
        y += 1;
    }
    y
}

/// Digits `x_[1..E]` of a coordinate, most significant first.
pub fn coordinate_digits(x: f64, b: PrimeBase, precision: usize) -> Vec<u8> {
    let mut digits = index_digits(coordinate_to_grid(x, b, precision), b.get(), precision);
    digits.reverse();
    digits
}

/// `omega_b^e` with exact values for `e = 0` and for `b = 2`.
pub fn root_of_unity(e: u8, b: PrimeBase) -> Complex64 {
    if e == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if b.get() == 2 {
        return Complex64::new(-1.0, 0.0);
    }
    let phase = 2.0 * core::f64::consts::PI * e as f64 / b.get() as f64;
    Complex64::new(libm::cos(phase), libm::sin(phase))
}

/// Exponent `sum_i k_[i] x_[i] mod b` of the Walsh function, for digit words of `x`.
pub fn walsh_exponent(k: u64, x_digits: &[u8], b: PrimeBase) -> u8 {
    let kd = index_digits(k, b.get(), digit_len(k, b));
    kd.iter().zip(x_digits).fold(0u8, |acc, (&ki, &xi)| b.add(acc, b.mul(ki, xi)))
}

/// `wal_k(x)` at precision [`default_precision`].
pub fn walsh(k: u64, x: f64, b: PrimeBase) -> Complex64 {
    let digits = coordinate_digits(x, b, default_precision(b));
    root_of_unity(walsh_exponent(k, &digits, b), b)
}

/// Product of one-dimensional Walsh functions.
pub fn walsh_multi(k: &IndexVector, x: &[f64], b: PrimeBase) -> Result<Complex64> {
    if k.dim() != x.len() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: x.len() });
    }
    let e = default_precision(b);
    let exp =
        k.0.iter().zip(x).fold(0u8, |acc, (&kj, &xj)| b.add(acc, walsh_exponent(kj, &coordinate_digits(xj, b, e), b)));
    Ok(root_of_unity(exp, b))
}

/// Whether `sum_j C_j^T k_j = 0`, i.e. `k` lies in the dual net. Shifts are ignored.
pub fn dual_contains(design: &NetDesign, k: &IndexVector) -> Result<bool> {
    if k.dim() != design.dim() {
        return Err(Error::DimensionMismatch { expected: design.dim(), got: k.dim() });
    }
    let b = design.base();
    let e = design.precision();
    let m = design.m();
    let mut acc = vec![0u8; m];
    for (c, &kj) in design.matrices().iter().zip(&k.0) {
        let len = digit_len(kj, b);
        if len > e {
            return Err(Error::PrecisionExceeded { needed: len, precision: e });
        }
        for (i, &d) in index_digits(kj, b.get(), len).iter().enumerate() {
            if d == 0 {
                continue;
            }
            for (r, a) in acc.iter_mut().enumerate() {
                *a = b.add(*a, b.mul(d, c.get(i, r)));
            }
        }
    }
    Ok(acc.iter().all(|&a| a == 0))
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut r = 1u128;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Whether every stack of leading rows with total `total` rows is linearly independent.
fn stacks_independent(mats: &[&GfMatrix], total: usize, ech: RowEchelon) -> bool {
    let (first, rest) = match mats.split_first() {
        Some(x) => x,
        None => return total == 0,
    };
    let cap = total.min(first.rows());
    if rest.is_empty() {
        if cap < total {
            return true;
        }
        let mut ech = ech;
        return (0..total).all(|i| ech.insert(first.row(i)));
    }
    let tail_cap: usize = rest.iter().map(|c| c.rows()).sum();
    let mut ech = ech;
    for q in 0..=cap {
        if total - q <= tail_cap && !stacks_independent(rest, total - q, ech.clone()) {
            return false;
        }
        if q < cap && !ech.insert(first.row(q)) {
            return false;
        }
    }
    true
}

fn t_of(mats: &[&GfMatrix], m: usize) -> Result<usize> {
    let s = mats.len();
    if s == 0 {
        return Err(Error::InvalidParameter("coordinate set must be non-empty"));
    }
    let count = binomial((m + s - 1) as u128, (s - 1) as u128);
    if count > COMPOSITION_GUARD {
        return Err(Error::EnumerationTooLarge(count));
    }
    let base = mats[0].base();
    for t in 0..=m {
        if stacks_independent(mats, m - t, RowEchelon::new(base, m)) {
            return Ok(t);
        }
    }
    Ok(m)
}

/// Smallest `t` such that every stack `C_q` with `|q|_1 = m - t` has full row rank.
pub fn t_parameter(design: &NetDesign) -> Result<usize> {
    let mats: Vec<&GfMatrix> = design.matrices().iter().collect();
    t_of(&mats, design.m())
}

/// [`t_parameter`] restricted to the coordinates in `u` (0-based).
pub fn t_u_parameter(design: &NetDesign, u: &[usize]) -> Result<usize> {
    let mut mats = Vec::with_capacity(u.len());
    for &j in u {
        if j >= design.dim() {
            return Err(Error::DimensionMismatch { expected: design.dim(), got: j + 1 });
        }
        mats.push(&design.matrices()[j]);
    }
    t_of(&mats, design.m())
}

/// Exact `Pr(k_1, ..., k_K all in the dual net)` over a random HRD or URD design:
/// `b^-rank` of the linear map from the design's random digits to `F_b^(m K)`.
pub fn dual_prob_exact(ks: &[IndexVector], b: PrimeBase, m: usize, kind: DesignKind) -> Result<f64> {
    let s = match ks.first() {
        Some(k) => k.dim(),
        None => return Ok(1.0),
    };
    if ks.iter().any(|k| k.dim() != s) {
        return Err(Error::InvalidParameter("index vectors must share a dimension"));
    }
    let n = ks.iter().flat_map(|k| k.0.iter()).map(|&x| digit_len(x, b)).max().unwrap_or(0).max(1);
    if n > MAX_INDEX_DIGITS {
        return Err(Error::PrecisionExceeded { needed: n, precision: MAX_INDEX_DIGITS });
    }
    let per_dim = match kind {
        DesignKind::Hrd => n + m - 1,
        DesignKind::Urd => n * m,
        DesignKind::LmsSobol => return Err(Error::InvalidParameter("exact maps are available for hrd and urd only")),
    };
    let width = s * per_dim;
    let mut ech = RowEchelon::new(b, width);
    let mut row = vec![0u8; width];
    for k in ks {
        let digits: Vec<Vec<u8>> = k.0.iter().map(|&x| index_digits(x, b.get(), n)).collect();
        for r in 0..m {
            row.iter_mut().for_each(|v| *v = 0);
            for (j, kd) in digits.iter().enumerate() {
                for (i, &d) in kd.iter().enumerate() {
                    let var = match kind {
                        DesignKind::Hrd => i + r,
                        _ => i * m + r,
                    };
                    let slot = &mut row[j * per_dim + var];
                    *slot = b.add(*slot, d);
                }
            }
            ech.insert(&row);
        }
    }
    Ok(libm::pow(b.get() as f64, -(ech.rank() as f64)))
}

/// Exact joint inclusion probability of two index vectors.
pub fn joint_dual_prob_exact(
    k1: &IndexVector,
    k2: &IndexVector,
    b: PrimeBase,
    m: usize,
    kind: DesignKind,
) -> Result<f64> {
    dual_prob_exact(&[k1.clone(), k2.clone()], b, m, kind)
}

/// `(sum p_i)^2 / (sum p_i + sum_{i != j} p_ij)`, over ordered pairs.
pub fn chung_erdos_lower(singles: &[f64], pairs: &[Vec<f64>]) -> f64 {
    let total: f64 = singles.iter().sum();
    let mut cross = 0.0;
    for (i, row) in pairs.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if i != j {
                cross += p;
            }
        }
    }
    let denom = total + cross;
    if denom == 0.0 {
        0.0
    } else {
        total * total / denom
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// `sum p_i` minus the weight of a maximum spanning tree on the pair probabilities.
pub fn hunter_upper(singles: &[f64], pairs: &[Vec<f64>]) -> f64 {
    let n = singles.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((pairs[i][j], i, j));
        }
    }
    edges.sort_by(|a, c| c.0.partial_cmp(&a.0).expect("finite probabilities"));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut tree = 0.0;
    for (w, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            tree += w;
        }
    }
    singles.iter().sum::<f64>() - tree
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl ProbEstimate {
    pub fn from_hits(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        ProbEstimate { estimate: p, stderr: libm::sqrt(p * (1.0 - p) / trials as f64), trials }
    }

    /// Whether `value` lies within `sigmas` standard errors, using the standard error at
    /// `value` when it is larger (so a zero-hit estimate is still comparable).
    pub fn within(&self, value: f64, sigmas: f64) -> bool {
        let at_value = libm::sqrt(value * (1.0 - value) / self.trials as f64);
        (self.estimate - value).abs() <= sigmas * self.stderr.max(at_value)
    }
}

/// Smallest precision that determines `C^T k` for every `k` in `ks`.
fn probe_precision(ks: &[IndexVector], b: PrimeBase, m: usize) -> usize {
    let n = ks.iter().flat_map(|k| k.0.iter()).map(|&x| digit_len(x, b)).max().unwrap_or(0);
    n.max(m)
}

fn mc_events<F: FnMut(&[bool]) -> bool>(
    seed: RngSeed,
    ks: &[IndexVector],
    b: PrimeBase,
    m: usize,
    kind: DesignKind,
    precision: Option<usize>,
    trials: usize,
    mut event: F,
) -> Result<ProbEstimate> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let s = ks.first().map_or(0, |k| k.dim());
    if s == 0 || ks.iter().any(|k| k.dim() != s) {
        return Err(Error::InvalidParameter("index vectors must share a positive dimension"));
    }
    let e = precision.unwrap_or_else(|| probe_precision(ks, b, m));
    let mut flags = vec![false; ks.len()];
    let mut hits = 0;
    for i in 0..trials {
        let design = draw_design(kind, seed.derive("trial", i as u64), b, e, m, s, false)?;
        for (f, k) in flags.iter_mut().zip(ks) {
            *f = dual_contains(&design, k)?;
        }
        if event(&flags) {
            hits += 1;
        }
    }
    Ok(ProbEstimate::from_hits(hits, trials))
}

/// Fraction of independently drawn designs whose dual net contains `k`.
///
/// `precision = None` draws the smallest precision that determines the event, which does not
/// change its distribution for any of the designs.
pub fn mc_dual_prob(
    seed: RngSeed,
    k: &IndexVector,
    b: PrimeBase,
    m: usize,
    kind: DesignKind,
    precision: Option<usize>,
    trials: usize,
) -> Result<ProbEstimate> {
    mc_events(seed, core::slice::from_ref(k), b, m, kind, precision, trials, |f| f[0])
}

/// Monte Carlo estimate of `Pr(k_i in the dual net for some i)`.
pub fn mc_union_prob(
    seed: RngSeed,
    ks: &[IndexVector],
    b: PrimeBase,
    m: usize,
    kind: DesignKind,
    trials: usize,
) -> Result<ProbEstimate> {
    mc_events(seed, ks, b, m, kind, None, trials, |f| f.iter().any(|&x| x))
}

/// Monte Carlo estimate of `Pr(all k_i in the dual net)`.
pub fn mc_joint_prob(
    seed: RngSeed,
    ks: &[IndexVector],
    b: PrimeBase,
    m: usize,
    kind: DesignKind,
    trials: usize,
) -> Result<ProbEstimate> {
    mc_events(seed, ks, b, m, kind, None, trials, |f| f.iter().all(|&x| x))
}

/// Piecewise bound on `Pr(k in the dual net)` under linear matrix scrambling, from the
/// per-coordinate `mu_1` values of the nonzero components of `k`.
pub fn lms_dual_prob_bound(mu1: &[usize], m: usize, b: PrimeBase, t_u: usize, u_size: usize) -> f64 {
    let sum: usize = mu1.iter().sum();
    let max = mu1.iter().copied().max().unwrap_or(0);
    let bf = b.get() as f64;
    if sum + t_u <= m {
        0.0
    } else if max > m {
        libm::pow(bf, -(m as f64))
    } else if sum + t_u <= m + u_size {
        let u = u_size.max(1) as f64;
        let v = libm::pow(bf, -(m as f64) + t_u as f64 + u - 1.0) / libm::pow(bf - 1.0, u - 1.0);
        v.min(1.0)
    } else {
        libm::pow(bf, -(m as f64) + t_u as f64)
    }
}
