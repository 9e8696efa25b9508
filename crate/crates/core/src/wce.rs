//! Computable worst-case error bound and best-of-batch design selection.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gf::PrimeBase;
use crate::netgen::{draw_design, DesignKind, NetDesign};
use crate::pointgen::{for_each_point_gray, PointSet};
use crate::rng::RngSeed;
use crate::walshlab::{coordinate_digits, mu_alpha, root_of_unity, walsh_exponent};

/// Positive per-coordinate weights `gamma_1, ..., gamma_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeights {
    gamma: Vec<f64>,
}

impl ProductWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter("weights must be positive and finite"));
        }
        Ok(ProductWeights { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }
}

/// Smoothness order `alpha >= 1` and summability exponent `p` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams {
    pub alpha: u32,
    pub p: f64,
}

impl SmoothnessParams {
    pub fn new(alpha: u32, p: f64) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidParameter("alpha must be at least 1"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter("p must lie in (0, 1]"));
        }
        Ok(SmoothnessParams { alpha, p })
    }

    pub fn constant(&self, b: PrimeBase) -> f64 {
        c_alpha_p(b, self.alpha, self.p)
    }
}

/// `(b-1)^((2p-1)_+ / 2) (1+pi)/2 b^alpha`.
pub fn c_alpha_p(b: PrimeBase, alpha: u32, p: f64) -> f64 {
    let bf = b.get() as f64;
    let e = (2.0 * p - 1.0).max(0.0) / 2.0;
    libm::pow(bf - 1.0, e) * (1.0 + PI) / 2.0 * libm::pow(bf, alpha as f64)
}

/// `(1+pi)/2 b^(n_alpha(k) - mu_alpha(k))` with `n_alpha(k) = min(alpha, |kappa(k)|)`.
pub fn w_linf_bound(k: u64, alpha: usize, b: PrimeBase) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive"));
    }
    let nonzero = crate::walshlab::kappa(k, b).len();
    let n = alpha.min(nonzero) as f64;
    let mu = mu_alpha(k, alpha, b) as f64;
    Ok((1.0 + PI) / 2.0 * libm::pow(b.get() as f64, n - mu))
}

/// `(a_1, t_1)` with `a_1 = -floor(log2 x)` and `t_1 = 2^-a_1`, both 0 at `x = 0`.
fn leading_position(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0);
    }
    let (_, e) = libm::frexp(x);
    let a1 = 1 - e;
    (a1 as f64, libm::ldexp(1.0, -a1))
}

/// Closed form of `sum_{k>=1} 2^-mu_2(k) wal_k(x)`.
pub fn omega2(x: f64) -> f64 {
    let (a1, t1) = leading_position(x);
    let s1 = 1.0 - 2.0 * x;
    let s2t = (1.0 - 5.0 * t1) / 2.0 - (a1 - 2.0) * x;
    s1 + s2t
}

/// Closed form of `sum_{k>=1} 2^-mu_3(k) wal_k(x)`.
pub fn omega3(x: f64) -> f64 {
    let (a1, t1) = leading_position(x);
    let s1 = 1.0 - 2.0 * x;
    let s2 = 1.0 / 3.0 - 2.0 * (1.0 - x) * x;
    let s3t = (1.0 - 43.0 * t1 * t1) / 18.0 + (5.0 * t1 - 1.0) * x + (a1 - 2.0) * x * x;
    s1 + s2 + s3t
}

/// `omega_{alpha+1}(x)`, using the closed forms in base 2.
pub fn omega(x: f64, alpha: u32) -> Result<f64> {
    match alpha {
        1 => Ok(omega2(x)),
        2 => Ok(omega3(x)),
        _ => Err(Error::ClosedFormUnavailable(alpha)),
    }
}

struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn new() -> Self {
        Neumaier { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Upper bound on `sum_{k >= b^L} b^-mu_order(k)`.
fn series_tail(b: PrimeBase, order: usize, l: usize) -> f64 {
    let bf = b.get() as f64;
    let j = order - 1;
    // g[i] = sum over words of n digits of b^-(sum of the i largest nonzero positions)
    let mut g: Vec<f64> = alloc::vec![1.0; j + 1];
    let mut tail = 0.0;
    let mut n = 0usize;
    loop {
        let a = n + 1;
        let term = (bf - 1.0) * libm::pow(bf, -(a as f64)) * g[j];
        if a > l {
            tail += term;
            if term < tail * 1e-17 || term == 0.0 {
                break;
            }
        }
        let scale = (bf - 1.0) * libm::pow(bf, -(a as f64));
        for i in (1..=j).rev() {
            g[i] += scale * g[i - 1];
        }
        g[0] *= bf;
        n += 1;
    }
    tail
}

/// Partial sum `sum_{k=1}^{k_max} b^-mu_{alpha+1}(k) Re wal_k(x)` and an upper bound on the
/// absolute value of the remainder.
pub fn omega_series(x: f64, alpha: u32, b: PrimeBase, k_max: u64) -> (f64, f64) {
    let order = alpha as usize + 1;
    let bu = b.get() as u64;
    let mut l = 0usize;
    let mut p = 1u64;
    while let Some(next) = p.checked_mul(bu) {
        if next - 1 > k_max {
            break;
        }
        p = next;
        l += 1;
    }
    let tail = series_tail(b, order, l);
    let mut acc = Neumaier::new();
    if b.get() == 2 {
        let e = crate::netgen::default_precision(b);
        let y = crate::walshlab::coordinate_to_grid(x, b, e);
        // bit i-1 of xr is the digit x_[i]
        let mut xr = 0u64;
        for i in 1..=e {
            xr |= ((y >> (e - i)) & 1) << (i - 1);
        }
        let weights: Vec<f64> = (0..=64 * order).map(|mu| libm::ldexp(1.0, -(mu as i32))).collect();
        for k in 1..=k_max {
            let mut rest = k;
            let mut mu = 0usize;
            for _ in 0..order {
                if rest == 0 {
                    break;
                }
                let top = 63 - rest.leading_zeros() as usize;
                mu += top + 1;
                rest &= !(1u64 << top);
            }
            let w = weights[mu];
            acc.add(if (k & xr).count_ones() % 2 == 0 { w } else { -w });
        }
    } else {
        let e = crate::netgen::default_precision(b);
        let digits = coordinate_digits(x, b, e);
        let bf = b.get() as f64;
        for k in 1..=k_max {
            let w = libm::pow(bf, -(mu_alpha(k, order, b) as f64));
            acc.add(w * root_of_unity(walsh_exponent(k, &digits, b), b).re);
        }
    }
    (acc.value(), tail)
}

fn check_weights(gamma: &ProductWeights, s: usize) -> Result<()> {
    if gamma.dim() != s {
        return Err(Error::DimensionMismatch { expected: s, got: gamma.dim() });
    }
    Ok(())
}

#[inline]
fn product_term(x: &[f64], gamma: &[f64], c: f64, alpha: u32) -> f64 {
    let mut prod = 1.0;
    for (&xj, &g) in x.iter().zip(gamma) {
        let w = if alpha == 1 { omega2(xj) } else { omega3(xj) };
        prod *= 1.0 + g * c * w;
    }
    prod
}

fn check_alpha_base(alpha: u32, b: PrimeBase) -> Result<()> {
    if !(alpha == 1 || alpha == 2) || b.get() != 2 {
        return Err(Error::ClosedFormUnavailable(alpha));
    }
    Ok(())
}

/// `-1 + (1/N) sum_i prod_j [1 + gamma_j C_{alpha,1} omega_{alpha+1}(x_ij)]` in base 2.
pub fn wce_bound(points: &PointSet, gamma: &ProductWeights, alpha: u32) -> Result<f64> {
    check_alpha_base(alpha, points.base())?;
    check_weights(gamma, points.dim())?;
    let c = c_alpha_p(points.base(), alpha, 1.0);
    let mut acc = Neumaier::new();
    for x in points.iter() {
        acc.add(product_term(x, gamma.gamma(), c, alpha));
    }
    Ok(acc.value() / points.n_points() as f64 - 1.0)
}

/// [`wce_bound`] of the unshifted points of `design`, streamed without materializing them.
pub fn wce_bound_design(design: &NetDesign, gamma: &ProductWeights, alpha: u32) -> Result<f64> {
    check_alpha_base(alpha, design.base())?;
    check_weights(gamma, design.dim())?;
    let c = c_alpha_p(design.base(), alpha, 1.0);
    let mut acc = Neumaier::new();
    for_each_point_gray(&design.without_shift(), |_, x| acc.add(product_term(x, gamma.gamma(), c, alpha)));
    Ok(acc.value() / design.n_points() as f64 - 1.0)
}

/// The same bound in any base, with each `omega` replaced by its truncated series.
pub fn wce_bound_series(points: &PointSet, gamma: &ProductWeights, alpha: u32, k_max: u64) -> Result<f64> {
    if alpha == 0 {
        return Err(Error::InvalidParameter("alpha must be at least 1"));
    }
    check_weights(gamma, points.dim())?;
    let b = points.base();
    let c = c_alpha_p(b, alpha, 1.0);
    let mut acc = Neumaier::new();
    for x in points.iter() {
        let mut prod = 1.0;
        for (&xj, &g) in x.iter().zip(gamma.gamma()) {
            prod *= 1.0 + g * c * omega_series(xj, alpha, b, k_max).0;
        }
        acc.add(prod);
    }
    Ok(acc.value() / points.n_points() as f64 - 1.0)
}

/// Outcome of a best-of-batch selection.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    pub design: NetDesign,
    pub best_wce: f64,
    pub values: Vec<f64>,
    pub best_index: usize,
}

/// Draws `r` unshifted designs from substreams `("batch", i)` of `seed` and keeps the one
/// with the smallest [`wce_bound`]; ties go to the lowest index.
#[allow(clippy::too_many_arguments)]
pub fn greedy_select(
    seed: RngSeed,
    r: usize,
    b: PrimeBase,
    precision: usize,
    m: usize,
    gamma: &ProductWeights,
    alpha: u32,
    kind: DesignKind,
) -> Result<GreedyResult> {
    if r == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1"));
    }
    check_alpha_base(alpha, b)?;
    let s = gamma.dim();
    let mut best: Option<(usize, NetDesign, f64)> = None;
    let mut values = Vec::with_capacity(r);
    for i in 0..r {
        let design = draw_design(kind, seed.derive("batch", i as u64), b, precision, m, s, false)?;
        let v = wce_bound_design(&design, gamma, alpha)?;
        values.push(v);
        if best.as_ref().map_or(true, |(_, _, bv)| v < *bv) {
            best = Some((i, design, v));
        }
    }
    let (best_index, design, best_wce) = best.expect("r >= 1");
    Ok(GreedyResult { design, best_wce, values, best_index })
}
