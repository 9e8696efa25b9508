//! QMC means, median-of-means and squared-error experiments.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bench::{Integrand, WeightMode};
use crate::error::{Error, Result};
use crate::gf::PrimeBase;
use crate::netgen::{draw_design, DesignKind, NetDesign};
use crate::pointgen::{for_each_point_gray, PointSet};
use crate::rng::RngSeed;

/// `(1/N) sum_n f(x_n)`.
pub fn qmc_mean<F: Fn(&[f64]) -> f64>(f: F, points: &PointSet) -> f64 {
    let sum: f64 = points.iter().map(&f).sum();
    sum / points.n_points() as f64
}

/// [`qmc_mean`] over the points of `design`, streamed in Gray order.
pub fn qmc_estimate<F: Fn(&[f64]) -> f64>(f: F, design: &NetDesign) -> f64 {
    let mut sum = 0.0;
    for_each_point_gray(design, |_, x| sum += f(x));
    sum / design.n_points() as f64
}

/// Middle order statistic of an odd-length sample.
pub fn median_odd(values: &mut [f64]) -> Result<f64> {
    if values.len() % 2 == 0 {
        return Err(Error::EvenReplicateCount(values.len()));
    }
    values.sort_by(|a, c| a.total_cmp(c));
    Ok(values[values.len() / 2])
}

/// Median of `n_replicates` QMC means, each over the design `factory` builds from substream
/// `("replicate", i)` of `seed`.
pub fn median_of_means<F, G>(f: F, mut factory: G, n_replicates: usize, seed: RngSeed) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    G: FnMut(RngSeed) -> Result<NetDesign>,
{
    if n_replicates % 2 == 0 {
        return Err(Error::EvenReplicateCount(n_replicates));
    }
    let mut means = Vec::with_capacity(n_replicates);
    for i in 0..n_replicates {
        let design = factory(seed.derive("replicate", i as u64))?;
        means.push(qmc_estimate(&f, &design));
    }
    median_odd(&mut means)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RMode {
    Fixed(usize),
    /// Smallest odd integer `>= ceil(m log m)`, logarithm in the given base.
    MLogM {
        log_base: f64,
    },
}

impl RMode {
    pub const DEFAULT_FIXED: usize = 15;

    pub fn m_log_m() -> Self {
        RMode::MLogM { log_base: core::f64::consts::E }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RMode::Fixed(_) => "fixed",
            RMode::MLogM { .. } => "m_log_m",
        }
    }
}

impl Default for RMode {
    fn default() -> Self {
        RMode::Fixed(Self::DEFAULT_FIXED)
    }
}

impl fmt::Display for RMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(RMode::default()),
            "m_log_m" | "mlogm" | "m-log-m" => Ok(RMode::m_log_m()),
            _ => Err(Error::InvalidParameter("r mode must be fixed or m_log_m")),
        }
    }
}

/// Replicate count for size exponent `m`.
pub fn r_schedule(m: usize, mode: RMode) -> usize {
    match mode {
        RMode::Fixed(r) => r,
        RMode::MLogM { log_base } => {
            let mf = m as f64;
            let r = libm::ceil(mf * libm::log(mf) / libm::log(log_base)).max(1.0) as usize;
            if r % 2 == 0 {
                r + 1
            } else {
                r
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub design: DesignKind,
    pub base: PrimeBase,
    pub precision: usize,
    pub m: usize,
    pub s: usize,
    pub r_mode: RMode,
    pub shift: bool,
    pub seed: RngSeed,
}

impl EstimatorConfig {
    pub fn r(&self) -> usize {
        r_schedule(self.m, self.r_mode)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.r();
        if r == 0 || r % 2 == 0 {
            return Err(Error::EvenReplicateCount(r));
        }
        if self.design == DesignKind::LmsSobol && self.base.get() != 2 {
            return Err(Error::InvalidParameter("lms-sobol requires base 2"));
        }
        Ok(())
    }

    /// Design for one replicate.
    pub fn draw(&self, seed: RngSeed) -> Result<NetDesign> {
        draw_design(self.design, seed, self.base, self.precision, self.m, self.s, self.shift)
    }
}

/// One outer batch of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub design: DesignKind,
    pub b: u8,
    pub m: usize,
    pub s: usize,
    pub integrand: &'static str,
    pub c: Option<f64>,
    pub weight_mode: Option<WeightMode>,
    pub r: usize,
    pub batch: usize,
    pub estimate: f64,
    pub sq_error: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseSummary {
    pub sq_errors: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub records: Vec<ExperimentRecord>,
}

/// Linearly interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// `batches` independent median-of-means estimates of `f`, batch `i` seeded from substream
/// `("batch", i)` of the configured seed.
pub fn mse_experiment(
    f: &Integrand,
    weight_mode: Option<WeightMode>,
    config: &EstimatorConfig,
    batches: usize,
) -> Result<MseSummary> {
    config.validate()?;
    if f.dim() != config.s {
        return Err(Error::DimensionMismatch { expected: config.s, got: f.dim() });
    }
    let exact = f.exact_integral();
    let r = config.r();
    let mut records = Vec::with_capacity(batches);
    for batch in 0..batches {
        let seed = config.seed.derive("batch", batch as u64);
        let estimate = median_of_means(|x| f.eval(x), |sd| config.draw(sd), r, seed)?;
        let err = estimate - exact;
        records.push(ExperimentRecord {
            design: config.design,
            b: config.base.get(),
            m: config.m,
            s: config.s,
            integrand: f.name(),
            c: f.exponent(),
            weight_mode,
            r,
            batch,
            estimate,
            sq_error: err * err,
            seed: seed.master(),
        });
    }
    let sq_errors: Vec<f64> = records.iter().map(|rec| rec.sq_error).collect();
    let mut sorted = sq_errors.clone();
    sorted.sort_by(|a, c| a.total_cmp(c));
    let mean = if sorted.is_empty() { f64::NAN } else { sorted.iter().sum::<f64>() / sorted.len() as f64 };
    Ok(MseSummary {
        median: quantile(&sorted, 0.5),
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
        mean,
        sq_errors,
        records,
    })
}

/// Least-squares slope of `log2 y` against `x`.
pub fn log2_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let ys: Vec<f64> = points.iter().map(|&(_, y)| libm::log2(y)).collect();
    let mx = points.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&(x, _), &y) in points.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}
