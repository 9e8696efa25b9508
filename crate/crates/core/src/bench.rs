//! Test integrands with closed-form integrals and variances, and weight schedules.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::gf::PrimeBase;
use crate::netgen::default_precision;
use crate::wce::ProductWeights;

const E: f64 = core::f64::consts::E;

/// `prod_j [1 + gamma_j (t_j^c - 1/(1+c))]`.
pub fn product_power(t: &[f64], c: f64, gamma: &[f64]) -> f64 {
    let mean = 1.0 / (1.0 + c);
    t.iter().zip(gamma).fold(1.0, |acc, (&tj, &g)| acc * (1.0 + g * (libm::pow(tj, c) - mean)))
}

/// `exp(sum_j Phi^-1(t_j))`, with exact zeros replaced by `b^-(E+1)`.
pub fn lognormal(t: &[f64], b: PrimeBase) -> f64 {
    let floor = zero_floor(b);
    let z: f64 = t.iter().map(|&tj| phi_inv(if tj == 0.0 { floor } else { tj })).sum();
    libm::exp(z)
}

/// `prod_j t_j e^(t_j)`.
pub fn t_exp(t: &[f64]) -> f64 {
    t.iter().fold(1.0, |acc, &tj| acc * tj * libm::exp(tj))
}

/// `b^-(E+1)` at the default precision.
pub fn zero_floor(b: PrimeBase) -> f64 {
    libm::pow(b.get() as f64, -(default_precision(b) as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    Exponential,
    Equal,
}

impl WeightMode {
    pub fn name(self) -> &'static str {
        match self {
            WeightMode::Exponential => "exp",
            WeightMode::Equal => "equal",
        }
    }

    pub fn weights(self, s: usize, c: f64) -> ProductWeights {
        match self {
            WeightMode::Exponential => exp_weights(s, c),
            WeightMode::Equal => ProductWeights::new(alloc::vec![1.0; s]).expect("unit weights"),
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(WeightMode::Exponential),
            "equal" | "unit" => Ok(WeightMode::Equal),
            _ => Err(Error::InvalidParameter("weight mode must be exp or equal")),
        }
    }
}

/// `gamma_j = exp(-ceil(c) j)` for `j = 1..=s`.
pub fn exp_weights(s: usize, c: f64) -> ProductWeights {
    let rate = libm::ceil(c);
    ProductWeights::new((1..=s).map(|j| libm::exp(-rate * j as f64)).collect()).expect("positive weights")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Integrand {
    ProductPower { c: f64, gamma: ProductWeights },
    Lognormal { s: usize, base: PrimeBase },
    TExp { s: usize },
}

impl Integrand {
    pub fn product_power(c: f64, gamma: ProductWeights) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter("exponent c must be positive"));
        }
        Ok(Integrand::ProductPower { c, gamma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Integrand::ProductPower { .. } => "product_power",
            Integrand::Lognormal { .. } => "lognormal",
            Integrand::TExp { .. } => "t_exp",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Integrand::ProductPower { gamma, .. } => gamma.dim(),
            Integrand::Lognormal { s, .. } | Integrand::TExp { s } => *s,
        }
    }

    /// Exponent `c` of the product-power integrand.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Integrand::ProductPower { c, .. } => Some(*c),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, t: &[f64]) -> f64 {
        match self {
            Integrand::ProductPower { c, gamma } => product_power(t, *c, gamma.gamma()),
            Integrand::Lognormal { base, .. } => lognormal(t, *base),
            Integrand::TExp { .. } => t_exp(t),
        }
    }

    pub fn exact_integral(&self) -> f64 {
        match self {
            Integrand::ProductPower { .. } | Integrand::TExp { .. } => 1.0,
            Integrand::Lognormal { s, .. } => libm::exp(*s as f64 / 2.0),
        }
    }

    pub fn exact_variance(&self) -> f64 {
        match self {
            Integrand::ProductPower { c, gamma } => {
                let v = 1.0 / (2.0 * c + 1.0) - 1.0 / ((1.0 + c) * (1.0 + c));
                gamma.gamma().iter().fold(1.0, |acc, &g| acc * (1.0 + g * g * v)) - 1.0
            }
            Integrand::Lognormal { s, .. } => libm::exp(2.0 * *s as f64) - libm::exp(*s as f64),
            Integrand::TExp { s } => libm::pow((E * E - 1.0) / 4.0, *s as f64) - 1.0,
        }
    }
}

const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];

/// Lower half `q <= 1/2`, rational approximation then one Halley step.
fn phi_inv_lower(q: f64) -> f64 {
    let x = if q < 0.02425 {
        let r = libm::sqrt(-2.0 * libm::log(q));
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    } else {
        let p = q - 0.5;
        let r = p * p;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * p
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - q;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

fn phi_inv(u: f64) -> f64 {
    if u > 0.5 {
        -phi_inv_lower(1.0 - u)
    } else {
        phi_inv_lower(u)
    }
}

/// Standard normal quantile `Phi^-1(u)` for `u` in `(0, 1)`.
pub fn inverse_normal_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidProbability(u));
    }
    Ok(phi_inv(u))
}

/// Plain Monte Carlo mean over `n` uniform points, for baselines.
pub fn mc_mean<F: Fn(&[f64]) -> f64>(f: F, s: usize, n: usize, seed: crate::rng::RngSeed) -> f64 {
    use rand::Rng;
    let mut rng = seed.rng();
    let mut x: Vec<f64> = alloc::vec![0.0; s];
    let mut sum = 0.0;
    for _ in 0..n {
        for xj in x.iter_mut() {
            *xj = rng.gen::<f64>();
        }
        sum += f(&x);
    }
    sum / n as f64
}
