//! Randomized digital nets over a prime base.
//!
//! The crate builds generating matrices for three randomized designs:
//!
//! - [`DesignKind::Hrd`]: Hankel matrices filled from one uniform digit sequence per coordinate,
//! - [`DesignKind::Urd`]: matrices with independent uniform entries,
//! - [`DesignKind::LmsSobol`]: Sobol' matrices left-multiplied by random lower-triangular
//!   scramblers,
//!
//! optionally combined with a uniform digital shift. On top of the designs it provides
//! Gray-code point generation, Walsh-function and dual-net probes, the computable worst-case
//! error bound used for best-of-batch selection, and median-of-means estimation.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command-line interface and
//! the sweep driver live in the companion `hankelnet` crate.
//!
//! ```
//! use hankelnet_core::{draw_design, gen_points_gray, qmc_mean, DesignKind, PrimeBase, RngSeed};
//!
//! let base = PrimeBase::new(2).unwrap();
//! let design = draw_design(DesignKind::Hrd, RngSeed::new(7), base, 53, 8, 3, true).unwrap();
//! let points = gen_points_gray(&design);
//! let mean = qmc_mean(|_: &[f64]| 1.0, &points);
//! assert_eq!(mean, 1.0);
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;

pub mod bench;
pub mod estimators;
pub mod gf;
pub mod netgen;
pub mod pointgen;
pub mod rng;
pub mod walshlab;
pub mod wce;

pub use bench::{exp_weights, inverse_normal_cdf, lognormal, product_power, t_exp, Integrand, WeightMode};
pub use error::{Error, Result};
pub use estimators::{
    median_of_means, mse_experiment, qmc_estimate, qmc_mean, r_schedule, EstimatorConfig, ExperimentRecord, MseSummary,
    RMode,
};
pub use gf::{gf_inv, mat_vec, rank, GfMatrix, PrimeBase};
pub use netgen::{
    apply_lms, default_precision, draw_design, draw_hrd, draw_lms_sobol, draw_urd, hankel_matrix, lms_matrix,
    sobol_matrices, sobol_table_checksum, DesignKind, HankelSeed, NetDesign,
};
pub use pointgen::{for_each_point_gray, gen_points_gray, gen_points_naive, gray_steps, GrayStep, PointSet};
pub use rng::RngSeed;
pub use walshlab::{
    chung_erdos_lower, dual_contains, hunter_upper, joint_dual_prob_exact, kappa, lms_dual_prob_bound, mc_dual_prob,
    mu_alpha, t_parameter, t_u_parameter, walsh, IndexVector, ProbEstimate,
};
pub use wce::{c_alpha_p, greedy_select, omega2, omega3, omega_series, w_linf_bound, wce_bound, ProductWeights};
