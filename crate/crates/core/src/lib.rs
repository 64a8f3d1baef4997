//! Almost stochastic dominance through the L2-Wasserstein geometry of
//! quantile functions.
//!
//! * [`empirical`]: samples as exact step quantile functions.
//! * [`trimming`]: minimal and maximal trimmings and their quantile envelope.
//! * [`order_distance`]: W2, distance to the stochastic-order cone, the
//!   violation index `ε` and the minimal trimming level.
//! * [`inference`]: variance functionals, the test of `H0: ε ≥ ε0` and the
//!   upper confidence bound.
//! * [`models`]: the normal family, quadrature-based index between analytic laws.
//! * [`simlab`]: seeded Monte Carlo rejection and coverage studies.

pub mod empirical;
pub mod error;
pub mod inference;
pub mod models;
pub mod order_distance;
pub mod quad;
pub mod rng;
pub mod simlab;
pub mod trimming;

pub use empirical::{empirical_quantile, integrate_piecewise, Kernel, Knot, Sample, StepQuantile};
pub use error::{Error, Result};
pub use inference::{
    bootstrap_sigma, delta_method_sigma, one_sample_epsilon, one_sample_sigma, plug_in_sigma,
    test_almost_dominance, Part, TestOptions, TestResult, UFunction, VarianceEstimate, VarianceMethod,
};
pub use models::{
    contour_grid, epsilon_analytic, epsilon_normal, fit_normal_ml, normal_cdf, normal_quantile, Distribution,
    NormalParams, UniformParams,
};
pub use order_distance::{
    epsilon_index, is_stochastically_dominated, l1_comparator_index, minimal_trim_for_order,
    optimal_ordered_pair, trimmed_order_distance, w2, IndexReport, MinimalTrim, OptimalOrderedPair,
};
pub use simlab::{run_coverage_study, run_rejection_study, Mode, SimConfig, SimReport, Study};
pub use trimming::{
    envelope_contains, lower_trim_quantile, trimmed_cdf_value, upper_trim_quantile, TrimLevel, TrimSide,
};
