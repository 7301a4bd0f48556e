//! Gaussian random fields, Hermite-transformed functionals and strong-law
//! diagnostics for the normalized window integral
//!
//! ```text
//! ξ(μ) = (h/μ)^d Σ_{x ∈ μΔ} g(x) H_k(Z(x))
//! ```
//!
//! The crate covers covariance models, Hermite polynomials and weight
//! functions, exact (Cholesky) and circulant-embedding field synthesis, the
//! windowed estimator, parameter-regime checks, and a seeded Monte Carlo
//! harness that reports RMSE tables and normality diagnostics.

pub mod conditions;
pub mod covariance;
pub mod error;
pub mod estimator;
pub mod field;
pub mod harness;
pub mod hermite;
pub mod rng;
pub mod stats;

pub use conditions::{
    lemma1_series_converges, lemma2_series_converge, numeric_series_probe, theorem2_regime,
    variance_upper_bound, OpenInterval, RegimeOutcome, RegimeParams, RegimeVerdict,
};
pub use covariance::{
    assumption1_envelope, dependence_class, eval_cov, fit_envelope_constant,
    long_range_indicator, transformed_cov, CovarianceModel, DependenceClass, EnvelopeParams,
    RangeClass, SlowlyVarying,
};
pub use error::{Error, Result};
pub use estimator::{transform_field, xi_curve, xi_curve_of, xi_estimate, Window, XiSample};
pub use field::{
    empirical_cov_audit, generate_cholesky, generate_circulant, EmbeddingMode, EmbeddingPolicy,
    FieldRealization, GeneratorTag, Grid,
};
pub use harness::{
    compare_to_reference, rmse_table, run_experiment, ExperimentConfig, ExperimentResult,
    GeneratorKind, Nesting, WindowKind,
};
pub use hermite::{eval_weight, hermite_eval, weight_growth_check, HermiteOrder, WeightFunction};
pub use stats::{distribution_summary, DistributionSummary};
