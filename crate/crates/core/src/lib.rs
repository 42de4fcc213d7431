//! Nonparametric approximate confidence intervals for a mean.
//!
//! The crate builds weighted bootstrap-t intervals (multinomial,
//! half-sampling, Bayesian/exponential, Poisson, scaled-beta, power, Mammen,
//! double-or-nothing, lognormal pseudo-counts) next to Student-t, percentile
//! and BCa baselines; scores intervals (Winkler, pinball, quasi-risks,
//! composite F); and runs a reproducible small-sample coverage/length study
//! over seven test distributions with exact small-n oracles for validation.

pub use rand_chacha::ChaCha8Rng;

pub mod analysis;
pub mod distributions;
pub mod error;
pub mod intervals;
pub mod report;
pub mod rng;
pub mod scoring;
pub mod special;
pub mod stats;
pub mod study;
pub mod weights;

pub use analysis::{
    binom_tail, exact_multinomial_t_distribution, finite_length_min_n, fisher_hall_probs,
    prob_sigma_star_zero, second_order_check, two_value_finiteness_bound, AtomicDistribution,
    FisherHallProbs, SecondOrderCheck,
};
pub use distributions::{distribution_moments, DistributionMoments, TestDistribution};
pub use error::{Error, Result};
pub use intervals::{
    bca_interval, bootstrap_t_interval, bootstrap_t_interval_with_tails, compute_interval,
    exact_n2_width_factor, percentile_interval, student_t_interval, BcaDiagnostics,
    BootstrapTails, ConfidenceInterval, IntervalSpec, Method,
};
pub use scoring::{
    f_tilde, hall_coverage_error, pinball_score, quasi_risk, winkler_ci_score, HallMethod,
    QuasiRiskInputs, QuasiRiskVariant, ScoreConfig,
};
pub use special::{normal_cdf, normal_quantile, t_quantile};
pub use stats::{
    bootstrap_t_statistic, quantile_extended, sample_summary, t_star_sample, weighted_moments,
    SampleSummary,
};
pub use study::{
    bootstrap_rng, replicate_data_rng, run_study, sample_nested_panel, StudyConfig, StudyResult,
    StudyRow,
};
pub use weights::{
    effective_sample_size, normalize, sample_pseudo_counts, scaled_beta_params, scheme_moments,
    NormalizedWeights, PseudoCountSampler, PseudoCountVector, SchemeMoments, WeightScheme,
};
