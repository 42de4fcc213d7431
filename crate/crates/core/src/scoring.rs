//! Scores and asymptotic predictions for judging interval methods.

use crate::error::{Error, Result};
use crate::special::normal_pdf;

/// Settings shared by the scoring helpers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    /// Lower tail level (0.025 for two-sided 95%).
    pub alpha1: f64,
    /// Exponent of the composite F score.
    pub beta: f64,
    /// Length/coverage tradeoff multiplier of the quasi-risks.
    pub lambda: f64,
    /// True standard deviation of the sampled distribution.
    pub sigma: f64,
    pub n: usize,
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 > 0.0 && self.alpha1 < 0.5) {
            return Err(Error::Config(format!("alpha1 must be in (0, 1/2), got {}", self.alpha1)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::Config("lambda must be nonnegative".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config("sigma must be positive".into()));
        }
        Ok(())
    }
}

/// Pinball / quantile loss `(x - theta)(alpha - 1{x < theta})`.
pub fn pinball_score(theta: f64, x: f64, alpha: f64) -> f64 {
    let ind = if x < theta { 1.0 } else { 0.0 };
    (x - theta) * (alpha - ind)
}

/// Winkler interval score: the length plus `1/alpha1`-scaled penalties for
/// missing the target. Infinite-length intervals score `+inf`.
pub fn winkler_ci_score(lower: f64, upper: f64, mu: f64, alpha1: f64) -> f64 {
    let mut score = upper - lower;
    if mu < lower {
        score += (lower - mu) / alpha1;
    } else if mu > upper {
        score += (mu - upper) / alpha1;
    }
    score
}

/// Composite `F`-style score of capped coverage against scaled RMS length.
///
/// Takes the mean *squared* length and derives the RMSL internally;
/// an infinite mean squared length scores zero.
pub fn f_tilde(coverage: f64, mean_sq_length: f64, n: usize, sigma: f64, beta: f64) -> f64 {
    if !mean_sq_length.is_finite() {
        return 0.0;
    }
    let rmsl = mean_sq_length.sqrt();
    let b2 = beta * beta;
    (b2 + 1.0) / (b2 / coverage.max(0.95) + (n as f64).sqrt() * rmsl / sigma)
}

/// Which quasi-risk to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiRiskVariant {
    /// `lambda E(U-L) - Pr(miss)`.
    Plain,
    /// `lambda RMSL/(sigma sqrt n) - |Pr(miss) - 0.95|`.
    Abs95,
    /// `lambda RMSL/(sigma sqrt n) - min(0.95, Pr(miss))`.
    Min95,
    /// Mean of `lambda (U-L)/(sqrt n sigma) - 1{cover}`.
    ScaledLoss,
}

/// Length/coverage summaries feeding [`quasi_risk`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiRiskInputs {
    pub mean_length: f64,
    pub rmsl: f64,
    /// `Pr(mu not in [L, U])`.
    pub miss_rate: f64,
    pub sigma: f64,
    pub n: usize,
}

/// Decision-theoretic quasi-risks. The miss-rate terms are used exactly as
/// printed for each variant (they subtract a function of the non-coverage
/// probability).
pub fn quasi_risk(variant: QuasiRiskVariant, lambda: f64, inp: &QuasiRiskInputs) -> f64 {
    let root_n_sigma = (inp.n as f64).sqrt() * inp.sigma;
    match variant {
        QuasiRiskVariant::Plain => lambda * inp.mean_length - inp.miss_rate,
        QuasiRiskVariant::Abs95 => {
            lambda * inp.rmsl / root_n_sigma - (inp.miss_rate - 0.95).abs()
        }
        QuasiRiskVariant::Min95 => {
            lambda * inp.rmsl / root_n_sigma - inp.miss_rate.min(0.95)
        }
        QuasiRiskVariant::ScaledLoss => {
            lambda * inp.mean_length / root_n_sigma - (1.0 - inp.miss_rate)
        }
    }
}

/// Interval family in the large-sample coverage-error expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HallMethod {
    NormalTheory,
    Student,
    Percentile,
    BootT,
    Bca,
}

/// Fixed 6-digit normal quantile used by [`hall_coverage_error`], so the
/// predictions are bit-reproducible.
pub const Z_975: f64 = 1.959964;

/// Leading coverage-error term of a two-sided nominal-95% interval,
/// `(1/n) phi(z) (c_kappa kappa + c_gamma gamma^2 + c_0)`, with `gamma` the
/// skewness and `kappa` the excess kurtosis of the sampled distribution.
pub fn hall_coverage_error(method: HallMethod, gamma: f64, kappa: f64, n: usize) -> f64 {
    let (c_kappa, c_gamma, c_0) = match method {
        HallMethod::NormalTheory => (0.14, -2.12, -3.35),
        HallMethod::Student => (0.14, -2.12, 0.0),
        HallMethod::Percentile => (-0.72, -0.37, -3.35),
        HallMethod::BootT => (-2.84, 4.25, 0.0),
        HallMethod::Bca => (-2.63, 3.11, -3.35),
    };
    normal_pdf(Z_975) / n as f64 * (c_kappa * kappa + c_gamma * gamma * gamma + c_0)
}
