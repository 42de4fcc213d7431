//! Confidence interval constructions: Student's t, percentile, BCa, and the
//! weighted bootstrap t.
//!
//! Shared conventions:
//! - all-equal data (and `n = 1`) produce the point interval `[xbar, xbar]`;
//! - bootstrap-t endpoints may be infinite when an extreme tail of the
//!   resampled t distribution is infinite; the infinity is kept and reported
//!   rather than truncated;
//! - quantiles use the order-statistic rule of
//!   [`crate::stats::quantile_extended`], never interpolation.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_quantile, t_quantile};
use crate::stats::{
    quantile_extended, sample_summary, t_from_moments, tail_rank, weighted_moments_unchecked,
};
use crate::weights::{normalize_in_place, WeightScheme};

/// Tail levels and resample budget for one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpec {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Number of bootstrap resamples.
    pub b: usize,
    /// Pseudo-count scheme; required by the bootstrap-t methods only.
    pub scheme: Option<WeightScheme>,
}

impl Default for IntervalSpec {
    fn default() -> Self {
        IntervalSpec { alpha1: 0.025, alpha2: 0.975, b: 2000, scheme: None }
    }
}

impl IntervalSpec {
    /// Equal-tailed spec for a two-sided `level` (e.g. 0.95 -> 0.025/0.975).
    pub fn two_sided(level: f64, b: usize) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Config(format!("two-sided level must be in (0,1), got {level}")));
        }
        let alpha1 = (1.0 - level) / 2.0;
        Ok(IntervalSpec { alpha1, alpha2: 1.0 - alpha1, b, scheme: None })
    }

    #[must_use]
    pub fn with_scheme(mut self, scheme: WeightScheme) -> Self {
        self.scheme = Some(scheme);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha1 > 0.0 && self.alpha1 < self.alpha2 && self.alpha2 < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < alpha1 < alpha2 < 1, got {} and {}",
                self.alpha1, self.alpha2
            )));
        }
        if self.b == 0 {
            return Err(Error::Config("need at least one resample".into()));
        }
        Ok(())
    }
}

/// An interval-producing method, named like the CLI strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Student,
    Percentile,
    Bca,
    BootT(WeightScheme),
}

impl Method {
    /// Parse `student`, `percentile`, `bca`, or `boott:<scheme>`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "student" => Ok(Method::Student),
            "percentile" => Ok(Method::Percentile),
            "bca" => Ok(Method::Bca),
            _ => match name.strip_prefix("boott:") {
                Some(scheme) => Ok(Method::BootT(WeightScheme::parse(scheme)?)),
                None => Err(Error::Config(format!("unknown method `{name}`"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Method::Student => "student".into(),
            Method::Percentile => "percentile".into(),
            Method::Bca => "bca".into(),
            Method::BootT(s) => format!("boott:{}", s.name()),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// A two-sided interval with extended-real endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
}

impl ConfidenceInterval {
    pub fn length(&self) -> f64 {
        if self.lower.is_infinite() || self.upper.is_infinite() {
            f64::INFINITY
        } else {
            self.upper - self.lower
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn covers(&self, mu: f64) -> bool {
        self.lower <= mu && mu <= self.upper
    }

    fn point(x_bar: f64, method: Method) -> Self {
        ConfidenceInterval { lower: x_bar, upper: x_bar, method }
    }
}

/// Counts of infinite resampled t values behind a bootstrap-t interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BootstrapTails {
    pub neg_inf: usize,
    pub pos_inf: usize,
}

/// BCa internals, reported next to the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcaDiagnostics {
    pub z0: f64,
    pub acceleration: f64,
    pub alpha_tilde_1: f64,
    pub alpha_tilde_2: f64,
    /// True when a nonpositive `1 - a (z0 + z_j)` forced a clamped level.
    pub denominator_clamped: bool,
}

/// Classic `xbar +- s t / sqrt(n)` interval at two-sided `level`.
pub fn student_t_interval(x: &[f64], level: f64) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level must be in (0,1), got {level}")));
    }
    let summary = sample_summary(x)?;
    if summary.n == 1 || summary.is_degenerate() {
        return Ok(ConfidenceInterval::point(summary.x_bar, Method::Student));
    }
    let s = summary.s_sq.expect("n >= 2").sqrt();
    let q = t_quantile(summary.n - 1, 1.0 - (1.0 - level) / 2.0)?;
    let half = s * q / (summary.n as f64).sqrt();
    Ok(ConfidenceInterval {
        lower: summary.x_bar - half,
        upper: summary.x_bar + half,
        method: Method::Student,
    })
}

/// Weighted bootstrap-t interval
/// `[xbar - sigma_hat q(alpha2) / sqrt(n), xbar - sigma_hat q(alpha1) / sqrt(n)]`.
pub fn bootstrap_t_interval(
    x: &[f64],
    spec: &IntervalSpec,
    rng: &mut ChaCha8Rng,
) -> Result<ConfidenceInterval> {
    bootstrap_t_interval_with_tails(x, spec, rng).map(|(ci, _)| ci)
}

/// As [`bootstrap_t_interval`], also reporting how many resampled t values
/// were infinite in each tail.
pub fn bootstrap_t_interval_with_tails(
    x: &[f64],
    spec: &IntervalSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(ConfidenceInterval, BootstrapTails)> {
    spec.validate()?;
    let scheme = spec
        .scheme
        .ok_or_else(|| Error::Config("bootstrap-t interval needs a weight scheme".into()))?;
    let method = Method::BootT(scheme);
    let summary = sample_summary(x)?;
    if summary.is_degenerate() {
        return Ok((ConfidenceInterval::point(summary.x_bar, method), BootstrapTails::default()));
    }

    let ts = crate::stats::t_star_sample(scheme, x, spec.b, rng)?;
    let tails = BootstrapTails {
        neg_inf: ts.iter().take_while(|t| t.is_infinite()).count(),
        pos_inf: ts.iter().rev().take_while(|t| t.is_infinite()).count(),
    };
    let scale = summary.sigma_hat() / (summary.n as f64).sqrt();
    let q_hi = quantile_extended(&ts, spec.alpha2)?;
    let q_lo = quantile_extended(&ts, spec.alpha1)?;
    Ok((
        ConfidenceInterval { lower: summary.x_bar - scale * q_hi, upper: summary.x_bar - scale * q_lo, method },
        tails,
    ))
}

/// Fill `means` with `b` multinomial bootstrap means of `x`.
pub(crate) fn multinomial_means_into(
    sampler: &mut crate::weights::PseudoCountSampler,
    x: &[f64],
    b: usize,
    rng: &mut ChaCha8Rng,
    counts: &mut [f64],
    means: &mut Vec<f64>,
) -> Result<()> {
    means.clear();
    let n = x.len() as f64;
    for _ in 0..b {
        sampler.sample_into(rng, counts)?;
        let mut total = 0.0;
        for (&c, &xi) in counts.iter().zip(x) {
            total += c * xi;
        }
        means.push(total / n);
    }
    Ok(())
}

/// Percentile endpoints from bootstrap means (sorted in place).
pub(crate) fn percentile_from_means(
    means: &mut [f64],
    spec: &IntervalSpec,
) -> Result<ConfidenceInterval> {
    means.sort_unstable_by(f64::total_cmp);
    Ok(ConfidenceInterval {
        lower: quantile_extended(means, spec.alpha1)?,
        upper: quantile_extended(means, spec.alpha2)?,
        method: Method::Percentile,
    })
}

/// BCa endpoints from bootstrap means (sorted in place).
pub(crate) fn bca_from_means(
    means: &mut [f64],
    x: &[f64],
    summary: &crate::stats::SampleSummary,
    spec: &IntervalSpec,
) -> Result<(ConfidenceInterval, BcaDiagnostics)> {
    let b = spec.b as f64;
    let clamp = |p: f64| p.clamp(1.0 / (2.0 * b), 1.0 - 1.0 / (2.0 * b));

    // bias proportion with half weight on exact ties at the sample mean
    let below = means.iter().filter(|&&m| m < summary.x_bar).count() as f64;
    let tied = means.iter().filter(|&&m| m == summary.x_bar).count() as f64;
    let z0 = normal_quantile(clamp((below + 0.5 * tied) / b));

    // acceleration from leave-one-out means: u_i = (x_i - xbar)/(n - 1)
    let nm1 = (summary.n - 1) as f64;
    let mut sum2 = 0.0;
    let mut sum3 = 0.0;
    for &xi in x {
        let u = (xi - summary.x_bar) / nm1;
        sum2 += u * u;
        sum3 += u * u * u;
    }
    let acceleration = sum3 / (6.0 * sum2.powf(1.5));

    let mut clamped = false;
    let mut adjusted = |alpha: f64, upper_limit: bool| -> f64 {
        let z = normal_quantile(alpha) + z0;
        let denom = 1.0 - acceleration * z;
        if denom <= 0.0 {
            clamped = true;
            if upper_limit {
                1.0 - 1.0 / (2.0 * b)
            } else {
                1.0 / (2.0 * b)
            }
        } else {
            clamp(normal_cdf(z0 + z / denom))
        }
    };
    let alpha_tilde_1 = adjusted(spec.alpha1, false);
    let alpha_tilde_2 = adjusted(spec.alpha2, true);

    means.sort_unstable_by(f64::total_cmp);
    let lo = quantile_extended(means, alpha_tilde_1)?;
    let hi = quantile_extended(means, alpha_tilde_2)?;
    let diag = BcaDiagnostics {
        z0,
        acceleration,
        alpha_tilde_1,
        alpha_tilde_2,
        denominator_clamped: clamped,
    };
    Ok((
        ConfidenceInterval { lower: lo.min(hi), upper: lo.max(hi), method: Method::Bca },
        diag,
    ))
}

/// Percentile interval: raw quantiles of the multinomial bootstrap means.
pub fn percentile_interval(
    x: &[f64],
    spec: &IntervalSpec,
    rng: &mut ChaCha8Rng,
) -> Result<ConfidenceInterval> {
    spec.validate()?;
    let summary = sample_summary(x)?;
    if summary.is_degenerate() {
        return Ok(ConfidenceInterval::point(summary.x_bar, Method::Percentile));
    }
    let mut sampler = WeightScheme::Multinomial.sampler(x.len())?;
    let mut counts = vec![0.0; x.len()];
    let mut means = Vec::with_capacity(spec.b);
    multinomial_means_into(&mut sampler, x, spec.b, rng, &mut counts, &mut means)?;
    percentile_from_means(&mut means, spec)
}

/// Bias-corrected accelerated interval over multinomial bootstrap means.
///
/// The bias proportion puts half weight on resample means exactly equal to
/// the sample mean, which makes the `n = 2` interval `[x_(1), x_(2)]` rather
/// than a single order statistic.
pub fn bca_interval(
    x: &[f64],
    spec: &IntervalSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(ConfidenceInterval, BcaDiagnostics)> {
    spec.validate()?;
    let summary = sample_summary(x)?;
    if summary.n == 1 || summary.is_degenerate() {
        let diag = BcaDiagnostics {
            z0: 0.0,
            acceleration: 0.0,
            alpha_tilde_1: spec.alpha1,
            alpha_tilde_2: spec.alpha2,
            denominator_clamped: false,
        };
        return Ok((ConfidenceInterval::point(summary.x_bar, Method::Bca), diag));
    }
    let mut sampler = WeightScheme::Multinomial.sampler(x.len())?;
    let mut counts = vec![0.0; x.len()];
    let mut means = Vec::with_capacity(spec.b);
    multinomial_means_into(&mut sampler, x, spec.b, rng, &mut counts, &mut means)?;
    bca_from_means(&mut means, x, &summary, spec)
}

/// One entry point for every method.
pub fn compute_interval(
    method: Method,
    x: &[f64],
    spec: &IntervalSpec,
    rng: &mut ChaCha8Rng,
) -> Result<ConfidenceInterval> {
    match method {
        Method::Student => student_t_interval(x, spec.alpha2 - spec.alpha1),
        Method::Percentile => percentile_interval(x, spec, rng),
        Method::Bca => bca_interval(x, spec, rng).map(|(ci, _)| ci),
        Method::BootT(scheme) => {
            let spec = IntervalSpec { scheme: Some(scheme), ..*spec };
            bootstrap_t_interval(x, &spec, rng)
        }
    }
}

/// `n = 2` interval width divided by `|x1 - x2|` for a bootstrap-t method:
/// the `level` quantile of `|w1 - 1/2| / sqrt(w1 (1 - w1))` with
/// `w1 = v1/(v1 + v2)`.
///
/// The multinomial case is computed from its exact three-atom law; IID
/// schemes are sampled `draws` times. Can be `+inf`.
pub fn exact_n2_width_factor(
    scheme: WeightScheme,
    level: f64,
    draws: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level must be in (0,1), got {level}")));
    }
    if scheme == WeightScheme::Multinomial {
        // w1 is 0, 1/2, 1 with probabilities 1/4, 1/2, 1/4, so the width is
        // 0 or +inf with probability 1/2 each.
        return Ok(if level <= 0.5 { 0.0 } else { f64::INFINITY });
    }
    if !scheme.is_iid() {
        return Err(Error::Domain(format!(
            "exact_n2_width_factor supports IID schemes and multinomial, not {}",
            scheme.name()
        )));
    }
    if draws == 0 {
        return Err(Error::Domain("need draws >= 1".into()));
    }

    let mut sampler = scheme.sampler(2)?;
    let mut v = [0.0; 2];
    let mut widths = Vec::with_capacity(draws);
    for _ in 0..draws {
        sampler.sample_into(rng, &mut v)?;
        let w1 = v[0] / (v[0] + v[1]);
        widths.push((w1 - 0.5).abs() / (w1 * (1.0 - w1)).sqrt());
    }
    // selection instead of a full sort; same order-statistic convention as
    // quantile_extended
    let nth = if level <= 0.5 {
        tail_rank(draws, level) - 1
    } else {
        draws - tail_rank(draws, 1.0 - level)
    };
    let (_, kth, _) = widths.select_nth_unstable_by(nth, f64::total_cmp);
    Ok(*kth)
}

/// Internal hook for the study loop: compute one bootstrap-t interval from a
/// pre-built sampler and scratch buffers, avoiding per-call allocation.
pub(crate) fn boot_t_from_sampler(
    sampler: &mut crate::weights::PseudoCountSampler,
    x: &[f64],
    summary: &crate::stats::SampleSummary,
    spec: &IntervalSpec,
    rng: &mut ChaCha8Rng,
    counts: &mut [f64],
    ts: &mut Vec<f64>,
    method: Method,
) -> Result<ConfidenceInterval> {
    if summary.is_degenerate() {
        return Ok(ConfidenceInterval::point(summary.x_bar, method));
    }
    ts.clear();
    for _ in 0..spec.b {
        sampler.sample_into(rng, counts)?;
        normalize_in_place(counts)?;
        let (mu, var) = weighted_moments_unchecked(counts, x);
        ts.push(t_from_moments(mu, var, summary));
    }
    ts.sort_unstable_by(f64::total_cmp);
    let scale = summary.sigma_hat() / (summary.n as f64).sqrt();
    Ok(ConfidenceInterval {
        lower: summary.x_bar - scale * quantile_extended(ts, spec.alpha2)?,
        upper: summary.x_bar - scale * quantile_extended(ts, spec.alpha1)?,
        method,
    })
}
