//! Weighted resample statistics and the extended-real bootstrap t.
//!
//! Infinities are first-class values here: `t* = sqrt(n) (mu* - xbar) / sigma*`
//! is `+inf`/`-inf` when the weighted standard deviation vanishes with a
//! nonzero numerator, and exactly `0` when both vanish. A degenerate resample
//! concentrates all weight on copies of a single data value; that case is
//! detected combinatorially (not through a rounded sum), so the conventions
//! hold bit-exactly and degenerate draws from different code paths collide
//! on identical atoms.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::weights::{normalize_in_place, NormalizedWeights, WeightScheme};

/// Plain per-sample statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub n: usize,
    pub x_bar: f64,
    /// Variance with divisor `n`.
    pub sigma_hat_sq: f64,
    /// Unbiased variance (divisor `n-1`); defined for `n >= 2`.
    pub s_sq: Option<f64>,
}

impl SampleSummary {
    pub fn sigma_hat(&self) -> f64 {
        self.sigma_hat_sq.sqrt()
    }

    /// True exactly when all observations are equal.
    pub fn is_degenerate(&self) -> bool {
        self.sigma_hat_sq == 0.0
    }
}

/// Mean and both variance estimates of `x`.
///
/// All-equal samples are detected by comparing values, so they report
/// exactly zero variance and `x_bar` equal to the common value even when a
/// naive mean would round (e.g. three copies of 0.1).
pub fn sample_summary(x: &[f64]) -> Result<SampleSummary> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Domain("sample_summary needs at least one observation".into()));
    }
    let first = x[0];
    if x.iter().all(|&v| v == first) {
        return Ok(SampleSummary {
            n,
            x_bar: first,
            sigma_hat_sq: 0.0,
            s_sq: (n >= 2).then_some(0.0),
        });
    }
    let x_bar = x.iter().sum::<f64>() / n as f64;
    let ss: f64 = x.iter().map(|&v| (v - x_bar) * (v - x_bar)).sum();
    let sigma_hat_sq = ss / n as f64;
    let s_sq = (n >= 2).then(|| ss / (n - 1) as f64);
    Ok(SampleSummary { n, x_bar, sigma_hat_sq, s_sq })
}

/// Weighted mean and weighted variance `(mu*, sigma*^2)` for normalized `w`.
///
/// If every observation carrying positive weight shares one value `c`, the
/// result is exactly `(c, 0.0)`.
pub fn weighted_moments(w: &NormalizedWeights, x: &[f64]) -> Result<(f64, f64)> {
    if w.w.len() != x.len() {
        return Err(Error::Domain(format!(
            "weight/data length mismatch: {} vs {}",
            w.w.len(),
            x.len()
        )));
    }
    Ok(weighted_moments_unchecked(&w.w, x))
}

#[inline]
pub(crate) fn weighted_moments_unchecked(w: &[f64], x: &[f64]) -> (f64, f64) {
    // Degenerate resamples must produce sigma*^2 == 0.0 exactly, so check
    // for a single supported value before doing any rounded arithmetic.
    let mut common = None;
    let mut degenerate = true;
    for (&wi, &xi) in w.iter().zip(x) {
        if wi > 0.0 {
            match common {
                None => common = Some(xi),
                Some(c) => {
                    if xi != c {
                        degenerate = false;
                        break;
                    }
                }
            }
        }
    }
    if degenerate {
        // sum(v) > 0 guarantees at least one positive weight
        return (common.expect("positive-total weights"), 0.0);
    }

    let mut mu = 0.0;
    for (&wi, &xi) in w.iter().zip(x) {
        mu += wi * xi;
    }
    let mut var = 0.0;
    for (&wi, &xi) in w.iter().zip(x) {
        let d = xi - mu;
        var += wi * d * d;
    }
    (mu, var)
}

/// The studentized bootstrap statistic `sqrt(n) (mu* - xbar) / sigma*`.
///
/// Conventions for `sigma* = 0`: `+inf` when `mu* > xbar`, `-inf` when
/// `mu* < xbar`, and exactly `0` when `mu* == xbar` (both arise from the
/// same values being averaged, so the comparison is exact).
pub fn bootstrap_t_statistic(
    w: &NormalizedWeights,
    x: &[f64],
    summary: &SampleSummary,
) -> Result<f64> {
    let (mu, var) = weighted_moments(w, x)?;
    Ok(t_from_moments(mu, var, summary))
}

#[inline]
pub(crate) fn t_from_moments(mu_star: f64, sigma_star_sq: f64, summary: &SampleSummary) -> f64 {
    if sigma_star_sq > 0.0 {
        (summary.n as f64).sqrt() * (mu_star - summary.x_bar) / sigma_star_sq.sqrt()
    } else if mu_star > summary.x_bar {
        f64::INFINITY
    } else if mu_star < summary.x_bar {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Draw `b` bootstrap t values for `x` under `scheme`, sorted ascending
/// (`-inf` first, `+inf` last).
pub fn t_star_sample(
    scheme: WeightScheme,
    x: &[f64],
    b: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if b == 0 {
        return Err(Error::Domain("t_star_sample needs b >= 1".into()));
    }
    let summary = sample_summary(x)?;
    let mut sampler = scheme.sampler(x.len())?;
    let mut buf = vec![0.0; x.len()];
    let mut out = Vec::with_capacity(b);
    for _ in 0..b {
        sampler.sample_into(rng, &mut buf)?;
        normalize_in_place(&mut buf)?;
        let (mu, var) = weighted_moments_unchecked(&buf, x);
        out.push(t_from_moments(mu, var, &summary));
    }
    out.sort_unstable_by(f64::total_cmp);
    Ok(out)
}

/// Order-statistic quantile over a sorted sample with infinities allowed.
///
/// For `level <= 1/2` this is the `ceil(B * level)`-th smallest value; for
/// `level > 1/2`, the `ceil(B * (1-level))`-th largest. With `B = 2000`,
/// exactly 50 infinite values in a tail flip the 0.025/0.975 quantile.
/// No interpolation between order statistics is performed.
pub fn quantile_extended(sorted: &[f64], level: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Domain("quantile of an empty sample".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("quantile level must be in (0,1), got {level}")));
    }
    let b = sorted.len();
    Ok(if level <= 0.5 {
        sorted[tail_rank(b, level) - 1]
    } else {
        sorted[b - tail_rank(b, 1.0 - level)]
    })
}

/// `ceil(b * p)` clamped to `1..=b`, with a 1e-9 guard so that levels like
/// 0.025 (not exactly representable) still give `b * p` ranks.
pub(crate) fn tail_rank(b: usize, p: f64) -> usize {
    let k = (b as f64 * p - 1e-9).ceil() as isize;
    k.clamp(1, b as isize) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::weights::sample_pseudo_counts;
    use approx::assert_abs_diff_eq;

    fn rng(seed: u64) -> ChaCha8Rng {
        StreamKey::new(seed).tag("stats-test").rng()
    }

    fn weights(w: &[f64]) -> NormalizedWeights {
        NormalizedWeights { w: w.to_vec() }
    }

    #[test]
    fn sample_summary_examples() {
        let s = sample_summary(&[0.0, 1.0]).unwrap();
        assert_eq!((s.x_bar, s.sigma_hat_sq, s.s_sq), (0.5, 0.25, Some(0.5)));

        let s = sample_summary(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!((s.x_bar, s.sigma_hat_sq), (3.0, 0.0));
        assert!(s.is_degenerate());

        let s = sample_summary(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(s.x_bar, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.sigma_hat_sq, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s_sq.unwrap(), 1.0, epsilon = 1e-15);

        let s = sample_summary(&[7.5]).unwrap();
        assert_eq!((s.x_bar, s.sigma_hat_sq, s.s_sq), (7.5, 0.0, None));

        assert!(sample_summary(&[]).is_err());
    }

    #[test]
    fn all_equal_detection_beats_rounding() {
        // 0.1 * 3 does not round back to 0.3; the summary must still be exact
        let s = sample_summary(&[0.1, 0.1, 0.1]).unwrap();
        assert_eq!(s.x_bar, 0.1);
        assert_eq!(s.sigma_hat_sq, 0.0);
    }

    #[test]
    fn weighted_moments_examples() {
        let (mu, var) = weighted_moments(&weights(&[0.5, 0.5]), &[0.0, 1.0]).unwrap();
        assert_eq!((mu, var), (0.5, 0.25));

        let (mu, var) = weighted_moments(&weights(&[1.0, 0.0]), &[0.0, 1.0]).unwrap();
        assert_eq!((mu, var), (0.0, 0.0));

        let (mu, var) = weighted_moments(&weights(&[0.75, 0.25]), &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(mu, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(var, 3.0 / 16.0, epsilon = 1e-15);

        assert!(weighted_moments(&weights(&[1.0]), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn degenerate_weighted_moments_are_exactly_zero() {
        // weights 1/3 each on three copies of 0.1: a rounded dot product
        // would give a tiny positive variance
        let w = weights(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        let (mu, var) = weighted_moments(&w, &[0.1, 0.1, 0.1, 5.0]).unwrap();
        assert_eq!(mu, 0.1);
        assert_eq!(var, 0.0);
    }

    #[test]
    fn t_statistic_conventions() {
        let x = [0.0, 1.0, 2.0, 7.0];
        let summary = sample_summary(&x).unwrap();
        // equal weights reproduce the sample mean: t = 0
        let t = bootstrap_t_statistic(&weights(&[0.25; 4]), &x, &summary).unwrap();
        assert_abs_diff_eq!(t, 0.0, epsilon = 1e-12);
        // all weight on the largest value: sigma* = 0, mu* > xbar
        let t = bootstrap_t_statistic(&weights(&[0.0, 0.0, 0.0, 1.0]), &x, &summary).unwrap();
        assert_eq!(t, f64::INFINITY);
        // all weight on the smallest value
        let t = bootstrap_t_statistic(&weights(&[1.0, 0.0, 0.0, 0.0]), &x, &summary).unwrap();
        assert_eq!(t, f64::NEG_INFINITY);
        // 0/0 convention: all weight on an observation equal to the mean
        let y = [0.0, 1.0, 2.0];
        let sy = sample_summary(&y).unwrap();
        let t = bootstrap_t_statistic(&weights(&[0.0, 1.0, 0.0]), &y, &sy).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn two_value_data_matches_closed_form() {
        // For data with two distinct values the statistic reduces to
        // sqrt(n) (lambda* - lambda) / sqrt(lambda* (1 - lambda*)) * sign(x1 - xn).
        let mut r = rng(1);
        let x = [2.0, 2.0, 2.0, -1.0, -1.0];
        let n1 = 3usize;
        let summary = sample_summary(&x).unwrap();
        for _ in 0..10_000 {
            let counts =
                sample_pseudo_counts(WeightScheme::ScaledBeta { a: 0.5 }, x.len(), &mut r).unwrap();
            let w = crate::weights::normalize(&counts).unwrap();
            let generic = bootstrap_t_statistic(&w, &x, &summary).unwrap();
            let lambda = n1 as f64 / x.len() as f64;
            let lambda_star: f64 = w.w[..n1].iter().sum();
            let closed = (x.len() as f64).sqrt() * (lambda_star - lambda)
                / (lambda_star * (1.0 - lambda_star)).sqrt();
            // 1e-12 relative: extreme weight draws make |t| large
            assert_abs_diff_eq!(generic, closed, epsilon = 1e-12 * (1.0 + generic.abs()));
        }
    }

    #[test]
    fn location_scale_equivariance() {
        let mut r = rng(2);
        let x = [0.3, -1.2, 4.0, 2.2, 0.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 3.0).collect();
        let neg: Vec<f64> = x.iter().map(|v| -1.5 * v + 1.0).collect();
        let sx = sample_summary(&x).unwrap();
        let sy = sample_summary(&y).unwrap();
        let sneg = sample_summary(&neg).unwrap();
        for _ in 0..1000 {
            let counts = sample_pseudo_counts(WeightScheme::Exponential, x.len(), &mut r).unwrap();
            let w = crate::weights::normalize(&counts).unwrap();
            let tx = bootstrap_t_statistic(&w, &x, &sx).unwrap();
            let ty = bootstrap_t_statistic(&w, &y, &sy).unwrap();
            let tn = bootstrap_t_statistic(&w, &neg, &sneg).unwrap();
            assert_abs_diff_eq!(tx, ty, epsilon = 1e-9 * (1.0 + tx.abs()));
            assert_abs_diff_eq!(tx, -tn, epsilon = 1e-9 * (1.0 + tx.abs()));
        }
    }

    #[test]
    fn t_star_sample_on_constant_data_is_all_zero() {
        let mut r = rng(3);
        let ts = t_star_sample(WeightScheme::Poisson, &[4.0; 6], 500, &mut r).unwrap();
        assert!(ts.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn t_star_sample_two_points_multinomial_masses() {
        // x = (0,1): t* is -inf, 0, +inf with probabilities 1/4, 1/2, 1/4
        let mut r = rng(4);
        let b = 200_000;
        let ts = t_star_sample(WeightScheme::Multinomial, &[0.0, 1.0], b, &mut r).unwrap();
        let neg = ts.iter().filter(|t| t.is_infinite() && t.is_sign_negative()).count();
        let zero = ts.iter().filter(|&&t| t == 0.0).count();
        let pos = ts.iter().filter(|t| t.is_infinite() && t.is_sign_positive()).count();
        assert_eq!(neg + zero + pos, b);
        assert_abs_diff_eq!(neg as f64 / b as f64, 0.25, epsilon = 0.005);
        assert_abs_diff_eq!(zero as f64 / b as f64, 0.5, epsilon = 0.005);
        assert_abs_diff_eq!(pos as f64 / b as f64, 0.25, epsilon = 0.005);
    }

    #[test]
    fn t_star_sample_beta_weights_stay_finite() {
        let mut r = rng(5);
        let ts =
            t_star_sample(WeightScheme::ScaledBeta { a: 0.5 }, &[0.0, 1.0], 20_000, &mut r).unwrap();
        assert!(ts.iter().all(|t| t.is_finite()));
        assert!(ts.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn mean_square_t_is_stable_with_three_distinct_values() {
        // three distinct values (each repeated, which keeps the tail of
        // (t*)^2 light enough for a Monte Carlo stability check)
        let mut r = rng(6);
        let x = [0.0, 0.0, 1.0, 1.0, 5.0, 5.0];
        let scheme = WeightScheme::ScaledBeta { a: 0.5 };
        let ts = t_star_sample(scheme, &x, 100_000, &mut r).unwrap();
        let m1 = ts.iter().map(|t| t * t).sum::<f64>() / ts.len() as f64;
        let ts = t_star_sample(scheme, &x, 200_000, &mut r).unwrap();
        let m2 = ts.iter().map(|t| t * t).sum::<f64>() / ts.len() as f64;
        assert!(m1.is_finite() && m2.is_finite());
        assert!((m1 - m2).abs() <= 0.15 * m1.max(m2), "m1={m1} m2={m2}");

        // two distinct values, three copies each
        let y = [-3.0, -3.0, -3.0, 4.0, 4.0, 4.0];
        let ts = t_star_sample(scheme, &y, 100_000, &mut r).unwrap();
        let p1 = ts.iter().map(|t| t * t).sum::<f64>() / ts.len() as f64;
        let ts = t_star_sample(scheme, &y, 200_000, &mut r).unwrap();
        let p2 = ts.iter().map(|t| t * t).sum::<f64>() / ts.len() as f64;
        assert!(p1.is_finite() && p2.is_finite());
        assert!((p1 - p2).abs() <= 0.15 * p1.max(p2), "p1={p1} p2={p2}");
    }

    #[test]
    fn quantile_rank_convention() {
        // B = 2000 at the 0.025/0.975 pair picks the 50th order statistic
        // from each end
        assert_eq!(tail_rank(2000, 0.025), 50);
        assert_eq!(tail_rank(2000, 1.0 - 0.975), 50);
        assert_eq!(tail_rank(4, 0.5), 2);
        assert_eq!(tail_rank(5, 1e-9), 1);

        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_extended(&sorted, 0.5).unwrap(), 2.0);
        assert_eq!(quantile_extended(&sorted, 0.51).unwrap(), 3.0);

        let mut v: Vec<f64> = (1..=2000).map(|i| i as f64).collect();
        assert_eq!(quantile_extended(&v, 0.025).unwrap(), 50.0);
        assert_eq!(quantile_extended(&v, 0.975).unwrap(), 1951.0);
        // exactly 50 infinities in the upper tail flip the 0.975 quantile
        for t in v.iter_mut().rev().take(50) {
            *t = f64::INFINITY;
        }
        assert_eq!(quantile_extended(&v, 0.975).unwrap(), f64::INFINITY);
        assert!(quantile_extended(&v, 0.025).unwrap().is_finite());

        assert!(quantile_extended(&[], 0.5).is_err());
        assert!(quantile_extended(&sorted, 0.0).is_err());
    }
}
