//! Exact small-sample combinatorics and moment-expansion checks.
//!
//! The enumeration here is the `B -> infinity` oracle for the multinomial
//! bootstrap t: every count vector is visited with its exact probability and
//! pushed through the same statistic code the sampler uses, so equal atoms
//! collide bit-exactly.

use rayon::prelude::*;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::stats::{sample_summary, t_from_moments, weighted_moments_unchecked};
use crate::weights::{scaled_beta_params, WeightScheme};

/// A discrete law on the extended reals.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDistribution {
    /// `(value, probability)`, values strictly increasing (`-inf` allowed
    /// first, `+inf` last), probabilities summing to one.
    pub atoms: Vec<(f64, f64)>,
}

impl AtomicDistribution {
    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }

    pub fn probability_of(&self, value: f64) -> f64 {
        self.atoms
            .iter()
            .find(|(v, _)| v.total_cmp(&value).is_eq())
            .map_or(0.0, |(_, p)| *p)
    }

    /// Total-variation distance to an empirical sample, atoms matched by
    /// exact value (infinities included).
    pub fn tv_distance_to_sample(&self, sample: &[f64]) -> f64 {
        use std::collections::HashMap;
        let b = sample.len() as f64;
        let mut emp: HashMap<u64, f64> = HashMap::new();
        for &t in sample {
            *emp.entry(t.to_bits()).or_insert(0.0) += 1.0 / b;
        }
        let mut tv = 0.0;
        for &(v, p) in &self.atoms {
            let phat = emp.remove(&v.to_bits()).unwrap_or(0.0);
            tv += (p - phat).abs();
        }
        // empirical values that hit no exact atom
        tv += emp.values().sum::<f64>();
        0.5 * tv
    }
}

/// `Pr(sigma* = 0) = n^(1-n)` for multinomial resampling of distinct data.
pub fn prob_sigma_star_zero(n: usize) -> f64 {
    (n as f64).powi(1 - n as i32)
}

/// Probabilities of near-degenerate multinomial count vectors (distinct
/// data): the largest count equal to `n-1`, or equal to `n-2` with the rest
/// split 1+1 / paired 2. Components below their validity range (`n >= 3`,
/// `4`, `5` respectively) are omitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherHallProbs {
    pub top1: Option<f64>,
    pub top2_split: Option<f64>,
    pub top2_pair: Option<f64>,
}

pub fn fisher_hall_probs(n: usize) -> FisherHallProbs {
    let nf = n as f64;
    FisherHallProbs {
        top1: (n >= 3).then(|| (1.0 - 1.0 / nf) * nf.powi(3 - n as i32)),
        top2_split: (n >= 4).then(|| {
            0.5 * (1.0 - 1.0 / nf).powi(2) * (1.0 - 2.0 / nf) * nf.powi(5 - n as i32)
        }),
        top2_pair: (n >= 5).then(|| 0.5 * (1.0 - 1.0 / nf).powi(2) * nf.powi(4 - n as i32)),
    }
}

/// One-sided probability that a resampled t is infinite, for distinct data
/// at sample size `n`, per scheme. Used by [`finite_length_min_n`].
fn infinite_tail_prob(scheme: WeightScheme, n: usize) -> Result<f64> {
    let nf = n as f64;
    match scheme {
        WeightScheme::Multinomial => Ok((nf - 1.0) / nf.powi(n as i32)),
        WeightScheme::DoubleOrNothing => {
            let q = 2.0f64.powi(-(n as i32));
            Ok(nf * q / (1.0 - q))
        }
        WeightScheme::Poisson => {
            // n * sum_x (e^-1 / x!)^n, conditioned on the all-zero discard;
            // terms vanish below 1e-300 long before x = 50
            let mut sum = 0.0;
            let mut inv_fact = 1.0f64;
            for x in 0..=50u32 {
                if x > 0 {
                    inv_fact /= x as f64;
                }
                let term = ((-1.0f64).exp() * inv_fact).powi(n as i32);
                if term < 1e-300 {
                    break;
                }
                sum += term;
            }
            Ok(nf * sum / (1.0 - (-nf).exp()))
        }
        other => Err(Error::Domain(format!(
            "finite-length threshold is defined for multinomial, don, poisson; got {}",
            other.name()
        ))),
    }
}

/// Smallest `n` at which the one-sided infinite-tail probability drops below
/// `alpha1` for continuously distributed data.
pub fn finite_length_min_n(scheme: WeightScheme, alpha1: f64) -> Result<usize> {
    if !(alpha1 > 0.0 && alpha1 < 1.0) {
        return Err(Error::Domain(format!("alpha1 must be in (0,1), got {alpha1}")));
    }
    for n in 2..=256 {
        if infinite_tail_prob(scheme, n)? < alpha1 {
            return Ok(n);
        }
    }
    Err(Error::Internal("no finite-length threshold found below n = 256".into()))
}

/// Exact binomial upper tail `Pr(Bin(n, p) >= k)` by direct summation of
/// log-space terms.
pub fn binom_tail(n_trials: usize, p: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must be in [0,1], got {p}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if k > n_trials {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let n = n_trials as f64;
    let ln_n_fact = ln_gamma(n + 1.0);
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut sum = 0.0;
    for j in k..=n_trials {
        let jf = j as f64;
        let ln_pmf = ln_n_fact - ln_gamma(jf + 1.0) - ln_gamma(n - jf + 1.0)
            + jf * lp
            + (n - jf) * lq;
        sum += ln_pmf.exp();
    }
    Ok(sum.min(1.0))
}

/// Exact law of the multinomial bootstrap t for `x`, by enumerating all
/// `C(2n-1, n)` count vectors with their multinomial probabilities.
///
/// Count vectors are visited in lexicographic order; every t value is
/// computed by the same normalized-weight path the sampler uses, so the
/// empirical law from sampling lands on exactly these atoms.
pub fn exact_multinomial_t_distribution(x: &[f64]) -> Result<AtomicDistribution> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Domain("need at least one observation".into()));
    }
    if n > 12 {
        return Err(Error::Domain(format!(
            "exact enumeration is limited to n <= 12 (C(2n-1, n) vectors), got {n}"
        )));
    }
    let summary = sample_summary(x)?;

    // Pascal's triangle up to n
    let mut choose = vec![vec![0.0f64; n + 1]; n + 1];
    for (m, row) in choose.iter_mut().enumerate() {
        row[0] = 1.0;
        for j in 1..=m {
            row[j] = if j == m { 1.0 } else { 0.0 };
        }
    }
    for m in 1..=n {
        for j in 1..m {
            choose[m][j] = choose[m - 1][j - 1] + choose[m - 1][j];
        }
    }

    let n_pow = (n as f64).powi(n as i32); // <= 12^12, exact in f64
    let mut atoms: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let mut counts = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];

    // depth-first over v_1..v_n with remaining total m; coeff accumulates
    // the multinomial coefficient as a product of binomials
    fn recurse(
        i: usize,
        remaining: usize,
        coeff: f64,
        counts: &mut [f64],
        weights: &mut [f64],
        x: &[f64],
        summary: &crate::stats::SampleSummary,
        choose: &[Vec<f64>],
        n_pow: f64,
        atoms: &mut std::collections::HashMap<u64, f64>,
    ) {
        let n = x.len();
        if i == n - 1 {
            counts[i] = remaining as f64;
            for (w, &c) in weights.iter_mut().zip(counts.iter()) {
                *w = c / n as f64;
            }
            let (mu, var) = weighted_moments_unchecked(weights, x);
            let mut t = t_from_moments(mu, var, summary);
            if t == 0.0 {
                t = 0.0; // normalize -0.0
            }
            *atoms.entry(t.to_bits()).or_insert(0.0) += coeff / n_pow;
            return;
        }
        for k in 0..=remaining {
            counts[i] = k as f64;
            recurse(
                i + 1,
                remaining - k,
                coeff * choose[remaining][k],
                counts,
                weights,
                x,
                summary,
                choose,
                n_pow,
                atoms,
            );
        }
    }
    recurse(0, n, 1.0, &mut counts, &mut weights, x, &summary, &choose, n_pow, &mut atoms);

    let mut list: Vec<(f64, f64)> =
        atoms.into_iter().map(|(bits, p)| (f64::from_bits(bits), p)).collect();
    list.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    Ok(AtomicDistribution { atoms: list })
}

/// Monte Carlo check of the normalized-weight moment expansions
/// `E(W^2) = 2 + (10 - 2 mu3)/n` and `E(W^3) = mu3 + (9 mu3 - 3 mu4)/n`
/// for IID schemes with strictly positive counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderCheck {
    pub e_w2_hat: f64,
    pub e_w2_pred: f64,
    pub se_w2: f64,
    pub e_w3_hat: f64,
    pub e_w3_pred: f64,
    pub se_w3: f64,
}

pub fn second_order_check(
    scheme: WeightScheme,
    n: usize,
    draws: usize,
    seed: u64,
) -> Result<SecondOrderCheck> {
    if !scheme.is_iid() || scheme.moments(n).prob_zero > 0.0 {
        return Err(Error::Domain(format!(
            "second_order_check needs an IID scheme with no atom at zero, got {}",
            scheme.name()
        )));
    }
    if n < 2 || draws == 0 {
        return Err(Error::Domain("need n >= 2 and draws >= 1".into()));
    }
    let mu3 = scheme.raw_moment(3)?;
    let mu4 = scheme.raw_moment(4)?;
    let nf = n as f64;

    // fixed-size blocks with derived streams: parallel yet reproducible
    const CHUNK: usize = 1 << 12;
    let n_chunks = draws.div_ceil(CHUNK);
    let key = StreamKey::new(seed).tag("second-order").tag(&scheme.name()).word(n as u64);
    let partials: Vec<Result<[f64; 4]>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(draws);
            let mut rng = key.word(chunk as u64).rng();
            let mut sampler = scheme.sampler(n)?;
            let mut v = vec![0.0; n];
            let mut acc = [0.0f64; 4];
            for _ in 0..hi - lo {
                sampler.sample_into(&mut rng, &mut v)?;
                let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
                for &vi in &v {
                    s1 += vi;
                    s2 += vi * vi;
                    s3 += vi * vi * vi;
                }
                // averaging W_i^k over i uses every coordinate of the draw
                let y2 = nf * s2 / (s1 * s1);
                let y3 = nf * nf * s3 / (s1 * s1 * s1);
                acc[0] += y2;
                acc[1] += y2 * y2;
                acc[2] += y3;
                acc[3] += y3 * y3;
            }
            Ok(acc)
        })
        .collect();

    let mut acc = [0.0f64; 4];
    for p in partials {
        let p = p?;
        for (a, b) in acc.iter_mut().zip(p) {
            *a += b;
        }
    }
    let d = draws as f64;
    let m2 = acc[0] / d;
    let m3 = acc[2] / d;
    let var2 = (acc[1] / d - m2 * m2).max(0.0);
    let var3 = (acc[3] / d - m3 * m3).max(0.0);
    Ok(SecondOrderCheck {
        e_w2_hat: m2,
        e_w2_pred: 2.0 + (10.0 - 2.0 * mu3) / nf,
        se_w2: (var2 / d).sqrt(),
        e_w3_hat: m3,
        e_w3_pred: mu3 + (9.0 * mu3 - 3.0 * mu4) / nf,
        se_w3: (var3 / d).sqrt(),
    })
}

/// Inverse moment `E(v^-s)` of an (unscaled) `Beta(a, b)` variable:
/// `B(a-s, b) / B(a, b)`. Requires `s < a`.
pub(crate) fn beta_inverse_moment(a: f64, b: f64, s: f64) -> f64 {
    (ln_gamma(a - s) + ln_gamma(a + b) - ln_gamma(a + b - s) - ln_gamma(a)).exp()
}

/// Upper bound `n (E(1/u1) + E(1/un) + 2)` on the conditional mean squared
/// bootstrap t for two-value data under scaled-beta weights, where `u` sums
/// the group's beta counts and `E(1/u) <= E(v^(-1/k))^k / k` by AM-GM.
///
/// Returns `+inf` when `min(n1, n - n1) <= 1/a` (the bound needs more than
/// `1/a` copies of each value).
pub fn two_value_finiteness_bound(n1: usize, n: usize, a: f64) -> Result<f64> {
    let (b, _, _) = scaled_beta_params(a)?;
    if n1 == 0 || n1 >= n {
        return Err(Error::Domain("need two nonempty groups: 0 < n1 < n".into()));
    }
    let k1 = n1;
    let k2 = n - n1;
    if (k1.min(k2) as f64) <= 1.0 / a {
        return Ok(f64::INFINITY);
    }
    let inv_mean = |k: usize| -> f64 {
        let s = 1.0 / k as f64;
        beta_inverse_moment(a, b, s).powi(k as i32) / k as f64
    };
    Ok(n as f64 * (inv_mean(k1) + inv_mean(k2) + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::t_star_sample;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigma_star_zero_probability() {
        assert_abs_diff_eq!(prob_sigma_star_zero(2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(prob_sigma_star_zero(4), 1.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(prob_sigma_star_zero(10), 1e-9, epsilon = 1e-22);
    }

    #[test]
    fn fisher_hall_small_n() {
        let p = fisher_hall_probs(3);
        assert_abs_diff_eq!(p.top1.unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert!(p.top2_split.is_none() && p.top2_pair.is_none());

        let p = fisher_hall_probs(5);
        let (a, b, c) = (p.top1.unwrap(), p.top2_split.unwrap(), p.top2_pair.unwrap());
        assert!(a > 0.0 && b > 0.0 && c > 0.0);
        assert!(a + b + c < 1.0);
    }

    #[test]
    fn fisher_hall_top1_matches_enumeration() {
        // count sequences of n uniform index draws whose sorted counts have
        // top value exactly n-1
        for n in 3..=6usize {
            let mut hits = 0usize;
            let total = n.pow(n as u32);
            let mut idx = vec![0usize; n];
            'outer: loop {
                let mut counts = vec![0usize; n];
                for &i in &idx {
                    counts[i] += 1;
                }
                if counts.iter().max() == Some(&(n - 1)) {
                    hits += 1;
                }
                for pos in 0..n {
                    idx[pos] += 1;
                    if idx[pos] < n {
                        continue 'outer;
                    }
                    idx[pos] = 0;
                }
                break;
            }
            let expected = fisher_hall_probs(n).top1.unwrap();
            assert_abs_diff_eq!(hits as f64 / total as f64, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn fisher_hall_degenerate_resamples_are_rare_from_n7() {
        // the probability of some value appearing >= n-2 times drops below
        // 0.05 at n = 7
        let total = |n: usize| {
            let p = fisher_hall_probs(n);
            p.top1.unwrap() + p.top2_split.unwrap() + p.top2_pair.unwrap()
                + prob_sigma_star_zero(n)
        };
        assert!(total(6) > 0.05);
        assert!(total(7) < 0.05);
    }

    #[test]
    fn finite_length_thresholds() {
        assert_eq!(finite_length_min_n(WeightScheme::Multinomial, 0.025).unwrap(), 4);
        assert_eq!(finite_length_min_n(WeightScheme::DoubleOrNothing, 0.025).unwrap(), 9);
        assert_eq!(finite_length_min_n(WeightScheme::Poisson, 0.025).unwrap(), 7);
        assert!(finite_length_min_n(WeightScheme::ScaledBeta { a: 0.5 }, 0.025).is_err());
    }

    #[test]
    fn finite_length_threshold_monotone_in_alpha() {
        for scheme in [WeightScheme::Multinomial, WeightScheme::DoubleOrNothing, WeightScheme::Poisson] {
            let mut prev = usize::MAX;
            for alpha in [0.001, 0.01, 0.025, 0.05, 0.2] {
                let n = finite_length_min_n(scheme, alpha).unwrap();
                assert!(n <= prev, "{scheme} alpha={alpha}");
                prev = n;
            }
        }
    }

    #[test]
    fn binom_tail_pins() {
        assert_abs_diff_eq!(binom_tail(2000, 1.0 / 64.0, 50).unwrap(), 0.0011, epsilon = 1e-4);
        let tiny = binom_tail(2000, 1.0 / 625.0, 50).unwrap();
        assert!(tiny > 1e-42 && tiny < 2e-41, "{tiny}");
        assert_eq!(binom_tail(10, 0.3, 0).unwrap(), 1.0);
        assert_eq!(binom_tail(10, 0.3, 11).unwrap(), 0.0);
        // complement identity against the lower tail
        let upper = binom_tail(30, 0.4, 13).unwrap();
        let lower: f64 = (0..13).map(|j| {
            let n = 30.0;
            let jf = j as f64;
            (ln_gamma(n + 1.0) - ln_gamma(jf + 1.0) - ln_gamma(n - jf + 1.0)
                + jf * 0.4f64.ln()
                + (n - jf) * 0.6f64.ln())
            .exp()
        }).sum();
        assert_abs_diff_eq!(upper + lower, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_t_distribution_two_points() {
        let d = exact_multinomial_t_distribution(&[0.0, 1.0]).unwrap();
        assert_eq!(d.atoms.len(), 3);
        assert_abs_diff_eq!(d.probability_of(f64::NEG_INFINITY), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probability_of(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probability_of(f64::INFINITY), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn exact_t_distribution_counts_and_total() {
        // C(2n-1, n) vectors, total probability 1, all-ones vector has
        // probability n!/n^n folded into the t = 0 atom
        let x = [0.1, 1.7, 2.9, 4.3, 8.9];
        let d = exact_multinomial_t_distribution(&x).unwrap();
        assert!((d.total_probability() - 1.0).abs() < 1e-12);
        let c_2n1_n = 126.0; // C(9, 5)
        assert!(d.atoms.len() <= c_2n1_n as usize);
        let sigma_zero: f64 = d.probability_of(f64::NEG_INFINITY) + d.probability_of(f64::INFINITY);
        assert_abs_diff_eq!(sigma_zero, prob_sigma_star_zero(5), epsilon = 1e-15);
        assert!(exact_multinomial_t_distribution(&[0.0; 13]).is_err());
    }

    #[test]
    fn exact_t_distribution_matches_sampler_for_small_n() {
        // oracle equivalence at moderate B; the acceptance suite runs the
        // full-precision version
        let x = [0.3, 1.1, 2.3, 5.0];
        let d = exact_multinomial_t_distribution(&x).unwrap();
        let mut rng = StreamKey::new(404).tag("tv").rng();
        let ts = t_star_sample(WeightScheme::Multinomial, &x, 200_000, &mut rng).unwrap();
        let tv = d.tv_distance_to_sample(&ts);
        assert!(tv < 0.02, "tv = {tv}");
    }

    #[test]
    fn second_order_check_beta_scheme() {
        let c = second_order_check(WeightScheme::ScaledBeta { a: 0.5 }, 50, 200_000, 7).unwrap();
        // mu3 = 5: the 1/n term of E(W^2) vanishes
        assert_abs_diff_eq!(c.e_w2_pred, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.e_w3_pred, 5.0 + 3.0 / 50.0, epsilon = 1e-12);
        assert!((c.e_w2_hat - c.e_w2_pred).abs() < 3.0 * c.se_w2 + 10.0 / 2500.0);
        assert!((c.e_w3_hat - c.e_w3_pred).abs() < 3.0 * c.se_w3 + 100.0 / 50f64.powf(1.5));
    }

    #[test]
    fn second_order_check_rejects_zero_atom_schemes() {
        assert!(second_order_check(WeightScheme::Poisson, 20, 100, 1).is_err());
        assert!(second_order_check(WeightScheme::Multinomial, 20, 100, 1).is_err());
    }

    #[test]
    fn beta_inverse_moment_matches_quadrature() {
        // independent check by adaptive Simpson on the substituted integrand
        let (a, s) = (0.5, 1.0 / 3.0);
        let (b, _, _) = scaled_beta_params(a).unwrap();
        let closed = beta_inverse_moment(a, b, s);
        // substitute v = u^(1/(a-s)) to remove the singularity at zero:
        // integral becomes const * (1 - u^(1/(a-s)))^(b-1) du / B(a, b)
        let power = 1.0 / (a - s);
        let f = |u: f64| (1.0 - u.powf(power)).powf(b - 1.0);
        let mut sum = 0.0;
        let m = 200_001usize;
        // composite Simpson on (0, 1)
        let h = 1.0 / (m - 1) as f64;
        for i in 0..m {
            let u = (i as f64 * h).min(1.0 - 1e-12).max(1e-12);
            let wgt = if i == 0 || i == m - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += wgt * f(u);
        }
        let integral = sum * h / 3.0 * power;
        let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
        let quad = integral / ln_beta.exp();
        assert_abs_diff_eq!(closed, quad, epsilon = 1e-4 * closed);
    }

    #[test]
    fn two_value_bound_dominates_monte_carlo() {
        let (n1, n) = (3usize, 6usize);
        let bound = two_value_finiteness_bound(n1, n, 0.5).unwrap();
        assert!(bound.is_finite());
        let x = [7.0, 7.0, 7.0, -2.0, -2.0, -2.0];
        let mut rng = StreamKey::new(55).tag("bound").rng();
        let ts = t_star_sample(WeightScheme::ScaledBeta { a: 0.5 }, &x, 1_000_000, &mut rng).unwrap();
        let mean_sq = ts.iter().map(|t| t * t).sum::<f64>() / ts.len() as f64;
        assert!(mean_sq <= bound, "E(t^2) = {mean_sq} > bound = {bound}");
    }

    #[test]
    fn two_value_bound_unavailable_below_group_size() {
        assert_eq!(two_value_finiteness_bound(2, 6, 0.5).unwrap(), f64::INFINITY);
        assert!(two_value_finiteness_bound(0, 6, 0.5).is_err());
        assert!(two_value_finiteness_bound(6, 6, 0.5).is_err());
    }
}
