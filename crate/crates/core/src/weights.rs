//! Pseudo-count (resampling weight) schemes.
//!
//! Each scheme describes the joint law of a vector of nonnegative
//! pseudo-counts `v_1..v_n` with unit mean. Normalizing, `w_i = v_i / sum(v)`,
//! turns one draw into a set of bootstrap weights. The IID schemes all have
//! unit variance; the multinomial scheme reproduces ordinary with-replacement
//! resampling.
//!
//! Draws from IID schemes with an atom at zero can come out all-zero. Such
//! vectors are discarded and redrawn, so every returned vector has a positive
//! total and the counts stay exchangeable.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, LogNormal, Poisson};

use crate::error::{Error, Result};

/// First beta parameter of the named `beta` scheme.
pub const BETA_SCHEME_A: f64 = 0.5;
/// First beta parameter of the `power` scheme (gives second parameter 1).
pub const POWER_SCHEME_A: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Give up redrawing all-zero vectors after this many attempts. The discard
/// probability per draw is `prob_zero^n`, so hitting the cap means the
/// scheme or `n` is misconfigured, not bad luck.
const ALL_ZERO_RETRY_CAP: usize = 1_000_000;

/// A pseudo-count law for bootstrap weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// Ordinary bootstrap: counts of `n` uniform index draws.
    Multinomial,
    /// Simple random half-sample; selected points get count 2.
    HalfSample,
    /// Unit exponential counts (the Bayesian bootstrap).
    Exponential,
    /// Mean-one Poisson counts.
    Poisson,
    /// `A * Beta(a, b)` counts with `b`, `A` chosen for mean 1, variance 1.
    ScaledBeta { a: f64 },
    /// Scaled beta with second parameter 1; density is a pure power of `v`.
    Power,
    /// Two-point law at `(3 ± sqrt 5)/2` with unit mean, variance and
    /// third central moment.
    Mammen,
    /// Counts uniform on `{0, 2}`.
    DoubleOrNothing,
    /// `exp(N(-ln2/2, ln2))` counts; unit mean and variance, heavy tails.
    Lognormal,
}

/// Analytic moment metadata for one scheme at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub prob_zero: f64,
}

/// Parameters of the mean-1 variance-1 scaled beta family.
///
/// For `0 < a < 1` the law `A * Beta(a, b)` with `b = (a^2+a)/(1-a)` and
/// `A = 2/(1-a)` has mean 1, variance 1 and skewness `2a`.
pub fn scaled_beta_params(a: f64) -> Result<(f64, f64, f64)> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!(
            "scaled beta needs a in (0,1), got {a}; b = (a^2+a)/(1-a) would leave (0,inf)"
        )));
    }
    let b = (a * a + a) / (1.0 - a);
    let scale = 2.0 / (1.0 - a);
    Ok((b, scale, 2.0 * a))
}

impl WeightScheme {
    /// Parse one of the scheme names: `multinomial`, `halfsample`,
    /// `exponential`, `poisson`, `beta`, `power`, `mammen`, `don`,
    /// `lognormal`, or `beta(a=<real>)`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        let scheme = match name {
            "multinomial" => WeightScheme::Multinomial,
            "halfsample" => WeightScheme::HalfSample,
            "exponential" => WeightScheme::Exponential,
            "poisson" => WeightScheme::Poisson,
            "beta" => WeightScheme::ScaledBeta { a: BETA_SCHEME_A },
            "power" => WeightScheme::Power,
            "mammen" => WeightScheme::Mammen,
            "don" => WeightScheme::DoubleOrNothing,
            "lognormal" => WeightScheme::Lognormal,
            _ => {
                if let Some(inner) = name.strip_prefix("beta(a=").and_then(|s| s.strip_suffix(')')) {
                    let a: f64 = inner
                        .parse()
                        .map_err(|_| Error::Config(format!("bad beta parameter in `{name}`")))?;
                    scaled_beta_params(a).map_err(|e| Error::Config(e.to_string()))?;
                    WeightScheme::ScaledBeta { a }
                } else {
                    return Err(Error::Config(format!("unknown weight scheme `{name}`")));
                }
            }
        };
        Ok(scheme)
    }

    /// Canonical name; inverse of [`WeightScheme::parse`].
    pub fn name(&self) -> String {
        match self {
            WeightScheme::Multinomial => "multinomial".into(),
            WeightScheme::HalfSample => "halfsample".into(),
            WeightScheme::Exponential => "exponential".into(),
            WeightScheme::Poisson => "poisson".into(),
            WeightScheme::ScaledBeta { a } if *a == BETA_SCHEME_A => "beta".into(),
            WeightScheme::ScaledBeta { a } => format!("beta(a={a})"),
            WeightScheme::Power => "power".into(),
            WeightScheme::Mammen => "mammen".into(),
            WeightScheme::DoubleOrNothing => "don".into(),
            WeightScheme::Lognormal => "lognormal".into(),
        }
    }

    /// All named schemes, in the order used for reports.
    pub fn all_named() -> Vec<WeightScheme> {
        vec![
            WeightScheme::Multinomial,
            WeightScheme::HalfSample,
            WeightScheme::Exponential,
            WeightScheme::Poisson,
            WeightScheme::ScaledBeta { a: BETA_SCHEME_A },
            WeightScheme::Power,
            WeightScheme::Mammen,
            WeightScheme::DoubleOrNothing,
            WeightScheme::Lognormal,
        ]
    }

    /// Whether the counts are independent across observations.
    pub fn is_iid(&self) -> bool {
        !matches!(self, WeightScheme::Multinomial | WeightScheme::HalfSample)
    }

    /// Analytic mean/variance/skewness of a single count, and its
    /// probability of being exactly zero. For the joint schemes these
    /// depend on `n`; skewness needs `n >= 2` there.
    pub fn moments(&self, n: usize) -> SchemeMoments {
        let nf = n as f64;
        match self {
            WeightScheme::Multinomial => SchemeMoments {
                mean: 1.0,
                variance: 1.0 - 1.0 / nf,
                skewness: (1.0 - 2.0 / nf) / (1.0 - 1.0 / nf).sqrt(),
                prob_zero: (1.0 - 1.0 / nf).powi(n as i32),
            },
            WeightScheme::HalfSample => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 0.0,
                prob_zero: 0.5,
            },
            WeightScheme::Exponential => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 2.0,
                prob_zero: 0.0,
            },
            WeightScheme::Poisson => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 1.0,
                prob_zero: (-1.0f64).exp(),
            },
            WeightScheme::ScaledBeta { a } => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 2.0 * a,
                prob_zero: 0.0,
            },
            WeightScheme::Power => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 2.0 * POWER_SCHEME_A,
                prob_zero: 0.0,
            },
            WeightScheme::Mammen => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 1.0,
                prob_zero: 0.0,
            },
            WeightScheme::DoubleOrNothing => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 0.0,
                prob_zero: 0.5,
            },
            WeightScheme::Lognormal => SchemeMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 4.0,
                prob_zero: 0.0,
            },
        }
    }

    /// Raw moment `E(v^k)` of a single count for the IID schemes.
    ///
    /// Joint schemes are rejected: their counts are exchangeable but not
    /// independent, and the callers (moment-expansion checks) need IID laws.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        let beta_raw = |a: f64, k: u32| -> f64 {
            let (b, scale, _) = scaled_beta_params(a).expect("validated");
            let mut m = 1.0;
            for j in 0..k {
                m *= (a + j as f64) / (a + b + j as f64);
            }
            scale.powi(k as i32) * m
        };
        match self {
            WeightScheme::Exponential => Ok((1..=k).map(|j| j as f64).product()),
            WeightScheme::Poisson => {
                // E(v^k) for Pois(1) is the k-th Bell number:
                // B_m = sum_j C(m-1, j) B_j.
                let mut bell = vec![0.0f64; (k + 1) as usize];
                bell[0] = 1.0;
                let mut row: Vec<f64> = vec![1.0];
                for m in 1..=k as usize {
                    bell[m] = row.iter().zip(&bell[..m]).map(|(c, b)| c * b).sum();
                    let mut next = vec![1.0; m + 1];
                    for j in 1..m {
                        next[j] = row[j - 1] + row[j];
                    }
                    row = next;
                }
                Ok(bell[k as usize])
            }
            WeightScheme::ScaledBeta { a } => Ok(beta_raw(*a, k)),
            WeightScheme::Power => Ok(beta_raw(POWER_SCHEME_A, k)),
            WeightScheme::Mammen => {
                let (small, large, p_small) = mammen_atoms();
                Ok(p_small * small.powi(k as i32) + (1.0 - p_small) * large.powi(k as i32))
            }
            WeightScheme::Lognormal => {
                // exp(N(mu, s^2)) has E(v^k) = exp(k mu + k^2 s^2 / 2) = 2^(k(k-1)/2).
                Ok(2.0f64.powi((k * (k - 1) / 2) as i32))
            }
            WeightScheme::DoubleOrNothing => Ok(0.5 * 2.0f64.powi(k as i32)),
            WeightScheme::Multinomial | WeightScheme::HalfSample => Err(Error::Domain(format!(
                "raw_moment: {} counts are not IID",
                self.name()
            ))),
        }
    }

    /// Build a reusable sampler for vectors of length `n`.
    pub fn sampler(&self, n: usize) -> Result<PseudoCountSampler> {
        PseudoCountSampler::new(*self, n)
    }
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// Support points and lower-atom probability of the Mammen two-point law.
fn mammen_atoms() -> (f64, f64, f64) {
    let r5 = 5.0f64.sqrt();
    ((3.0 - r5) / 2.0, (3.0 + r5) / 2.0, 0.5 + 0.5 / r5)
}

enum SamplerKind {
    Multinomial,
    HalfSample { index_scratch: Vec<usize> },
    Exponential,
    Poisson(Poisson<f64>),
    ScaledBeta { beta: Beta<f64>, scale: f64 },
    Mammen { small: f64, large: f64, p_small: f64 },
    DoubleOrNothing,
    Lognormal(LogNormal<f64>),
}

/// Reusable sampler for one `(scheme, n)` pair.
///
/// All randomness comes from the caller's generator, so distinct streams can
/// be used concurrently; the sampler itself only holds scratch space.
pub struct PseudoCountSampler {
    scheme: WeightScheme,
    n: usize,
    kind: SamplerKind,
}

impl PseudoCountSampler {
    pub fn new(scheme: WeightScheme, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("pseudo-count vectors need n >= 1".into()));
        }
        let kind = match scheme {
            WeightScheme::Multinomial => SamplerKind::Multinomial,
            WeightScheme::HalfSample => SamplerKind::HalfSample { index_scratch: (0..n).collect() },
            WeightScheme::Exponential => SamplerKind::Exponential,
            WeightScheme::Poisson => {
                SamplerKind::Poisson(Poisson::new(1.0).expect("Poisson(1) is valid"))
            }
            WeightScheme::ScaledBeta { a } => {
                let (b, scale, _) = scaled_beta_params(a)?;
                SamplerKind::ScaledBeta {
                    beta: Beta::new(a, b).expect("validated parameters"),
                    scale,
                }
            }
            WeightScheme::Power => {
                let (b, scale, _) = scaled_beta_params(POWER_SCHEME_A).expect("fixed parameter");
                SamplerKind::ScaledBeta {
                    beta: Beta::new(POWER_SCHEME_A, b).expect("fixed parameters"),
                    scale,
                }
            }
            WeightScheme::Mammen => {
                let (small, large, p_small) = mammen_atoms();
                SamplerKind::Mammen { small, large, p_small }
            }
            WeightScheme::DoubleOrNothing => SamplerKind::DoubleOrNothing,
            WeightScheme::Lognormal => {
                let ln2 = std::f64::consts::LN_2;
                SamplerKind::Lognormal(
                    LogNormal::new(-0.5 * ln2, ln2.sqrt()).expect("valid lognormal"),
                )
            }
        };
        Ok(PseudoCountSampler { scheme, n, kind })
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Draw one pseudo-count vector into `out` (length `n`). The result
    /// always has a positive total: all-zero IID draws are discarded and
    /// redrawn, per the convention for atoms at zero.
    pub fn sample_into(&mut self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<()> {
        assert_eq!(out.len(), self.n, "output buffer length must equal n");
        let n = self.n;
        for _ in 0..ALL_ZERO_RETRY_CAP {
            match &mut self.kind {
                SamplerKind::Multinomial => {
                    out.fill(0.0);
                    for _ in 0..n {
                        out[rng.random_range(0..n)] += 1.0;
                    }
                }
                SamplerKind::HalfSample { index_scratch } => {
                    let k = if n % 2 == 0 {
                        n / 2
                    } else if rng.random::<bool>() {
                        (n + 1) / 2
                    } else {
                        (n - 1) / 2
                    };
                    out.fill(0.0);
                    // partial Fisher-Yates: the first k entries become a
                    // uniform k-subset of 0..n
                    for (i, slot) in index_scratch.iter_mut().enumerate() {
                        *slot = i;
                    }
                    for j in 0..k {
                        let pick = j + rng.random_range(0..n - j);
                        index_scratch.swap(j, pick);
                        out[index_scratch[j]] = 2.0;
                    }
                }
                SamplerKind::Exponential => {
                    for slot in out.iter_mut() {
                        *slot = rng.sample(Exp1);
                    }
                }
                SamplerKind::Poisson(d) => {
                    for slot in out.iter_mut() {
                        *slot = d.sample(rng);
                    }
                }
                SamplerKind::ScaledBeta { beta, scale } => {
                    for slot in out.iter_mut() {
                        *slot = *scale * beta.sample(rng);
                    }
                }
                SamplerKind::Mammen { small, large, p_small } => {
                    for slot in out.iter_mut() {
                        *slot = if rng.random::<f64>() < *p_small { *small } else { *large };
                    }
                }
                SamplerKind::DoubleOrNothing => {
                    for slot in out.iter_mut() {
                        *slot = if rng.random::<bool>() { 2.0 } else { 0.0 };
                    }
                }
                SamplerKind::Lognormal(d) => {
                    for slot in out.iter_mut() {
                        *slot = d.sample(rng);
                    }
                }
            }
            if out.iter().any(|&v| v > 0.0) {
                return Ok(());
            }
        }
        Err(Error::Internal(format!(
            "pseudo-count sampler for {} drew {} all-zero vectors in a row",
            self.scheme.name(),
            ALL_ZERO_RETRY_CAP
        )))
    }
}

/// One draw of pseudo-counts, tagged with its scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoCountVector {
    pub counts: Vec<f64>,
    pub scheme: WeightScheme,
}

/// Weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedWeights {
    pub w: Vec<f64>,
}

/// Draw one pseudo-count vector of length `n`.
pub fn sample_pseudo_counts(
    scheme: WeightScheme,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PseudoCountVector> {
    let mut sampler = scheme.sampler(n)?;
    let mut counts = vec![0.0; n];
    sampler.sample_into(rng, &mut counts)?;
    Ok(PseudoCountVector { counts, scheme })
}

/// `w_i = v_i / sum(v)`. The sampler never emits a zero-total vector, so a
/// zero total here is a caller bug.
pub fn normalize(counts: &PseudoCountVector) -> Result<NormalizedWeights> {
    let mut w = counts.counts.clone();
    normalize_in_place(&mut w)?;
    Ok(NormalizedWeights { w })
}

/// In-place variant of [`normalize`] for hot loops.
pub fn normalize_in_place(v: &mut [f64]) -> Result<()> {
    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("cannot normalize counts with zero total".into()));
    }
    for x in v.iter_mut() {
        *x /= total;
    }
    Ok(())
}

/// Effective sample size `(sum v)^2 / sum v^2` of one count vector.
pub fn effective_sample_size(counts: &PseudoCountVector) -> f64 {
    let s: f64 = counts.counts.iter().sum();
    let s2: f64 = counts.counts.iter().map(|v| v * v).sum();
    s * s / s2
}

/// Analytic moment metadata for `scheme` at sample size `n`.
pub fn scheme_moments(scheme: WeightScheme, n: usize) -> SchemeMoments {
    scheme.moments(n)
}
