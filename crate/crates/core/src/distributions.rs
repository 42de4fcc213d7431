//! Sampling distributions for the coverage study, with analytic moments.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Geometric, LogNormal, Poisson, StandardNormal, StudentT};

use crate::error::{Error, Result};

/// Success probability of the geometric test case.
pub fn geometric_p() -> f64 {
    1.0 - (-1.0f64).exp()
}

/// The seven sampling laws of the coverage study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestDistribution {
    /// `N(0, 1)`: the benign symmetric case.
    Gaussian,
    /// `Exp(1)`: mild skewness.
    Exponential,
    /// Student t with 4 degrees of freedom: symmetric, infinite kurtosis.
    T4,
    /// `U(0, 1)`: light-tailed symmetric.
    Uniform01,
    /// `exp(N(0,1))`: severe skewness and kurtosis.
    Lognormal,
    /// `Pois(1)`: discrete, mildly skewed.
    Poisson1,
    /// Failures before the first success at `p = 1 - exp(-1)`:
    /// discrete and skewed.
    Geometric,
}

/// Analytic mean, variance, skewness, and excess kurtosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl TestDistribution {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "gaussian" => Ok(TestDistribution::Gaussian),
            "exponential" => Ok(TestDistribution::Exponential),
            "t4" => Ok(TestDistribution::T4),
            "uniform01" => Ok(TestDistribution::Uniform01),
            "lognormal" => Ok(TestDistribution::Lognormal),
            "poisson1" => Ok(TestDistribution::Poisson1),
            "geometric" => Ok(TestDistribution::Geometric),
            other => Err(Error::Config(format!("unknown distribution `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestDistribution::Gaussian => "gaussian",
            TestDistribution::Exponential => "exponential",
            TestDistribution::T4 => "t4",
            TestDistribution::Uniform01 => "uniform01",
            TestDistribution::Lognormal => "lognormal",
            TestDistribution::Poisson1 => "poisson1",
            TestDistribution::Geometric => "geometric",
        }
    }

    pub fn all() -> [TestDistribution; 7] {
        [
            TestDistribution::Gaussian,
            TestDistribution::Exponential,
            TestDistribution::T4,
            TestDistribution::Uniform01,
            TestDistribution::Lognormal,
            TestDistribution::Poisson1,
            TestDistribution::Geometric,
        ]
    }

    pub fn moments(&self) -> DistributionMoments {
        let e = std::f64::consts::E;
        match self {
            TestDistribution::Gaussian => DistributionMoments {
                mean: 0.0,
                variance: 1.0,
                skewness: 0.0,
                excess_kurtosis: 0.0,
            },
            TestDistribution::Exponential => DistributionMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 2.0,
                excess_kurtosis: 6.0,
            },
            TestDistribution::T4 => DistributionMoments {
                mean: 0.0,
                variance: 2.0,
                skewness: 0.0,
                excess_kurtosis: f64::INFINITY,
            },
            TestDistribution::Uniform01 => DistributionMoments {
                mean: 0.5,
                variance: 1.0 / 12.0,
                skewness: 0.0,
                excess_kurtosis: -1.2,
            },
            TestDistribution::Lognormal => DistributionMoments {
                mean: e.sqrt(),
                variance: (e - 1.0) * e,
                skewness: (e + 2.0) * (e - 1.0).sqrt(),
                excess_kurtosis: e.powi(4) + 2.0 * e.powi(3) + 3.0 * e.powi(2) - 6.0,
            },
            TestDistribution::Poisson1 => DistributionMoments {
                mean: 1.0,
                variance: 1.0,
                skewness: 1.0,
                excess_kurtosis: 1.0,
            },
            TestDistribution::Geometric => {
                let p = geometric_p();
                let q = 1.0 - p;
                DistributionMoments {
                    mean: q / p,
                    variance: q / (p * p),
                    skewness: (2.0 - p) / q.sqrt(),
                    excess_kurtosis: 6.0 + p * p / q,
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().mean
    }

    pub fn std_dev(&self) -> f64 {
        self.moments().variance.sqrt()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            TestDistribution::Gaussian => rng.sample(StandardNormal),
            TestDistribution::Exponential => rng.sample(Exp1),
            TestDistribution::T4 => StudentT::new(4.0).expect("valid dof").sample(rng),
            TestDistribution::Uniform01 => rng.random::<f64>(),
            TestDistribution::Lognormal => {
                LogNormal::new(0.0, 1.0).expect("valid lognormal").sample(rng)
            }
            TestDistribution::Poisson1 => Poisson::new(1.0).expect("valid mean").sample(rng),
            TestDistribution::Geometric => {
                Geometric::new(geometric_p()).expect("valid p").sample(rng) as f64
            }
        }
    }

    pub fn fill(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        // keep per-sample distribution objects out of the hot loop
        match self {
            TestDistribution::T4 => {
                let d = StudentT::new(4.0).expect("valid dof");
                for slot in out.iter_mut() {
                    *slot = d.sample(rng);
                }
            }
            TestDistribution::Lognormal => {
                let d = LogNormal::new(0.0, 1.0).expect("valid lognormal");
                for slot in out.iter_mut() {
                    *slot = d.sample(rng);
                }
            }
            TestDistribution::Poisson1 => {
                let d = Poisson::new(1.0).expect("valid mean");
                for slot in out.iter_mut() {
                    *slot = d.sample(rng);
                }
            }
            TestDistribution::Geometric => {
                let d = Geometric::new(geometric_p()).expect("valid p");
                for slot in out.iter_mut() {
                    *slot = d.sample(rng) as f64;
                }
            }
            _ => {
                for slot in out.iter_mut() {
                    *slot = self.sample(rng);
                }
            }
        }
    }
}

impl std::fmt::Display for TestDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Spec'd accessor: `(mu, sigma^2, gamma, kappa)`.
pub fn distribution_moments(dist: TestDistribution) -> (f64, f64, f64, f64) {
    let m = dist.moments();
    (m.mean, m.variance, m.skewness, m.excess_kurtosis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use approx::assert_abs_diff_eq;

    #[test]
    fn names_round_trip() {
        for d in TestDistribution::all() {
            assert_eq!(TestDistribution::parse(d.name()).unwrap(), d);
        }
        assert!(TestDistribution::parse("cauchy").is_err());
    }

    #[test]
    fn pinned_moment_values() {
        let (mu, var, gamma, kappa) = distribution_moments(TestDistribution::Gaussian);
        assert_eq!((mu, var, gamma, kappa), (0.0, 1.0, 0.0, 0.0));

        let (_, _, gamma, kappa) = distribution_moments(TestDistribution::Lognormal);
        assert_abs_diff_eq!(gamma, 6.1849, epsilon = 5e-4);
        assert_abs_diff_eq!(kappa, 110.936, epsilon = 5e-3);

        let (mu, _, gamma, kappa) = distribution_moments(TestDistribution::Geometric);
        assert_abs_diff_eq!(gamma, 2.2552, epsilon = 5e-4);
        assert_abs_diff_eq!(kappa, 7.0862, epsilon = 5e-4);
        let p = geometric_p();
        assert_abs_diff_eq!(mu, (1.0 - p) / p, epsilon = 1e-15);

        assert_eq!(distribution_moments(TestDistribution::T4).3, f64::INFINITY);
    }

    // Monte Carlo moment check: mean and variance of each sampler within
    // five standard errors of the analytic values.
    #[test]
    fn samplers_match_analytic_moments() {
        let draws = 1_000_000usize;
        for dist in TestDistribution::all() {
            let mut rng = StreamKey::new(99).tag("dist-test").tag(dist.name()).rng();
            let m = dist.moments();
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..draws {
                let v = dist.sample(&mut rng);
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / draws as f64;
            let var = sum_sq / draws as f64 - mean * mean;
            // se of the mean
            let se_mean = m.variance.sqrt() / (draws as f64).sqrt();
            assert!(
                (mean - m.mean).abs() <= 5.0 * se_mean,
                "{dist}: mean {mean} vs {}",
                m.mean
            );
            // se of the variance needs the fourth moment; for T4 it is
            // infinite, so only require a loose relative agreement there
            if m.excess_kurtosis.is_finite() {
                let se_var = m.variance * ((m.excess_kurtosis + 2.0) / draws as f64).sqrt();
                assert!(
                    (var - m.variance).abs() <= 5.0 * se_var.max(1e-9),
                    "{dist}: var {var} vs {}",
                    m.variance
                );
            } else {
                assert!((var - m.variance).abs() <= 0.25 * m.variance, "{dist}: var {var}");
            }
        }
    }

    #[test]
    fn geometric_counts_failures_before_success() {
        // mean (1-p)/p ~ 0.582, support {0, 1, 2, ...}
        let mut rng = StreamKey::new(7).tag("geom").rng();
        let mut any_zero = false;
        for _ in 0..1000 {
            let v = TestDistribution::Geometric.sample(&mut rng);
            assert!(v >= 0.0 && v.fract() == 0.0);
            any_zero |= v == 0.0;
        }
        assert!(any_zero, "zero must be in the support");
    }
}
