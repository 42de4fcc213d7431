//! The coverage/length study: replicate datasets, common random data across
//! methods, deterministic parallelism.
//!
//! Replicates are processed in fixed blocks of [`BLOCK`] and block partials
//! are merged in block order, so the result is a pure function of the
//! configuration (master seed included) no matter how many worker threads
//! run the blocks. Within a replicate, every method sees the identical
//! dataset, and the size-`n+1` dataset extends the size-`n` one.

use rayon::prelude::*;

use rand_chacha::ChaCha8Rng;

use crate::distributions::TestDistribution;
use crate::error::{Error, Result};
use crate::intervals::{
    bca_from_means, boot_t_from_sampler, multinomial_means_into, percentile_from_means,
    student_t_interval, ConfidenceInterval, IntervalSpec, Method,
};
use crate::rng::StreamKey;
use crate::scoring::{f_tilde, winkler_ci_score};
use crate::stats::sample_summary;
use crate::weights::{PseudoCountSampler, WeightScheme};

/// Replicates per parallel work unit. Fixed so that results do not depend
/// on the number of worker threads.
const BLOCK: usize = 64;

/// Full description of one study run.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub distribution: TestDistribution,
    pub n_min: usize,
    pub n_max: usize,
    /// Number of replicate datasets (R).
    pub replicates: usize,
    /// Bootstrap resamples per interval (B).
    pub resamples: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub methods: Vec<Method>,
    pub master_seed: u64,
}

impl StudyConfig {
    /// The reference protocol: R = 10_000 replicates, B = 2000 resamples,
    /// sample sizes 2..=20, two-sided 95%.
    pub fn protocol(distribution: TestDistribution, methods: Vec<Method>, master_seed: u64) -> Self {
        StudyConfig {
            distribution,
            n_min: 2,
            n_max: 20,
            replicates: 10_000,
            resamples: 2000,
            alpha1: 0.025,
            alpha2: 0.975,
            methods,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "need 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.replicates == 0 || self.resamples == 0 {
            return Err(Error::Config("replicates and resamples must be positive".into()));
        }
        if !(self.alpha1 > 0.0 && self.alpha1 < self.alpha2 && self.alpha2 < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < alpha1 < alpha2 < 1, got {} and {}",
                self.alpha1, self.alpha2
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no interval methods selected".into()));
        }
        Ok(())
    }

    fn spec(&self) -> IntervalSpec {
        IntervalSpec { alpha1: self.alpha1, alpha2: self.alpha2, b: self.resamples, scheme: None }
    }
}

/// Aggregates for one `(method, n)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub coverage: f64,
    /// Mean interval length; `inf` as soon as one interval is infinite.
    pub mean_length: f64,
    /// Root mean squared length; `inf` when any interval is infinite.
    pub rmsl: f64,
    /// `rmsl / (sqrt(n) sigma)`.
    pub scaled_rmsl: f64,
    pub infinite_count: u64,
    /// Mean length over the finite intervals only.
    pub finite_mean_length: f64,
    /// RMS length over the finite intervals only.
    pub finite_rmsl: f64,
    /// Mean Winkler score at `alpha1`, over finite intervals.
    pub winkler_a1: f64,
    /// Mean Winkler score at tail level 0.005, over finite intervals.
    pub winkler_005: f64,
    pub f_tilde_1: f64,
}

/// Study output: one row per `(method, n)`, n ascending, methods in
/// configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub rows: Vec<(Method, StudyRow)>,
}

impl StudyResult {
    pub fn row(&self, method: &Method, n: usize) -> Option<&StudyRow> {
        self.rows.iter().find(|(m, row)| m == method && row.n == n).map(|(_, row)| row)
    }
}

/// Neumaier compensated sum; merging adds the partial's correction term, so
/// any fixed merge order gives a reproducible total.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.c += other.c;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CellAcc {
    total: u64,
    covered: u64,
    infinite: u64,
    // sums over finite-length intervals
    len: CompensatedSum,
    len_sq: CompensatedSum,
    winkler_a1: CompensatedSum,
    winkler_005: CompensatedSum,
}

impl CellAcc {
    fn record(&mut self, ci: &ConfidenceInterval, mu: f64, alpha1: f64) {
        self.total += 1;
        if ci.covers(mu) {
            self.covered += 1;
        }
        if ci.is_finite() {
            let len = ci.length();
            self.len.add(len);
            self.len_sq.add(len * len);
            self.winkler_a1.add(winkler_ci_score(ci.lower, ci.upper, mu, alpha1));
            self.winkler_005.add(winkler_ci_score(ci.lower, ci.upper, mu, 0.005));
        } else {
            self.infinite += 1;
        }
    }

    fn merge(&mut self, other: &CellAcc) {
        self.total += other.total;
        self.covered += other.covered;
        self.infinite += other.infinite;
        self.len.merge(&other.len);
        self.len_sq.merge(&other.len_sq);
        self.winkler_a1.merge(&other.winkler_a1);
        self.winkler_005.merge(&other.winkler_005);
    }

    fn finish(&self, n: usize, sigma: f64) -> StudyRow {
        let total = self.total as f64;
        let finite = (self.total - self.infinite) as f64;
        let coverage = self.covered as f64 / total;
        let finite_mean = if finite > 0.0 { self.len.value() / finite } else { f64::INFINITY };
        let finite_msl = if finite > 0.0 { self.len_sq.value() / finite } else { f64::INFINITY };
        let (mean_length, msl) = if self.infinite > 0 {
            (f64::INFINITY, f64::INFINITY)
        } else {
            (finite_mean, finite_msl)
        };
        let rmsl = msl.sqrt();
        StudyRow {
            n,
            coverage,
            mean_length,
            rmsl,
            scaled_rmsl: rmsl / ((n as f64).sqrt() * sigma),
            infinite_count: self.infinite,
            finite_mean_length: finite_mean,
            finite_rmsl: finite_msl.sqrt(),
            winkler_a1: if finite > 0.0 { self.winkler_a1.value() / finite } else { f64::INFINITY },
            winkler_005: if finite > 0.0 { self.winkler_005.value() / finite } else { f64::INFINITY },
            f_tilde_1: f_tilde(coverage, msl, n, sigma, 1.0),
        }
    }
}

/// Stream for the data of replicate `r`.
pub fn replicate_data_rng(master_seed: u64, r: usize) -> ChaCha8Rng {
    StreamKey::new(master_seed).tag("data").word(r as u64).rng()
}

/// Stream for the resamples of `method` on replicate `r` at sample size `n`.
pub fn bootstrap_rng(master_seed: u64, method_name: &str, r: usize, n: usize) -> ChaCha8Rng {
    StreamKey::new(master_seed).tag("boot").tag(method_name).word(r as u64).word(n as u64).rng()
}

/// The replicate panel: `r_count` rows of `n_max` draws each. The size-`n`
/// dataset of replicate `r` is the prefix `panel[r][..n]`.
pub fn sample_nested_panel(
    dist: TestDistribution,
    n_max: usize,
    r_count: usize,
    master_seed: u64,
) -> Vec<Vec<f64>> {
    (0..r_count)
        .map(|r| {
            let mut rng = replicate_data_rng(master_seed, r);
            let mut row = vec![0.0; n_max];
            dist.fill(&mut rng, &mut row);
            row
        })
        .collect()
}

/// Run the full study described by `config`.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let n_values: Vec<usize> = (config.n_min..=config.n_max).collect();
    let method_names: Vec<String> = config.methods.iter().map(|m| m.name()).collect();
    let n_blocks = config.replicates.div_ceil(BLOCK);
    let cells_per_block = n_values.len() * config.methods.len();

    let partials: Vec<Result<Vec<CellAcc>>> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * BLOCK;
            let hi = ((block + 1) * BLOCK).min(config.replicates);
            run_block(config, &n_values, &method_names, lo, hi, cells_per_block)
        })
        .collect();

    let mut cells = vec![CellAcc::default(); cells_per_block];
    for partial in partials {
        let partial = partial?;
        for (acc, p) in cells.iter_mut().zip(&partial) {
            acc.merge(p);
        }
    }

    let sigma = config.distribution.std_dev();
    let mut rows = Vec::with_capacity(cells_per_block);
    for (ni, &n) in n_values.iter().enumerate() {
        for (mi, method) in config.methods.iter().enumerate() {
            let cell = &cells[ni * config.methods.len() + mi];
            rows.push((*method, cell.finish(n, sigma)));
        }
    }
    Ok(StudyResult { config: config.clone(), rows })
}

/// Per-method scratch so the replicate loop never allocates.
enum MethodState {
    Student,
    /// percentile/BCa share the multinomial mean machinery
    Means { bca: bool, sampler: PseudoCountSampler, means: Vec<f64> },
    BootT { scheme: WeightScheme, sampler: PseudoCountSampler, ts: Vec<f64> },
}

fn run_block(
    config: &StudyConfig,
    n_values: &[usize],
    method_names: &[String],
    lo: usize,
    hi: usize,
    cells_per_block: usize,
) -> Result<Vec<CellAcc>> {
    let mu = config.distribution.mean();
    let level = config.alpha2 - config.alpha1;
    let base_spec = config.spec();
    let mut cells = vec![CellAcc::default(); cells_per_block];
    let mut data = vec![0.0; config.n_max];
    let mut counts = vec![0.0; config.n_max];

    // samplers per (n, method); rebuilt once per block
    let mut states: Vec<Vec<MethodState>> = n_values
        .iter()
        .map(|&n| {
            config
                .methods
                .iter()
                .map(|m| {
                    Ok(match m {
                        Method::Student => MethodState::Student,
                        Method::Percentile | Method::Bca => MethodState::Means {
                            bca: matches!(m, Method::Bca),
                            sampler: WeightScheme::Multinomial.sampler(n)?,
                            means: Vec::with_capacity(config.resamples),
                        },
                        Method::BootT(scheme) => MethodState::BootT {
                            scheme: *scheme,
                            sampler: scheme.sampler(n)?,
                            ts: Vec::with_capacity(config.resamples),
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    for r in lo..hi {
        let mut data_rng = replicate_data_rng(config.master_seed, r);
        config.distribution.fill(&mut data_rng, &mut data);

        for (ni, &n) in n_values.iter().enumerate() {
            let x = &data[..n];
            let summary = sample_summary(x)?;
            for (mi, method) in config.methods.iter().enumerate() {
                let ci = match &mut states[ni][mi] {
                    MethodState::Student => student_t_interval(x, level)?,
                    MethodState::Means { bca, sampler, means } => {
                        if summary.is_degenerate() {
                            ConfidenceInterval {
                                lower: summary.x_bar,
                                upper: summary.x_bar,
                                method: *method,
                            }
                        } else {
                            let mut rng =
                                bootstrap_rng(config.master_seed, &method_names[mi], r, n);
                            multinomial_means_into(
                                sampler,
                                x,
                                config.resamples,
                                &mut rng,
                                &mut counts[..n],
                                means,
                            )?;
                            if *bca {
                                bca_from_means(means, x, &summary, &base_spec)?.0
                            } else {
                                percentile_from_means(means, &base_spec)?
                            }
                        }
                    }
                    MethodState::BootT { scheme, sampler, ts } => {
                        let mut rng = bootstrap_rng(config.master_seed, &method_names[mi], r, n);
                        boot_t_from_sampler(
                            sampler,
                            x,
                            &summary,
                            &base_spec,
                            &mut rng,
                            &mut counts[..n],
                            ts,
                            Method::BootT(*scheme),
                        )?
                    }
                };
                cells[ni * config.methods.len() + mi].record(&ci, mu, config.alpha1);
            }
        }
    }
    Ok(cells)
}
