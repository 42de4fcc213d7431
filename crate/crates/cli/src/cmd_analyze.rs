use clap::Args;

use boott_core::{
    binom_tail, distribution_moments, finite_length_min_n, fisher_hall_probs,
    hall_coverage_error, prob_sigma_star_zero, second_order_check, two_value_finiteness_bound,
    Error, HallMethod, Result, TestDistribution, WeightScheme,
};

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Smallest n with finite-length intervals (multinomial, don, poisson).
    #[arg(long)]
    pub thresholds: bool,
    /// Lower tail level for --thresholds.
    #[arg(long, default_value_t = 0.025)]
    pub alpha1: f64,
    /// Probabilities of near-degenerate multinomial resamples at this n.
    #[arg(long)]
    pub fisher_hall: Option<usize>,
    /// Pr(sigma* = 0) = n^(1-n) at this n.
    #[arg(long)]
    pub sigma_zero: Option<usize>,
    /// Binomial upper tail: needs --trials, --p, --k.
    #[arg(long)]
    pub binom_tail: bool,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Monte Carlo check of the normalized-weight moment expansions.
    #[arg(long)]
    pub second_order: bool,
    #[arg(long, default_value = "beta")]
    pub scheme: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mean-squared-t upper bound for two-value data: needs --n and --n1.
    #[arg(long)]
    pub finiteness_bound: bool,
    #[arg(long)]
    pub n1: Option<usize>,
    /// Scaled-beta parameter for --finiteness-bound.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Asymptotic coverage-error predictions for this distribution at --n.
    #[arg(long)]
    pub hall: Option<String>,
}

fn need<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing {flag}")))
}

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let mut ran_any = false;

    if args.thresholds {
        ran_any = true;
        println!("scheme,min_n_finite_length");
        for scheme in [WeightScheme::Multinomial, WeightScheme::DoubleOrNothing, WeightScheme::Poisson]
        {
            println!("{},{}", scheme.name(), finite_length_min_n(scheme, args.alpha1)?);
        }
    }

    if let Some(n) = args.fisher_hall {
        ran_any = true;
        let p = fisher_hall_probs(n);
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |p| format!("{p:.6e}"));
        println!("n = {n}");
        println!("Pr(top count = n-1)              = {}", fmt(p.top1));
        println!("Pr(top = n-2, rest split 1+1)    = {}", fmt(p.top2_split));
        println!("Pr(top = n-2, rest paired 2)     = {}", fmt(p.top2_pair));
    }

    if let Some(n) = args.sigma_zero {
        ran_any = true;
        println!("Pr(sigma* = 0 | distinct data, n = {n}) = {:.6e}", prob_sigma_star_zero(n));
    }

    if args.binom_tail {
        ran_any = true;
        let trials = need(args.trials, "--trials")?;
        let p = need(args.p, "--p")?;
        let k = need(args.k, "--k")?;
        println!("Pr(Bin({trials}, {p}) >= {k}) = {:.6e}", binom_tail(trials, p, k)?);
    }

    if args.second_order {
        ran_any = true;
        let scheme = WeightScheme::parse(&args.scheme)?;
        let n = need(args.n, "--n")?;
        let c = second_order_check(scheme, n, args.draws, args.seed)?;
        println!("scheme = {}, n = {n}, draws = {}", scheme.name(), args.draws);
        println!(
            "E(W^2): estimate = {:.6} (se {:.1e}), prediction = {:.6}",
            c.e_w2_hat, c.se_w2, c.e_w2_pred
        );
        println!(
            "E(W^3): estimate = {:.6} (se {:.1e}), prediction = {:.6}",
            c.e_w3_hat, c.se_w3, c.e_w3_pred
        );
    }

    if args.finiteness_bound {
        ran_any = true;
        let n = need(args.n, "--n")?;
        let n1 = need(args.n1, "--n1")?;
        let bound = two_value_finiteness_bound(n1, n, args.a)?;
        if bound.is_finite() {
            println!("E(t*^2) <= {bound:.6} for n1 = {n1} of n = {n}, beta a = {}", args.a);
        } else {
            println!("bound unavailable: min(n1, n - n1) <= 1/a");
        }
    }

    if let Some(dist_name) = &args.hall {
        ran_any = true;
        let dist = TestDistribution::parse(dist_name)?;
        let n = need(args.n, "--n")?;
        let (_, _, gamma, kappa) = distribution_moments(dist);
        println!("distribution = {}, n = {n}, skewness = {gamma:.4}, excess kurtosis = {kappa:.4}", dist.name());
        println!("method,predicted_coverage_error");
        for (name, method) in [
            ("normal", HallMethod::NormalTheory),
            ("student", HallMethod::Student),
            ("percentile", HallMethod::Percentile),
            ("boot_t", HallMethod::BootT),
            ("bca", HallMethod::Bca),
        ] {
            println!("{name},{:.6e}", hall_coverage_error(method, gamma, kappa, n));
        }
    }

    if !ran_any {
        return Err(Error::Config(
            "choose at least one of --thresholds, --fisher-hall, --sigma-zero, --binom-tail, \
             --second-order, --finiteness-bound, --hall"
                .into(),
        ));
    }
    Ok(())
}
