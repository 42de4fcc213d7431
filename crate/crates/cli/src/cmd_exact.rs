use std::path::PathBuf;

use clap::Args;

use boott_core::rng::StreamKey;
use boott_core::{
    exact_multinomial_t_distribution, exact_n2_width_factor, report, t_quantile, Error, Result,
    WeightScheme,
};

use crate::cmd_ci::read_data_file;

#[derive(Args)]
pub struct ExactArgs {
    /// Print n=2 interval width factors (width / |x1 - x2|).
    #[arg(long, conflicts_with = "t_dist")]
    pub n2_widths: bool,
    /// Schemes for --n2-widths: `all` (includes student and bca rows) or a
    /// comma-separated list.
    #[arg(long, default_value = "all")]
    pub schemes: String,
    /// Two-sided level of the width factor.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Monte Carlo draws per IID scheme.
    #[arg(long, default_value_t = 10_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enumerate the exact multinomial bootstrap-t law of this data file.
    #[arg(long)]
    pub t_dist: Option<PathBuf>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exact n=2 BCa width factor: with the tie rule the bias term vanishes and
/// the interval is an order-statistic pair of the three-atom mean law.
fn bca_n2_width_factor(level: f64) -> f64 {
    let alpha1 = (1.0 - level) / 2.0;
    // lower quantile is min(x) iff alpha1 <= Pr(mean = min) = 1/4
    if alpha1 <= 0.25 {
        1.0
    } else {
        0.0
    }
}

fn n2_width_rows(args: &ExactArgs) -> Result<String> {
    let mut rows = Vec::new();
    if args.schemes.trim() == "all" {
        for scheme in WeightScheme::all_named() {
            if scheme == WeightScheme::HalfSample {
                continue; // joint selection law; not a width-factor case
            }
            rows.push(Some(scheme));
        }
        rows.push(None); // student
        rows.push(None); // bca (after student, see below)
    } else {
        for name in args.schemes.split(',') {
            rows.push(Some(WeightScheme::parse(name)?));
        }
    }

    let mut out = String::from("method,width_factor\n");
    let mut named_extra = 0;
    for row in rows {
        match row {
            Some(scheme) => {
                let mut rng =
                    StreamKey::new(args.seed).tag("n2-widths").tag(&scheme.name()).rng();
                let w = exact_n2_width_factor(scheme, args.level, args.draws, &mut rng)?;
                out.push_str(&format!("boott:{},{}\n", scheme.name(), report::format_real(w)));
            }
            None => {
                if named_extra == 0 {
                    let q = t_quantile(1, 1.0 - (1.0 - args.level) / 2.0)?;
                    out.push_str(&format!("student,{}\n", report::format_real(q)));
                } else {
                    out.push_str(&format!(
                        "bca,{}\n",
                        report::format_real(bca_n2_width_factor(args.level))
                    ));
                }
                named_extra += 1;
            }
        }
    }
    Ok(out)
}

pub fn run(args: ExactArgs) -> Result<()> {
    let output = if args.n2_widths {
        n2_width_rows(&args)?
    } else if let Some(data_path) = &args.t_dist {
        let x = read_data_file(data_path)?;
        let dist = exact_multinomial_t_distribution(&x)?;
        let mut out = String::from("value,probability\n");
        for (value, prob) in &dist.atoms {
            out.push_str(&format!(
                "{},{}\n",
                report::format_real(*value),
                report::format_real(*prob)
            ));
        }
        out
    } else {
        return Err(Error::Config("choose --n2-widths or --t-dist <file>".into()));
    };

    match &args.out {
        Some(path) => report::write_atomic(path, &output)?,
        None => print!("{output}"),
    }
    Ok(())
}
