use std::path::PathBuf;

use clap::Args;

use boott_core::{f_tilde, report, winkler_ci_score, Error, Result, ScoreConfig};

#[derive(Args)]
pub struct ScoreArgs {
    /// CSV of intervals, one `L,U` row per line (optional header).
    #[arg(long)]
    pub file: PathBuf,
    /// True mean to score against.
    #[arg(long)]
    pub mu: f64,
    /// Lower tail level of the Winkler score.
    #[arg(long, default_value_t = 0.025)]
    pub alpha1: f64,
    /// True standard deviation (enables the composite F column).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Sample size behind each interval (enables the composite F column).
    #[arg(long)]
    pub n: Option<usize>,
    /// Composite F exponent.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Write the per-row scores here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_intervals(path: &PathBuf) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if idx == 0 && fields.iter().any(|f| f.eq_ignore_ascii_case("l") || f.eq_ignore_ascii_case("lower")) {
            continue; // header row
        }
        if fields.len() < 2 {
            return Err(Error::Data(format!(
                "{}:{}: expected `L,U`",
                path.display(),
                idx + 1
            )));
        }
        let l = report::parse_real(fields[0])
            .map_err(|_| Error::Data(format!("{}:{}: bad lower `{}`", path.display(), idx + 1, fields[0])))?;
        let u = report::parse_real(fields[1])
            .map_err(|_| Error::Data(format!("{}:{}: bad upper `{}`", path.display(), idx + 1, fields[1])))?;
        if l > u {
            return Err(Error::Data(format!("{}:{}: L > U", path.display(), idx + 1)));
        }
        rows.push((l, u));
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no intervals", path.display())));
    }
    Ok(rows)
}

pub fn run(args: ScoreArgs) -> Result<()> {
    let score_config = ScoreConfig {
        alpha1: args.alpha1,
        beta: args.beta,
        lambda: 0.0,
        sigma: args.sigma.unwrap_or(1.0),
        n: args.n.unwrap_or(1),
    };
    score_config.validate()?;
    let rows = parse_intervals(&args.file)?;

    let mut out = String::from("lower,upper,winkler\n");
    let mut covered = 0usize;
    let mut infinite = 0usize;
    let mut winkler_sum = 0.0;
    let mut len_sq_sum = 0.0;
    for &(l, u) in &rows {
        let w = winkler_ci_score(l, u, args.mu, args.alpha1);
        out.push_str(&format!(
            "{},{},{}\n",
            report::format_real(l),
            report::format_real(u),
            report::format_real(w)
        ));
        if l <= args.mu && args.mu <= u {
            covered += 1;
        }
        if w.is_finite() {
            winkler_sum += w;
            len_sq_sum += (u - l) * (u - l);
        } else {
            infinite += 1;
        }
    }

    match &args.out {
        Some(path) => report::write_atomic(path, &out)?,
        None => print!("{out}"),
    }

    let total = rows.len();
    let finite = total - infinite;
    let coverage = covered as f64 / total as f64;
    println!("intervals: {total} ({infinite} infinite)");
    println!("coverage of mu = {}: {coverage:.4}", args.mu);
    if finite > 0 {
        println!("mean winkler (alpha1 = {}, finite only): {:.6}", args.alpha1, winkler_sum / finite as f64);
    }
    if let (Some(sigma), Some(n)) = (args.sigma, args.n) {
        let msl = if infinite > 0 { f64::INFINITY } else { len_sq_sum / total as f64 };
        println!(
            "f_tilde(beta = {}): {:.4}",
            args.beta,
            f_tilde(coverage, msl, n, sigma, args.beta)
        );
    }
    Ok(())
}
