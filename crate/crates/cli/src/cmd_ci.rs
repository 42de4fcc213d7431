use std::path::PathBuf;

use clap::Args;

use boott_core::rng::StreamKey;
use boott_core::{
    bca_interval, bootstrap_t_interval_with_tails, percentile_interval, report,
    student_t_interval, Error, IntervalSpec, Method, Result,
};

#[derive(Args)]
pub struct CiArgs {
    /// Data file: plain text, one real per line.
    pub data: PathBuf,
    /// Interval method: student, percentile, bca, or boott:<scheme>.
    #[arg(long, default_value = "student")]
    pub method: String,
    /// Two-sided confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 2000)]
    pub boot: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional CSV output (header + one row).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse one real per line, reporting the first offending line.
pub fn read_data_file(path: &PathBuf) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::Data(format!("{}:{}: not a number: `{line}`", path.display(), idx + 1))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Data(format!("{}: no data values", path.display())));
    }
    Ok(values)
}

pub fn run(args: CiArgs) -> Result<()> {
    let method = Method::parse(&args.method)?;
    let x = read_data_file(&args.data)?;
    let spec = IntervalSpec::two_sided(args.level, args.boot)?;
    let mut rng = StreamKey::new(args.seed).tag("ci").rng();

    let (ci, tails) = match method {
        Method::Student => (student_t_interval(&x, args.level)?, None),
        Method::Percentile => (percentile_interval(&x, &spec, &mut rng)?, None),
        Method::Bca => {
            let (ci, diag) = bca_interval(&x, &spec, &mut rng)?;
            println!(
                "bca diagnostics: z0 = {:.6}, a = {:.6}, adjusted levels = ({:.6}, {:.6})",
                diag.z0, diag.acceleration, diag.alpha_tilde_1, diag.alpha_tilde_2
            );
            (ci, None)
        }
        Method::BootT(scheme) => {
            let spec = spec.with_scheme(scheme);
            let (ci, tails) = bootstrap_t_interval_with_tails(&x, &spec, &mut rng)?;
            (ci, Some(tails))
        }
    };

    println!(
        "method = {}, n = {}, level = {}",
        method.name(),
        x.len(),
        args.level
    );
    println!("lower  = {}", report::format_real(ci.lower));
    println!("upper  = {}", report::format_real(ci.upper));
    println!("length = {}", report::format_real(ci.length()));
    if let Some(t) = tails {
        println!(
            "infinite t tails: {} low, {} high (of {} resamples){}",
            t.neg_inf,
            t.pos_inf,
            args.boot,
            if ci.is_finite() { "" } else { " -> interval has infinite length" }
        );
    }

    if let Some(out) = &args.out {
        let csv = format!(
            "method,n,level,lower,upper,length\n{},{},{},{},{},{}\n",
            method.name(),
            x.len(),
            args.level,
            report::format_real(ci.lower),
            report::format_real(ci.upper),
            report::format_real(ci.length()),
        );
        report::write_atomic(out, &csv)?;
    }
    Ok(())
}
