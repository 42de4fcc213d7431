use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use boott_core::{
    report, run_study, Error, Method, Result, StudyConfig, TestDistribution,
};

use crate::manifest::RunManifest;

/// Every method of the main comparison, in report order.
pub const DEFAULT_METHODS: &str = "boott:don,boott:poisson,boott:halfsample,boott:multinomial,\
boott:power,boott:beta,student,boott:exponential,bca,boott:mammen,boott:lognormal";

#[derive(Args)]
pub struct SimulateArgs {
    /// Sampling distribution: gaussian, exponential, t4, uniform01,
    /// lognormal, poisson1, geometric.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Replicate datasets (R).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Bootstrap resamples per interval (B).
    #[arg(long)]
    pub boot: Option<usize>,
    /// Two-sided confidence level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated method list.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Results CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional trajectory CSV path.
    #[arg(long)]
    pub trajectories: Option<PathBuf>,
    /// Worker thread cap (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Flat key=value config file; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// `key=value` lines, `#` comments. Keys mirror the long flag names.
fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>> {
    const KEYS: &[&str] = &[
        "dist", "n-min", "n-max", "reps", "boot", "alpha", "methods", "seed", "out",
        "trajectories", "threads",
    ];
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected key=value", path.display(), idx + 1))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "{}:{}: unknown config key `{key}`",
                path.display(),
                idx + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parsed<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("config key `{key}`: bad value `{raw}`"))),
    }
}

pub fn parse_method_list(list: &str) -> Result<Vec<Method>> {
    let methods = list
        .split(',')
        .map(|s| Method::parse(s))
        .collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(Error::Config("empty method list".into()));
    }
    Ok(methods)
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };

    // flags override the config file, which overrides the defaults
    let dist_name = args
        .dist
        .or_else(|| file.get("dist").cloned())
        .ok_or_else(|| Error::Config("missing --dist (or `dist` in the config file)".into()))?;
    let distribution = TestDistribution::parse(&dist_name)?;
    let n_min = args.n_min.or(parsed(&file, "n-min")?).unwrap_or(2);
    let n_max = args.n_max.or(parsed(&file, "n-max")?).unwrap_or(20);
    let replicates = args.reps.or(parsed(&file, "reps")?).unwrap_or(10_000);
    let resamples = args.boot.or(parsed(&file, "boot")?).unwrap_or(2000);
    let level = args.alpha.or(parsed(&file, "alpha")?).unwrap_or(0.95);
    let methods_list =
        args.methods.or_else(|| file.get("methods").cloned()).unwrap_or_else(|| {
            DEFAULT_METHODS.to_string()
        });
    let master_seed = args.seed.or(parsed(&file, "seed")?).unwrap_or(0);
    let out = args
        .out
        .or_else(|| file.get("out").map(PathBuf::from))
        .ok_or_else(|| Error::Config("missing --out (or `out` in the config file)".into()))?;
    let trajectories = args.trajectories.or_else(|| file.get("trajectories").map(PathBuf::from));
    let threads = args.threads.or(parsed(&file, "threads")?);

    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level must be in (0,1), got {level}")));
    }
    let alpha1 = (1.0 - level) / 2.0;
    let methods = parse_method_list(&methods_list)?;

    let config = StudyConfig {
        distribution,
        n_min,
        n_max,
        replicates,
        resamples,
        alpha1,
        alpha2: 1.0 - alpha1,
        methods,
        master_seed,
    };
    config.validate()?;

    if let Some(k) = threads {
        if k == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        // results do not depend on this; it only caps the worker pool
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }

    let result = run_study(&config)?;
    report::emit_results(&result, &out)?;
    if let Some(traj) = &trajectories {
        report::emit_trajectories(&result, traj)?;
    }

    let echo = serde_json::json!({
        "dist": distribution.name(),
        "n_min": n_min,
        "n_max": n_max,
        "reps": replicates,
        "boot": resamples,
        "alpha": level,
        "methods": result.config.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "out": out.display().to_string(),
        "trajectories": trajectories.as_ref().map(|p| p.display().to_string()),
    });
    RunManifest::new("simulate", Some(master_seed), echo, started).emit(&out)?;
    Ok(())
}
