//! Run manifests: one JSON line per output file, enough to reproduce it.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use boott_core::{report, Result};

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub master_seed: Option<u64>,
    pub config: serde_json::Value,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: Option<u64>, config: serde_json::Value, started: Instant) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            config,
            wall_time_s: started.elapsed().as_secs_f64(),
        }
    }

    pub fn line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// Echo the manifest and drop a sibling `<output>.manifest` file.
    pub fn emit(&self, output: &Path) -> Result<()> {
        let line = self.line();
        println!("manifest: {line}");
        let path = output.with_extension(format!(
            "{}manifest",
            output
                .extension()
                .map(|e| format!("{}.", e.to_string_lossy()))
                .unwrap_or_default()
        ));
        report::write_atomic(&path, &format!("{line}\n"))
    }
}
