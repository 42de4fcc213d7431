//! Shared fixtures for the criterion benchmarks.

use boott_core::rng::StreamKey;
use boott_core::ChaCha8Rng;

pub use boott_core;

pub fn bench_rng(tag: &str) -> ChaCha8Rng {
    StreamKey::new(0xB0077).tag("bench").tag(tag).rng()
}

/// A fixed mildly skewed dataset of length `n`.
pub fn fixture_data(n: usize) -> Vec<f64> {
    let mut rng = bench_rng("fixture");
    let mut out = vec![0.0; n];
    boott_core::TestDistribution::Exponential.fill(&mut rng, &mut out);
    out
}
