//! Fixtures shared by the benchmarks.

use selfsim_core::{GridSpec, Hurst, Method, Process, Sampler, SamplerConfig};

pub const BENCH_HURST: f64 = 0.7;
pub const BENCH_SEED: u64 = 20240607;

/// A prepared fBm (or sfBm) sampler at the benchmark Hurst index.
pub fn prepared(process: Process, method: Method, n: usize) -> Sampler {
    let config = SamplerConfig::new(process, method, Hurst::new(BENCH_HURST).unwrap());
    Sampler::prepare(config, GridSpec::new(n).unwrap()).unwrap()
}
