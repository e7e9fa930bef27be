//! Gaussian path samplers.
//!
//! Every sampler is a pure function of its parameters and an [`RngStream`]:
//! the same `(parameters, seed, stream id)` always yields the same path.

mod bm;
mod cholesky;
mod circulant;
mod moving_average;

pub use bm::sample_bm;
pub use cholesky::{cholesky_factor, cholesky_sample, CholeskyFactor, JITTER_LADDER};
pub(crate) use circulant::fbm_from_fgn;
pub use circulant::{
    circulant_fbm, circulant_sample, circulant_sample_pair, circulant_spectrum, davies_harte_fbm, fgn_spectrum,
    CirculantSpectrum, EmbeddingPolicy, DEFAULT_MAX_DOUBLINGS, EIGENVALUE_TOLERANCE,
};
pub use moving_average::{
    ma_truncated_fbm, normalizing_constant_ch, MovingAverage, DEFAULT_SUBSTEPS, DEFAULT_TRUNCATION,
};

use crate::grid::GridSpec;
use crate::rng::RngStream;
use crate::types::{Hurst, Method, Process, SamplePath};

pub(crate) fn path(
    grid: GridSpec,
    values: Vec<f64>,
    method: Method,
    process: Process,
    hurst: Hurst,
    rng: &RngStream,
) -> SamplePath {
    debug_assert_eq!(values.len(), grid.n());
    SamplePath {
        grid,
        values,
        method,
        process,
        hurst,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    }
}

pub(crate) fn cumulative_sum(increments: &[f64]) -> Vec<f64> {
    increments
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}
