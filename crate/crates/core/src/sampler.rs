//! One entry point for every `(process, method)` pair.
//!
//! [`Sampler::prepare`] does the per-configuration work once (Gram
//! factorization, circulant spectrum, kernel weights); [`Sampler::sample`]
//! is then cheap and can be shared across worker threads.

use serde::{Deserialize, Serialize};

use crate::batch::ReplicateBatch;
use crate::covmodels::CovarianceKernel;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lamperti::LampertiSampler;
use crate::rng::RngStream;
use crate::samplers::{
    cholesky_factor, fgn_spectrum, sample_bm, CholeskyFactor, CirculantSpectrum, EmbeddingPolicy, MovingAverage,
    DEFAULT_MAX_DOUBLINGS, DEFAULT_SUBSTEPS, DEFAULT_TRUNCATION,
};
use crate::types::{Hurst, Method, Process, SamplePath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub process: Process,
    pub method: Method,
    pub hurst: Hurst,
    pub truncation: f64,
    pub substeps: usize,
    pub embedding_cap: u32,
}

impl SamplerConfig {
    pub fn new(process: Process, method: Method, hurst: Hurst) -> Self {
        Self {
            process,
            method,
            hurst,
            truncation: DEFAULT_TRUNCATION,
            substeps: DEFAULT_SUBSTEPS,
            embedding_cap: DEFAULT_MAX_DOUBLINGS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.method.supports(self.process) {
            return Err(Error::InvalidCombination {
                process: self.process.to_string(),
                method: self.method.to_string(),
            });
        }
        Ok(())
    }
}

/// Embedding diagnostics surfaced in output metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingInfo {
    pub m: usize,
    pub clamped: usize,
    pub doublings: u32,
}

impl From<&CirculantSpectrum> for EmbeddingInfo {
    fn from(s: &CirculantSpectrum) -> Self {
        Self {
            m: s.m(),
            clamped: s.clamped_count(),
            doublings: s.doublings(),
        }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Brownian,
    Cholesky(CholeskyFactor),
    Circulant(CirculantSpectrum),
    MovingAverage(MovingAverage),
    Lamperti(LampertiSampler),
}

#[derive(Debug, Clone)]
pub struct Sampler {
    config: SamplerConfig,
    grid: GridSpec,
    engine: Engine,
}

impl Sampler {
    pub fn prepare(config: SamplerConfig, grid: GridSpec) -> Result<Self> {
        config.validate()?;
        let hurst = config.hurst;
        let engine = match config.method {
            Method::BmCumsum => Engine::Brownian,
            Method::Cholesky => {
                let kernel = CovarianceKernel::new(config.process, hurst);
                let times: Vec<f64> = grid.times().collect();
                Engine::Cholesky(cholesky_factor(&kernel.gram(&times), grid.n())?)
            }
            Method::DaviesHarte => Engine::Circulant(fgn_spectrum(grid, hurst, EmbeddingPolicy::davies_harte())?),
            Method::Circulant => Engine::Circulant(fgn_spectrum(
                grid,
                hurst,
                EmbeddingPolicy::wood_chan(config.embedding_cap),
            )?),
            Method::MaTruncated => {
                Engine::MovingAverage(MovingAverage::new(grid, hurst, config.truncation, config.substeps)?)
            }
            Method::Lamperti => Engine::Lamperti(LampertiSampler::new(
                config.process,
                hurst,
                grid,
                EmbeddingPolicy::wood_chan(config.embedding_cap),
            )?),
        };
        Ok(Self { config, grid, engine })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn embedding(&self) -> Option<EmbeddingInfo> {
        match &self.engine {
            Engine::Circulant(s) => Some(s.into()),
            Engine::Lamperti(l) => Some(l.spectrum().into()),
            _ => None,
        }
    }

    /// Effective hurst index of the produced paths (1/2 for Brownian motion).
    fn hurst(&self) -> Hurst {
        match self.config.process {
            Process::Bm => Hurst::BROWNIAN,
            _ => self.config.hurst,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> SamplePath {
        let grid = self.grid;
        match &self.engine {
            Engine::Brownian => sample_bm(grid, rng),
            Engine::Cholesky(factor) => {
                let values = factor.sample(rng);
                crate::samplers::path(grid, values, Method::Cholesky, self.config.process, self.hurst(), rng)
            }
            Engine::Circulant(spectrum) => {
                crate::samplers::fbm_from_fgn(spectrum, grid, self.config.hurst, self.config.method, rng)
            }
            Engine::MovingAverage(ma) => ma.sample(rng),
            Engine::Lamperti(l) => l.sample(rng),
        }
    }

    pub fn batch(&self, count: usize, base_seed: u64) -> ReplicateBatch {
        self.batch_range(0..count as u64, base_seed)
    }

    pub fn batch_range(&self, range: std::ops::Range<u64>, base_seed: u64) -> ReplicateBatch {
        ReplicateBatch::generate_range(range, base_seed, |rng| Ok(self.sample(rng)))
            .expect("prepared samplers are infallible")
    }
}
