//! Simulation of self-similar Gaussian processes.
//!
//! Brownian motion, fractional Brownian motion and sub-fractional Brownian
//! motion on the grid `{j/n}` by cumulative sums, exact Cholesky
//! factorization, Davies-Harte and Wood-Chan circulant embedding, a truncated
//! moving-average baseline, and a modified inverse Lamperti transform that
//! reduces any of these self-similar processes to a stationary sequence.
//! [`verify`] checks simulated batches against the exact covariances in
//! [`covmodels`].

pub mod batch;
pub mod covmodels;
pub mod error;
pub mod grid;
pub mod lamperti;
pub mod rng;
pub mod sampler;
pub mod samplers;
pub mod types;
pub mod verify;

pub use batch::ReplicateBatch;
pub use covmodels::{AcfKind, Autocovariance, CovarianceKernel, StationaryAcf};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use lamperti::{grid_map, simulate_lamperti, LampertiGridMap, LampertiSampler};
pub use rng::RngStream;
pub use sampler::{EmbeddingInfo, Sampler, SamplerConfig};
pub use samplers::{CholeskyFactor, CirculantSpectrum, EmbeddingPolicy};
pub use types::{Hurst, Method, Process, SamplePath};
pub use verify::{Verdict, VerificationReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
