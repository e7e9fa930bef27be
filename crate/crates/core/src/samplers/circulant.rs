//! Circulant embedding of stationary Gaussian sequences.
//!
//! A sequence of length `L` with autocovariance `rho` is embedded in a
//! circulant of size `m = 2(L - 1) 2^d` whose first row is
//! `c_j = rho(min(j, m - j))`. Eigenvalues are the unnormalized forward DFT
//! of that row, `lambda_k = sum_j c_j e^{-2 pi i jk/m}`. A draw is
//! `y = F(sqrt(lambda / m) * Z)` with `Z` complex standard normal; the real
//! and imaginary parts of `y` are independent and each has covariance
//! `c_{|i-j|}` on its first `L` coordinates.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::covmodels::{AcfKind, Autocovariance, StationaryAcf};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngStream;
use crate::types::{Hurst, Method, Process, SamplePath};

use super::{cumulative_sum, path};

/// Eigenvalues in `[-EIGENVALUE_TOLERANCE * max, 0)` count as roundoff and are clamped.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_DOUBLINGS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingPolicy {
    /// How many times `m` may be doubled past the minimal size.
    pub max_doublings: u32,
    /// Clamp every negative eigenvalue instead of failing once doubling is exhausted.
    pub clamp_all: bool,
}

impl EmbeddingPolicy {
    /// Grow `m` until the embedding is nonnegative up to roundoff.
    pub fn wood_chan(max_doublings: u32) -> Self {
        Self {
            max_doublings,
            clamp_all: false,
        }
    }

    /// Minimal `m`, negative eigenvalues set to zero.
    pub fn davies_harte() -> Self {
        Self {
            max_doublings: 0,
            clamp_all: true,
        }
    }
}

impl Default for EmbeddingPolicy {
    fn default() -> Self {
        Self::wood_chan(DEFAULT_MAX_DOUBLINGS)
    }
}

#[derive(Clone)]
pub struct CirculantSpectrum {
    len: usize,
    m: usize,
    eigenvalues: Vec<f64>,
    clamped: usize,
    doublings: u32,
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CirculantSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantSpectrum")
            .field("len", &self.len)
            .field("m", &self.m)
            .field("clamped", &self.clamped)
            .field("doublings", &self.doublings)
            .finish_non_exhaustive()
    }
}

impl CirculantSpectrum {
    /// Length of the embedded sequence.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    pub fn doublings(&self) -> u32 {
        self.doublings
    }

    /// Autocovariance actually realised by draws, after clamping.
    pub fn effective_acf(&self) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(l / self.m as f64, 0.0))
            .collect();
        self.fft.process(&mut buf);
        buf[..self.len].iter().map(|c| c.re).collect()
    }
}

fn embedding_row(acf: &impl Autocovariance, m: usize) -> Vec<Complex64> {
    (0..m).map(|j| Complex64::new(acf.rho(j.min(m - j)), 0.0)).collect()
}

/// Eigen-decomposition of the circulant embedding for a sequence of length `len`.
pub fn circulant_spectrum(acf: &impl Autocovariance, len: usize, policy: EmbeddingPolicy) -> Result<CirculantSpectrum> {
    if len < 2 {
        return Err(Error::InvalidParameter(format!(
            "circulant embedding needs a sequence of length >= 2, got {len}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let minimal = 2 * (len - 1);
    let mut doublings = 0;
    loop {
        let m = minimal << doublings;
        let fft = planner.plan_fft_forward(m);
        let mut row = embedding_row(acf, m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        debug_assert!(row.iter().all(|c| c.im.abs() <= 1e-12 * max.abs().max(1.0)));
        let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        let tol = EIGENVALUE_TOLERANCE * max;
        if min < -tol && !policy.clamp_all {
            if doublings < policy.max_doublings {
                doublings += 1;
                continue;
            }
            return Err(Error::EmbeddingFailure { m, min_eigenvalue: min });
        }
        let mut clamped = 0;
        let eigenvalues: Vec<f64> = row
            .iter()
            .map(|c| {
                if c.re < 0.0 {
                    clamped += 1;
                    0.0
                } else {
                    c.re
                }
            })
            .collect();
        let weights = eigenvalues.iter().map(|l| (l / m as f64).sqrt()).collect();
        return Ok(CirculantSpectrum {
            len,
            m,
            eigenvalues,
            clamped,
            doublings,
            weights,
            fft,
        });
    }
}

/// Two independent stationary sequences from a single complex synthesis.
pub fn circulant_sample_pair(spectrum: &CirculantSpectrum, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut buf: Vec<Complex64> = spectrum
        .weights
        .iter()
        .map(|&w| {
            let (a, b) = rng.gaussian_pair();
            Complex64::new(w * a, w * b)
        })
        .collect();
    spectrum.fft.process(&mut buf);
    let head = &buf[..spectrum.len];
    (head.iter().map(|c| c.re).collect(), head.iter().map(|c| c.im).collect())
}

/// One stationary sequence of length `spectrum.len()`.
pub fn circulant_sample(spectrum: &CirculantSpectrum, rng: &mut RngStream) -> Vec<f64> {
    circulant_sample_pair(spectrum, rng).0
}

/// Spectrum of fractional Gaussian noise with `grid.n()` increments.
pub fn fgn_spectrum(grid: GridSpec, hurst: Hurst, policy: EmbeddingPolicy) -> Result<CirculantSpectrum> {
    grid.require_lags()?;
    let acf = StationaryAcf::new(AcfKind::Fgn, hurst, grid.n());
    circulant_spectrum(&acf, grid.n(), policy)
}

pub(crate) fn fbm_from_fgn(
    spectrum: &CirculantSpectrum,
    grid: GridSpec,
    hurst: Hurst,
    method: Method,
    rng: &mut RngStream,
) -> SamplePath {
    let noise = circulant_sample(spectrum, rng);
    let values = cumulative_sum(&noise);
    path(grid, values, method, Process::Fbm, hurst, rng)
}

/// fBm by Davies-Harte: fGn embedded at the minimal size `2(n-1)`, negative
/// eigenvalues clamped, then summed.
pub fn davies_harte_fbm(grid: GridSpec, hurst: Hurst, rng: &mut RngStream) -> Result<SamplePath> {
    let spectrum = fgn_spectrum(grid, hurst, EmbeddingPolicy::davies_harte())?;
    Ok(fbm_from_fgn(&spectrum, grid, hurst, Method::DaviesHarte, rng))
}

/// fBm by Wood-Chan embedding of fGn with doubling.
pub fn circulant_fbm(grid: GridSpec, hurst: Hurst, policy: EmbeddingPolicy, rng: &mut RngStream) -> Result<SamplePath> {
    let spectrum = fgn_spectrum(grid, hurst, policy)?;
    Ok(fbm_from_fgn(&spectrum, grid, hurst, Method::Circulant, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(x: f64) -> Hurst {
        Hurst::new(x).unwrap()
    }

    #[test]
    fn white_noise_has_flat_unit_spectrum() {
        let acf = |k: usize| if k == 0 { 1.0 } else { 0.0 };
        let s = circulant_spectrum(&acf, 33, EmbeddingPolicy::default()).unwrap();
        assert_eq!(s.m(), 64);
        assert_eq!(s.clamped_count(), 0);
        assert!(s.eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn fgn_minimal_embedding_is_nonnegative() {
        let g = GridSpec::new(1024).unwrap();
        for x in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
            let s = fgn_spectrum(g, h(x), EmbeddingPolicy::default()).unwrap();
            assert_eq!(s.doublings(), 0);
            assert_eq!(s.m(), 2046);
            assert_eq!(s.clamped_count(), 0, "H={x}");
        }
    }

    // Squared-exponential ACF: positive definite on the integers, but its
    // minimal embedding wraps around too early.
    fn gaussian_acf(k: usize) -> f64 {
        (-(k as f64 / 3.0).powi(2)).exp()
    }

    // Not a valid autocovariance at all; no embedding size can fix it.
    fn invalid_acf(k: usize) -> f64 {
        [1.0, 0.9, 0.6, 0.25].get(k).copied().unwrap_or(0.0)
    }

    #[test]
    fn indefinite_minimal_embedding_is_doubled() {
        let strict = circulant_spectrum(&gaussian_acf, 5, EmbeddingPolicy::wood_chan(0));
        assert!(matches!(strict, Err(Error::EmbeddingFailure { m: 8, .. })));
        let s = circulant_spectrum(&gaussian_acf, 5, EmbeddingPolicy::default()).unwrap();
        assert_eq!(s.doublings(), 2);
        assert_eq!(s.m(), 32);
        assert!(s.eigenvalues().iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn cap_reports_most_negative_eigenvalue() {
        match circulant_spectrum(&invalid_acf, 5, EmbeddingPolicy::default()) {
            Err(Error::EmbeddingFailure { m, min_eigenvalue }) => {
                assert_eq!(m, 8 << DEFAULT_MAX_DOUBLINGS);
                assert!(min_eigenvalue < 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clamping_policy_never_fails() {
        let s = circulant_spectrum(&invalid_acf, 5, EmbeddingPolicy::davies_harte()).unwrap();
        assert_eq!(s.m(), 8);
        assert!(s.clamped_count() > 0);
    }

    #[test]
    fn effective_acf_reproduces_input_when_nothing_clamped() {
        let g = GridSpec::new(64).unwrap();
        let s = fgn_spectrum(g, h(0.8), EmbeddingPolicy::default()).unwrap();
        let acf = StationaryAcf::new(AcfKind::Fgn, h(0.8), 64);
        for (k, v) in s.effective_acf().iter().enumerate() {
            assert!((v - acf.rho(k)).abs() < 1e-14, "lag {k}");
        }
    }

    #[test]
    fn too_short_sequence_rejected() {
        let acf = |_k: usize| 1.0;
        assert!(circulant_spectrum(&acf, 1, EmbeddingPolicy::default()).is_err());
        assert!(davies_harte_fbm(GridSpec::new(1).unwrap(), h(0.5), &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn davies_harte_differences_reproduce_noise() {
        let g = GridSpec::new(50).unwrap();
        let spectrum = fgn_spectrum(g, h(0.3), EmbeddingPolicy::davies_harte()).unwrap();
        let noise = circulant_sample(&spectrum, &mut RngStream::new(3, 4));
        let p = davies_harte_fbm(g, h(0.3), &mut RngStream::new(3, 4)).unwrap();
        for (a, b) in p.increments().iter().zip(&noise) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    // Empirical autocovariance at lags 0..=4 of both halves of the synthesis.
    #[test]
    fn empirical_acf_matches_fgn() {
        let n = 64;
        let g = GridSpec::new(n).unwrap();
        let acf = StationaryAcf::new(AcfKind::Fgn, h(0.8), n);
        let spectrum = fgn_spectrum(g, h(0.8), EmbeddingPolicy::default()).unwrap();
        let m = 100_000;
        let mut sums = [[0.0; 5]; 2];
        for i in 0..m {
            let (re, im) = circulant_sample_pair(&spectrum, &mut RngStream::new(77, i));
            for (half, x) in [re, im].iter().enumerate() {
                for lag in 0..5 {
                    sums[half][lag] += x[0] * x[lag];
                }
            }
        }
        let r0 = acf.rho(0);
        for half in sums {
            for (lag, s) in half.iter().enumerate() {
                let est = s / m as f64;
                let se = ((r0 * r0 + acf.rho(lag).powi(2)) / m as f64).sqrt();
                assert!(
                    (est - acf.rho(lag)).abs() <= 4.0 * se,
                    "lag {lag}: {est} vs {}",
                    acf.rho(lag)
                );
            }
        }
    }

    #[test]
    fn white_noise_lag_one_is_uncorrelated() {
        let acf = |k: usize| if k == 0 { 1.0 } else { 0.0 };
        let s = circulant_spectrum(&acf, 16, EmbeddingPolicy::default()).unwrap();
        let m = 50_000;
        let mut c = 0.0;
        for i in 0..m {
            let x = circulant_sample(&s, &mut RngStream::new(8, i));
            c += x[3] * x[4];
        }
        assert!((c / m as f64).abs() < 4.0 / (m as f64).sqrt());
    }
}
