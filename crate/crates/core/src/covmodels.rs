//! Exact covariance kernels and stationary autocovariances.
//!
//! Two self-similar kernels are provided: fractional Brownian motion and
//! sub-fractional Brownian motion. From them derive the autocovariance of
//! fractional Gaussian noise on the grid `{k/n}` and the autocovariances of
//! the stationary sequence `U(k/n) = n^{-H(k/n - 1)} X(n^{k/n - 1})` obtained
//! from either process by the log-time rescaling used in [`crate::lamperti`].
//!
//! The Lamperti autocovariances are evaluated in the variable
//! `tau = k ln(n) / n` with `expm1`/`ln_1p`, which keeps full precision both
//! for tiny lags and for the lags far beyond `n` that circulant doubling asks
//! for.

use serde::{Deserialize, Serialize};

use crate::types::{Hurst, Process};

/// `Cov(B^H(s), B^H(t)) = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_cov(s: f64, t: f64, hurst: Hurst) -> f64 {
    let two_h = 2.0 * hurst.get();
    0.5 * (t.abs().powf(two_h) + s.abs().powf(two_h) - (t - s).abs().powf(two_h))
}

/// `Cov(S^H(s), S^H(t)) = t^{2H} + s^{2H} - ((t+s)^{2H} + |t-s|^{2H}) / 2`.
pub fn sfbm_cov(s: f64, t: f64, hurst: Hurst) -> f64 {
    let two_h = 2.0 * hurst.get();
    t.powf(two_h) + s.powf(two_h) - 0.5 * ((t + s).powf(two_h) + (t - s).abs().powf(two_h))
}

/// Autocovariance of fractional Gaussian noise with step `1/n` at lag `k`.
pub fn fgn_acf(k: usize, n: usize, hurst: Hurst) -> f64 {
    let two_h = 2.0 * hurst.get();
    let scale = 0.5 * (-two_h * (n as f64).ln()).exp();
    let second_difference = match k {
        0 => 2.0,
        1 => 2f64.powf(two_h) - 2.0,
        _ => {
            // k^{2H} ((1 + 1/k)^{2H} + (1 - 1/k)^{2H} - 2)
            let kf = k as f64;
            let inv = 1.0 / kf;
            kf.powf(two_h) * ((two_h * inv.ln_1p()).exp_m1() + (two_h * (-inv).ln_1p()).exp_m1())
        }
    };
    scale * second_difference
}

fn log_lag(k: usize, n: usize) -> f64 {
    k as f64 * (n as f64).ln() / n as f64
}

/// Autocovariance of the rescaled stationary sequence `U` built from fBm.
///
/// `(n^{-Hk/n} + n^{Hk/n} - (n^{k/(2n)} - n^{-k/(2n)})^{2H}) / 2`, exactly 1 at lag 0.
pub fn lamperti_acf_fbm(k: usize, n: usize, hurst: Hurst) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let h = hurst.get();
    let tau = log_lag(k, n);
    let decay = (-tau).exp();
    // ln(1 - e^{-tau}) without cancellation at either end
    let ln_gap = if decay < 0.5 {
        (-decay).ln_1p()
    } else {
        (-(-tau).exp_m1()).ln()
    };
    0.5 * ((-h * tau).exp() + (h * tau).exp() * -(2.0 * h * ln_gap).exp_m1())
}

/// Autocovariance of the rescaled stationary sequence `U` built from sfBm.
///
/// `n^{-Hk/n} + n^{Hk/n} - ((n^{-k/(2n)} + n^{k/(2n)})^{2H} + |n^{-k/(2n)} - n^{k/(2n)}|^{2H}) / 2`,
/// exactly `2 - 2^{2H-1}` at lag 0.
pub fn lamperti_acf_sfbm(k: usize, n: usize, hurst: Hurst) -> f64 {
    let h = hurst.get();
    if k == 0 {
        return 2.0 - 2f64.powf(2.0 * h - 1.0);
    }
    let tau = log_lag(k, n);
    let decay = (-tau).exp();
    let bracket = -0.5 * ((2.0 * h * decay.ln_1p()).exp_m1() + (2.0 * h * (-decay).ln_1p()).exp_m1());
    (-h * tau).exp() + (h * tau).exp() * bracket
}

/// Covariance function of a zero-mean self-similar Gaussian process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceKernel {
    process: Process,
    hurst: Hurst,
}

impl CovarianceKernel {
    /// Brownian motion is represented as fBm with `H = 1/2`; its `hurst` argument is ignored.
    pub fn new(process: Process, hurst: Hurst) -> Self {
        match process {
            Process::Bm => Self {
                process: Process::Fbm,
                hurst: Hurst::BROWNIAN,
            },
            _ => Self { process, hurst },
        }
    }

    pub fn fbm(hurst: Hurst) -> Self {
        Self::new(Process::Fbm, hurst)
    }

    pub fn sfbm(hurst: Hurst) -> Self {
        Self::new(Process::Sfbm, hurst)
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn evaluate(&self, s: f64, t: f64) -> f64 {
        match self.process {
            Process::Sfbm => sfbm_cov(s, t, self.hurst),
            _ => fbm_cov(s, t, self.hurst),
        }
    }

    /// `Var X(t) = c t^{2H}`, with `c = 1` for fBm and `2 - 2^{2H-1}` for sfBm.
    pub fn variance(&self, t: f64) -> f64 {
        let h = self.hurst.get();
        let c = match self.process {
            Process::Sfbm => 2.0 - 2f64.powf(2.0 * h - 1.0),
            _ => 1.0,
        };
        c * t.powf(2.0 * h)
    }

    /// Row-major Gram matrix on `times`.
    pub fn gram(&self, times: &[f64]) -> Vec<f64> {
        let d = times.len();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let c = self.evaluate(times[i], times[j]);
                out[i * d + j] = c;
                out[j * d + i] = c;
            }
        }
        out
    }
}

/// A lag function `rho(k)` of a discretely sampled stationary sequence.
pub trait Autocovariance {
    fn rho(&self, lag: usize) -> f64;
}

impl<F: Fn(usize) -> f64> Autocovariance for F {
    fn rho(&self, lag: usize) -> f64 {
        self(lag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcfKind {
    Fgn,
    LampertiFbm,
    LampertiSfbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryAcf {
    pub kind: AcfKind,
    pub hurst: Hurst,
    pub n: usize,
}

impl StationaryAcf {
    pub fn new(kind: AcfKind, hurst: Hurst, n: usize) -> Self {
        Self { kind, hurst, n }
    }

    /// The rescaled sequence `U` for `process`; Brownian motion uses fBm at `H = 1/2`.
    pub fn lamperti(process: Process, hurst: Hurst, n: usize) -> Self {
        match process {
            Process::Sfbm => Self::new(AcfKind::LampertiSfbm, hurst, n),
            Process::Fbm => Self::new(AcfKind::LampertiFbm, hurst, n),
            Process::Bm => Self::new(AcfKind::LampertiFbm, Hurst::BROWNIAN, n),
        }
    }
}

impl Autocovariance for StationaryAcf {
    fn rho(&self, lag: usize) -> f64 {
        match self.kind {
            AcfKind::Fgn => fgn_acf(lag, self.n, self.hurst),
            AcfKind::LampertiFbm => lamperti_acf_fbm(lag, self.n, self.hurst),
            AcfKind::LampertiSfbm => lamperti_acf_sfbm(lag, self.n, self.hurst),
        }
    }
}
