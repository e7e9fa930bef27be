use crate::covmodels::CovarianceKernel;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngStream;
use crate::types::{Method, SamplePath};

use super::path;

/// Diagonal jitter attempted in order, in units of the largest diagonal entry.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// Lower-triangular `L` with `L L^T = A + jitter I`, rows packed one after another.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    packed: Vec<f64>,
    jitter: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Absolute jitter added to the diagonal (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.row(i)[j]
        }
    }

    /// `L z`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(z).map(|(l, x)| l * x).sum())
            .collect()
    }

    /// `L L^T` as a dense row-major matrix.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = self.row(i)[..=j].iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    /// Draws `L z` with `z` standard normal.
    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        rng.fill_standard_normal(&mut z);
        self.apply(&z)
    }
}

fn factor_once(gram: &[f64], n: usize, jitter: f64) -> std::result::Result<Vec<f64>, usize> {
    let mut packed = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let ri = i * (i + 1) / 2;
        for j in 0..=i {
            let rj = j * (j + 1) / 2;
            let dot: f64 = (0..j).map(|k| packed[ri + k] * packed[rj + k]).sum();
            if i == j {
                let d = gram[i * n + i] + jitter - dot;
                if !d.is_finite() || d <= 0.0 {
                    return Err(i);
                }
                packed[ri + i] = d.sqrt();
            } else {
                packed[ri + j] = (gram[i * n + j] - dot) / packed[rj + j];
            }
        }
    }
    Ok(packed)
}

/// Cholesky factorization of a symmetric row-major `n x n` matrix.
///
/// Walks [`JITTER_LADDER`] until the factorization succeeds; fails with the
/// offending pivot of the last attempt.
pub fn cholesky_factor(gram: &[f64], n: usize) -> Result<CholeskyFactor> {
    if gram.len() != n * n {
        return Err(Error::InvalidParameter(format!(
            "gram matrix has {} entries, expected {}",
            gram.len(),
            n * n
        )));
    }
    if gram.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("gram matrix has non-finite entries".into()));
    }
    let max_diag = (0..n).map(|i| gram[i * n + i].abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (gram[i * n + j], gram[j * n + i]);
            if (a - b).abs() > 1e-12 * max_diag.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!(
                    "gram matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut last_pivot = 0;
    let mut last_jitter = 0.0;
    for rel in JITTER_LADDER {
        let jitter = rel * max_diag;
        match factor_once(gram, n, jitter) {
            Ok(packed) => return Ok(CholeskyFactor { n, packed, jitter }),
            Err(pivot) => {
                last_pivot = pivot;
                last_jitter = jitter;
            }
        }
    }
    Err(Error::NotPositiveDefinite {
        pivot: last_pivot,
        jitter: last_jitter,
    })
}

/// Exact draw of `(X(1/n), ..., X(1))` from the kernel's Gram matrix.
pub fn cholesky_sample(kernel: &CovarianceKernel, grid: GridSpec, rng: &mut RngStream) -> Result<SamplePath> {
    let times: Vec<f64> = grid.times().collect();
    let factor = cholesky_factor(&kernel.gram(&times), grid.n())?;
    let values = factor.sample(rng);
    Ok(path(
        grid,
        values,
        Method::Cholesky,
        kernel.process(),
        kernel.hurst(),
        rng,
    ))
}
