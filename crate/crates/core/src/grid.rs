use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `t_j = j / n`, `j = 1..=n`, on the unit interval.
///
/// The origin is not a node: every process simulated here vanishes at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid needs at least one node".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Time of node `j` (1-based). A single division, so `time(n) == 1.0` exactly.
    pub fn time(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n).map(move |j| self.time(j))
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub(crate) fn require_lags(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "this method needs n >= 2, got n = {}",
                self.n
            )));
        }
        Ok(())
    }
}
