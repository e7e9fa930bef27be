use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngStream;
use crate::types::{Hurst, Method, Process, SamplePath};

/// `M` independent replicates; path `i` always comes from `RngStream(base_seed, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateBatch {
    base_seed: u64,
    paths: Vec<SamplePath>,
}

impl ReplicateBatch {
    /// Generates `count` paths in parallel. The result is ordered by stream id,
    /// so it does not depend on scheduling.
    pub fn generate<F>(count: usize, base_seed: u64, sample: F) -> Result<Self>
    where
        F: Fn(&mut RngStream) -> Result<SamplePath> + Sync,
    {
        Self::generate_range(0..count as u64, base_seed, sample)
    }

    /// Paths for stream ids `range` only; used to stream large batches in chunks.
    pub fn generate_range<F>(range: std::ops::Range<u64>, base_seed: u64, sample: F) -> Result<Self>
    where
        F: Fn(&mut RngStream) -> Result<SamplePath> + Sync,
    {
        let paths = range
            .into_par_iter()
            .map(|i| sample(&mut RngStream::new(base_seed, i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { base_seed, paths })
    }

    /// Wraps existing paths, which must share one grid.
    pub fn from_paths(base_seed: u64, paths: Vec<SamplePath>) -> Result<Self> {
        let first = paths
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty batch".into()))?;
        if paths
            .iter()
            .any(|p| p.grid != first.grid || p.values.len() != first.grid.n())
        {
            return Err(Error::Mismatch("paths live on different grids".into()));
        }
        Ok(Self { base_seed, paths })
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn paths(&self) -> &[SamplePath] {
        &self.paths
    }

    pub fn into_paths(self) -> Vec<SamplePath> {
        self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn grid(&self) -> GridSpec {
        self.paths[0].grid
    }

    pub fn method(&self) -> Method {
        self.paths[0].method
    }

    pub fn process(&self) -> Process {
        self.paths[0].process
    }

    pub fn hurst(&self) -> Hurst {
        self.paths[0].hurst
    }

    /// Values at node `j` (1-based) across replicates.
    pub fn node(&self, j: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p.at(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::sample_bm;

    #[test]
    fn order_independent_of_generation_range() {
        let g = GridSpec::new(8).unwrap();
        let full = ReplicateBatch::generate(40, 3, |rng| Ok(sample_bm(g, rng))).unwrap();
        let tail = ReplicateBatch::generate_range(25..40, 3, |rng| Ok(sample_bm(g, rng))).unwrap();
        assert_eq!(&full.paths()[25..], tail.paths());
        for (i, p) in full.paths().iter().enumerate() {
            assert_eq!(p.stream_id, i as u64);
            assert_eq!(p, &sample_bm(g, &mut RngStream::new(3, i as u64)));
        }
    }

    #[test]
    fn from_paths_checks_grids() {
        let a = sample_bm(GridSpec::new(4).unwrap(), &mut RngStream::new(0, 0));
        let b = sample_bm(GridSpec::new(5).unwrap(), &mut RngStream::new(0, 1));
        assert!(ReplicateBatch::from_paths(0, vec![a, b]).is_err());
        assert!(ReplicateBatch::from_paths(0, vec![]).is_err());
    }
}
