use crate::grid::GridSpec;
use crate::rng::RngStream;
use crate::types::{Hurst, Method, Process, SamplePath};

use super::{cumulative_sum, path};

/// Brownian motion as the running sum of i.i.d. `N(0, 1/n)` increments.
pub fn sample_bm(grid: GridSpec, rng: &mut RngStream) -> SamplePath {
    let scale = grid.step().sqrt();
    let mut eps = vec![0.0; grid.n()];
    rng.fill_standard_normal(&mut eps);
    eps.iter_mut().for_each(|e| *e *= scale);
    let values = cumulative_sum(&eps);
    path(grid, values, Method::BmCumsum, Process::Bm, Hurst::BROWNIAN, rng)
}
