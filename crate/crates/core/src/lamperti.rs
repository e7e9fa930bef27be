//! Self-similar paths through a modified inverse Lamperti transform.
//!
//! For a zero-mean `H`-self-similar Gaussian process `X` on `[0, 1]` the
//! sequence `U(k/n) = n^{-H(k/n - 1)} X(n^{k/n - 1})`, `k = 0..=n`, is
//! stationary: the map `s -> n^{s-1}` sends the uniform grid onto a
//! geometric grid in `[1/n, 1]`, and self-similarity turns ratios of times
//! into lags. `U` is drawn by circulant embedding from its autocovariance
//! and mapped back with
//!
//! `X~(j/n) = (j/n)^H U(g(j)/n)`, `g(j) = floor(n (ln(j/n)/ln n + 1))`.
//!
//! Each `X~(j/n)` has exactly the law of `X(j/n)`. The joint law is only
//! approximate: `X~(j/n) = n^{H theta_j/n} X((j/n) n^{-theta_j/n})` with
//! `theta_j` the floor residual, so the pathwise error is governed by the
//! deterministic factors `|n^{H theta/n} - 1|` and `|n^{-theta/n} - 1|`,
//! both `O(ln n / n)`. [`error_bound_diagnostics`] reports them.

use serde::{Deserialize, Serialize};

use crate::batch::ReplicateBatch;
use crate::covmodels::{CovarianceKernel, StationaryAcf};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngStream;
use crate::samplers::{circulant_sample, circulant_spectrum, path, CirculantSpectrum, EmbeddingPolicy};
use crate::types::{Hurst, Method, Process, SamplePath};
use crate::verify::{Detail, Gate, VerificationReport};

/// Map arguments this close to an integer are snapped before flooring.
pub const SNAP_TOLERANCE: f64 = 1e-9;

/// Hölder exponent used when reporting the error-bound shape: `beta = H - 0.01`.
pub const HOLDER_EPSILON: f64 = 0.01;

/// Index `g(j)` into the stationary sequence and residual `theta(j)` for each node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LampertiGridMap {
    n: usize,
    index: Vec<usize>,
    residual: Vec<f64>,
}

impl LampertiGridMap {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `g(j)` for `j = 1..=n`.
    pub fn index(&self, j: usize) -> usize {
        self.index[j - 1]
    }

    /// `theta(j)` in `[0, 1)`.
    pub fn residual(&self, j: usize) -> f64 {
        self.residual[j - 1]
    }

    pub fn indices(&self) -> &[usize] {
        &self.index
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residual
    }
}

pub fn grid_map(n: usize) -> Result<LampertiGridMap> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid map needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let (index, residual) = (1..=n)
        .map(|j| {
            let arg = nf * ((j as f64 / nf).ln() / ln_n + 1.0);
            let nearest = arg.round();
            let arg = if (arg - nearest).abs() <= SNAP_TOLERANCE {
                nearest
            } else {
                arg
            };
            let g = arg.floor();
            (g as usize, arg - g)
        })
        .unzip();
    Ok(LampertiGridMap { n, index, residual })
}

/// Prepared state: grid map plus the spectrum of `U(0..=n)`.
#[derive(Debug, Clone)]
pub struct LampertiSampler {
    process: Process,
    hurst: Hurst,
    grid: GridSpec,
    map: LampertiGridMap,
    spectrum: CirculantSpectrum,
    scale: Vec<f64>,
}

impl LampertiSampler {
    pub fn new(process: Process, hurst: Hurst, grid: GridSpec, policy: EmbeddingPolicy) -> Result<Self> {
        if process == Process::Bm {
            return Err(Error::InvalidCombination {
                process: process.to_string(),
                method: Method::Lamperti.to_string(),
            });
        }
        let n = grid.n();
        let map = grid_map(n)?;
        let acf = StationaryAcf::lamperti(process, hurst, n);
        let spectrum = circulant_spectrum(&acf, n + 1, policy)?;
        let scale = grid.times().map(|t| t.powf(hurst.get())).collect();
        Ok(Self {
            process,
            hurst,
            grid,
            map,
            spectrum,
            scale,
        })
    }

    pub fn map(&self) -> &LampertiGridMap {
        &self.map
    }

    pub fn spectrum(&self) -> &CirculantSpectrum {
        &self.spectrum
    }

    /// The stationary sequence `U(0), U(1/n), ..., U(1)`.
    pub fn sample_stationary(&self, rng: &mut RngStream) -> Vec<f64> {
        circulant_sample(&self.spectrum, rng)
    }

    pub fn transform(&self, u: &[f64]) -> Vec<f64> {
        self.map
            .indices()
            .iter()
            .zip(&self.scale)
            .map(|(&g, s)| s * u[g])
            .collect()
    }

    pub fn sample(&self, rng: &mut RngStream) -> SamplePath {
        let u = self.sample_stationary(rng);
        let values = self.transform(&u);
        path(self.grid, values, Method::Lamperti, self.process, self.hurst, rng)
    }
}

/// One-shot Lamperti path for fBm or sfBm with the default embedding policy.
pub fn simulate_lamperti(process: Process, hurst: Hurst, grid: GridSpec, rng: &mut RngStream) -> Result<SamplePath> {
    Ok(LampertiSampler::new(process, hurst, grid, EmbeddingPolicy::default())?.sample(rng))
}

/// Empirical `Var X~(j/n)` against the target variance at each of `nodes`.
///
/// Standard error `Var sqrt(2/M)`; passes iff every node is within
/// `multiplier` standard errors.
pub fn marginal_variance_profile(
    batch: &ReplicateBatch,
    process: Process,
    hurst: Hurst,
    nodes: &[usize],
    multiplier: f64,
) -> Result<VerificationReport> {
    if batch.len() < 2 {
        return Err(Error::InvalidParameter(
            "variance profile needs at least two replicates".into(),
        ));
    }
    let grid = batch.grid();
    let kernel = CovarianceKernel::new(process, hurst);
    let m = batch.len() as f64;
    let details: Vec<Detail> = nodes
        .iter()
        .map(|&j| {
            let xs = batch.node(j);
            let mean = xs.iter().sum::<f64>() / m;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let want = kernel.variance(grid.time(j));
            Detail::new(format!("var[{j}]"), var, want, want * (2.0 / m).sqrt())
        })
        .collect();
    Ok(VerificationReport::from_details(
        "marginals",
        batch.method().to_string(),
        process.to_string(),
        hurst.get(),
        grid.n(),
        batch.len(),
        multiplier,
        details,
    ))
}

/// Every node of the grid.
pub fn all_nodes(grid: GridSpec) -> Vec<usize> {
    (1..=grid.n()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundRow {
    pub n: usize,
    /// `max_j |n^{H theta_j / n} - 1|`
    pub a: f64,
    /// `max_j |n^{-theta_j / n} - 1|`
    pub b: f64,
    pub a_scaled: f64,
    pub b_scaled: f64,
    /// `(ln n / n)^beta` with `beta = H - 0.01`
    pub bound_shape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub hurst: f64,
    pub beta: f64,
    pub rows: Vec<ErrorBoundRow>,
    /// Fitted `c1 = max_n a(n) n / ln n`.
    pub c1: f64,
    /// Fitted `c2 = max_n b(n) n / ln n`.
    pub c2: f64,
    /// Mean-value-theorem ceiling for `c1`: `H n_min^{H / n_min}`.
    pub c1_ceiling: f64,
    pub c2_ceiling: f64,
    pub a_decreasing: bool,
    pub b_decreasing: bool,
    /// `a(n_last)/a(n_first)` over `(ln n_last / n_last)/(ln n_first / n_first)`.
    pub rate_ratio: Option<f64>,
}

impl ErrorBoundReport {
    pub fn to_verification(&self) -> VerificationReport {
        let mut gates = vec![
            Gate::at_most("c1 fitted vs mean-value ceiling", self.c1, self.c1_ceiling),
            Gate::at_most("c2 fitted vs mean-value ceiling", self.c2, self.c2_ceiling),
            Gate::flag("a(n) strictly decreasing", self.a_decreasing),
            Gate::flag("b(n) strictly decreasing", self.b_decreasing),
        ];
        if let Some(r) = self.rate_ratio {
            gates.push(Gate::at_most("a(n) rate ratio with 50% slack", r, 1.5));
        }
        let details = self
            .rows
            .iter()
            .map(|r| {
                Detail::raw(
                    format!("a*n/ln n at n={}", r.n),
                    r.a_scaled,
                    self.c1,
                    r.a_scaled / self.c1,
                )
            })
            .collect();
        VerificationReport::from_gates(
            "error-bound",
            Method::Lamperti.to_string(),
            "any".into(),
            self.hurst,
            self.rows.last().map_or(0, |r| r.n),
            0,
            gates,
            details,
        )
    }
}

/// Deterministic factors of the pathwise error bound along a ladder of grid sizes.
pub fn error_bound_diagnostics(ns: &[usize], hurst: Hurst) -> Result<ErrorBoundReport> {
    if ns.is_empty() {
        return Err(Error::InvalidParameter("empty n ladder".into()));
    }
    let h = hurst.get();
    let beta = h - HOLDER_EPSILON;
    let rows = ns
        .iter()
        .map(|&n| {
            let map = grid_map(n)?;
            let rate = (n as f64).ln() / n as f64;
            let (a, b) = map.residuals().iter().fold((0.0f64, 0.0f64), |(a, b), &theta| {
                (
                    a.max((h * theta * rate).exp_m1().abs()),
                    b.max((-theta * rate).exp_m1().abs()),
                )
            });
            Ok(ErrorBoundRow {
                n,
                a,
                b,
                a_scaled: a / rate,
                b_scaled: b / rate,
                bound_shape: rate.powf(beta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let c1 = rows.iter().map(|r| r.a_scaled).fold(0.0, f64::max);
    let c2 = rows.iter().map(|r| r.b_scaled).fold(0.0, f64::max);
    let n_min = *ns.iter().min().unwrap() as f64;
    let strictly_down = |f: fn(&ErrorBoundRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let rate_ratio = (rows.len() >= 2).then(|| {
        let (first, last) = (&rows[0], &rows[rows.len() - 1]);
        let rate = |n: usize| (n as f64).ln() / n as f64;
        (last.a / first.a) / (rate(last.n) / rate(first.n))
    });
    Ok(ErrorBoundReport {
        hurst: h,
        beta,
        c1,
        c2,
        c1_ceiling: h * n_min.powf(h / n_min),
        c2_ceiling: 1.0,
        a_decreasing: strictly_down(|r| r.a),
        b_decreasing: strictly_down(|r| r.b),
        rate_ratio,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(x: f64) -> Hurst {
        Hurst::new(x).unwrap()
    }

    #[test]
    fn grid_map_endpoints_and_dyadic_case() {
        for n in [2, 3, 4, 8, 10, 100, 256, 1000, 4096] {
            let map = grid_map(n).unwrap();
            assert_eq!(map.index(n), n);
            assert_eq!(map.residual(n), 0.0);
            assert_eq!(map.index(1), 0);
            assert_eq!(map.residual(1), 0.0);
        }
        let map = grid_map(4).unwrap();
        assert_eq!(map.index(2), 2);
        assert_eq!(map.residual(2), 0.0);
        assert!(grid_map(1).is_err());
    }

    #[test]
    fn grid_map_invariants() {
        for n in [2, 5, 16, 64, 100, 256, 1000, 4096] {
            let map = grid_map(n).unwrap();
            let nf = n as f64;
            assert!(map.indices().windows(2).all(|w| w[0] <= w[1]));
            for j in 1..=n {
                let (g, theta) = (map.index(j), map.residual(j));
                assert!(g <= n);
                assert!((0.0..1.0).contains(&theta));
                let back = nf.powf(g as f64 / nf - 1.0) * nf.powf(theta / nf);
                let t = j as f64 / nf;
                assert!(((back - t) / t).abs() < 1e-12, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn exact_powers_are_snapped() {
        // g(j) is an integer without residual exactly when j = n^{g/n}
        for (n, nodes) in [(16, vec![1, 2, 4, 8, 16]), (4096, vec![1, 8, 64, 512, 4096])] {
            let map = grid_map(n).unwrap();
            for j in nodes {
                assert_eq!(map.residual(j), 0.0, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn deterministic_paths() {
        let g = GridSpec::new(128).unwrap();
        for p in [Process::Fbm, Process::Sfbm] {
            let a = simulate_lamperti(p, h(0.7), g, &mut RngStream::new(42, 0)).unwrap();
            let b = simulate_lamperti(p, h(0.7), g, &mut RngStream::new(42, 0)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn transform_picks_indexed_values() {
        let g = GridSpec::new(16).unwrap();
        let s = LampertiSampler::new(Process::Fbm, h(0.4), g, EmbeddingPolicy::default()).unwrap();
        let u: Vec<f64> = (0..=16).map(|k| k as f64).collect();
        let x = s.transform(&u);
        for j in 1..=16 {
            let want = (j as f64 / 16.0).powf(0.4) * s.map().index(j) as f64;
            assert!((x[j - 1] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn high_hurst_embedding_needs_doubling_but_succeeds() {
        let g = GridSpec::new(64).unwrap();
        let s = LampertiSampler::new(Process::Fbm, h(0.9), g, EmbeddingPolicy::default()).unwrap();
        assert!(s.spectrum().doublings() >= 1);
        assert_eq!(s.spectrum().len(), 65);
    }

    #[test]
    fn terminal_variances() {
        let g = GridSpec::new(64).unwrap();
        let m = 20_000;
        for (p, want) in [(Process::Fbm, 1.0), (Process::Sfbm, 2.0 - 2f64.powf(0.4))] {
            let s = LampertiSampler::new(p, h(0.7), g, EmbeddingPolicy::default()).unwrap();
            let batch = ReplicateBatch::generate(m, 5, |rng| Ok(s.sample(rng))).unwrap();
            let x = batch.node(64);
            let v = x.iter().map(|v| v * v).sum::<f64>() / m as f64;
            assert!(
                (v - want).abs() <= 4.0 * want * (2.0 / m as f64).sqrt(),
                "{p}: {v} vs {want}"
            );
        }
    }

    #[test]
    fn variance_profile_examples() {
        let n = 64;
        let g = GridSpec::new(n).unwrap();
        let m = 20_000;
        for (p, x, j, want) in [
            (Process::Fbm, 0.5, n / 2, 0.5),
            (Process::Fbm, 0.2, n / 4, 0.25f64.powf(0.4)),
            (Process::Sfbm, 0.8, n, 2.0 - 2f64.powf(0.6)),
        ] {
            let s = LampertiSampler::new(p, h(x), g, EmbeddingPolicy::default()).unwrap();
            let batch = ReplicateBatch::generate(m, 17, |rng| Ok(s.sample(rng))).unwrap();
            let report = marginal_variance_profile(&batch, p, h(x), &[j], 4.0).unwrap();
            assert!((report.details[0].expected - want).abs() < 1e-12);
            assert!(report.passed(), "{p} H={x}: {:?}", report.details);
        }
    }

    #[test]
    fn error_bound_ladder() {
        let ns: Vec<usize> = (8..=14).step_by(2).map(|e| 1usize << e).collect();
        for x in [0.1, 0.5, 0.9] {
            let r = error_bound_diagnostics(&ns, h(x)).unwrap();
            assert!(r.c1 <= r.c1_ceiling && r.c2 <= 1.0);
            assert!(r.a_decreasing && r.b_decreasing);
            let first = &r.rows[0];
            let last = r.rows.last().unwrap();
            let rate = |n: usize| (n as f64).ln() / n as f64;
            assert!(last.a / first.a < rate(last.n) / rate(first.n) * 1.5);
            assert!(r.to_verification().passed());
        }
    }

    #[test]
    fn zero_residual_nodes_contribute_nothing() {
        // on n = 4 only j = 3 has a nonzero residual
        let map = grid_map(4).unwrap();
        let r = error_bound_diagnostics(&[4], h(0.5)).unwrap();
        let theta3 = map.residual(3);
        let rate = 4f64.ln() / 4.0;
        assert!((r.rows[0].a - (0.5 * theta3 * rate).exp_m1()).abs() < 1e-15);
    }
}
