//! Statistical checks of simulated batches against exact covariance oracles.
//!
//! Every check is a pure function of its inputs and returns a
//! [`VerificationReport`]. The verdict is the conjunction of the report's
//! gates; `worst_deviation` and `tolerance` mirror the first (primary) gate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::batch::ReplicateBatch;
use crate::covmodels::CovarianceKernel;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::types::Hurst;

/// Asymptotic 1% critical value of the Kolmogorov-Smirnov statistic, times `sqrt(M)`.
pub const KS_CRITICAL_1PCT: f64 = 1.63;
/// Share of entries allowed outside the `multiplier * SE` band.
pub const BAND_OUTSIDE_SHARE: f64 = 0.05;
/// Grids larger than this are compared on every fourth node.
pub const FULL_GRID_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Gate {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// A yes/no condition: value 0 when it holds, 1 when it is violated.
    pub fn flag(name: impl Into<String>, holds: bool) -> Self {
        Self {
            name: name.into(),
            value: if holds { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: holds,
        }
    }
}

/// One compared quantity: an estimate, its target and the normalized gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub label: String,
    pub estimate: f64,
    pub expected: f64,
    pub std_error: f64,
    pub deviation: f64,
}

impl Detail {
    /// `deviation = |estimate - expected| / std_error`.
    pub fn new(label: impl Into<String>, estimate: f64, expected: f64, std_error: f64) -> Self {
        let gap = (estimate - expected).abs();
        let deviation = if gap == 0.0 {
            0.0
        } else if std_error > 0.0 {
            gap / std_error
        } else {
            f64::INFINITY
        };
        Self {
            label: label.into(),
            estimate,
            expected,
            std_error,
            deviation,
        }
    }

    /// A detail whose deviation is supplied directly (already in tolerance units).
    pub fn raw(label: impl Into<String>, estimate: f64, expected: f64, deviation: f64) -> Self {
        Self {
            label: label.into(),
            estimate,
            expected,
            std_error: 0.0,
            deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub method: String,
    pub process: String,
    pub hurst: f64,
    pub n: usize,
    pub m_replicates: usize,
    pub verdict: Verdict,
    pub worst_deviation: f64,
    pub tolerance: f64,
    pub gates: Vec<Gate>,
    pub details: Vec<Detail>,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn from_gates(
        check: &str,
        method: String,
        process: String,
        hurst: f64,
        n: usize,
        m_replicates: usize,
        gates: Vec<Gate>,
        details: Vec<Detail>,
    ) -> Self {
        let verdict = if gates.iter().all(|g| g.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let (worst_deviation, tolerance) = gates.first().map_or((0.0, 0.0), |g| (g.value, g.tolerance));
        Self {
            check: check.into(),
            method,
            process,
            hurst,
            n,
            m_replicates,
            verdict,
            worst_deviation,
            tolerance,
            gates,
            details,
        }
    }

    /// Every detail must lie within `multiplier`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_details(
        check: &str,
        method: String,
        process: String,
        hurst: f64,
        n: usize,
        m_replicates: usize,
        multiplier: f64,
        details: Vec<Detail>,
    ) -> Self {
        let gates = vec![Gate::at_most("worst deviation", worst(&details), multiplier)];
        Self::from_gates(check, method, process, hurst, n, m_replicates, gates, details)
    }

    /// At most 5% of details beyond `multiplier` and none beyond twice that.
    #[allow(clippy::too_many_arguments)]
    pub fn banded(
        check: &str,
        method: String,
        process: String,
        hurst: f64,
        n: usize,
        m_replicates: usize,
        multiplier: f64,
        details: Vec<Detail>,
    ) -> Self {
        let outside = details
            .iter()
            .filter(|d| d.deviation.is_nan() || d.deviation > multiplier)
            .count();
        let share = outside as f64 / details.len().max(1) as f64;
        let gates = vec![
            Gate::at_most("worst deviation", worst(&details), 2.0 * multiplier),
            Gate::at_most("share outside band", share, BAND_OUTSIDE_SHARE),
        ];
        Self::from_gates(check, method, process, hurst, n, m_replicates, gates, details)
    }

    pub fn informational(mut self) -> Self {
        self.verdict = Verdict::Informational;
        self
    }

    /// True unless the verdict is `Fail`.
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }
}

fn worst(details: &[Detail]) -> f64 {
    details.iter().map(|d| d.deviation).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub j: usize,
    pub k: usize,
    pub covariance: f64,
    pub std_error: f64,
}

const MIN_REPLICATES: usize = 100;

fn require_replicates(batch: &ReplicateBatch, min: usize) -> Result<()> {
    if batch.len() < min {
        return Err(Error::InvalidParameter(format!(
            "check needs at least {min} replicates, got {}",
            batch.len()
        )));
    }
    Ok(())
}

struct Centered {
    nodes: Vec<usize>,
    columns: Vec<Vec<f64>>,
    m: usize,
}

impl Centered {
    fn new(batch: &ReplicateBatch, nodes: &[usize]) -> Self {
        let columns = nodes
            .par_iter()
            .map(|&j| {
                let mut x = batch.node(j);
                let mean = x.iter().sum::<f64>() / x.len() as f64;
                x.iter_mut().for_each(|v| *v -= mean);
                x
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            columns,
            m: batch.len(),
        }
    }

    fn position(&self, j: usize) -> usize {
        self.nodes.iter().position(|&x| x == j).expect("node was centered")
    }

    fn cov(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (&self.columns[a], &self.columns[b]);
        x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>() / (self.m as f64 - 1.0)
    }

    /// Unbiased covariance and its Gaussian plug-in standard error.
    fn estimate(&self, j: usize, k: usize) -> CovarianceEstimate {
        let (a, b) = (self.position(j), self.position(k));
        let c = self.cov(a, b);
        let (cjj, ckk) = (self.cov(a, a), self.cov(b, b));
        CovarianceEstimate {
            j,
            k,
            covariance: c,
            std_error: ((cjj * ckk + c * c) / self.m as f64).sqrt(),
        }
    }
}

fn distinct_nodes(pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut nodes: Vec<usize> = pairs.iter().flat_map(|&(j, k)| [j, k]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

/// Sample covariance at each `(j, k)` node pair (1-based nodes).
pub fn empirical_covariance(batch: &ReplicateBatch, pairs: &[(usize, usize)]) -> Result<Vec<CovarianceEstimate>> {
    require_replicates(batch, MIN_REPLICATES)?;
    let centered = Centered::new(batch, &distinct_nodes(pairs));
    Ok(pairs.par_iter().map(|&(j, k)| centered.estimate(j, k)).collect())
}

/// Nodes used for matrix comparisons: all of them up to 64, every fourth beyond.
pub fn comparison_nodes(n: usize) -> Vec<usize> {
    if n <= FULL_GRID_LIMIT {
        return (1..=n).collect();
    }
    let mut nodes: Vec<usize> = (4..=n).step_by(4).collect();
    if nodes.last() != Some(&n) {
        nodes.push(n);
    }
    nodes
}

fn upper_pairs(nodes: &[usize]) -> Vec<(usize, usize)> {
    nodes
        .iter()
        .enumerate()
        .flat_map(|(a, &j)| nodes[a..].iter().map(move |&k| (j, k)))
        .collect()
}

/// Empirical covariance matrix against `kernel`, banded rule at `multiplier` SEs.
pub fn covariance_match(
    batch: &ReplicateBatch,
    kernel: &CovarianceKernel,
    multiplier: f64,
) -> Result<VerificationReport> {
    let grid = batch.grid();
    let pairs = upper_pairs(&comparison_nodes(grid.n()));
    let details = empirical_covariance(batch, &pairs)?
        .into_iter()
        .map(|e| {
            let want = kernel.evaluate(grid.time(e.j), grid.time(e.k));
            Detail::new(format!("cov[{},{}]", e.j, e.k), e.covariance, want, e.std_error)
        })
        .collect();
    Ok(VerificationReport::banded(
        "covariance",
        batch.method().to_string(),
        kernel.process().to_string(),
        kernel.hurst().get(),
        grid.n(),
        batch.len(),
        multiplier,
        details,
    ))
}

fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov distance of the standardized sample from `N(0, 1)`.
pub fn ks_distance_to_normal(sample: &[f64]) -> f64 {
    let m = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / m;
    let sd = (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let mut z: Vec<f64> = sample.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    z.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = standard_normal_cdf(x);
            f64::max((i + 1) as f64 / m - f, f - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// Gaussianity of the marginal at node `j`, KS test at the 1% level.
pub fn normality_check(batch: &ReplicateBatch, j: usize) -> Result<VerificationReport> {
    require_replicates(batch, 1000)?;
    let d = ks_distance_to_normal(&batch.node(j));
    let critical = KS_CRITICAL_1PCT / (batch.len() as f64).sqrt();
    let details = vec![Detail::raw(format!("ks[{j}]"), d, critical, d / critical)];
    let gates = vec![Gate::at_most("ks distance", d, critical)];
    Ok(VerificationReport::from_gates(
        "normality",
        batch.method().to_string(),
        batch.process().to_string(),
        batch.hurst().get(),
        batch.grid().n(),
        batch.len(),
        gates,
        details,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceScope {
    /// Whole (possibly strided) covariance matrix, pass/fail.
    Full,
    /// Marginal variances only, pass/fail.
    Diagonal,
    /// Whole matrix, reported without a verdict.
    Informational,
}

/// Entrywise comparison of two batches' covariance matrices under pooled SEs.
pub fn method_equivalence(
    a: &ReplicateBatch,
    b: &ReplicateBatch,
    scope: EquivalenceScope,
    multiplier: f64,
) -> Result<VerificationReport> {
    if a.grid() != b.grid() {
        return Err(Error::Mismatch(format!(
            "grids differ: n = {} vs n = {}",
            a.grid().n(),
            b.grid().n()
        )));
    }
    let nodes = comparison_nodes(a.grid().n());
    let pairs = match scope {
        EquivalenceScope::Diagonal => nodes.iter().map(|&j| (j, j)).collect(),
        _ => upper_pairs(&nodes),
    };
    let ea = empirical_covariance(a, &pairs)?;
    let eb = empirical_covariance(b, &pairs)?;
    let details = ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| {
            let pooled = x.std_error.hypot(y.std_error);
            Detail::new(format!("cov[{},{}]", x.j, x.k), x.covariance, y.covariance, pooled)
        })
        .collect();
    let report = VerificationReport::banded(
        "equivalence",
        format!("{} vs {}", a.method(), b.method()),
        a.process().to_string(),
        a.hurst().get(),
        a.grid().n(),
        a.len().min(b.len()),
        multiplier,
        details,
    );
    Ok(match scope {
        EquivalenceScope::Informational => report.informational(),
        _ => report,
    })
}

/// Brownian increment test: every increment has variance `1/n` within
/// `multiplier` SEs and adjacent increments are uncorrelated within
/// `multiplier / sqrt(M)`.
pub fn brownian_increment_check(batch: &ReplicateBatch, multiplier: f64) -> Result<VerificationReport> {
    require_replicates(batch, MIN_REPLICATES)?;
    let n = batch.grid().n();
    let m = batch.len() as f64;
    let increments: Vec<Vec<f64>> = batch.paths().iter().map(|p| p.increments()).collect();
    let column = |i: usize| -> Vec<f64> { increments.iter().map(|row| row[i]).collect() };
    let var_target = 1.0 / n as f64;
    let var_se = var_target * (2.0 / m).sqrt();
    let moments = |x: &[f64]| {
        let mean = x.iter().sum::<f64>() / m;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean, var)
    };
    let columns: Vec<Vec<f64>> = (0..n).map(column).collect();
    let stats: Vec<(f64, f64)> = columns.iter().map(|c| moments(c)).collect();
    let mut details: Vec<Detail> = stats
        .iter()
        .enumerate()
        .map(|(i, &(_, v))| Detail::new(format!("var[d{}]", i + 1), v, var_target, var_se))
        .collect();
    let corr_se = 1.0 / m.sqrt();
    let corr: Vec<Detail> = (0..n.saturating_sub(1))
        .map(|i| {
            let ((ma, va), (mb, vb)) = (stats[i], stats[i + 1]);
            let c = columns[i]
                .iter()
                .zip(&columns[i + 1])
                .map(|(x, y)| (x - ma) * (y - mb))
                .sum::<f64>()
                / (m - 1.0);
            Detail::new(
                format!("corr[d{},d{}]", i + 1, i + 2),
                c / (va * vb).sqrt(),
                0.0,
                corr_se,
            )
        })
        .collect();
    let gates = vec![
        Gate::at_most("worst increment variance deviation", worst(&details), multiplier),
        Gate::at_most("worst lag-1 correlation deviation", worst(&corr), multiplier),
    ];
    details.extend(corr);
    Ok(VerificationReport::from_gates(
        "increments",
        batch.method().to_string(),
        batch.process().to_string(),
        batch.hurst().get(),
        n,
        batch.len(),
        gates,
        details,
    ))
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn deciles(mut x: Vec<f64>) -> [f64; 9] {
    x.sort_by(f64::total_cmp);
    std::array::from_fn(|i| quantile_sorted(&x, (i + 1) as f64 / 10.0))
}

/// One-dimensional self-similarity: deciles of `X(t_j) / t_j^H` against
/// deciles of `X(1)`, with paired bootstrap standard errors of the differences.
pub fn scaling_check(
    batch: &ReplicateBatch,
    j: usize,
    hurst: Hurst,
    resamples: usize,
    seed: u64,
    multiplier: f64,
) -> Result<VerificationReport> {
    require_replicates(batch, MIN_REPLICATES)?;
    let grid = batch.grid();
    let scale = grid.time(j).powf(-hurst.get());
    let scaled: Vec<f64> = batch.node(j).iter().map(|x| x * scale).collect();
    let terminal = batch.node(grid.n());
    let diff = |a: [f64; 9], b: [f64; 9]| -> [f64; 9] { std::array::from_fn(|i| a[i] - b[i]) };
    let observed = deciles(scaled.clone());
    let reference = deciles(terminal.clone());
    let m = batch.len();
    let mut rng = RngStream::new(seed, 0);
    let boot: Vec<[f64; 9]> = (0..resamples)
        .map(|_| {
            let idx: Vec<usize> = (0..m).map(|_| rng.index(m)).collect();
            let a = deciles(idx.iter().map(|&i| scaled[i]).collect());
            let b = deciles(idx.iter().map(|&i| terminal[i]).collect());
            diff(a, b)
        })
        .collect();
    let details = (0..9)
        .map(|d| {
            let xs: Vec<f64> = boot.iter().map(|b| b[d]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt();
            Detail::new(format!("decile {}", (d + 1) * 10), observed[d], reference[d], se)
        })
        .collect();
    Ok(VerificationReport::from_details(
        "scaling",
        batch.method().to_string(),
        batch.process().to_string(),
        hurst.get(),
        grid.n(),
        m,
        multiplier,
        details,
    ))
}
