use std::io::Write;
use std::time::Instant;

use selfsim_core::lamperti::{error_bound_diagnostics, marginal_variance_profile};
use selfsim_core::verify::{covariance_match, method_equivalence, normality_check, EquivalenceScope, Verdict};
use selfsim_core::{CovarianceKernel, GridSpec, Method, Sampler, VerificationReport, VERSION};
use serde::Serialize;

use crate::config::{Format, RunConfig, Suite};
use crate::error::{CliError, CliResult};
use crate::output::{open_output, CsvSink, JsonSink, Meta, PathSink};

/// Multiplier on standard errors used by every verification suite.
pub const SE_MULTIPLIER: f64 = 4.0;
/// Upper bound on `t(2n)/t(n)` for FFT-based methods.
pub const FFT_DOUBLING_LIMIT: f64 = 2.6;
/// Lower bound on `t(2n)/t(n)` for Cholesky once `n >= 512`.
pub const CHOLESKY_DOUBLING_FLOOR: f64 = 4.0;
const CHUNK_VALUES: usize = 1 << 22;

fn prepare(config: &RunConfig, method: Method, n: usize) -> CliResult<Sampler> {
    let grid = GridSpec::new(n)?;
    Ok(Sampler::prepare(config.sampler_config(method), grid)?)
}

pub fn simulate(config: &RunConfig) -> CliResult<()> {
    let method = config.single_method()?;
    let n = config.single_n()?;
    let sampler = prepare(config, method, n)?;
    let mut sink: Box<dyn PathSink> = match config.format {
        Format::Csv => Box::new(CsvSink),
        Format::Json => Box::new(JsonSink::new(Meta {
            process: config.process.to_string(),
            method: method.to_string(),
            hurst: config.hurst.get(),
            n,
            paths: config.paths,
            seed: config.seed,
            truncation: config.truncation,
            substeps: config.substeps,
            embedding_cap: config.embedding_cap,
            version: VERSION,
            embedding: sampler.embedding(),
        })),
    };
    let mut out = open_output(config.out.as_deref())?;
    sink.begin(&mut out)?;
    let chunk = (CHUNK_VALUES / (n + 1)).clamp(1, 4096) as u64;
    let total = config.paths as u64;
    let mut start = 0;
    while start < total {
        let end = (start + chunk).min(total);
        for path in sampler.batch_range(start..end, config.seed).paths() {
            sink.write_path(&mut out, path)?;
        }
        start = end;
    }
    sink.finish(&mut out)?;
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub verdict: Verdict,
    pub reports: Vec<VerificationReport>,
}

fn quarter_nodes(n: usize) -> Vec<usize> {
    let mut nodes: Vec<usize> = [n / 4, n / 2, n].into_iter().filter(|&j| j >= 1).collect();
    nodes.dedup();
    nodes
}

pub fn run_suite(config: &RunConfig) -> CliResult<SuiteReport> {
    let suite = config
        .suite
        .ok_or_else(|| CliError::Usage("--suite is required".into()))?;
    let mut reports = Vec::new();
    if suite == Suite::ErrorBound {
        reports.push(error_bound_diagnostics(&config.ns, config.hurst)?.to_verification());
    } else {
        let method = config.single_method()?;
        let kernel = CovarianceKernel::new(config.process, config.hurst);
        for &n in &config.ns {
            let batch = prepare(config, method, n)?.batch(config.paths, config.seed);
            match suite {
                Suite::Marginals => reports.push(marginal_variance_profile(
                    &batch,
                    config.process,
                    batch.hurst(),
                    &quarter_nodes(n),
                    SE_MULTIPLIER,
                )?),
                Suite::Covariance => reports.push(covariance_match(&batch, &kernel, SE_MULTIPLIER)?),
                Suite::Normality => {
                    for j in quarter_nodes(n) {
                        reports.push(normality_check(&batch, j)?);
                    }
                }
                Suite::Equivalence => {
                    let baseline =
                        prepare(config, config.baseline, n)?.batch(config.paths, config.seed.wrapping_add(1));
                    if method == Method::Lamperti || config.baseline == Method::Lamperti {
                        // joint laws differ: only the marginals are held to pass/fail
                        reports.push(method_equivalence(
                            &batch,
                            &baseline,
                            EquivalenceScope::Diagonal,
                            SE_MULTIPLIER,
                        )?);
                        reports.push(method_equivalence(
                            &batch,
                            &baseline,
                            EquivalenceScope::Informational,
                            SE_MULTIPLIER,
                        )?);
                    } else {
                        reports.push(method_equivalence(
                            &batch,
                            &baseline,
                            EquivalenceScope::Full,
                            SE_MULTIPLIER,
                        )?);
                    }
                }
                Suite::ErrorBound => unreachable!(),
            }
        }
    }
    let verdict = if reports.iter().all(VerificationReport::passed) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(SuiteReport {
        suite: suite.as_str(),
        verdict,
        reports,
    })
}

pub fn verify(config: &RunConfig) -> CliResult<()> {
    let report = run_suite(config)?;
    let mut out = open_output(config.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    match report.verdict {
        Verdict::Fail => Err(CliError::ChecksFailed(format!("suite {} failed", report.suite))),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub method: String,
    pub n: usize,
    pub paths: usize,
    pub prepare_s: f64,
    pub per_path_s: f64,
    pub batch_s: f64,
    /// `batch_s` over the previous row's when this n doubles it.
    pub ratio: Option<f64>,
    pub scaling_ok: Option<bool>,
    /// Sum of every simulated value; identical configs give identical sums.
    pub checksum: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub scaling_ok: bool,
}

fn scaling_verdict(method: Method, n_prev: usize, ratio: f64) -> Option<bool> {
    match method {
        Method::DaviesHarte | Method::Circulant | Method::Lamperti => Some(ratio <= FFT_DOUBLING_LIMIT),
        Method::Cholesky if n_prev >= 512 => Some(ratio >= CHOLESKY_DOUBLING_FLOOR),
        _ => None,
    }
}

pub fn run_bench(config: &RunConfig) -> CliResult<BenchReport> {
    let mut rows: Vec<BenchRow> = Vec::new();
    for &method in &config.methods {
        let mut previous: Option<(usize, f64)> = None;
        for &n in &config.ns {
            // warmup: planner caches, page faults
            prepare(config, method, n)?.batch(1, config.seed);
            let t0 = Instant::now();
            let sampler = prepare(config, method, n)?;
            let prepare_s = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let batch = sampler.batch(config.paths, config.seed);
            let sample_s = t1.elapsed().as_secs_f64();
            let checksum = batch.paths().iter().flat_map(|p| p.values.iter()).sum();
            let batch_s = prepare_s + sample_s;
            let ratio = previous.filter(|&(pn, _)| n == 2 * pn).map(|(_, pt)| batch_s / pt);
            let scaling_ok = ratio.and_then(|r| scaling_verdict(method, n / 2, r));
            rows.push(BenchRow {
                method: method.to_string(),
                n,
                paths: config.paths,
                prepare_s,
                per_path_s: sample_s / config.paths as f64,
                batch_s,
                ratio,
                scaling_ok,
                checksum,
            });
            previous = Some((n, batch_s));
        }
    }
    let scaling_ok = rows.iter().all(|r| r.scaling_ok != Some(false));
    Ok(BenchReport { rows, scaling_ok })
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn bench(config: &RunConfig) -> CliResult<()> {
    let report = run_bench(config)?;
    let mut out = open_output(config.out.as_deref())?;
    match config.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "method,n,paths,prepare_s,per_path_s,batch_s,ratio,scaling_ok,checksum"
            )?;
            for r in &report.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.method,
                    r.n,
                    r.paths,
                    r.prepare_s,
                    r.per_path_s,
                    r.batch_s,
                    opt(r.ratio),
                    opt(r.scaling_ok),
                    r.checksum
                )?;
            }
        }
    }
    out.flush()?;
    eprintln!("scaling_ok={}", report.scaling_ok);
    Ok(())
}
