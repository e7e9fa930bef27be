//! Run configuration: flags, then an optional `key = value` file, then defaults.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use selfsim_core::samplers::{DEFAULT_MAX_DOUBLINGS, DEFAULT_SUBSTEPS, DEFAULT_TRUNCATION};
use selfsim_core::{Hurst, Method, Process, SamplerConfig};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20240607;
pub const SEED_ENV: &str = "SELFSIM_SEED";
pub const DEFAULT_HURST: f64 = 0.7;
pub const DEFAULT_N: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Marginals,
    Covariance,
    Normality,
    Equivalence,
    ErrorBound,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Marginals => "marginals",
            Suite::Covariance => "covariance",
            Suite::Normality => "normality",
            Suite::Equivalence => "equivalence",
            Suite::ErrorBound => "error-bound",
        }
    }
}

/// Options shared by every subcommand. All are optional so that a config
/// file can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub process: Option<String>,
    /// For `bench`, a comma-separated list.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Grid size(s), comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Falls back to the config file, then SELFSIM_SEED, then 20240607.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Moving-average truncation horizon T.
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Moving-average Riemann substeps per grid step.
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Maximum number of circulant size doublings.
    #[arg(long = "embedding-cap")]
    pub embedding_cap: Option<u32>,
    /// File of `key = value` lines using the flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub process: Process,
    pub methods: Vec<Method>,
    pub hurst: Hurst,
    pub ns: Vec<usize>,
    pub paths: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub truncation: f64,
    pub substeps: usize,
    pub embedding_cap: u32,
    pub suite: Option<Suite>,
    pub baseline: Method,
}

const KEYS: [&str; 14] = [
    "process",
    "method",
    "hurst",
    "n",
    "paths",
    "seed",
    "out",
    "format",
    "truncation",
    "substeps",
    "embedding-cap",
    "suite",
    "baseline",
    "config",
];

/// Parses `key = value` lines; `#` starts a comment, values may be quoted.
pub fn parse_config_file(text: &str) -> CliResult<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) || key == "config" {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
        }
        let value = value.trim().trim_matches('"').to_string();
        map.insert(key, value);
    }
    Ok(map)
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value `{value}` for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> CliResult<Vec<T>> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_method(value: &str) -> CliResult<Method> {
    value
        .trim()
        .parse()
        .map_err(|e: selfsim_core::Error| CliError::Usage(e.to_string()))
}

pub struct Resolver {
    file: HashMap<String, String>,
    env_seed: Option<String>,
}

impl Resolver {
    pub fn new(config: Option<&Path>, env_seed: Option<String>) -> CliResult<Self> {
        let file = match config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => HashMap::new(),
        };
        Ok(Self { file, env_seed })
    }

    fn value<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key).map(|v| parse(key, v)).transpose(),
        }
    }

    fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.file.get(key).cloned())
    }

    pub fn resolve(
        &self,
        args: CommonArgs,
        suite: Option<Suite>,
        baseline: Option<String>,
        default_paths: usize,
        default_methods: &[Method],
        default_ns: &[usize],
    ) -> CliResult<RunConfig> {
        let process: Process = match self.string(args.process, "process") {
            Some(p) => p
                .parse()
                .map_err(|e: selfsim_core::Error| CliError::Usage(e.to_string()))?,
            None => Process::Fbm,
        };
        let methods = match self.string(args.method, "method") {
            Some(m) => m.split(',').map(parse_method).collect::<CliResult<Vec<_>>>()?,
            None => default_methods.to_vec(),
        };
        let explicit_hurst = self.value(args.hurst, "hurst")?;
        let hurst = match (process, explicit_hurst) {
            (Process::Bm, Some(h)) if h != 0.5 => return Err(CliError::Usage(format!("bm has hurst 0.5, got {h}"))),
            (Process::Bm, _) => 0.5,
            (_, h) => h.unwrap_or(DEFAULT_HURST),
        };
        let hurst = Hurst::new(hurst)?;
        let ns = if !args.n.is_empty() {
            args.n
        } else if let Some(v) = self.file.get("n") {
            parse_list("n", v)?
        } else {
            default_ns.to_vec()
        };
        if ns.contains(&0) {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        let seed = match self.value(args.seed, "seed")? {
            Some(s) => s,
            None => match &self.env_seed {
                Some(v) => parse(SEED_ENV, v.trim())?,
                None => DEFAULT_SEED,
            },
        };
        let format = match args.format {
            Some(f) => f,
            None => match self.file.get("format") {
                Some(v) => Format::from_str(v, true).map_err(CliError::Usage)?,
                None => Format::Csv,
            },
        };
        let suite = match suite {
            Some(s) => Some(s),
            None => self
                .file
                .get("suite")
                .map(|v| Suite::from_str(v, true).map_err(CliError::Usage))
                .transpose()?,
        };
        let baseline = match self.string(baseline, "baseline") {
            Some(b) => parse_method(&b)?,
            None => Method::Cholesky,
        };
        let paths = self.value(args.paths, "paths")?.unwrap_or(default_paths);
        if paths == 0 {
            return Err(CliError::Usage("paths must be at least 1".into()));
        }
        Ok(RunConfig {
            process,
            methods,
            hurst,
            ns,
            paths,
            seed,
            out: self.value(args.out, "out")?,
            format,
            truncation: self.value(args.truncation, "truncation")?.unwrap_or(DEFAULT_TRUNCATION),
            substeps: self.value(args.substeps, "substeps")?.unwrap_or(DEFAULT_SUBSTEPS),
            embedding_cap: self
                .value(args.embedding_cap, "embedding-cap")?
                .unwrap_or(DEFAULT_MAX_DOUBLINGS),
            suite,
            baseline,
        })
    }
}

impl RunConfig {
    pub fn sampler_config(&self, method: Method) -> SamplerConfig {
        SamplerConfig {
            process: self.process,
            method,
            hurst: self.hurst,
            truncation: self.truncation,
            substeps: self.substeps,
            embedding_cap: self.embedding_cap,
        }
    }

    pub fn single_method(&self) -> CliResult<Method> {
        match self.methods.as_slice() {
            [m] => Ok(*m),
            _ => Err(CliError::Usage("exactly one --method is required".into())),
        }
    }

    pub fn single_n(&self) -> CliResult<usize> {
        match self.ns.as_slice() {
            [n] => Ok(*n),
            _ => Err(CliError::Usage("exactly one --n is required".into())),
        }
    }
}
