use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Self-similarity index, validated to lie in the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    pub const BROWNIAN: Hurst = Hurst(0.5);

    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::HurstOutOfRange(h))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Hurst {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        Hurst::new(h)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Bm,
    Fbm,
    Sfbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BmCumsum,
    Cholesky,
    DaviesHarte,
    Circulant,
    MaTruncated,
    Lamperti,
}

impl Process {
    pub const ALL: [Process; 3] = [Process::Bm, Process::Fbm, Process::Sfbm];

    pub fn as_str(self) -> &'static str {
        match self {
            Process::Bm => "bm",
            Process::Fbm => "fbm",
            Process::Sfbm => "sfbm",
        }
    }
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::BmCumsum,
        Method::Cholesky,
        Method::DaviesHarte,
        Method::Circulant,
        Method::MaTruncated,
        Method::Lamperti,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::BmCumsum => "bm-cumsum",
            Method::Cholesky => "cholesky",
            Method::DaviesHarte => "davies-harte",
            Method::Circulant => "circulant",
            Method::MaTruncated => "ma-truncated",
            Method::Lamperti => "lamperti",
        }
    }

    /// Whether this method can produce paths of `process`.
    ///
    /// Standalone circulant embedding needs stationary increments, so sfBm is
    /// only reachable through the Lamperti route.
    pub fn supports(self, process: Process) -> bool {
        use Method::*;
        use Process::*;
        matches!(
            (self, process),
            (BmCumsum, Bm)
                | (MaTruncated, Fbm)
                | (DaviesHarte, Fbm)
                | (Circulant, Fbm)
                | (Cholesky, Fbm | Sfbm)
                | (Lamperti, Fbm | Sfbm)
        )
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Process {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Process::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown process `{s}`")))
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// One simulated trajectory `(X(1/n), ..., X(1))` plus how it was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub method: Method,
    pub process: Process,
    pub hurst: Hurst,
    pub seed: u64,
    pub stream_id: u64,
}

impl SamplePath {
    /// Value at node `j` (1-based); `j = 0` is the origin.
    pub fn at(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.values[j - 1]
        }
    }

    /// `X(j/n) - X((j-1)/n)` for `j = 1..=n`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|&v| {
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }
}
