//! Path serialization. Both formats stream one chunk of paths at a time, in
//! stream-id order, and print every `f64` in shortest round-trip form.

use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use selfsim_core::{EmbeddingInfo, SamplePath};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "path_id,t,value";

pub fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub process: String,
    pub method: String,
    pub hurst: f64,
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    pub truncation: f64,
    pub substeps: usize,
    pub embedding_cap: u32,
    pub version: &'static str,
    pub embedding: Option<EmbeddingInfo>,
}

pub trait PathSink {
    fn begin(&mut self, out: &mut dyn Write) -> io::Result<()>;
    fn write_path(&mut self, out: &mut dyn Write, path: &SamplePath) -> io::Result<()>;
    fn finish(&mut self, out: &mut dyn Write) -> io::Result<()>;
}

/// Long format, one row per `(path, node)` including `t = 0`.
pub struct CsvSink;

impl PathSink for CsvSink {
    fn begin(&mut self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")
    }

    fn write_path(&mut self, out: &mut dyn Write, path: &SamplePath) -> io::Result<()> {
        let id = path.stream_id;
        writeln!(out, "{id},0,0")?;
        for (j, v) in path.values.iter().enumerate() {
            writeln!(out, "{id},{},{v}", path.grid.time(j + 1))?;
        }
        Ok(())
    }

    fn finish(&mut self, _out: &mut dyn Write) -> io::Result<()> {
        Ok(())
    }
}

/// `{"meta": {...}, "paths": [[0, x1, ..., xn], ...]}`
pub struct JsonSink {
    meta: Meta,
    first: bool,
}

impl JsonSink {
    pub fn new(meta: Meta) -> Self {
        Self { meta, first: true }
    }
}

impl PathSink for JsonSink {
    fn begin(&mut self, out: &mut dyn Write) -> io::Result<()> {
        write!(out, "{{\"meta\":")?;
        serde_json::to_writer(&mut *out, &self.meta)?;
        write!(out, ",\"paths\":[")
    }

    fn write_path(&mut self, out: &mut dyn Write, path: &SamplePath) -> io::Result<()> {
        if !self.first {
            write!(out, ",")?;
        }
        self.first = false;
        write!(out, "[0.0")?;
        for v in &path.values {
            write!(out, ",")?;
            serde_json::to_writer(&mut *out, v)?;
        }
        write!(out, "]")
    }

    fn finish(&mut self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "]}}")
    }
}

/// Reads long-format CSV back into one value vector per path, `t = 0` included.
pub fn read_csv(reader: impl BufRead) -> CliResult<Vec<Vec<f64>>> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(CliError::Usage(format!("expected header `{CSV_HEADER}`"))),
    }
    let mut paths: Vec<Vec<f64>> = Vec::new();
    let mut current: Option<u64> = None;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let bad = || CliError::Usage(format!("malformed csv row {}: `{line}`", i + 2));
        let mut fields = line.split(',');
        let (Some(id), Some(_t), Some(v), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
            return Err(bad());
        };
        let id: u64 = id.parse().map_err(|_| bad())?;
        let v: f64 = v.parse().map_err(|_| bad())?;
        if current != Some(id) {
            current = Some(id);
            paths.push(Vec::new());
        }
        paths.last_mut().expect("pushed above").push(v);
    }
    Ok(paths)
}
