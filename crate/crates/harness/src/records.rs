//! `records.csv`: one row per trial and estimator.
//!
//! The first line is `# schema_version=1`, then a header row. Floats use
//! Rust's shortest round-trip formatting, so parsing reproduces every value
//! bit for bit. Missing optional values are empty fields.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{HarnessError, Result};
use crate::trial::TrialRecord;

pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 24] = [
    "n",
    "sigma_index",
    "sigma",
    "multiplier",
    "kind",
    "trial",
    "seed",
    "estimator",
    "l2_err",
    "linf_err",
    "iterations",
    "converged",
    "cert_psd",
    "cert_rank_ok",
    "lambda2",
    "kernel_residual",
    "contraction_max",
    "region_n1_max",
    "region_n2_max",
    "aux_proximity_max",
    "aux_proximity_growth",
    "wallclock_ms",
    "failure",
    "schema_version",
];

fn float(x: f64) -> String {
    format!("{x:?}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn row(r: &TrialRecord) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.sigma_index.to_string(),
        float(r.sigma),
        float(r.multiplier),
        r.kind.to_string(),
        r.trial.to_string(),
        r.seed.to_string(),
        r.estimator.to_string(),
        opt(r.l2_err, float),
        opt(r.linf_err, float),
        r.iterations.to_string(),
        r.converged.to_string(),
        opt(r.cert_psd, |b| b.to_string()),
        opt(r.cert_rank_ok, |b| b.to_string()),
        opt(r.lambda2, float),
        opt(r.kernel_residual, float),
        opt(r.contraction_max, float),
        opt(r.region_n1_max, float),
        opt(r.region_n2_max, float),
        opt(r.aux_proximity_max, float),
        opt(r.aux_proximity_growth, float),
        float(r.wallclock_ms),
        r.failure.clone().unwrap_or_default(),
        SCHEMA_VERSION.to_string(),
    ]
}

/// Append-only writer that flushes after every batch.
pub struct RecordWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl RecordWriter {
    /// Create (truncating) `path` and write the preamble.
    pub fn create(path: &Path) -> Result<Self> {
        let io = |e| HarnessError::io(path, e);
        let mut file = File::create(path).map_err(io)?;
        writeln!(file, "# schema_version={SCHEMA_VERSION}").map_err(io)?;
        let mut inner = csv::Writer::from_writer(file);
        inner.write_record(COLUMNS).map_err(|e| csv_io(path, e))?;
        inner.flush().map_err(io)?;
        Ok(Self {
            path: path.to_path_buf(),
            inner,
        })
    }

    /// Reopen an existing file for appending without rewriting the header.
    pub fn append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| HarnessError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner: csv::WriterBuilder::new().has_headers(false).from_writer(file),
        })
    }

    pub fn write_batch(&mut self, records: &[TrialRecord]) -> Result<()> {
        for r in records {
            self.inner.write_record(row(r)).map_err(|e| csv_io(&self.path, e))?;
        }
        self.inner.flush().map_err(|e| HarnessError::io(&self.path, e))
    }
}

fn csv_io(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e.to_string()))
}

struct Fields<'a> {
    path: &'a Path,
    line: u64,
    rec: &'a csv::StringRecord,
    idx: usize,
}

impl<'a> Fields<'a> {
    fn raw(&mut self) -> Result<&'a str> {
        let name = COLUMNS[self.idx];
        let v = self.rec.get(self.idx).ok_or_else(|| {
            HarnessError::parse(self.path, self.line, format!("missing column `{name}`"))
        })?;
        self.idx += 1;
        Ok(v)
    }

    fn req<T: FromStr>(&mut self) -> Result<T> {
        let name = COLUMNS[self.idx];
        let v = self.raw()?;
        v.parse().map_err(|_| {
            HarnessError::parse(self.path, self.line, format!("bad value `{v}` in column `{name}`"))
        })
    }

    fn opt<T: FromStr>(&mut self) -> Result<Option<T>> {
        let name = COLUMNS[self.idx];
        let v = self.raw()?;
        if v.is_empty() {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| {
            HarnessError::parse(self.path, self.line, format!("bad value `{v}` in column `{name}`"))
        })
    }
}

/// Parse `records.csv`. Errors carry the 1-based file line.
pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| HarnessError::io(path, e))?;
    let expected = format!("# schema_version={SCHEMA_VERSION}");
    if first.trim_end() != expected {
        return Err(HarnessError::parse(path, 1, format!("expected `{expected}`")));
    }
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv
        .headers()
        .map_err(|e| HarnessError::parse(path, 2, e.to_string()))?
        .clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(HarnessError::parse(path, 2, "unexpected header row"));
    }
    let mut out = Vec::new();
    for rec in csv.records() {
        // The preamble line is consumed before the csv reader sees the file.
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() + 1);
            HarnessError::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() + 1);
        if rec.len() != COLUMNS.len() {
            return Err(HarnessError::parse(
                path,
                line,
                format!("expected {} fields, found {}", COLUMNS.len(), rec.len()),
            ));
        }
        let mut f = Fields {
            path,
            line,
            rec: &rec,
            idx: 0,
        };
        let r = TrialRecord {
            n: f.req()?,
            sigma_index: f.req()?,
            sigma: f.req()?,
            multiplier: f.req()?,
            kind: f.req()?,
            trial: f.req()?,
            seed: f.req()?,
            estimator: f.req()?,
            l2_err: f.opt()?,
            linf_err: f.opt()?,
            iterations: f.req()?,
            converged: f.req()?,
            cert_psd: f.opt()?,
            cert_rank_ok: f.opt()?,
            lambda2: f.opt()?,
            kernel_residual: f.opt()?,
            contraction_max: f.opt()?,
            region_n1_max: f.opt()?,
            region_n2_max: f.opt()?,
            aux_proximity_max: f.opt()?,
            aux_proximity_growth: f.opt()?,
            wallclock_ms: f.req()?,
            failure: f.opt()?,
        };
        let version: u32 = f.req()?;
        if version != SCHEMA_VERSION {
            return Err(HarnessError::parse(path, line, format!("unsupported schema_version {version}")));
        }
        out.push(r);
    }
    Ok(out)
}
