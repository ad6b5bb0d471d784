//! Row types and the resumable CSV writer shared by the sweeps.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::magic::SreMethod;
use crate::models::{Boundary, ModelKind};

/// Twelve significant digits, scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{:.11e}", v + 0.0)
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

fn parse<T: std::str::FromStr>(s: &str, column: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Config(format!("bad value {s:?} in column {column}")))
}

fn parse_opt<T: std::str::FromStr>(s: &str, column: &str) -> Result<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse(s, column).map(Some)
    }
}

fn parse_boundary(s: &str) -> Result<Boundary> {
    match s {
        "obc" => Ok(Boundary::Open),
        "pbc" => Ok(Boundary::Periodic),
        _ => Err(Error::Config(format!("bad boundary {s:?}"))),
    }
}

pub trait Row: Sized + Clone + Send {
    const HEADER: &'static [&'static str];
    /// Columns that identify the point.
    const KEY: &'static [usize];

    fn to_record(&self) -> Vec<String>;
    fn from_record(r: &csv::StringRecord) -> Result<Self>;
    fn failed(&self) -> bool;

    fn key(&self) -> Vec<String> {
        let rec = self.to_record();
        Self::KEY.iter().map(|&i| rec[i].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub model: ModelKind,
    pub length: usize,
    pub boundary: Boundary,
    pub parameter: f64,
    pub alpha: f64,
    pub method: SreMethod,
    pub seed: u64,
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub purity_check: Option<f64>,
    pub energy: Option<f64>,
    pub gap: Option<f64>,
    pub degenerate: Option<bool>,
    pub tie_break: Option<bool>,
    pub error: Option<String>,
}

impl Row for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "model",
        "L",
        "boundary",
        "parameter",
        "alpha",
        "method",
        "value",
        "std_error",
        "purity_check",
        "seed",
        "energy",
        "gap",
        "degenerate",
        "tie_break",
        "error",
    ];
    const KEY: &'static [usize] = &[0, 1, 2, 3, 4, 5, 9];

    fn to_record(&self) -> Vec<String> {
        vec![
            self.model.name().into(),
            self.length.to_string(),
            self.boundary.to_string(),
            format_float(self.parameter),
            format_float(self.alpha),
            self.method.name().into(),
            opt_float(self.value),
            opt_float(self.std_error),
            opt_float(self.purity_check),
            self.seed.to_string(),
            opt_float(self.energy),
            opt_float(self.gap),
            opt_bool(self.degenerate),
            opt_bool(self.tie_break),
            self.error.clone().unwrap_or_default(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        let f = |i: usize| r.get(i).unwrap_or("");
        Ok(SweepRow {
            model: parse(f(0), "model")?,
            length: parse(f(1), "L")?,
            boundary: parse_boundary(f(2))?,
            parameter: parse(f(3), "parameter")?,
            alpha: parse(f(4), "alpha")?,
            method: parse(f(5), "method")?,
            value: parse_opt(f(6), "value")?,
            std_error: parse_opt(f(7), "std_error")?,
            purity_check: parse_opt(f(8), "purity_check")?,
            seed: parse(f(9), "seed")?,
            energy: parse_opt(f(10), "energy")?,
            gap: parse_opt(f(11), "gap")?,
            degenerate: parse_opt(f(12), "degenerate")?,
            tie_break: parse_opt(f(13), "tie_break")?,
            error: Some(f(14).to_string()).filter(|e| !e.is_empty()),
        })
    }

    fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualRow {
    pub model: ModelKind,
    pub length: usize,
    pub boundary: Boundary,
    pub parameter: f64,
    pub alpha: f64,
    pub method: SreMethod,
    pub seed: u64,
    pub dual_parameter: Option<f64>,
    pub m2_primal: Option<f64>,
    pub m2_dual: Option<f64>,
    pub delta_m2: Option<f64>,
    /// Combined standard error of `delta_m2`; zero for exact methods.
    pub std_error: Option<f64>,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

impl Row for DualRow {
    const HEADER: &'static [&'static str] = &[
        "model",
        "L",
        "boundary",
        "parameter",
        "dual_parameter",
        "m2_primal",
        "m2_dual",
        "delta_m2",
        "method",
        "flags",
        "alpha",
        "seed",
        "std_error",
        "error",
    ];
    const KEY: &'static [usize] = &[0, 1, 2, 3, 8, 10, 11];

    fn to_record(&self) -> Vec<String> {
        vec![
            self.model.name().into(),
            self.length.to_string(),
            self.boundary.to_string(),
            format_float(self.parameter),
            opt_float(self.dual_parameter),
            opt_float(self.m2_primal),
            opt_float(self.m2_dual),
            opt_float(self.delta_m2),
            self.method.name().into(),
            self.flags.join(";"),
            format_float(self.alpha),
            self.seed.to_string(),
            opt_float(self.std_error),
            self.error.clone().unwrap_or_default(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        let f = |i: usize| r.get(i).unwrap_or("");
        Ok(DualRow {
            model: parse(f(0), "model")?,
            length: parse(f(1), "L")?,
            boundary: parse_boundary(f(2))?,
            parameter: parse(f(3), "parameter")?,
            dual_parameter: parse_opt(f(4), "dual_parameter")?,
            m2_primal: parse_opt(f(5), "m2_primal")?,
            m2_dual: parse_opt(f(6), "m2_dual")?,
            delta_m2: parse_opt(f(7), "delta_m2")?,
            method: parse(f(8), "method")?,
            flags: f(9).split(';').filter(|s| !s.is_empty()).map(String::from).collect(),
            alpha: parse(f(10), "alpha")?,
            seed: parse(f(11), "seed")?,
            std_error: parse_opt(f(12), "std_error")?,
            error: Some(f(13).to_string()).filter(|e| !e.is_empty()),
        })
    }

    fn failed(&self) -> bool {
        self.error.is_some()
    }
}

fn serialize<R: Row>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Every row stored in `path`.
pub fn read_rows<R: Row>(path: &Path) -> Result<Vec<R>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = rd.headers()?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(Error::Config(format!(
            "{} has columns {:?}, expected {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>(),
            R::HEADER
        )));
    }
    rd.records().map(|r| R::from_record(&r?)).collect()
}

/// Computes every row whose key is missing from `path` (or failed there),
/// appending each batch as it finishes, and leaves the file holding exactly
/// `template`'s rows in order.
///
/// `template` holds one placeholder row per point in output order; `compute`
/// turns a placeholder into a finished row. Returned rows carry the values as
/// stored in the file, whether they were computed now or read back.
pub fn fill_table<R, F>(path: &Path, template: Vec<R>, compute: F) -> Result<Vec<R>>
where
    R: Row + Sync,
    F: Fn(&R) -> R + Sync,
{
    use crate::par::prelude::*;

    let mut done: HashMap<Vec<String>, R> = HashMap::new();
    if path.exists() {
        for r in read_rows::<R>(path)? {
            if !r.failed() {
                done.insert(r.key(), r);
            }
        }
    } else {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        File::create(path)?.write_all(&serialize::<R>(&[])?)?;
    }

    let pending: Vec<usize> = (0..template.len())
        .filter(|&i| !done.contains_key(&template[i].key()))
        .collect();
    let batch = (2 * crate::par::current_num_threads()).max(4);
    let mut file = OpenOptions::new().append(true).open(path)?;
    let mut computed: HashMap<usize, R> = HashMap::new();
    for chunk in pending.chunks(batch) {
        let rows: Vec<R> = chunk.par_iter().map(|&i| compute(&template[i])).collect();
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for r in &rows {
            w.write_record(r.to_record())?;
        }
        file.write_all(&w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
        file.flush()?;
        for (&i, r) in chunk.iter().zip(&rows) {
            computed.insert(i, R::from_record(&csv::StringRecord::from(r.to_record()))?);
        }
    }
    drop(file);

    let rows: Vec<R> = template
        .iter()
        .enumerate()
        .map(|(i, t)| match computed.remove(&i) {
            Some(r) => r,
            None => done.remove(&t.key()).expect("row present"),
        })
        .collect();
    let canonical = serialize(&rows)?;
    if fs::read(path)? != canonical {
        let tmp = path.with_extension("csv.tmp");
        fs::write(&tmp, &canonical)?;
        fs::rename(&tmp, path)?;
    }
    Ok(rows)
}
