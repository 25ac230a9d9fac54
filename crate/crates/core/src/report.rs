//! Versioned CSV and JSON formats for every computation.
//!
//! Floats are written in shortest round-trip form, so parsing a row gives
//! back the exact bits that were written. Every row and document carries
//! `schema_version`; readers reject anything but [`SCHEMA_VERSION`].

use std::f64::consts::PI;
use std::io::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cuboid::{Cuboid, GeometryError};
use crate::lattice::CountBundle;
use crate::optimizer::{OptimalRecord, OptimizeError, OptimizeStatus};
use crate::spectrum::SpectralPoint;
use crate::verify::{Suite, SuiteRow};

pub const SCHEMA_VERSION: u32 = 1;

pub const OPTIMIZE_COLUMNS: [&str; 11] = [
    "schema_version",
    "k",
    "a1",
    "a2",
    "a3",
    "lambda_star",
    "delta",
    "evaluations",
    "restarts_agreeing",
    "unique_within_tol",
    "status",
];

pub const VERIFY_COLUMNS: [&str; 7] = ["schema_version", "suite", "input_repr", "lhs", "rhs", "slack", "pass"];

pub const SPECTRUM_COLUMNS: [&str; 6] = ["schema_version", "k", "value", "pi2_multiple", "multiplicity", "indices"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported schema_version {found}, expected {SCHEMA_VERSION}")]
    SchemaVersion { found: u32 },
    #[error("unexpected header {found:?}")]
    Header { found: Vec<String> },
    #[error("malformed field: {0}")]
    Field(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check_version(found: u32) -> Result<(), ReportError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(ReportError::SchemaVersion { found })
    }
}

/// Row of the optimizer table. Numeric fields are empty on failed rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRow {
    pub schema_version: u32,
    pub k: u64,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub lambda_star: Option<f64>,
    pub delta: Option<f64>,
    pub evaluations: Option<u64>,
    pub restarts_agreeing: Option<u32>,
    pub unique_within_tol: Option<bool>,
    pub status: String,
}

const FAILED_PREFIX: &str = "failed: ";

impl OptimizeRow {
    pub fn from_record(r: &OptimalRecord) -> Self {
        let [a1, a2, a3] = r.cuboid.sides();
        Self {
            schema_version: SCHEMA_VERSION,
            k: r.k,
            a1: Some(a1),
            a2: Some(a2),
            a3: Some(a3),
            lambda_star: Some(r.lambda_star),
            delta: Some(r.delta),
            evaluations: Some(r.evaluations),
            restarts_agreeing: Some(r.restarts_agreeing),
            unique_within_tol: Some(r.unique_within_tol),
            status: r.status.as_str().to_owned(),
        }
    }

    pub fn failed(k: u64, err: &OptimizeError) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            k,
            a1: None,
            a2: None,
            a3: None,
            lambda_star: None,
            delta: None,
            evaluations: None,
            restarts_agreeing: None,
            unique_within_tol: None,
            status: format!("{FAILED_PREFIX}{err}"),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status.starts_with(FAILED_PREFIX)
    }

    /// The record this row was written from, or `None` for a failure row.
    pub fn to_record(&self) -> Result<Option<OptimalRecord>, ReportError> {
        if self.is_failure() {
            return Ok(None);
        }
        let status = match self.status.as_str() {
            "converged" => OptimizeStatus::Converged,
            "not_converged" => OptimizeStatus::NotConverged,
            other => return Err(ReportError::Field(format!("status {other:?}"))),
        };
        let missing = |name: &str| ReportError::Field(format!("{name} is empty on k={}", self.k));
        let (Some(a1), Some(a2), Some(a3)) = (self.a1, self.a2, self.a3) else {
            return Err(missing("side"));
        };
        Ok(Some(OptimalRecord {
            k: self.k,
            cuboid: Cuboid::from_sides(a1, a2, a3)?,
            lambda_star: self.lambda_star.ok_or_else(|| missing("lambda_star"))?,
            delta: self.delta.ok_or_else(|| missing("delta"))?,
            evaluations: self.evaluations.ok_or_else(|| missing("evaluations"))?,
            restarts_agreeing: self.restarts_agreeing.ok_or_else(|| missing("restarts_agreeing"))?,
            unique_within_tol: self.unique_within_tol.ok_or_else(|| missing("unique_within_tol"))?,
            status,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub schema_version: u32,
    pub suite: String,
    pub input_repr: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl VerifyRow {
    pub fn from_suite_row(row: &SuiteRow) -> Self {
        let r = &row.report;
        Self {
            schema_version: SCHEMA_VERSION,
            suite: row.suite.as_str().to_owned(),
            input_repr: format!("{}:{}", r.name, r.inputs),
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            pass: r.pass,
        }
    }

    pub fn suite(&self) -> Result<Suite, ReportError> {
        self.suite.parse().map_err(|_| ReportError::Field(format!("suite {:?}", self.suite)))
    }
}

/// One eigenvalue `lambda_k` with its degenerate index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub k: u64,
    pub value: f64,
    /// `value / pi²` for the unit cube, where it is an integer.
    pub pi2_multiple: Option<u64>,
    pub multiplicity: u64,
    pub indices: Vec<[u64; 3]>,
}

impl SpectrumRow {
    pub fn new(k: u64, point: &SpectralPoint, cuboid: &Cuboid) -> Self {
        Self {
            k,
            value: point.value,
            pi2_multiple: cuboid.is_unit_cube().then(|| (point.value / (PI * PI)).round() as u64),
            multiplicity: point.multiplicity as u64,
            indices: point.indices.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDoc {
    pub schema_version: u32,
    pub cuboid: Cuboid,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumDoc {
    pub fn new(cuboid: Cuboid, points: &[SpectralPoint]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            cuboid,
            rows: points
                .iter()
                .enumerate()
                .map(|(j, p)| SpectrumRow::new(j as u64 + 1, p, &cuboid))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDoc {
    pub schema_version: u32,
    pub cuboid: Cuboid,
    pub bundle: CountBundle,
    pub identity_ok: bool,
}

impl CountDoc {
    pub fn new(cuboid: Cuboid, bundle: CountBundle) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            cuboid,
            identity_ok: bundle.all_identities_hold(),
            bundle,
        }
    }
}

/// JSON wrapper for tabular outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDoc<T> {
    pub schema_version: u32,
    pub rows: Vec<T>,
}

impl<T> TableDoc<T> {
    pub fn new(rows: Vec<T>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            rows,
        }
    }
}

/// Flat CSV form of [`SpectrumRow`]; indices as `i1 i2 i3` joined by `;`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SpectrumCsvRow {
    schema_version: u32,
    k: u64,
    value: f64,
    pi2_multiple: Option<u64>,
    multiplicity: u64,
    indices: String,
}

fn format_indices(ix: &[[u64; 3]]) -> String {
    ix.iter()
        .map(|t| format!("{} {} {}", t[0], t[1], t[2]))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_indices(s: &str) -> Result<Vec<[u64; 3]>, ReportError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|t| {
            let parts: Vec<u64> = t
                .split(' ')
                .map(|x| x.parse().map_err(|_| ReportError::Field(format!("index {t:?}"))))
                .collect::<Result<_, _>>()?;
            <[u64; 3]>::try_from(parts).map_err(|_| ReportError::Field(format!("index {t:?}")))
        })
        .collect()
}

/// Flat CSV form of [`CountDoc`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CountCsvRow {
    schema_version: u32,
    a1: f64,
    a2: f64,
    a3: f64,
    lambda: f64,
    n: u64,
    t: u64,
    t_x1: u64,
    t_x2: u64,
    t_x3: u64,
    tp_x1: u64,
    tp_x2: u64,
    tp_x3: u64,
    f_x1: u64,
    f_x2: u64,
    f_x3: u64,
    identity_ok: bool,
}

fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T], header: &[&str]) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: DeserializeOwned>(input: &[u8], header: &[&str]) -> Result<Vec<T>, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    let found = r.headers()?;
    if found.iter().ne(header.iter().copied()) {
        return Err(ReportError::Header {
            found: found.iter().map(str::to_owned).collect(),
        });
    }
    r.deserialize().map(|row| row.map_err(ReportError::from)).collect()
}

pub fn write_optimize_csv<W: Write>(out: W, rows: &[OptimizeRow]) -> Result<(), ReportError> {
    write_csv(out, rows, &OPTIMIZE_COLUMNS)
}

pub fn parse_optimize_csv(input: &[u8]) -> Result<Vec<OptimizeRow>, ReportError> {
    let rows: Vec<OptimizeRow> = read_csv(input, &OPTIMIZE_COLUMNS)?;
    for r in &rows {
        check_version(r.schema_version)?;
    }
    Ok(rows)
}

pub fn write_verify_csv<W: Write>(out: W, rows: &[VerifyRow]) -> Result<(), ReportError> {
    write_csv(out, rows, &VERIFY_COLUMNS)
}

pub fn parse_verify_csv(input: &[u8]) -> Result<Vec<VerifyRow>, ReportError> {
    let rows: Vec<VerifyRow> = read_csv(input, &VERIFY_COLUMNS)?;
    for r in &rows {
        check_version(r.schema_version)?;
        r.suite()?;
    }
    Ok(rows)
}

pub fn write_spectrum_csv<W: Write>(out: W, doc: &SpectrumDoc) -> Result<(), ReportError> {
    let rows: Vec<SpectrumCsvRow> = doc
        .rows
        .iter()
        .map(|r| SpectrumCsvRow {
            schema_version: doc.schema_version,
            k: r.k,
            value: r.value,
            pi2_multiple: r.pi2_multiple,
            multiplicity: r.multiplicity,
            indices: format_indices(&r.indices),
        })
        .collect();
    write_csv(out, &rows, &SPECTRUM_COLUMNS)
}

/// Rows of a spectrum CSV; the box itself is not part of the table.
pub fn parse_spectrum_csv(input: &[u8]) -> Result<Vec<SpectrumRow>, ReportError> {
    let rows: Vec<SpectrumCsvRow> = read_csv(input, &SPECTRUM_COLUMNS)?;
    rows.into_iter()
        .map(|r| {
            check_version(r.schema_version)?;
            Ok(SpectrumRow {
                k: r.k,
                value: r.value,
                pi2_multiple: r.pi2_multiple,
                multiplicity: r.multiplicity,
                indices: parse_indices(&r.indices)?,
            })
        })
        .collect()
}

pub fn write_count_csv<W: Write>(out: W, doc: &CountDoc) -> Result<(), ReportError> {
    let [a1, a2, a3] = doc.cuboid.sides();
    let b = &doc.bundle;
    let row = CountCsvRow {
        schema_version: doc.schema_version,
        a1,
        a2,
        a3,
        lambda: b.lambda,
        n: b.n,
        t: b.t,
        t_x1: b.t_x[0],
        t_x2: b.t_x[1],
        t_x3: b.t_x[2],
        tp_x1: b.tp_x[0],
        tp_x2: b.tp_x[1],
        tp_x3: b.tp_x[2],
        f_x1: b.f[0],
        f_x2: b.f[1],
        f_x3: b.f[2],
        identity_ok: doc.identity_ok,
    };
    let mut w = csv::Writer::from_writer(out);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

pub fn parse_count_csv(input: &[u8]) -> Result<CountDoc, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = r.deserialize::<CountCsvRow>();
    let row = rows
        .next()
        .ok_or_else(|| ReportError::Field("count table has no rows".into()))??;
    if rows.next().is_some() {
        return Err(ReportError::Field("count table has more than one row".into()));
    }
    check_version(row.schema_version)?;
    Ok(CountDoc {
        schema_version: row.schema_version,
        cuboid: Cuboid::from_sides(row.a1, row.a2, row.a3)?,
        bundle: CountBundle {
            lambda: row.lambda,
            n: row.n,
            t: row.t,
            t_x: [row.t_x1, row.t_x2, row.t_x3],
            tp_x: [row.tp_x1, row.tp_x2, row.tp_x3],
            f: [row.f_x1, row.f_x2, row.f_x3],
        },
        identity_ok: row.identity_ok,
    })
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, doc: &T) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Peeks at `schema_version` before decoding the rest, so version errors
/// win over shape errors.
fn read_json<T: DeserializeOwned>(input: &[u8]) -> Result<T, ReportError> {
    #[derive(Deserialize)]
    struct Head {
        schema_version: u32,
    }
    let head: Head = serde_json::from_slice(input)?;
    check_version(head.schema_version)?;
    Ok(serde_json::from_slice(input)?)
}

pub fn parse_spectrum_json(input: &[u8]) -> Result<SpectrumDoc, ReportError> {
    read_json(input)
}

pub fn parse_count_json(input: &[u8]) -> Result<CountDoc, ReportError> {
    read_json(input)
}

pub fn parse_optimize_json(input: &[u8]) -> Result<TableDoc<OptimizeRow>, ReportError> {
    let doc: TableDoc<OptimizeRow> = read_json(input)?;
    for r in &doc.rows {
        check_version(r.schema_version)?;
    }
    Ok(doc)
}

pub fn parse_verify_json(input: &[u8]) -> Result<TableDoc<VerifyRow>, ReportError> {
    let doc: TableDoc<VerifyRow> = read_json(input)?;
    for r in &doc.rows {
        check_version(r.schema_version)?;
        r.suite()?;
    }
    Ok(doc)
}
