use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use mhd_core::io::write_atomic;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Direction of a numeric check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// Passes when `measured ≤ tolerance`.
    AtMost,
    /// Passes when `measured ≥ tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub id: String,
    /// The result being checked, in words.
    pub reference: String,
    pub measured: f64,
    pub tolerance: f64,
    pub sense: Sense,
    /// Signed distance to failure; non-positive passes.
    pub margin: f64,
    pub pass: bool,
}

/// A numeric table attached to a report.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:e}")))?;
        }
        Ok(
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
                .expect("csv output is utf-8"),
        )
    }
}

/// Outcome of one experiment. Assertions and tables only ever get appended.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub inputs_digest: String,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
    pub runtime: Duration,
}

pub fn digest(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl ExperimentReport {
    /// `inputs` is any faithful rendering of the experiment parameters.
    pub fn new(id: &str, inputs: &str) -> Self {
        Self {
            id: id.to_owned(),
            inputs_digest: digest(inputs),
            assertions: Vec::new(),
            tables: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn check(
        &mut self,
        id: &str,
        reference: &str,
        measured: f64,
        tolerance: f64,
        sense: Sense,
    ) -> bool {
        let margin = match sense {
            Sense::AtMost => measured - tolerance,
            Sense::AtLeast => tolerance - measured,
        };
        let pass = measured.is_finite() && margin <= 0.0;
        self.assertions.push(Assertion {
            id: id.to_owned(),
            reference: reference.to_owned(),
            measured,
            tolerance,
            sense,
            margin,
            pass,
        });
        pass
    }

    pub fn at_most(&mut self, id: &str, reference: &str, measured: f64, tolerance: f64) -> bool {
        self.check(id, reference, measured, tolerance, Sense::AtMost)
    }

    pub fn at_least(&mut self, id: &str, reference: &str, measured: f64, tolerance: f64) -> bool {
        self.check(id, reference, measured, tolerance, Sense::AtLeast)
    }

    /// Boolean check recorded as `1 ≥ 1` or `0 ≥ 1`.
    pub fn holds(&mut self, id: &str, reference: &str, ok: bool) -> bool {
        self.at_least(id, reference, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn find_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.pass)
    }

    fn write_rows<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for a in &self.assertions {
            w.write_record([
                self.id.clone(),
                a.id.clone(),
                a.reference.clone(),
                format!("{:e}", a.measured),
                format!("{:e}", a.tolerance),
                format!("{:e}", a.margin),
                a.pass.to_string(),
            ])?;
        }
        Ok(())
    }

    /// Assertions as CSV rows. Runtime is left out so reruns compare equal byte for byte.
    pub fn assertions_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_COLUMNS)?;
        self.write_rows(&mut w)?;
        Ok(
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
                .expect("csv output is utf-8"),
        )
    }

    /// Writes `<id>.csv` with the assertions and `<id>_<table>.csv` for each table.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut body = format!("# inputs_digest={}\n", self.inputs_digest);
        body.push_str(&self.assertions_csv()?);
        write_atomic(&dir.join(format!("{}.csv", self.id)), body.as_bytes())?;
        for t in &self.tables {
            write_atomic(
                &dir.join(format!("{}_{}.csv", self.id, t.name)),
                t.to_csv_string()?.as_bytes(),
            )?;
        }
        Ok(())
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.assertions
            .iter()
            .map(|a| {
                let op = match a.sense {
                    Sense::AtMost => "<=",
                    Sense::AtLeast => ">=",
                };
                format!(
                    "[{}] {}/{}: {:.4e} {op} {:.4e} ({})",
                    if a.pass { "PASS" } else { "FAIL" },
                    self.id,
                    a.id,
                    a.measured,
                    a.tolerance,
                    a.reference
                )
            })
            .collect()
    }
}

pub const SUMMARY_COLUMNS: [&str; 7] = [
    "experiment",
    "assertion",
    "reference",
    "measured",
    "tolerance",
    "margin",
    "pass",
];

/// One summary CSV across several reports.
pub fn write_summary(reports: &[ExperimentReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS)?;
    for r in reports {
        r.write_rows(&mut w)?;
    }
    write_atomic(path, &w.into_inner().map_err(|e| e.into_error())?)?;
    Ok(())
}
