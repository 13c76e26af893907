//! Verdicts, reports and the files written for a run.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{LabError, Result};

/// Outcome of one check. Reports never claim more than consistency with a named test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Consistent
        } else {
            Verdict::Violated
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Library operation whose output the verdict is computed from.
    pub operation: String,
    /// The test applied to that output.
    pub test: String,
    pub verdict: Verdict,
    /// Set when the hypotheses behind this check were deliberately broken.
    pub expected_violation: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, operation: &str, test: &str, verdict: Verdict, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            operation: operation.into(),
            test: test.into(),
            verdict,
            expected_violation: false,
            detail: detail.into(),
        }
    }

    pub fn expecting_violation(mut self, expected: bool) -> Self {
        self.expected_violation = expected;
        self
    }

    /// A check whose underlying computation failed.
    pub fn failed(name: impl Into<String>, operation: &str, test: &str, err: &LabError) -> Self {
        Check::new(name, operation, test, Verdict::Inconclusive, format!("error: {err}"))
    }

    /// Whether this check counts as a violation of the run (expected violations do not).
    pub fn unexpected_violation(&self) -> bool {
        self.verdict == Verdict::Violated && !self.expected_violation
    }

    /// An expected violation that did not show up leaves the run inconclusive.
    fn inconclusive(&self) -> bool {
        self.verdict == Verdict::Inconclusive || (self.expected_violation && self.verdict != Verdict::Violated)
    }
}

/// A data table kept in memory until the run is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File name inside the run directory; `.dat` files are whitespace-separated, headerless
    /// except for a `#` comment line.
    pub file: String,
    pub description: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, description: impl Into<String>, columns: &[&str]) -> Self {
        Table { file: file.into(), description: description.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.file);
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    fn is_plot_file(&self) -> bool {
        self.file.ends_with(".dat")
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        if self.is_plot_file() {
            writeln!(w, "# {}", self.columns.join(" "))?;
            for r in &self.rows {
                writeln!(w, "{}", r.join(" "))?;
            }
        } else {
            writeln!(w, "{}", self.columns.join(","))?;
            for r in &self.rows {
                writeln!(w, "{}", r.join(","))?;
            }
        }
        Ok(())
    }

    pub fn reference(&self) -> TableRef {
        TableRef { file: self.file.clone(), description: self.description.clone(), columns: self.columns.clone(), rows: self.rows.len() }
    }
}

/// Shortest round-trip text for a number, so written tables are reproducible bit for bit.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRef {
    pub file: String,
    pub description: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

/// Everything about a run that is reproducible from (config, seed). Wall-clock time is
/// written separately so that this file is bit-identical across reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub overall: Verdict,
    pub checks: Vec<Check>,
    /// Fitted constants keyed by a dotted path.
    pub constants: BTreeMap<String, f64>,
    pub tables: Vec<TableRef>,
    /// Monte Carlo exits simulated.
    pub samples: u64,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: config.experiment,
            config: config.clone(),
            overall: Verdict::Inconclusive,
            checks: Vec::new(),
            constants: BTreeMap::new(),
            tables: Vec::new(),
            samples: 0,
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Records a fitted constant; non-finite values go to the notes, since JSON has no
    /// spelling for them.
    pub fn constant(&mut self, key: impl Into<String>, v: f64) {
        let key = key.into();
        if v.is_finite() {
            self.constants.insert(key, v);
        } else {
            self.notes.push(format!("{key} = {v}"));
        }
    }

    /// Violated if any check is an unexpected violation, otherwise inconclusive if any check
    /// is inconclusive (or an expected violation failed to appear), otherwise consistent.
    pub fn finalize(&mut self) {
        self.overall = overall(&self.checks);
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::Io(e.to_string()))
    }
}

pub fn overall(checks: &[Check]) -> Verdict {
    if checks.is_empty() {
        Verdict::Inconclusive
    } else if checks.iter().any(Check::unexpected_violation) {
        Verdict::Violated
    } else if checks.iter().any(Check::inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Consistent
    }
}

/// Process exit code for a verdict.
pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Consistent => 0,
        Verdict::Violated => 2,
        Verdict::Inconclusive => 3,
    }
}

pub const CONFIG_ERROR_CODE: i32 = 4;

/// A finished run: the report, its tables and the wall-clock time.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub tables: Vec<Table>,
    /// Extra binary artifacts (file name, bytes).
    pub blobs: Vec<(String, Vec<u8>)>,
    pub wall_clock_s: f64,
}

#[derive(Serialize)]
struct Timing<'a> {
    experiment: &'a str,
    wall_clock_s: f64,
    samples: u64,
    workers: usize,
}

impl RunOutput {
    /// Writes report.json, every table, binary artifacts and timing.json into `dir`.
    pub fn write(&self, dir: &Path, workers: usize) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            let f = std::fs::File::create(dir.join(&t.file))?;
            t.write(std::io::BufWriter::new(f))?;
        }
        for (name, bytes) in &self.blobs {
            std::fs::write(dir.join(name), bytes)?;
        }
        std::fs::write(dir.join("report.json"), self.report.to_json()? + "\n")?;
        let timing = Timing {
            experiment: self.report.experiment.tag(),
            wall_clock_s: self.wall_clock_s,
            samples: self.report.samples,
            workers,
        };
        let text = serde_json::to_string_pretty(&timing).map_err(|e| LabError::Io(e.to_string()))?;
        std::fs::write(dir.join("timing.json"), text + "\n")?;
        Ok(())
    }
}
