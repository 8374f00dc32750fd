//! Check records, deterministic seeding and artifact output for suites.

pub mod ensemble;
pub mod suite;

pub use suite::{run_suite, RunConfig, SuiteOutcome};

use crate::error::Result;
use crate::inequality::{InequalityReport, Provenance};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Counter-based seed splitter (SplitMix64 finaliser over `seed + stream`).
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub provenance: Provenance,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `lhs <= rhs + tolerance`.
    Le,
    /// `|lhs - rhs| <= tolerance`.
    Eq,
    /// A property that holds or not; `lhs` is 1 or 0.
    Holds,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub criterion: u8,
    pub relation: Relation,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Reported but never counted as a failure.
    pub evidence_only: bool,
    pub inputs: Vec<String>,
    pub details: serde_json::Value,
}

fn side(value: f64, provenance: Provenance, tolerance: f64) -> Quantity {
    let tolerance = if provenance == Provenance::Solver { tolerance } else { 0.0 };
    Quantity { value, provenance, tolerance }
}

impl CheckRecord {
    fn build(id: &str, criterion: u8, relation: Relation, lhs: (f64, Provenance), rhs: (f64, Provenance), tolerance: f64) -> Self {
        let mut r = Self {
            id: id.to_string(),
            criterion,
            relation,
            lhs: side(lhs.0, lhs.1, tolerance),
            rhs: side(rhs.0, rhs.1, tolerance),
            slack: 0.0,
            tolerance,
            pass: false,
            evidence_only: false,
            inputs: Vec::new(),
            details: serde_json::Value::Null,
        };
        r.evaluate();
        r
    }

    fn evaluate(&mut self) {
        self.slack = match self.relation {
            Relation::Le => self.rhs.value - self.lhs.value,
            Relation::Eq => -(self.lhs.value - self.rhs.value).abs(),
            Relation::Holds => self.lhs.value - 1.0,
        };
        self.pass = self.slack.is_finite() && self.slack >= -self.tolerance;
    }

    pub fn le(id: &str, criterion: u8, lhs: (f64, Provenance), rhs: (f64, Provenance), tolerance: f64) -> Self {
        Self::build(id, criterion, Relation::Le, lhs, rhs, tolerance)
    }

    /// `|value - expected| <= rel |expected|`.
    pub fn close(id: &str, criterion: u8, value: (f64, Provenance), expected: (f64, Provenance), rel: f64) -> Self {
        Self::build(id, criterion, Relation::Eq, value, expected, rel * expected.0.abs())
    }

    pub fn close_abs(id: &str, criterion: u8, value: (f64, Provenance), expected: (f64, Provenance), tolerance: f64) -> Self {
        Self::build(id, criterion, Relation::Eq, value, expected, tolerance)
    }

    pub fn holds(id: &str, criterion: u8, ok: bool, provenance: Provenance) -> Self {
        Self::build(id, criterion, Relation::Holds, (if ok { 1.0 } else { 0.0 }, provenance), (1.0, Provenance::ClosedForm), 0.0)
    }

    pub fn from_report(id: &str, criterion: u8, report: &InequalityReport) -> Self {
        let mut r = Self::le(id, criterion, (report.lhs, report.lhs_provenance), (report.rhs, report.rhs_provenance), report.tolerance);
        r.inputs = report.inputs.clone();
        r
    }

    /// A failed computation.
    pub fn error(id: &str, criterion: u8, message: String) -> Self {
        let mut r = Self::holds(id, criterion, false, Provenance::Solver);
        r.details = serde_json::json!({ "error": message });
        r
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    pub fn with_inputs(mut self, inputs: Vec<String>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn evidence(mut self) -> Self {
        self.evidence_only = true;
        self
    }

    /// Replaces the expected right side and re-evaluates; relative
    /// tolerances keep their ratio.
    pub fn override_expected(&mut self, value: f64) {
        if self.relation == Relation::Eq && self.rhs.value != 0.0 {
            self.tolerance *= value.abs() / self.rhs.value.abs();
        }
        self.rhs.value = value;
        self.evaluate();
    }

    pub fn counts_as_failure(&self) -> bool {
        !self.pass && !self.evidence_only
    }
}

fn csv_field(x: f64) -> String {
    format!("{x:.12e}")
}

/// `id,criterion,relation,lhs,rhs,slack,tolerance,pass,evidence_only`.
pub fn summary_csv(records: &[CheckRecord]) -> String {
    let mut out = String::from("id,criterion,relation,lhs,rhs,slack,tolerance,pass,evidence_only\n");
    for r in records {
        let rel = match r.relation {
            Relation::Le => "le",
            Relation::Eq => "eq",
            Relation::Holds => "holds",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.id,
            r.criterion,
            rel,
            csv_field(r.lhs.value),
            csv_field(r.rhs.value),
            csv_field(r.slack),
            csv_field(r.tolerance),
            r.pass,
            r.evidence_only
        );
    }
    out
}

pub fn digest(records: &[CheckRecord]) -> String {
    let mut out = String::new();
    let mut criteria: Vec<u8> = records.iter().map(|r| r.criterion).collect();
    criteria.dedup();
    for c in criteria {
        let rs: Vec<&CheckRecord> = records.iter().filter(|r| r.criterion == c).collect();
        let failed = rs.iter().filter(|r| r.counts_as_failure()).count();
        let _ = writeln!(out, "criterion {c}: {} checks, {failed} failed", rs.len());
        for r in rs {
            let tag = if r.pass {
                "PASS"
            } else if r.evidence_only {
                "NOTE"
            } else {
                "FAIL"
            };
            let _ = writeln!(
                out,
                "  {tag} {:<32} lhs {:>14.8} rhs {:>14.8} slack {:>11.3e} tol {:>10.3e}{}",
                r.id,
                r.lhs.value,
                r.rhs.value,
                r.slack,
                r.tolerance,
                if r.evidence_only { " (evidence only)" } else { "" }
            );
        }
    }
    let total_failed = records.iter().filter(|r| r.counts_as_failure()).count();
    let _ = writeln!(out, "total: {} checks, {total_failed} failed", records.len());
    out
}

/// Writes `checks/<id>.json`, `summary.csv` and `digest.txt` under `dir`.
pub fn write_artifacts(records: &[CheckRecord], dir: &Path) -> Result<()> {
    let checks = dir.join("checks");
    std::fs::create_dir_all(&checks)?;
    for r in records {
        let text = serde_json::to_string_pretty(r)?;
        std::fs::write(checks.join(format!("{}.json", r.id)), text + "\n")?;
    }
    std::fs::write(dir.join("summary.csv"), summary_csv(records))?;
    std::fs::write(dir.join("digest.txt"), digest(records))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_split() {
        assert_ne!(stream_seed(7, 0), stream_seed(7, 1));
        assert_eq!(stream_seed(7, 3), stream_seed(7, 3));
    }

    #[test]
    fn override_fails_close_check() {
        let mut r = CheckRecord::close("sq", 4, (4.01, Provenance::Solver), (4.0, Provenance::ClosedForm), 0.02);
        assert!(r.pass);
        r.override_expected(5.0);
        assert!(!r.pass);
    }
}
