//! Empirical suites for the density, divisibility, θ-growth, smooth-number
//! and primes-in-progressions hypotheses.
//!
//! Every threshold comes from `calibration.txt` (embedded at build time);
//! the comment lines above a key are its provenance and travel with each
//! assertion row.

mod suites;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::CsvTable;

pub use suites::{
    check_bcond, check_bmult, check_debruijn, check_siegel_walfisz, check_thetahyp,
    default_theta_constants, ThetaConstants,
};

const EMBEDDED_CALIBRATION: &str = include_str!("../../calibration.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationEntry {
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Calibration {
    entries: BTreeMap<String, CalibrationEntry>,
}

impl Calibration {
    /// The calibration file shipped with the crate.
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED_CALIBRATION).expect("embedded calibration parses")
    }

    /// `key = value` lines; `#` lines directly above a key are its provenance.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut pending: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                pending.clear();
            } else if let Some(comment) = line.strip_prefix('#') {
                pending.push(comment.trim());
            } else {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("calibration line {}: expected key = value", i + 1)))?;
                let value: f64 = value.trim().parse().map_err(|_| {
                    Error::Config(format!("calibration line {}: bad number {:?}", i + 1, value.trim()))
                })?;
                entries.insert(
                    key.trim().to_string(),
                    CalibrationEntry {
                        value,
                        provenance: pending.join(" "),
                    },
                );
                pending.clear();
            }
        }
        Ok(Calibration { entries })
    }

    pub fn get(&self, key: &str) -> Result<&CalibrationEntry> {
        self.entries
            .get(key)
            .ok_or_else(|| Error::Config(format!("calibration key {key:?} missing")))
    }

    /// `suite.rule.name`, falling back to `suite.name`.
    pub fn get_for(&self, suite: &str, rule: &str, name: &str) -> Result<&CalibrationEntry> {
        self.entries
            .get(&format!("{suite}.{rule}.{name}"))
            .map_or_else(|| self.get(&format!("{suite}.{name}")), Ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub provenance: String,
    pub passed: bool,
}

impl Assertion {
    pub fn new(
        name: impl Into<String>,
        measured: f64,
        comparison: Comparison,
        threshold: f64,
        provenance: impl Into<String>,
    ) -> Self {
        let passed = match comparison {
            Comparison::AtMost => measured <= threshold,
            Comparison::AtLeast => measured >= threshold,
            Comparison::Equal => measured == threshold,
        };
        Assertion {
            name: name.into(),
            measured,
            comparison,
            threshold,
            provenance: provenance.into(),
            passed,
        }
    }

    fn calibrated(name: impl Into<String>, measured: f64, comparison: Comparison, entry: &CalibrationEntry) -> Self {
        Self::new(name, measured, comparison, entry.value, entry.provenance.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite_id: String,
    pub parameters: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    pub summary: String,
}

impl SuiteReport {
    fn new(suite_id: &str, parameters: BTreeMap<String, String>, columns: &[&str]) -> Self {
        SuiteReport {
            suite_id: suite_id.to_string(),
            parameters,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            assertions: Vec::new(),
            passed: true,
            summary: String::new(),
        }
    }

    fn finish(mut self) -> Self {
        let failed = self.assertions.iter().filter(|a| !a.passed).count();
        self.passed = failed == 0;
        self.summary = format!(
            "{}: {} of {} assertions passed over {} rows",
            self.suite_id,
            self.assertions.len() - failed,
            self.assertions.len(),
            self.rows.len()
        );
        self
    }

    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(self.columns.clone());
        for r in &self.rows {
            t.push(r.clone());
        }
        t
    }

    pub fn assertion_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["assertion", "measured", "comparison", "threshold", "passed", "provenance"]);
        for a in &self.assertions {
            let cmp = match a.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
                Comparison::Equal => "==",
            };
            t.push([
                a.name.clone(),
                a.measured.to_string(),
                cmp.to_string(),
                a.threshold.to_string(),
                a.passed.to_string(),
                a.provenance.clone(),
            ]);
        }
        t
    }
}

fn params<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_provenance() {
        let c = Calibration::parse("# first\n# second\na.b = 1.5\n\nc = 2\n").unwrap();
        assert_eq!(c.get("a.b").unwrap().value, 1.5);
        assert_eq!(c.get("a.b").unwrap().provenance, "first second");
        assert_eq!(c.get("c").unwrap().provenance, "");
        assert!(c.get("d").is_err());
        assert!(Calibration::parse("x = y").is_err());
        assert!(Calibration::parse("novalue").is_err());
    }

    #[test]
    fn embedded_calibration_has_provenance() {
        let c = Calibration::embedded();
        assert!(!c.entries.is_empty());
        for (k, e) in &c.entries {
            assert!(!e.provenance.is_empty(), "{k} lacks provenance");
            assert!(e.value.is_finite(), "{k}");
        }
    }

    #[test]
    fn rule_specific_fallback() {
        let c = Calibration::parse("# p\ns.x = 1\n# q\ns.r.x = 2\n").unwrap();
        assert_eq!(c.get_for("s", "r", "x").unwrap().value, 2.0);
        assert_eq!(c.get_for("s", "other", "x").unwrap().value, 1.0);
    }
}
