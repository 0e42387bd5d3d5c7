//! Versioned JSON reports.  Schema version 1: experiment name, environment
//! fingerprint, one record per prime with named quantities and failure
//! notes, and an overall pass flag.  For a fixed configuration and seed the
//! serialized report is byte-identical across runs except for the
//! `runtime_ms` fields.

use std::collections::BTreeMap;

use anyhow::Result;
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub cost_cap: u64,
    pub seed: u64,
    pub primes: Vec<u64>,
}

impl Environment {
    pub fn current(seed: u64, primes: &[u64]) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            cost_cap: ulab_core::counting::cost_cap(),
            seed,
            primes: primes.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimeRecord {
    pub prime: u64,
    /// Named measured quantities, sorted by name.
    pub quantities: BTreeMap<String, f64>,
    /// Human-readable descriptions of failed checks (empty on pass).
    #[serde(default)]
    pub failures: Vec<String>,
    pub pass: bool,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub environment: Environment,
    pub records: Vec<PrimeRecord>,
    pub pass: bool,
}

impl Report {
    pub fn new(experiment: &str, environment: Environment, records: Vec<PrimeRecord>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: experiment.to_string(),
            environment,
            records,
            pass,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Serialization with every runtime field zeroed — the byte-identical
    /// form two runs of the same configuration must agree on.
    pub fn canonical_json(&self) -> Result<String> {
        let mut clone = self.clone();
        for r in &mut clone.records {
            r.runtime_ms = 0;
        }
        clone.to_json()
    }
}

/// A bundle of suite reports, as produced by `verify all`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub reports: Vec<Report>,
    pub pass: bool,
}

impl ReportBundle {
    pub fn new(reports: Vec<Report>) -> Self {
        let pass = reports.iter().all(|r| r.pass);
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            reports,
            pass,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn canonical_json(&self) -> Result<String> {
        let mut clone = self.clone();
        for report in &mut clone.reports {
            for r in &mut report.records {
                r.runtime_ms = 0;
            }
        }
        clone.to_json()
    }
}

/// Measure a record body, filling the runtime.
pub fn timed_record<F>(prime: u64, body: F) -> Result<PrimeRecord>
where
    F: FnOnce(&mut BTreeMap<String, f64>, &mut Vec<String>) -> Result<()>,
{
    let start = std::time::Instant::now();
    let mut quantities = BTreeMap::new();
    let mut failures = Vec::new();
    body(&mut quantities, &mut failures)?;
    Ok(PrimeRecord {
        prime,
        pass: failures.is_empty(),
        quantities,
        failures,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let rec = PrimeRecord {
            prime: 5,
            quantities: [("gap".to_string(), 0.25)].into_iter().collect(),
            failures: vec![],
            pass: true,
            runtime_ms: 17,
        };
        Report::new("demo", Environment::current(9, &[5]), vec![rec])
    }

    #[test]
    fn schema_version_is_one_and_round_trips() {
        let report = sample();
        assert_eq!(report.schema_version, 1);
        let text = report.to_json().unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.experiment, "demo");
        assert_eq!(back.records[0].runtime_ms, 17);
        assert!(back.pass);
    }

    #[test]
    fn canonical_form_zeroes_runtime_only() {
        let report = sample();
        let canon = report.canonical_json().unwrap();
        assert!(canon.contains("\"runtime_ms\": 0"));
        assert!(canon.contains("\"gap\": 0.25"));
        // a second report differing only in runtime agrees canonically
        let mut other = report.clone();
        other.records[0].runtime_ms = 900;
        assert_eq!(canon, other.canonical_json().unwrap());
        assert_ne!(report.to_json().unwrap(), other.to_json().unwrap());
    }

    #[test]
    fn failures_flip_the_pass_flags() {
        let rec = timed_record(3, |q, fails| {
            q.insert("x".into(), 1.0);
            fails.push("instance 4: gap 0.2 exceeds bound".into());
            Ok(())
        })
        .unwrap();
        assert!(!rec.pass);
        let report = Report::new("demo", Environment::current(0, &[3]), vec![rec]);
        assert!(!report.pass);
        let bundle = ReportBundle::new(vec![report]);
        assert!(!bundle.pass);
    }
}
