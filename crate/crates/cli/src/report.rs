//! On-disk report format: pretty-printed JSON, one top-level object
//! `{format, version, config, body}` with `body` an externally tagged enum.
//! Scalars are always written as "n/d" strings so the output is exact and
//! byte-stable across runs.

use std::path::Path;

use hypercyclic::{Construction, OrbitReport, SynthesisCertificate, TargetSchedule, VisitCheck};
use serde::{Deserialize, Serialize};

use crate::{CliError, RunConfig};

pub const FORMAT: &str = "hypercyclic-report";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    pub body: ReportBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportBody {
    Synthesis { schedule: TargetSchedule, certificate: SynthesisCertificate, checks: Vec<VisitCheck> },
    Construction { variant: Variant, construction: Box<Construction> },
    Verification(VerificationOutcome),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Similarities are rank-two transitive maps; no dual data.
    Direct,
    /// Similarities are finite-rank updates carrying a common dual functional.
    Dual,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Direct => "direct",
            Variant::Dual => "dual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    /// `"synthesis"` or `"construction"`.
    pub source_kind: String,
    pub checks: Vec<Check>,
    pub orbit: Option<OrbitReport>,
    pub verdict: bool,
}

impl VerificationOutcome {
    pub fn summary(&self) -> String {
        let mut s = format!("verifying {} report\n", self.source_kind);
        for c in &self.checks {
            s += &format!("  [{}] {:<22} {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
        }
        if let Some(orbit) = &self.orbit {
            s += &orbit.summary_table();
        }
        s += &format!("overall: {}\n", if self.verdict { "PASS" } else { "FAIL" });
        s
    }
}

impl Report {
    pub fn new(config: RunConfig, body: ReportBody) -> Self {
        Report { format: FORMAT.to_string(), version: VERSION, config, body }
    }

    pub fn passed(&self) -> bool {
        match &self.body {
            ReportBody::Synthesis { checks, .. } => checks.iter().all(VisitCheck::passed),
            ReportBody::Construction { .. } => true,
            ReportBody::Verification(v) => v.verdict,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialisation is infallible");
        s.push('\n');
        s
    }

    /// Parse errors and format mismatches are verification failures: the
    /// file exists but cannot be trusted.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let report: Report =
            serde_json::from_str(text).map_err(|e| CliError::Verification(format!("unreadable report: {e}")))?;
        if report.format != FORMAT || report.version != VERSION {
            return Err(CliError::Verification(format!(
                "unsupported report format {} v{}",
                report.format, report.version
            )));
        }
        Ok(report)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }
}
