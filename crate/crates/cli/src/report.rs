//! Structured verification reports.
//!
//! Every scenario produces one `VerificationReport`: an ordered list of
//! named checks, each carrying the measured value, the budget it was held
//! to, and a short anchor phrase saying which mathematical statement the
//! check exercises.  Reports serialize to JSON with a stable field order
//! and contain no timestamps, so identical runs produce identical bytes.

use serde::Serialize;

/// Outcome of a single check.
///
/// `SoftWarn` marks diagnostics that are reported against an advisory
/// budget but do not gate the scenario (for example residuals that carry an
/// interface contribution by construction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    SoftWarn,
    Fail,
}

/// One named check with its measured value and budget.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    /// Machine-friendly check name, unique within a report.
    pub name: String,
    pub status: CheckStatus,
    /// The measured quantity (defect, residual, ratio error, ...).
    pub measured: f64,
    /// The budget the measurement was compared against.
    pub budget: f64,
    /// Which statement this check exercises, in plain words.
    pub anchor: String,
    /// Optional free-form detail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The full result of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub kind: String,
    pub s: f64,
    pub seed: u64,
    pub checks: Vec<CheckEntry>,
    /// Set when the pipeline aborted before completing its checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerificationReport {
    pub fn new(scenario: &str, kind: &str, s: f64, seed: u64) -> Self {
        VerificationReport {
            scenario: scenario.to_string(),
            kind: kind.to_string(),
            s,
            seed,
            checks: Vec::new(),
            error: None,
        }
    }

    /// Hard gate: passes iff `measured <= budget` (NaN fails).
    pub fn gate(&mut self, name: &str, anchor: &str, measured: f64, budget: f64) -> bool {
        let ok = measured.is_finite() && measured <= budget;
        self.checks.push(CheckEntry {
            name: name.to_string(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            measured,
            budget,
            anchor: anchor.to_string(),
            note: None,
        });
        ok
    }

    /// Like `gate`, with an explanatory note attached.
    pub fn gate_with_note(
        &mut self,
        name: &str,
        anchor: &str,
        measured: f64,
        budget: f64,
        note: &str,
    ) -> bool {
        let ok = self.gate(name, anchor, measured, budget);
        if let Some(last) = self.checks.last_mut() {
            last.note = Some(note.to_string());
        }
        ok
    }

    /// Advisory check: exceeding the budget yields `SoftWarn`, never `Fail`.
    pub fn soft(&mut self, name: &str, anchor: &str, measured: f64, budget: f64) {
        let ok = measured.is_finite() && measured <= budget;
        self.checks.push(CheckEntry {
            name: name.to_string(),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::SoftWarn
            },
            measured,
            budget,
            anchor: anchor.to_string(),
            note: None,
        });
    }

    /// Advisory check with a note.
    pub fn soft_with_note(
        &mut self,
        name: &str,
        anchor: &str,
        measured: f64,
        budget: f64,
        note: &str,
    ) {
        self.soft(name, anchor, measured, budget);
        if let Some(last) = self.checks.last_mut() {
            last.note = Some(note.to_string());
        }
    }

    /// Record an externally decided pass/fail with the evidence numbers.
    pub fn flag(&mut self, name: &str, anchor: &str, ok: bool, measured: f64, budget: f64) {
        self.checks.push(CheckEntry {
            name: name.to_string(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            measured,
            budget,
            anchor: anchor.to_string(),
            note: None,
        });
    }

    /// A report passes when nothing failed and the pipeline completed.
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn n_failed(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .count()
    }

    pub fn n_warned(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::SoftWarn)
            .count()
    }

    /// One-line console summary: status, name, counts.
    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let warn = if self.n_warned() > 0 {
            format!(", {} warn", self.n_warned())
        } else {
            String::new()
        };
        match &self.error {
            Some(e) => format!(
                "[{status}] {} ({} checks, {} failed{warn}) error: {e}",
                self.scenario,
                self.checks.len(),
                self.n_failed()
            ),
            None => format!(
                "[{status}] {} ({} checks, {} failed{warn})",
                self.scenario,
                self.checks.len(),
                self.n_failed()
            ),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Aggregate summary across a batch of scenarios (the `verify` subcommand).
#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: Vec<String>,
    pub scenarios: Vec<BatchLine>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchLine {
    pub scenario: String,
    pub kind: String,
    pub s: f64,
    pub passed: bool,
    pub checks: usize,
    pub failed_checks: usize,
    pub warned_checks: usize,
}

impl BatchSummary {
    pub fn from_reports(reports: &[VerificationReport]) -> Self {
        BatchSummary {
            total: reports.len(),
            passed: reports.iter().filter(|r| r.passed()).count(),
            failed: reports
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.scenario.clone())
                .collect(),
            scenarios: reports
                .iter()
                .map(|r| BatchLine {
                    scenario: r.scenario.clone(),
                    kind: r.kind.clone(),
                    s: r.s,
                    passed: r.passed(),
                    checks: r.checks.len(),
                    failed_checks: r.n_failed(),
                    warned_checks: r.n_warned(),
                })
                .collect(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_semantics() {
        let mut r = VerificationReport::new("t", "eigenmode", 0.5, 0);
        assert!(r.gate("a", "anchor", 1e-3, 1e-2));
        assert!(!r.gate("b", "anchor", 1e-1, 1e-2));
        assert!(!r.gate("c", "anchor", f64::NAN, 1e-2));
        r.soft("d", "anchor", 1.0, 0.5);
        assert!(!r.passed());
        assert_eq!(r.n_failed(), 2);
        assert_eq!(r.n_warned(), 1);
    }

    #[test]
    fn soft_warns_do_not_fail_the_report() {
        let mut r = VerificationReport::new("t", "eigenmode", 0.5, 0);
        r.soft("d", "anchor", 1.0, 0.5);
        assert!(r.passed());
        assert!(r.summary_line().starts_with("[PASS]"));
    }

    #[test]
    fn json_has_stable_shape_and_no_timestamps() {
        let mut r = VerificationReport::new("t", "eigenmode", 0.5, 7);
        r.gate("a", "anchor", 1e-3, 1e-2);
        let one = r.to_json();
        let two = r.to_json();
        assert_eq!(one, two);
        assert!(one.contains("\"seed\": 7"));
        assert!(!one.to_lowercase().contains("time"));
    }
}
