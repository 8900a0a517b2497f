//! Fail-slow validation reports.
//!
//! Checks never abort on the first law violation: they accumulate issues so
//! mutation tests can assert on specific witnesses. Structural problems
//! (missing table entries, dangling references) are kept distinct from law
//! violations, and truncation or sampling of an enumeration is recorded as a
//! warning rather than a failure.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    /// Enumeration was cut short or sampled; result holds for the checked part.
    Truncation,
    /// Suspicious but not a failure (e.g. Loc requested at a non-trivial object).
    Warning,
    /// A law of the claimed structure fails; witnesses identify where.
    Law,
    /// The input data is malformed (missing composite, dangling id, non-total map).
    Structural,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    /// Stable machine-readable code, e.g. `compose.mismatch`.
    pub code: String,
    pub message: String,
    /// Rendered values pinpointing the offending datum, in a stable order.
    pub witnesses: Vec<String>,
}

/// Outcome of one check. Empty = the property holds as stated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub check: String,
    pub issues: Vec<Issue>,
    /// Coverage notes: which quantifications were exhaustive vs sampled.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn new(check: impl Into<String>) -> Self {
        ValidationReport {
            check: check.into(),
            issues: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        severity: Severity,
        code: impl Into<String>,
        message: impl Into<String>,
        witnesses: Vec<String>,
    ) {
        self.issues.push(Issue {
            severity,
            code: code.into(),
            message: message.into(),
            witnesses,
        });
    }

    pub fn structural(&mut self, code: &str, message: impl Into<String>, witnesses: Vec<String>) {
        self.push(Severity::Structural, code, message, witnesses);
    }

    pub fn law(&mut self, code: &str, message: impl Into<String>, witnesses: Vec<String>) {
        self.push(Severity::Law, code, message, witnesses);
    }

    pub fn warn(&mut self, code: &str, message: impl Into<String>, witnesses: Vec<String>) {
        self.push(Severity::Warning, code, message, witnesses);
    }

    pub fn truncated(&mut self, code: &str, message: impl Into<String>, witnesses: Vec<String>) {
        self.push(Severity::Truncation, code, message, witnesses);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// No law or structural issues (truncations and warnings allowed).
    pub fn passed(&self) -> bool {
        !self
            .issues
            .iter()
            .any(|i| matches!(i.severity, Severity::Law | Severity::Structural))
    }

    /// No issues of any severity, truncations included.
    pub fn clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn truncated_any(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Truncation)
    }

    /// Merge a sub-report, prefixing its check name onto codes for context.
    pub fn absorb(&mut self, sub: ValidationReport) {
        for mut issue in sub.issues {
            issue.code = format!("{}.{}", sub.check, issue.code);
            self.issues.push(issue);
        }
        for note in sub.notes {
            self.notes.push(format!("{}: {}", sub.check, note));
        }
    }

    /// Canonicalize: sort issues (severity, code, witnesses) and notes.
    pub fn finish(mut self) -> Self {
        self.issues.sort_by(|a, b| {
            (b.severity, &a.code, &a.witnesses, &a.message)
                .cmp(&(a.severity, &b.code, &b.witnesses, &b.message))
        });
        self.notes.sort();
        self.notes.dedup();
        self
    }

    /// True when some issue's witnesses mention `needle`.
    pub fn mentions(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| {
            i.message.contains(needle) || i.witnesses.iter().any(|w| w.contains(needle))
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clean() {
            return write!(f, "{}: ok", self.check);
        }
        writeln!(f, "{}: {} issue(s)", self.check, self.issues.len())?;
        for i in &self.issues {
            writeln!(
                f,
                "  [{:?}] {}: {} {}",
                i.severity,
                i.code,
                i.message,
                i.witnesses.join(", ")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_ignores_truncation_and_warning() {
        let mut r = ValidationReport::new("t");
        r.truncated("cut", "sampled", vec![]);
        r.warn("w", "warned", vec![]);
        assert!(r.passed());
        assert!(!r.clean());
        r.law("bad", "law broke", vec!["x".into()]);
        assert!(!r.passed());
        assert!(r.mentions("x"));
    }

    #[test]
    fn finish_orders_failures_first() {
        let mut r = ValidationReport::new("t");
        r.truncated("cut", "sampled", vec![]);
        r.structural("s", "broken", vec![]);
        let r = r.finish();
        assert_eq!(r.issues[0].severity, Severity::Structural);
    }
}
