//! Deterministic pass/fail reporting for verification sweeps.
//!
//! Every verifier in this crate produces a [`VerifyReport`]: an ordered list
//! of named checks, each passing or failing with the first witness found in
//! canonical enumeration order. Reports for the same input are byte-identical
//! across runs.

use serde::Serialize;

/// One named check with its outcome.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// First violating tuple, rendered with element labels; absent on pass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Extra context, e.g. why a hypothesis-gated check was skipped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Informational facts that are reported but do not gate pass/fail
/// (e.g. structural properties that are allowed to be absent).
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ReportNote {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<ReportNote>,
}

impl VerifyReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn push(&mut self, name: &str, witness: Option<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass: witness.is_none(),
            witness,
            note: None,
        });
    }

    pub fn pass(&mut self, name: &str) {
        self.push(name, None);
    }

    pub fn fail(&mut self, name: &str, witness: String) {
        self.push(name, Some(witness));
    }

    /// Record a check that was not run because its hypothesis fails.
    /// Counts as passing; the note says why it was skipped.
    pub fn skip(&mut self, name: &str, why: &str) {
        self.checks.push(Check {
            name: name.to_string(),
            pass: true,
            witness: None,
            note: Some(format!("skipped: {why}")),
        });
    }

    pub fn note(&mut self, name: &str, value: String) {
        self.notes.push(ReportNote {
            name: name.to_string(),
            value,
        });
    }

    /// Run `body` and record its first witness (if any) under `name`.
    pub fn sweep(&mut self, name: &str, body: impl FnOnce() -> Option<String>) {
        self.push(name, body());
    }

    /// Append all checks and notes of `other`, prefixing their names.
    pub fn merge(&mut self, prefix: &str, other: VerifyReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        for mut n in other.notes {
            n.name = format!("{prefix}.{}", n.name);
            self.notes.push(n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_outcomes() {
        let mut r = VerifyReport::new();
        r.pass("a");
        r.sweep("b", || None);
        assert!(r.all_pass());
        r.fail("c", "x=1".into());
        assert!(!r.all_pass());
        assert_eq!(r.failed().count(), 1);
        assert_eq!(r.get("c").unwrap().witness.as_deref(), Some("x=1"));
        r.skip("d", "hypothesis fails");
        assert!(r.get("d").unwrap().pass);
    }
}
