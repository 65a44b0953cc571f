//! Command reports: one human rendering for stdout and one line oriented
//! machine rendering for `--machine-output`.
//!
//! The machine format is `key=value`, one pair per line, in a fixed order
//! decided by the command code path, terminated by the overall status.
//! Identical inputs produce byte identical files: every value is rendered
//! by the exact engine, nothing in the report depends on time, environment,
//! or map iteration order. Rendered polynomials and graded functions use
//! the expression grammar, so a consumer can parse any witness back.

use std::fmt::Write as _;

/// An accumulating report; checks carry pass/fail and an optional witness,
/// plain values carry information that has no verdict.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
    human: String,
    failed: bool,
}

/// Machine keys never contain spaces, so splitting a line on the first
/// `=` always recovers the pair even when the value holds expressions.
fn slug(name: &str) -> String {
    name.replace(' ', "_")
}

impl Report {
    pub fn new(command: &str, model: &str) -> Self {
        let mut report = Report::default();
        report.lines.push(("command".into(), command.into()));
        report.lines.push(("model".into(), model.into()));
        let _ = writeln!(report.human, "{} on {}", command, model);
        report
    }

    /// Records an informational value.
    pub fn value(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        let _ = writeln!(self.human, "  {} = {}", key, value);
        self.lines.push((slug(key), value));
    }

    /// Records a named check; a failing check flips the overall status and
    /// carries its witness under `witness.<name>`.
    pub fn check(&mut self, name: &str, passed: bool, witness: Option<String>) {
        if passed {
            let _ = writeln!(self.human, "  ok   {}", name);
            self.lines.push((format!("check.{}", slug(name)), "pass".into()));
        } else {
            self.failed = true;
            self.lines.push((format!("check.{}", slug(name)), "fail".into()));
            match witness {
                Some(w) => {
                    let _ = writeln!(self.human, "  FAIL {}: {}", name, w);
                    self.lines.push((format!("witness.{}", slug(name)), w));
                }
                None => {
                    let _ = writeln!(self.human, "  FAIL {}", name);
                }
            }
        }
    }

    pub fn passed(&self) -> bool {
        !self.failed
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed {
            1
        } else {
            0
        }
    }

    pub fn human_text(&self) -> String {
        let status = if self.failed { "FAIL" } else { "ok" };
        format!("{}status: {}\n", self.human, status)
    }

    pub fn machine_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.lines {
            let _ = writeln!(out, "{}={}", key, value);
        }
        let _ = writeln!(out, "status={}", if self.failed { "fail" } else { "pass" });
        out
    }

    /// The machine lines, for tests that want to inspect single keys.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}
