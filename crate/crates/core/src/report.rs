//! Check reports in a human-readable and a line-oriented machine format.
//!
//! The body of a report depends only on the instance and the seed; timing
//! is kept out of it so reruns can be compared byte for byte.

use std::fmt::{self, Write as _};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::tree::NodeId;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

/// One verdict with its certificate rendered as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub verdict: String,
    pub certificate: String,
}

impl Check {
    pub fn new(id: impl Into<String>, passed: bool, verdict: impl Into<String>, certificate: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            passed,
            verdict: verdict.into(),
            certificate: certificate.into(),
        }
    }

    pub fn certificate_digest(&self) -> String {
        digest(self.certificate.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub instance_digest: Option<String>,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub elapsed: Option<Duration>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            instance_digest: None,
            seed: None,
            checks: Vec::new(),
            elapsed: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// The deterministic part of the report.
    pub fn body(&self, format: Format) -> String {
        let mut out = String::new();
        let passed = self.checks.iter().filter(|c| c.passed).count();
        match format {
            Format::Text => {
                writeln!(out, "command: {}", self.command).unwrap();
                if let Some(d) = &self.instance_digest {
                    writeln!(out, "instance: sha256:{d}").unwrap();
                }
                if let Some(s) = self.seed {
                    writeln!(out, "seed: {s}").unwrap();
                }
                for c in &self.checks {
                    let mark = if c.passed { "ok  " } else { "FAIL" };
                    writeln!(out, "{mark} {} {}", c.id, c.verdict).unwrap();
                    for line in c.certificate.lines() {
                        writeln!(out, "       {line}").unwrap();
                    }
                }
                writeln!(out, "{passed}/{} checks passed", self.checks.len()).unwrap();
            }
            Format::Machine => {
                writeln!(out, "#command\t{}", self.command).unwrap();
                if let Some(d) = &self.instance_digest {
                    writeln!(out, "#instance\t{d}").unwrap();
                }
                if let Some(s) = self.seed {
                    writeln!(out, "#seed\t{s}").unwrap();
                }
                for c in &self.checks {
                    writeln!(out, "{}\t{}\t{}", c.id, c.verdict, c.certificate_digest()).unwrap();
                }
            }
        }
        out
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `(a, b, c)` with exact entries.
pub fn fmt_values(v: &[Rational]) -> String {
    let mut s = String::from("(");
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        write!(s, "{x}").unwrap();
    }
    s.push(')');
    s
}

pub fn fmt_node(n: NodeId) -> String {
    n.to_string()
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.body(Format::Text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn sample() -> Report {
        let mut r = Report::new("check budget");
        r.seed = Some(3);
        r.instance_digest = Some(digest(b"x"));
        r.push(Check::new("budget", false, "false", "measure (1/3, 0, 2/3)"));
        r.push(Check::new("tree", true, "valid", ""));
        r
    }

    #[test]
    fn machine_lines_are_tab_separated() {
        let body = sample().body(Format::Machine);
        let line = body.lines().find(|l| l.starts_with("budget")).unwrap();
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[1], "false");
        assert_eq!(fields[2], digest(b"measure (1/3, 0, 2/3)"));
    }

    #[test]
    fn timing_stays_out_of_the_body() {
        let a = sample();
        let mut b = sample();
        b.elapsed = Some(Duration::from_secs(9));
        assert_eq!(a.body(Format::Text), b.body(Format::Text));
        assert_eq!(a.exit_code(), 1);
    }

    #[test]
    fn values_render_exactly() {
        assert_eq!(fmt_values(&[rat(1, 3), rat(0, 1), rat(-4, 2)]), "(1/3, 0, -2)");
    }
}
