//! Validation reports: one record per named check, with residuals and witnesses.

use std::fmt::Write as _;

use crate::linalg::format_real;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub id: String,
    pub passed: bool,
    /// Largest residual seen. Exact (combinatorial) checks report 0 or 1.
    pub residual: f64,
    pub tol: f64,
    pub evaluated: usize,
    pub violations: usize,
    pub witness: Option<String>,
}

/// Accumulates evidence for a single check.
#[derive(Debug, Clone)]
pub struct Check {
    id: String,
    tol: f64,
    residual: f64,
    evaluated: usize,
    violations: usize,
    witness: Option<String>,
    worst: f64,
}

impl Check {
    /// A combinatorial law: any violation fails it.
    pub fn exact(id: impl Into<String>) -> Self {
        Self::within(id, 0.0)
    }

    pub fn within(id: impl Into<String>, tol: f64) -> Self {
        Check {
            id: id.into(),
            tol,
            residual: 0.0,
            evaluated: 0,
            violations: 0,
            witness: None,
            worst: f64::NEG_INFINITY,
        }
    }

    /// Record one evaluated instance. The witness closure only runs when the
    /// instance is the worst violation seen so far.
    pub fn observe(&mut self, residual: f64, witness: impl FnOnce() -> String) {
        self.evaluated += 1;
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        if residual > self.residual {
            self.residual = residual;
        }
        if residual > self.tol {
            self.violations += 1;
            if residual > self.worst {
                self.worst = residual;
                self.witness = Some(witness());
            }
        }
    }

    /// Record an exact law instance.
    pub fn holds(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.observe(if ok { 0.0 } else { 1.0 }, witness);
    }

    pub fn finish(self) -> CheckRecord {
        CheckRecord {
            passed: self.violations == 0,
            id: self.id,
            residual: self.residual,
            tol: self.tol,
            evaluated: self.evaluated,
            violations: self.violations,
            witness: self.witness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<CheckRecord>,
    /// Malformed input, as opposed to law violations.
    pub structural: Vec<String>,
    /// Named numeric results (ranks, norms, dimensions).
    pub metrics: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        ValidationReport {
            subject: subject.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check.finish());
    }

    pub fn push_record(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn structural(&mut self, msg: impl Into<String>) {
        self.structural.push(msg.into());
    }

    pub fn metric(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metrics.push((key.into(), value.to_string()));
    }

    pub fn metric_real(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.push((key.into(), format_real(value)));
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Append every record of `other`, prefixing check ids with `prefix`.
    pub fn absorb(&mut self, prefix: &str, other: ValidationReport) {
        let tag = |s: String| if prefix.is_empty() { s } else { format!("{prefix}.{s}") };
        for mut c in other.checks {
            c.id = tag(c.id);
            self.checks.push(c);
        }
        self.structural.extend(other.structural.into_iter().map(|s| tag(s)));
        self.metrics
            .extend(other.metrics.into_iter().map(|(k, v)| (tag(k), v)));
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.structural.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failed_ids(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.as_str())
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |acc, c| acc.max(c.residual))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => self.render_machine(),
            Format::Human => self.render_human(),
        }
    }

    /// Line-oriented `key=value` records. Stable for identical inputs.
    pub fn render_machine(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "subject={}", one_line(&self.subject));
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check={} status={} residual={} tol={} evaluated={} violations={} witness={}",
                c.id,
                if c.passed { "pass" } else { "fail" },
                format_real(c.residual),
                format_real(c.tol),
                c.evaluated,
                c.violations,
                c.witness.as_deref().map(one_line).unwrap_or_else(|| "-".into()),
            );
        }
        for s in &self.structural {
            let _ = writeln!(out, "structural={}", one_line(s));
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "{}={}", k, one_line(v));
        }
        for n in &self.notes {
            let _ = writeln!(out, "note={}", one_line(n));
        }
        let _ = writeln!(out, "verdict={}", if self.passed() { "pass" } else { "fail" });
        out
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.subject);
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = write!(
                out,
                "  {:<width$}  {}  residual {:.3e} (tol {:.1e}, {} evaluated)",
                c.id,
                if c.passed { "ok  " } else { "FAIL" },
                c.residual,
                c.tol,
                c.evaluated,
            );
            if let Some(w) = &c.witness {
                let _ = write!(out, "  witness: {w}");
            }
            out.push('\n');
        }
        for s in &self.structural {
            let _ = writeln!(out, "  structural: {s}");
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        let _ = writeln!(out, "verdict: {}", if self.passed() { "pass" } else { "fail" });
        out
    }
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_witness_is_kept() {
        let mut c = Check::within("F4", 1e-9);
        c.observe(0.0, || "a".into());
        c.observe(1e-3, || "b".into());
        c.observe(1e-6, || "c".into());
        let r = c.finish();
        assert!(!r.passed);
        assert_eq!(r.violations, 2);
        assert_eq!(r.witness.as_deref(), Some("b"));
        assert_eq!(r.evaluated, 3);
    }

    #[test]
    fn nan_residual_fails() {
        let mut c = Check::within("X", 1.0);
        c.observe(f64::NAN, || "nan".into());
        assert!(!c.finish().passed);
    }

    #[test]
    fn verdict_accounts_for_structural_errors() {
        let mut r = ValidationReport::new("t");
        r.push(Check::exact("A"));
        assert!(r.passed());
        r.structural("dangling id");
        assert!(!r.passed());
        assert!(r.render_machine().ends_with("verdict=fail\n"));
    }
}
