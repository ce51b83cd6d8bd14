//! Reporting helpers for the acceptance checks.

use std::time::{Duration, Instant};

/// Outcome of one numbered acceptance criterion.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
    pub details: Vec<String>,
}

impl Verdict {
    /// One summary line followed by indented detail lines.
    pub fn render(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut out = format!(
            "criterion {} {status}: {} [{:.2} s",
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        );
        if let Some(b) = self.budget {
            out.push_str(&format!(" of {:.0} s budget", b.as_secs_f64()));
        }
        out.push(']');
        for d in &self.details {
            out.push_str("\n    ");
            out.push_str(d);
        }
        out
    }
}

/// Collects details and checks while timing a criterion.
pub struct Check {
    id: u32,
    title: &'static str,
    budget: Option<Duration>,
    start: Instant,
    passed: bool,
    details: Vec<String>,
}

impl Check {
    pub fn start(id: u32, title: &'static str, budget_secs: Option<f64>) -> Self {
        Self {
            id,
            title,
            budget: budget_secs.map(Duration::from_secs_f64),
            start: Instant::now(),
            passed: true,
            details: Vec::new(),
        }
    }

    /// Record a sub-check; any failing sub-check fails the criterion.
    pub fn require(&mut self, ok: bool, detail: impl Into<String>) {
        let tag = if ok { "ok  " } else { "FAIL" };
        self.details.push(format!("{tag} {}", detail.into()));
        self.passed &= ok;
    }

    /// Record an informational line that does not affect the verdict.
    pub fn note(&mut self, detail: impl Into<String>) {
        self.details.push(format!("info {}", detail.into()));
    }

    pub fn finish(self) -> Verdict {
        let elapsed = self.start.elapsed();
        let mut v = Verdict {
            id: self.id,
            title: self.title,
            passed: self.passed,
            elapsed,
            budget: self.budget,
            details: self.details,
        };
        if let Some(b) = self.budget {
            let ok = elapsed <= b;
            v.details.push(format!(
                "{} runtime {:.2} s within {:.0} s",
                if ok { "ok  " } else { "FAIL" },
                elapsed.as_secs_f64(),
                b.as_secs_f64()
            ));
            v.passed &= ok;
        }
        v
    }
}
