//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::time::{Duration, Instant};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: &'static str,
    pub title: &'static str,
    pub checks_pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Verdict {
    /// Passing needs every check and the runtime budget.
    pub fn pass(&self) -> bool {
        self.checks_pass && self.elapsed <= self.budget
    }

    pub fn line(&self) -> String {
        let tag = if self.pass() { "PASS" } else { "FAIL" };
        let over = if self.elapsed > self.budget { " OVER BUDGET" } else { "" };
        format!(
            "[{tag}] criterion {} ({}): {} [{:.1} s of {:.0} s{over}]",
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64()
        )
    }
}

/// Times `f`, which returns whether its checks hold and a description.
pub fn run_criterion<F>(id: &'static str, title: &'static str, budget_secs: u64, f: F) -> Verdict
where
    F: FnOnce() -> (bool, String),
{
    let start = Instant::now();
    let (checks_pass, detail) = f();
    Verdict { id, title, checks_pass, detail, elapsed: start.elapsed(), budget: Duration::from_secs(budget_secs) }
}

/// Collects per-part results into one line.
#[derive(Debug, Default)]
pub struct Parts {
    ok: bool,
    notes: Vec<String>,
}

impl Parts {
    pub fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    pub fn check(&mut self, pass: bool, note: impl Into<String>) {
        self.ok &= pass;
        let mark = if pass { "ok" } else { "MISS" };
        self.notes.push(format!("{} {mark}", note.into()));
    }

    pub fn info(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(self) -> (bool, String) {
        (self.ok, self.notes.join("; "))
    }
}
