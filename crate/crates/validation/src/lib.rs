//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::fmt;
use std::time::{Duration, Instant};

/// Result of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    /// The numerical condition held.
    pub met: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl Outcome {
    /// Passing requires the condition and the runtime budget.
    pub fn passed(&self) -> bool {
        self.met && self.elapsed <= self.limit
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let budget = if self.elapsed > self.limit { " over budget" } else { "" };
        write!(
            f,
            "[{verdict}] criterion {}: {} | {} | {:.1} s of {} s{budget}",
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }
}

/// Time `check`, which returns whether the condition held and a one-line
/// summary of the measured numbers. A panic or error inside `check` counts
/// as a failure.
pub fn run<F>(id: u32, title: &'static str, limit_secs: u64, check: F) -> Outcome
where
    F: FnOnce() -> Result<(bool, String), String> + std::panic::UnwindSafe,
{
    let start = Instant::now();
    let (met, detail) = match std::panic::catch_unwind(check) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(_) => (false, "panicked".to_owned()),
    };
    let outcome = Outcome {
        id,
        title,
        met,
        detail,
        elapsed: start.elapsed(),
        limit: Duration::from_secs(limit_secs),
    };
    println!("{outcome}");
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_counts() {
        let o = Outcome {
            id: 1,
            title: "t",
            met: true,
            detail: String::new(),
            elapsed: Duration::from_secs(2),
            limit: Duration::from_secs(1),
        };
        assert!(!o.passed());
        assert!(o.to_string().starts_with("[FAIL]"));
    }

    #[test]
    fn errors_and_panics_fail() {
        assert!(!run(0, "err", 10, || Err("boom".into())).met);
        assert!(!run(0, "panic", 10, || panic!("boom")).met);
        assert!(run(0, "ok", 10, || Ok((true, "fine".into()))).passed());
    }
}
