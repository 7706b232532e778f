//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::time::Instant;

pub struct Check {
    /// `None` marks an informational line.
    pub ok: Option<bool>,
    pub text: String,
}

#[derive(Default)]
pub struct Criterion {
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn check(&mut self, ok: bool, text: impl Into<String>) {
        self.checks.push(Check {
            ok: Some(ok),
            text: text.into(),
        });
    }

    pub fn info(&mut self, text: impl Into<String>) {
        self.checks.push(Check {
            ok: None,
            text: text.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok != Some(false))
    }
}

/// Standard deviation of an empirical frequency with probability `p` over `n` trials.
pub fn binom_sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

/// One acceptance criterion: a name, a runtime limit in seconds and its checks.
pub struct Entry {
    pub name: &'static str,
    pub time_limit: Option<f64>,
    pub body: fn(&mut Criterion),
}

/// Runs the entries selected by `filter` (criterion number or name
/// fragment), prints one verdict line per criterion followed by its checks,
/// and returns the number of failed criteria.
pub fn run(entries: &[Entry], filter: Option<&str>) -> usize {
    let mut failed = 0;
    for (i, e) in entries.iter().enumerate() {
        let id = (i + 1).to_string();
        if let Some(f) = filter {
            if f != id && !e.name.contains(f) {
                continue;
            }
        }
        let start = Instant::now();
        let mut c = Criterion::default();
        (e.body)(&mut c);
        let secs = start.elapsed().as_secs_f64();
        if let Some(limit) = e.time_limit {
            c.check(secs <= limit, format!("runtime {secs:.1} s (limit {limit} s)"));
        }
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        if !c.passed() {
            failed += 1;
        }
        println!("{verdict} criterion {id}: {} ({secs:.1} s)", e.name);
        for ch in &c.checks {
            let tag = match ch.ok {
                Some(true) => "ok  ",
                Some(false) => "FAIL",
                None => "info",
            };
            println!("    {tag} {}", ch.text);
        }
    }
    failed
}
