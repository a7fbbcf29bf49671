//! Reporting helpers for the acceptance suite.
//!
//! Each criterion produces one `PASS` or `FAIL` line. Informational lines
//! start with `INFO` and never affect the outcome.

#![warn(missing_docs)]

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Criterion number.
    pub id: u32,
    /// Short title.
    pub title: String,
    /// Whether every assertion of the criterion held.
    pub pass: bool,
    /// Observed values and thresholds.
    pub detail: String,
    /// Wall time.
    pub elapsed: Duration,
}

impl Outcome {
    /// The `PASS`/`FAIL` line.
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Accumulates observations for one criterion.
#[derive(Debug, Default)]
pub struct Record {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

impl Record {
    fn new() -> Self {
        Self {
            pass: true,
            ..Self::default()
        }
    }

    /// Records `ok` together with a short description of what was compared.
    pub fn assert(&mut self, ok: bool, what: impl AsRef<str>) -> &mut Self {
        self.pass &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        if !ok {
            self.detail.push('!');
        }
        self.detail.push_str(what.as_ref());
        self
    }

    /// Adds an informational line that does not affect the outcome.
    pub fn info(&mut self, line: impl Into<String>) -> &mut Self {
        self.info.push(line.into());
        self
    }

    /// Fails the criterion with an error message.
    pub fn error(&mut self, err: impl std::fmt::Display) -> &mut Self {
        self.assert(false, format!("error: {err}"))
    }
}

/// Runs criteria and prints one line per criterion.
#[derive(Debug)]
pub struct Suite {
    selected: Option<BTreeSet<u32>>,
    outcomes: Vec<Outcome>,
}

impl Suite {
    /// Reads an optional comma-separated list of criterion numbers from
    /// the environment variable `var`; all criteria run when it is unset.
    pub fn from_env(var: &str) -> Self {
        let selected = std::env::var(var).ok().map(|s| {
            s.split(',')
                .filter_map(|x| x.trim().parse().ok())
                .collect::<BTreeSet<u32>>()
        });
        Self {
            selected,
            outcomes: Vec::new(),
        }
    }

    /// Runs criterion `id` unless it is filtered out.
    pub fn run(&mut self, id: u32, title: &str, body: impl FnOnce(&mut Record)) {
        if self.selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            return;
        }
        let start = Instant::now();
        let mut record = Record::new();
        body(&mut record);
        let outcome = Outcome {
            id,
            title: title.to_string(),
            pass: record.pass,
            detail: record.detail,
            elapsed: start.elapsed(),
        };
        println!("{}", outcome.line());
        for line in &record.info {
            println!("INFO [{id:>2}] {line}");
        }
        self.outcomes.push(outcome);
    }

    /// All outcomes so far.
    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// Prints a summary and returns failure when any criterion failed.
    pub fn finish(self) -> ExitCode {
        let failed: Vec<u32> = self
            .outcomes
            .iter()
            .filter(|o| !o.pass)
            .map(|o| o.id)
            .collect();
        let mut summary = format!(
            "acceptance: {} passed, {} failed",
            self.outcomes.len() - failed.len(),
            failed.len()
        );
        if !failed.is_empty() {
            let _ = write!(summary, " ({failed:?})");
        }
        println!("{summary}");
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    }
}
