use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::output::{fmt_f64, CsvError};

/// Where the target value of a check comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// Closed-form value from the analysis of the equation.
    Formula,
    /// Independent oracle computed here (exact solution, second run, property battery).
    Oracle,
    /// Input validation and bookkeeping.
    Plumbing,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Formula => "formula",
            Source::Oracle => "oracle",
            Source::Plumbing => "plumbing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    /// Strictly above the target.
    Above,
    Within,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
            Relation::Within => "~=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub target: f64,
    pub measured: f64,
    /// Absolute slack allowed beyond the target.
    pub tolerance: f64,
    pub source: Source,
    pub note: String,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, relation: Relation, measured: f64, target: f64, tol: f64, source: Source) -> Self {
        let pass = match relation {
            Relation::AtMost => measured <= target + tol,
            Relation::AtLeast => measured >= target - tol,
            Relation::Above => measured > target,
            Relation::Within => (measured - target).abs() <= tol,
        };
        Check { name: name.into(), relation, target, measured, tolerance: tol, source, note: String::new(), pass }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, target: f64, tol: f64, source: Source) -> Self {
        Self::new(name, Relation::AtMost, measured, target, tol, source)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, target: f64, tol: f64, source: Source) -> Self {
        Self::new(name, Relation::AtLeast, measured, target, tol, source)
    }

    /// `measured > 0`.
    pub fn positive(name: impl Into<String>, measured: f64, source: Source) -> Self {
        Self::new(name, Relation::Above, measured, 0.0, 0.0, source)
    }

    pub fn within(name: impl Into<String>, measured: f64, target: f64, tol: f64, source: Source) -> Self {
        Self::new(name, Relation::Within, measured, target, tol, source)
    }

    /// A solver failure recorded as a failed check instead of an abort.
    pub fn failed(name: impl Into<String>, source: Source, why: impl ToString) -> Self {
        let mut c = Self::new(name, Relation::Within, f64::NAN, 0.0, 0.0, source);
        c.note = why.to_string();
        c
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub parameters: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
    /// Skipped checks and truncated sweeps.
    pub notices: Vec<String>,
    pub wall_clock: Duration,
}

impl ExperimentReport {
    pub fn new(id: &str) -> Self {
        ExperimentReport { id: id.into(), ..Default::default() }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.push((key.into(), value.to_string()));
    }

    /// Records a measured number as a parameter line.
    pub fn value(&mut self, key: &str, v: f64) {
        self.param(key, fmt_f64(v));
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn notice(&mut self, text: impl Into<String>) {
        self.notices.push(text.into());
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {}", self.id);
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "  {k} = {v}");
        }
        for c in &self.checks {
            let _ = write!(
                s,
                "  [{}] {}: measured {} {} target {} (tol {}, {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                fmt_f64(c.measured),
                c.relation.symbol(),
                fmt_f64(c.target),
                fmt_f64(c.tolerance),
                c.source.label()
            );
            if !c.note.is_empty() {
                let _ = write!(s, " - {}", c.note);
            }
            s.push('\n');
        }
        for n in &self.notices {
            let _ = writeln!(s, "  notice: {n}");
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "  artifact: {}", a.display());
        }
        let _ = writeln!(
            s,
            "  {} ({} checks, {:.2} s)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.wall_clock.as_secs_f64()
        );
        s
    }

    /// Writes the checks as CSV. Wall-clock time is left out so the file is
    /// reproducible.
    pub fn write_csv(&self, path: &Path) -> Result<(), CsvError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["name", "relation", "target", "measured", "tolerance", "source", "pass", "note"])?;
        for c in &self.checks {
            w.write_record([
                c.name.as_str(),
                c.relation.symbol(),
                &fmt_f64(c.target),
                &fmt_f64(c.measured),
                &fmt_f64(c.tolerance),
                c.source.label(),
                if c.pass { "true" } else { "false" },
                &c.note,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
