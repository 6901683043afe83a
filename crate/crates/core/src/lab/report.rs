use std::fmt::Write as _;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    /// A value stated in the published literature for this instance.
    Published,
    /// Holds for reasons that need no computation.
    Trivial,
    /// Computed by an independent oracle (closed form, counting, direct construction).
    Derived,
    /// Supplied by the caller in a task file.
    Input,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotStabilized,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotStabilized => "not-stabilized",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub provenance: Provenance,
    pub expected: Value,
    pub computed: Value,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub case: String,
    pub inputs: Value,
    pub checks: Vec<Check>,
    /// Further computed data, keyed by name.
    pub computed: Map<String, Value>,
    /// Quantities that did not stabilize within the bounds.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unstable: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub status: Status,
}

/// Accumulates checks for one case.
#[derive(Debug)]
pub struct Case {
    id: String,
    inputs: Value,
    checks: Vec<Check>,
    computed: Map<String, Value>,
    unstable: Vec<String>,
}

fn to_value<T: Serialize>(x: T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

impl Case {
    pub fn new(id: impl Into<String>, inputs: Value) -> Self {
        Self { id: id.into(), inputs, checks: vec![], computed: Map::new(), unstable: vec![] }
    }

    pub fn check<T: Serialize + PartialEq>(&mut self, name: &str, provenance: Provenance, expected: T, computed: T) -> bool {
        let ok = expected == computed;
        self.check_with(name, provenance, to_value(expected), to_value(computed), ok)
    }

    pub fn check_with(&mut self, name: &str, provenance: Provenance, expected: Value, computed: Value, ok: bool) -> bool {
        self.checks.push(Check { name: name.into(), provenance, expected, computed, ok });
        ok
    }

    pub fn record<T: Serialize>(&mut self, key: &str, value: T) {
        self.computed.insert(key.into(), to_value(value));
    }

    pub fn unstable(&mut self, what: impl Into<String>) {
        self.unstable.push(what.into());
    }

    pub fn finish(self) -> VerificationReport {
        let status = if !self.unstable.is_empty() {
            Status::NotStabilized
        } else if self.checks.iter().all(|c| c.ok) {
            Status::Pass
        } else {
            Status::Fail
        };
        VerificationReport {
            case: self.id,
            inputs: self.inputs,
            checks: self.checks,
            computed: self.computed,
            unstable: self.unstable,
            error: None,
            status,
        }
    }

    /// Runs `body` and turns an error into a failed or not-stabilized report.
    pub fn run(mut self, body: impl FnOnce(&mut Case) -> Result<()>) -> VerificationReport {
        match body(&mut self) {
            Ok(()) => self.finish(),
            Err(e) => {
                let status = if matches!(e, Error::NotStabilized(_)) { Status::NotStabilized } else { Status::Fail };
                let mut r = self.finish();
                r.error = Some(e.to_string());
                r.status = status;
                r
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub not_stabilized: usize,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseTiming {
    pub cases: Vec<String>,
    pub millis: u64,
}

/// Wall-clock data, kept apart from the results so that those are reproducible byte for byte.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u64,
    pub runtimes: Vec<CaseTiming>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub results: Vec<VerificationReport>,
    pub summary: Summary,
    pub timing: Timing,
}

/// `0` when everything passed, `1` on any failure, otherwise `2` if something did not stabilize.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.status == Status::Fail) {
        1
    } else if reports.iter().any(|r| r.status == Status::NotStabilized) {
        2
    } else {
        0
    }
}

fn unix_ms(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl ReportFile {
    pub fn new() -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timing: Timing { started_unix_ms: unix_ms(SystemTime::now()), runtimes: vec![] },
            ..Self::default()
        }
    }

    /// Runs a group of cases, recording how long it took.
    pub fn run(&mut self, f: impl FnOnce() -> Vec<VerificationReport>) {
        let start = Instant::now();
        let reports = f();
        self.push(reports, start.elapsed());
    }

    pub fn push(&mut self, reports: Vec<VerificationReport>, elapsed: Duration) {
        self.timing.runtimes.push(CaseTiming {
            cases: reports.iter().map(|r| r.case.clone()).collect(),
            millis: elapsed.as_millis() as u64,
        });
        self.results.extend(reports);
        self.update_summary();
    }

    fn update_summary(&mut self) {
        let count = |s| self.results.iter().filter(|r| r.status == s).count();
        self.summary = Summary {
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            not_stabilized: count(Status::NotStabilized),
            exit_code: exit_code(&self.results),
        };
    }

    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its `timing` field.
    pub fn deterministic_json(&self) -> String {
        let mut v = to_value(self);
        v.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(out, "{:<15} {}", r.status.label().to_uppercase(), r.case);
            for c in &r.checks {
                let mark = if c.ok { "ok" } else { "MISMATCH" };
                let _ = writeln!(out, "    [{mark}] {} ({:?}): expected {}, computed {}", c.name, c.provenance, c.expected, c.computed);
            }
            for u in &r.unstable {
                let _ = writeln!(out, "    [unstable] {u}");
            }
            if let Some(e) = &r.error {
                let _ = writeln!(out, "    [error] {e}");
            }
        }
        let s = &self.summary;
        let _ = writeln!(out, "{} passed, {} failed, {} not stabilized", s.pass, s.fail, s.not_stabilized);
        out
    }

    /// Writes the JSON report to `path` and the text report next to it with extension `txt`.
    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        std::fs::write(path.with_extension("txt"), self.to_text())?;
        Ok(())
    }
}
