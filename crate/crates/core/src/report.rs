//! Pass/fail reports shared by the command line and the test suites.

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub status: Status,
    /// Residual, exact difference or other witness.
    pub detail: String,
    pub runtime_ms: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Run `f` and time it; an `Err` counts as a failure with its message as detail.
pub fn timed<E: std::fmt::Display>(id: impl Into<String>, f: impl FnOnce() -> Result<(bool, String), E>) -> Check {
    let start = Instant::now();
    let (ok, detail) = match f() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        id: id.into(),
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
        runtime_ms: start.elapsed().as_millis(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub config: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(suite: impl Into<String>, config: Value) -> Self {
        Report { suite: suite.into(), config, checks: vec![] }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}
