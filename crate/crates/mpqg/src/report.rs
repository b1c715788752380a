//! Verification reports: a named list of pass/fail checks with witnesses.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Short description of what was compared, or of the violation.
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub theorem: String,
    pub cartan: String,
    pub parameters: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(theorem: &str, cartan: &str) -> Self {
        Report { theorem: theorem.into(), cartan: cartan.into(), parameters: Value::Null, checks: Vec::new() }
    }

    pub fn with_parameters(mut self, parameters: Value) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, witness: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name: name.into(), status, witness: witness.into() });
    }

    /// Appends the checks of another report, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail).collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} [{}]: {}\n", self.theorem, self.cartan, if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "ok  ",
                Status::Fail => "FAIL",
            };
            s.push_str(&format!("  {tag} {}", c.name));
            if c.status == Status::Fail && !c.witness.is_empty() {
                s.push_str(&format!(" ({})", c.witness));
            }
            s.push('\n');
        }
        s
    }
}
