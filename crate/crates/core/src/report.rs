//! Check outcomes and the JSON report format.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::graded::Graded;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub status: Status,
    pub detail: Option<String>,
}

impl CheckOutcome {
    pub fn pass(name: &str) -> Self {
        CheckOutcome { name: name.into(), status: Status::Pass, detail: None }
    }

    pub fn skip(name: &str, why: &str) -> Self {
        CheckOutcome { name: name.into(), status: Status::Skip, detail: Some(why.into()) }
    }

    /// Identity failures become a failed outcome; other errors propagate.
    pub fn from_result(name: &str, r: Result<()>) -> Result<Self> {
        match r {
            Ok(()) => Ok(Self::pass(name)),
            Err(Error::Internal(d)) | Err(Error::Structural(d)) => {
                Ok(CheckOutcome { name: name.into(), status: Status::Fail, detail: Some(d) })
            }
            Err(e @ Error::Residual { .. }) => {
                Ok(CheckOutcome { name: name.into(), status: Status::Fail, detail: Some(e.to_string()) })
            }
            Err(e) => Err(e),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("status".into(), json!(self.status.as_str()));
        if let Some(d) = &self.detail {
            m.insert("detail".into(), json!(d));
        }
        Value::Object(m)
    }
}

/// `Err(Internal)` naming the first offending term when `g` is nonzero.
pub fn expect_zero(what: &str, g: &Graded) -> Result<()> {
    match g.first_term() {
        None => Ok(()),
        Some(t) => Err(Error::Internal(format!("{what}: nonzero term {t}"))),
    }
}

/// `Err(Internal)` with both sides when they differ.
pub fn expect_eq<T: PartialEq + std::fmt::Display>(what: &str, got: &T, want: &T) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Internal(format!("{what}: got {got}, expected {want}")))
    }
}

pub fn checks_json(checks: &[CheckOutcome]) -> Value {
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let skipped = checks.iter().filter(|c| c.status == Status::Skip).count();
    json!({
        "results": checks.iter().map(CheckOutcome::to_json).collect::<Vec<_>>(),
        "summary": {
            "total": checks.len(),
            "passed": checks.len() - failed - skipped,
            "failed": failed,
            "skipped": skipped,
        }
    })
}

/// Serialize with sorted keys and a trailing newline; write to `out` if given.
pub fn emit_report(report: &Value, out: Option<&Path>) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_output_stable() {
        let v = json!({"zeta": 1, "alpha": {"b": "1/2", "a": "0"}});
        let a = emit_report(&v, None).unwrap();
        assert_eq!(a, emit_report(&v, None).unwrap());
        assert!(a.find("alpha").unwrap() < a.find("zeta").unwrap());
        assert!(a.find("\"a\"").unwrap() < a.find("\"b\"").unwrap());
    }

    #[test]
    fn failures_carry_detail() {
        let o = CheckOutcome::from_result("x", Err(Error::Internal("term (1)*y1".into()))).unwrap();
        assert_eq!(o.status, Status::Fail);
        assert!(o.to_json()["detail"].as_str().unwrap().contains("y1"));
        assert!(CheckOutcome::from_result("x", Err(Error::Capacity("c".into()))).is_err());
    }
}
