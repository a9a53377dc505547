use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::config::ParamsEcho;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "UNDECIDED-AT-CUTOFF")]
    UndecidedAtCutoff,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Combines statuses: any FAIL wins, then any UNDECIDED-AT-CUTOFF.
    pub fn worst(items: impl IntoIterator<Item = Status>) -> Status {
        items.into_iter().fold(Status::Pass, |acc, s| match (acc, s) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::UndecidedAtCutoff, _) | (_, Status::UndecidedAtCutoff) => Status::UndecidedAtCutoff,
            _ => Status::Pass,
        })
    }
}

/// Pointer to a stored certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateRef {
    /// Path relative to the report, or null when no output path was given.
    pub file: Option<String>,
    pub sha256: String,
    pub d_eff: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub certificate: Option<CertificateRef>,
    pub timing_ms: Option<u64>,
    /// Human-readable detail. For FAIL this names the smallest failing case.
    pub detail: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub undecided: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub params: ParamsEcho,
    pub outputs: BTreeMap<String, Value>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(params: ParamsEcho) -> Report {
        Report { params, outputs: BTreeMap::new(), checks: Vec::new(), summary: Summary::default() }
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) {
        self.outputs.insert(key.to_string(), value.into());
    }

    pub fn push(&mut self, record: CheckRecord) {
        match record.status {
            Status::Pass => self.summary.pass += 1,
            Status::Fail => self.summary.fail += 1,
            Status::UndecidedAtCutoff => self.summary.undecided += 1,
        }
        self.checks.push(record);
    }

    /// 0 when every check passed, 1 on any FAIL, 4 when only undecided checks remain.
    pub fn exit_code(&self) -> i32 {
        match Status::worst(self.checks.iter().map(|c| c.status)) {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::UndecidedAtCutoff => 4,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(status: Status) -> CheckRecord {
        CheckRecord { name: "c".into(), status, certificate: None, timing_ms: None, detail: String::new() }
    }

    fn echo() -> ParamsEcho {
        ParamsEcho {
            command: "alpha".into(),
            p: Some(2),
            m: None,
            n: None,
            w: None,
            k: None,
            trunc: None,
            prec: None,
            flavor: None,
            degrees: vec![],
        }
    }

    #[test]
    fn exit_codes() {
        let mut r = Report::new(echo());
        assert_eq!(r.exit_code(), 0);
        r.push(record(Status::Pass));
        assert_eq!(r.exit_code(), 0);
        r.push(record(Status::UndecidedAtCutoff));
        assert_eq!(r.exit_code(), 4);
        r.push(record(Status::Fail));
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.summary, Summary { pass: 1, fail: 1, undecided: 1 });
    }

    #[test]
    fn stable_field_names() {
        let mut r = Report::new(echo());
        r.push(record(Status::UndecidedAtCutoff));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["checks"][0]["status"], "UNDECIDED-AT-CUTOFF");
        assert!(v["checks"][0].get("timing_ms").is_some());
        assert!(v["checks"][0].get("certificate").is_some());
        assert_eq!(v["params"]["command"], "alpha");
        assert!(r.to_json().ends_with("}\n"));
    }
}
