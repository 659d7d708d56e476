//! Task results, the report document, and its human rendering.

use std::fmt::Write as _;

use gcgw::expr;
use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = "gcgw-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The check does not apply to this input.
    Skipped,
    /// A library precondition failed.
    Error,
    /// The input was rejected.
    Invalid,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIPPED",
            Verdict::Error => "ERROR",
            Verdict::Invalid => "INVALID",
        }
    }
}

/// A named exact result. `approx` is filled only on request and is never
/// used for any verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactValue {
    pub name: String,
    pub exact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskResult {
    pub task: String,
    pub verdict: Verdict,
    pub lines: Vec<String>,
    pub values: Vec<ExactValue>,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub problem: String,
    pub tasks: Vec<TaskResult>,
    pub passed: bool,
}

impl Report {
    pub fn new(problem: &str, tasks: Vec<TaskResult>) -> Self {
        let passed = tasks.iter().all(|t| matches!(t.verdict, Verdict::Pass | Verdict::Skipped));
        Report { schema: REPORT_SCHEMA, problem: problem.to_string(), tasks, passed }
    }

    /// 2 if any input was rejected, else 3 on a library error, 1 on a failed
    /// check, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        let has = |v: Verdict| self.tasks.iter().any(|t| t.verdict == v);
        if has(Verdict::Invalid) {
            2
        } else if has(Verdict::Error) {
            3
        } else if has(Verdict::Fail) {
            1
        } else {
            0
        }
    }

    /// Adds floating-point approximations to values that are single scalars.
    pub fn add_approximations(&mut self) {
        for v in self.tasks.iter_mut().flat_map(|t| t.values.iter_mut()) {
            if let Ok(c) = expr::parse_scalar(&v.exact) {
                let (re, im) = c.approx();
                v.approx = Some(if im == 0.0 { format!("{:.12}", re) } else { format!("{:.12} + {:.12} i", re, im) });
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem: {}", self.problem);
        let n = self.tasks.len();
        for (i, t) in self.tasks.iter().enumerate() {
            let _ = writeln!(out, "[{}/{}] {} ... {}", i + 1, n, t.task, t.verdict.label());
            if let Some(e) = &t.error {
                let _ = writeln!(out, "    error: {}", e);
            }
            for l in &t.lines {
                let _ = writeln!(out, "    {}", l);
            }
            for v in &t.values {
                let _ = writeln!(out, "    {} = {}", v.name, v.exact);
                if let Some(a) = &v.approx {
                    let _ = writeln!(out, "      ~ {} (approximate, not authoritative)", a);
                }
            }
        }
        let _ = writeln!(out, "{}", if self.passed { "all checks passed" } else { "some checks did not pass" });
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(v: Verdict) -> TaskResult {
        TaskResult { task: "t".into(), verdict: v, lines: vec![], values: vec![], details: Value::Null, error: None }
    }

    #[test]
    fn exit_code_precedence() {
        let r = |vs: &[Verdict]| Report::new("p", vs.iter().map(|v| result(*v)).collect()).exit_code();
        assert_eq!(r(&[]), 0);
        assert_eq!(r(&[Verdict::Pass, Verdict::Skipped]), 0);
        assert_eq!(r(&[Verdict::Pass, Verdict::Fail]), 1);
        assert_eq!(r(&[Verdict::Fail, Verdict::Error]), 3);
        assert_eq!(r(&[Verdict::Error, Verdict::Invalid, Verdict::Fail]), 2);
    }

    #[test]
    fn approximations_only_for_scalars() {
        let mut t = result(Verdict::Pass);
        t.values = vec![
            ExactValue { name: "a".into(), exact: "1/3".into(), approx: None },
            ExactValue { name: "b".into(), exact: "[[z]]".into(), approx: None },
        ];
        let mut r = Report::new("p", vec![t]);
        r.add_approximations();
        assert_eq!(r.tasks[0].values[0].approx.as_deref(), Some("0.333333333333"));
        assert!(r.tasks[0].values[1].approx.is_none());
    }
}
