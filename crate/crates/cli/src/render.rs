//! Report rendering. Both formats are byte-deterministic for a given
//! report; timings are left out of JSON.

use std::fmt::Write as _;

use serde::Serialize;

use gaugeforge::oracle::Verdict;
use gaugeforge::verifier::{CheckRegistry, CheckResult, Constraint, OracleSummary, Report, Status};

/// Residual lines shown in text output before eliding the rest.
const TEXT_RESIDUAL_LINES: usize = 12;

#[derive(Serialize)]
struct JsonReport<'a> {
    theory: &'a str,
    checks: Vec<JsonCheck<'a>>,
    constraints: Vec<JsonConstraint>,
    oracle: Option<&'a OracleSummary>,
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    name: &'a str,
    status: Status,
    claim: &'a str,
    note: &'a str,
    residual: String,
    claims: Vec<JsonClaim<'a>>,
}

#[derive(Serialize)]
struct JsonClaim<'a> {
    statement: &'a str,
    expect_zero: bool,
    holds: bool,
    oracle: Option<&'a Verdict>,
}

#[derive(Serialize)]
struct JsonConstraint {
    relation: String,
    solution: String,
    applied: bool,
}

fn claim_of(name: &str) -> &'static str {
    CheckRegistry::default().get(name).map(|c| c.claim()).unwrap_or("")
}

fn constraint(c: &Constraint) -> JsonConstraint {
    JsonConstraint { relation: c.to_string(), solution: solution(c), applied: c.applied }
}

fn solution(c: &Constraint) -> String {
    format!("{} = {}", c.pivot, c.rhs)
}

fn check(c: &CheckResult) -> JsonCheck<'_> {
    JsonCheck {
        name: &c.name,
        status: c.status,
        claim: claim_of(&c.name),
        note: &c.note,
        residual: c.residual.to_string(),
        claims: c
            .claims
            .iter()
            .map(|k| JsonClaim { statement: &k.statement, expect_zero: k.expect_zero, holds: k.holds(), oracle: k.oracle.as_ref() })
            .collect(),
    }
}

pub fn render_json(r: &Report) -> String {
    let doc = JsonReport {
        theory: &r.theory,
        checks: r.checks.iter().map(check).collect(),
        constraints: r.constraints.iter().map(constraint).collect(),
        oracle: r.oracle.as_ref(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialises");
    s.push('\n');
    s
}

fn verdict(v: &Verdict) -> String {
    match &v.witness {
        None => format!("zero at {} samples", v.samples),
        Some(w) => format!("nonzero at sample {} (seed {})", w.k, w.seed),
    }
}

pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "theory {}", r.theory);
    for c in &r.checks {
        let _ = writeln!(out, "\n[{}] {}: {}", c.status, c.name, claim_of(&c.name));
        if !c.note.is_empty() {
            let _ = writeln!(out, "  note: {}", c.note);
        }
        for k in &c.claims {
            let mark = if k.holds() { "ok" } else { "FAILED" };
            let _ = write!(out, "  {mark:>6}  {}", k.statement);
            if let Some(v) = &k.oracle {
                let _ = write!(out, "  [oracle: {}]", verdict(v));
            }
            out.push('\n');
        }
        if c.status != Status::Pass && !c.residual.is_zero() {
            let _ = writeln!(out, "  residual ({} terms):", c.residual.len());
            let text = c.residual.to_string();
            for line in text.lines().take(TEXT_RESIDUAL_LINES) {
                let _ = writeln!(out, "    {line}");
            }
            if c.residual.len() > TEXT_RESIDUAL_LINES {
                let _ = writeln!(out, "    ... {} more terms", c.residual.len() - TEXT_RESIDUAL_LINES);
            }
        }
    }
    out.push('\n');
    if r.constraints.is_empty() {
        let _ = writeln!(out, "constraints: none");
    }
    for c in &r.constraints {
        let how = if c.applied { "derived and applied" } else { "derived, not applied" };
        let _ = writeln!(out, "constraint: {} ({how})", solution(c));
    }
    match &r.oracle {
        Some(o) => {
            let _ = writeln!(out, "oracle: seed {}, {} samples, {} disagreements", o.seed, o.samples, o.failures);
        }
        None => {
            let _ = writeln!(out, "oracle: off");
        }
    }
    let _ = writeln!(out, "result: {}", if r.all_pass() { "PASS" } else { "FAIL" });
    out
}
