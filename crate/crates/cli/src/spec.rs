//! Line-oriented theory spec files.
//!
//! ```text
//! theory qed
//! group U1
//! coupling e
//! fermion psi fundamental charge q
//! check all
//! ```

use std::fmt;

use gaugeforge::coeff::Rational;
use gaugeforge::liealg::{GroupKind, RepKind};
use gaugeforge::model::{Charge, MatterDecl, MatterKind, Mutation, TheorySpec, GAUGE_FIELD, GAUGE_PARAMETER};

pub const CHECK_NAMES: [&str; 8] =
    ["invariance", "eom", "conservation", "bianchi", "noether", "algebra", "construction", "all"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("{line}:{column}: syntax error: expected {}, found {found}", expected.join(" | "))]
    Syntax { line: usize, column: usize, expected: Vec<String>, found: String },
    #[error("{line}:{column}: {message}")]
    Semantic { line: usize, column: usize, message: String },
}

#[derive(Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    toks: Vec<Tok<'a>>,
    end: usize,
    pos: usize,
}

fn tokenize(raw: &str) -> (Vec<Tok<'_>>, usize) {
    let body = raw.split('#').next().unwrap_or("");
    let mut toks = Vec::new();
    let mut start = None;
    for (k, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push(Tok { text: &body[s..k], column: body[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        toks.push(Tok { text: &body[s..], column: body[..s].chars().count() + 1 });
    }
    let end = body.trim_end().chars().count() + 1;
    (toks, end)
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn looks_numeric(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+')
}

impl<'a> Line<'a> {
    fn syntax(&self, expected: &[&str], found: Option<Tok<'a>>) -> SpecError {
        SpecError::Syntax {
            line: self.number,
            column: found.map(|t| t.column).unwrap_or(self.end),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.map(|t| format!("`{}`", t.text)).unwrap_or_else(|| "end of line".into()),
        }
    }

    fn semantic(&self, column: usize, message: impl Into<String>) -> SpecError {
        SpecError::Semantic { line: self.number, column, message: message.into() }
    }

    fn peek(&self) -> Option<Tok<'a>> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self, expected: &[&str]) -> Result<Tok<'a>, SpecError> {
        let t = self.peek().ok_or_else(|| self.syntax(expected, None))?;
        self.pos += 1;
        Ok(t)
    }

    fn keyword(&mut self, options: &[&str]) -> Result<Tok<'a>, SpecError> {
        let t = self.next(options)?;
        if options.contains(&t.text) {
            Ok(t)
        } else {
            Err(self.syntax(options, Some(t)))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Tok<'a>, SpecError> {
        let t = self.next(&[what])?;
        if is_ident(t.text) {
            Ok(t)
        } else {
            Err(self.syntax(&[what], Some(t)))
        }
    }

    fn rational(&mut self) -> Result<(Tok<'a>, Rational), SpecError> {
        let t = self.next(&["<rational>"])?;
        match t.text.parse::<Rational>() {
            Ok(r) => Ok((t, r)),
            Err(_) => Err(self.syntax(&["<rational>"], Some(t))),
        }
    }

    fn finish(&self) -> Result<(), SpecError> {
        match self.peek() {
            Some(t) => Err(self.syntax(&["end of line"], Some(t))),
            None => Ok(()),
        }
    }
}

const DIRECTIVES: [&str; 7] = ["theory", "group", "coupling", "fermion", "external_current", "check", "override"];

/// Parse spec-file text into a `TheorySpec`.
pub fn parse_spec(text: &str) -> Result<TheorySpec, SpecError> {
    let mut name: Option<String> = None;
    let mut group: Option<GroupKind> = None;
    let mut coupling = None;
    let mut matter: Vec<MatterDecl> = Vec::new();
    let mut checks: Vec<String> = Vec::new();
    let mut overrides = std::collections::BTreeMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        last_line = k + 1;
        let (toks, end) = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        let mut l = Line { number: k + 1, toks, end, pos: 0 };
        let head = l.keyword(&DIRECTIVES)?;
        match head.text {
            "theory" => {
                let t = l.ident("<name>")?;
                if name.is_some() {
                    return Err(l.semantic(head.column, "theory declared twice"));
                }
                name = Some(t.text.into());
            }
            "group" => {
                let g = l.keyword(&["U1", "SU"])?;
                let kind = if g.text == "U1" {
                    GroupKind::U1
                } else {
                    let t = l.next(&["<n>"])?;
                    let n: u8 = t.text.parse().map_err(|_| l.syntax(&["<n>"], Some(t)))?;
                    if n < 2 {
                        return Err(l.semantic(t.column, format!("SU({n}) is not a gauge group; need n >= 2")));
                    }
                    GroupKind::SU(n)
                };
                if group.is_some() {
                    return Err(l.semantic(head.column, "group declared twice"));
                }
                group = Some(kind);
            }
            "coupling" => {
                let t = l.ident("<symbol>")?;
                let value = if l.peek().is_some() {
                    let (vt, v) = l.rational()?;
                    if v.is_zero() {
                        return Err(l.semantic(vt.column, "coupling value must be nonzero"));
                    }
                    Some(v)
                } else {
                    None
                };
                if coupling.is_some() {
                    return Err(l.semantic(head.column, "coupling declared twice"));
                }
                coupling = Some((t.text.to_string(), value));
            }
            "fermion" => {
                let t = l.ident("<name>")?;
                let rep = match l.keyword(&["fundamental", "adjoint"])?.text {
                    "fundamental" => RepKind::Fundamental,
                    _ => RepKind::Adjoint,
                };
                l.keyword(&["charge"])?;
                let c = l.next(&["<symbol>", "<rational>"])?;
                let charge = if looks_numeric(c.text) {
                    l.pos -= 1;
                    Charge::Value(l.rational()?.1)
                } else if is_ident(c.text) {
                    Charge::Symbol(c.text.into())
                } else {
                    return Err(l.syntax(&["<symbol>", "<rational>"], Some(c)));
                };
                claim_name(&l, &mut names, t, &[t.text.to_string(), format!("{}bar", t.text)])?;
                matter.push(MatterDecl::fermion(t.text, rep, charge));
            }
            "external_current" => {
                let t = l.ident("<name>")?;
                claim_name(&l, &mut names, t, &[t.text.to_string()])?;
                matter.push(MatterDecl::external(t.text));
            }
            "check" => {
                let t = l.keyword(&CHECK_NAMES)?;
                if !checks.iter().any(|c| c == t.text) {
                    checks.push(t.text.into());
                }
            }
            "override" => {
                let knobs: Vec<&str> = Mutation::ALL.iter().map(|m| m.name()).collect();
                let t = l.keyword(&knobs)?;
                let (_, v) = l.rational()?;
                overrides.insert(Mutation::from_name(t.text).expect("listed knob"), v);
            }
            _ => unreachable!("keyword() only returns listed directives"),
        }
        l.finish()?;
    }

    let missing = |what: &str| SpecError::Semantic {
        line: last_line.max(1),
        column: 1,
        message: format!("missing `{what}` directive"),
    };
    let name = name.ok_or_else(|| missing("theory"))?;
    let group = group.ok_or_else(|| missing("group"))?;
    Ok(TheorySpec { name, group, coupling, matter, checks, overrides })
}

fn claim_name(l: &Line, names: &mut Vec<String>, at: Tok, new: &[String]) -> Result<(), SpecError> {
    for n in new {
        if names.contains(n) || n == GAUGE_FIELD || n == GAUGE_PARAMETER {
            return Err(l.semantic(at.column, format!("field name {n} is already in use")));
        }
    }
    names.extend(new.iter().cloned());
    Ok(())
}

struct Rendered<'a>(&'a TheorySpec);

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        writeln!(f, "theory {}", s.name)?;
        match s.group {
            GroupKind::U1 => writeln!(f, "group U1")?,
            GroupKind::SU(n) => writeln!(f, "group SU {n}")?,
        }
        match &s.coupling {
            Some((c, Some(v))) => writeln!(f, "coupling {c} {v}")?,
            Some((c, None)) => writeln!(f, "coupling {c}")?,
            None => {}
        }
        for m in &s.matter {
            match &m.kind {
                MatterKind::DiracFermion { rep, charge } => writeln!(f, "fermion {} {rep} charge {charge}", m.name)?,
                MatterKind::ExternalCurrent => writeln!(f, "external_current {}", m.name)?,
            }
        }
        for (k, v) in &s.overrides {
            writeln!(f, "override {} {v}", k.name())?;
        }
        for c in &s.checks {
            writeln!(f, "check {c}")?;
        }
        Ok(())
    }
}

/// Spec-file text that parses back to `spec`.
pub fn render_spec(spec: &TheorySpec) -> String {
    Rendered(spec).to_string()
}
