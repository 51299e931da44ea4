//! Directed rewriting modulo field equations.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::symexpr::index::lo_val;
use crate::symexpr::{splice, Expression, Factor, Field, FieldOcc, Kernel, Selector, Term};

use super::{euler_lagrange, CalcError};

/// One field equation `expr = 0`, written with the free labels of
/// `pattern` (variances flipped).
#[derive(Debug, Clone)]
pub struct Equation {
    pub name: String,
    pub pattern: FieldOcc,
    pub expr: Expression,
}

#[derive(Debug, Clone, Default)]
pub struct EomSet {
    pub equations: Vec<Equation>,
}

impl EomSet {
    /// Euler–Lagrange equations of `l` for each pattern.
    pub fn from_lagrangian(kernel: &Kernel, l: &Expression, patterns: &[FieldOcc]) -> Result<EomSet, CalcError> {
        let mut out = EomSet::default();
        for p in patterns {
            let expr = euler_lagrange(kernel, l, p)?;
            out.insert(p.field.name(), p.clone(), expr);
        }
        Ok(out)
    }

    pub fn insert(&mut self, name: &str, pattern: FieldOcc, expr: Expression) {
        self.equations.retain(|e| e.name != name);
        self.equations.push(Equation { name: name.into(), pattern, expr });
    }

    pub fn get(&self, field: &Field) -> Option<&Equation> {
        self.equations.iter().find(|e| e.pattern.field == *field)
    }

    pub fn by_name(&self, name: &str) -> Option<&Equation> {
        self.equations.iter().find(|e| e.name == name)
    }

    pub fn map(&self, f: impl Fn(&Expression) -> Expression) -> EomSet {
        EomSet {
            equations: self.equations.iter().map(|e| Equation { expr: f(&e.expr), ..e.clone() }).collect(),
        }
    }
}

/// Orderly ranking of jet variables: derivative order, then derivative
/// counts per direction (time first), then the variable itself.
pub(crate) fn rank(o: &FieldOcc) -> (usize, [u8; 4], &Field, Vec<u8>) {
    let mut counts = [0u8; 4];
    for d in &o.derivs {
        if let Some(v) = d.value() {
            counts[v as usize] += 1;
        }
    }
    (o.derivs.len(), counts, &o.field, o.indices.iter().filter_map(|i| i.value()).collect())
}

#[derive(Debug, Clone)]
struct Rule {
    lead: FieldOcc,
    rhs: Expression,
    source: String,
}

/// A single rewrite `variable → replacement` used during a reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub variable: FieldOcc,
    pub equation: String,
    pub replacement: Expression,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} -> {}", self.equation, Factor::Field(self.variable.clone()), self.replacement)
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub result: Expression,
    pub steps: Vec<Step>,
}

fn split_components(c: &Expression) -> BTreeMap<Vec<Selector>, Vec<Term>> {
    let mut out: BTreeMap<Vec<Selector>, Vec<Term>> = BTreeMap::new();
    for t in c.terms() {
        let mut sel = Vec::new();
        let mut rest = Vec::new();
        for f in &t.factors {
            match f {
                Factor::Select(s) => sel.push(s.clone()),
                other => rest.push(other.clone()),
            }
        }
        out.entry(sel).or_default().push(Term::new(t.coeff.clone(), rest));
    }
    out
}

fn component_name(eq: &str, sel: &[Selector]) -> String {
    let parts: Vec<String> = sel.iter().map(|s| format!("{}={}", s.label, s.value)).collect();
    format!("{eq}({})", parts.join(","))
}

fn build_rules(kernel: &Kernel, eoms: &EomSet) -> Result<Vec<Rule>, CalcError> {
    let mut rules: Vec<Rule> = Vec::new();
    for eq in &eoms.equations {
        let canon = kernel.canonicalize(&eq.expr)?;
        for (sel, terms) in split_components(&canon) {
            let name = component_name(&eq.name, &sel);
            let lead = terms
                .iter()
                .filter_map(|t| match t.factors.as_slice() {
                    [Factor::Field(o)] if !rules.iter().any(|r| &r.lead == o) => Some((o, &t.coeff)),
                    _ => None,
                })
                .max_by(|a, b| rank(a.0).cmp(&rank(b.0)));
            let Some((lead, c)) = lead else { return Err(CalcError::NotReducible(name)) };
            let lead = lead.clone();
            let inv = c.inv().ok_or_else(|| CalcError::NotReducible(name.clone()))?;
            let rest: Vec<Term> = terms
                .iter()
                .filter(|t| !matches!(t.factors.as_slice(), [Factor::Field(o)] if *o == lead))
                .map(|t| Term::new(-(&t.coeff * &inv), t.factors.clone()))
                .collect();
            rules.push(Rule { lead, rhs: Expression::from_terms(rest), source: name });
        }
    }
    Ok(rules)
}

fn sub_multiset(small: &[u8], big: &[u8]) -> Option<Vec<u8>> {
    let mut rest = big.to_vec();
    for s in small {
        let k = rest.iter().position(|x| x == s)?;
        rest.remove(k);
    }
    Some(rest)
}

fn deriv_values(o: &FieldOcc) -> Vec<u8> {
    o.derivs.iter().filter_map(|d| d.value()).collect()
}

struct Reducer<'a> {
    kernel: &'a Kernel,
    rules: Vec<Rule>,
    memo: HashMap<FieldOcc, Expression>,
    active: HashSet<FieldOcc>,
    steps: Vec<Step>,
}

impl Reducer<'_> {
    /// Applicable rule with the highest-ranked lead, and the derivatives
    /// left over after matching it.
    fn rule_for(&self, v: &FieldOcc) -> Option<(usize, Vec<u8>)> {
        let dv = deriv_values(v);
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.lead.field == v.field && r.lead.indices == v.indices)
            .filter_map(|(k, r)| sub_multiset(&deriv_values(&r.lead), &dv).map(|g| (k, g)))
            .max_by(|a, b| rank(&self.rules[a.0].lead).cmp(&rank(&self.rules[b.0].lead)))
    }

    fn var(&mut self, v: &FieldOcc) -> Result<Expression, CalcError> {
        if let Some(x) = self.memo.get(v) {
            return Ok(x.clone());
        }
        let Some((k, gamma)) = self.rule_for(v) else { return Ok(Expression::field(v.clone())) };
        if !self.active.insert(v.clone()) {
            return Err(CalcError::NotReducible(format!("rewriting of {} does not terminate", Factor::Field(v.clone()))));
        }
        let mut r = self.rules[k].rhs.clone();
        for d in gamma {
            r = r.partial(&lo_val(d));
        }
        let r = self.kernel.canonicalize(&r)?;
        self.steps.push(Step { variable: v.clone(), equation: self.rules[k].source.clone(), replacement: r.clone() });
        let nf = self.expr(&r)?;
        self.active.remove(v);
        self.memo.insert(v.clone(), nf.clone());
        Ok(nf)
    }

    fn reducible(&self, t: &Term) -> bool {
        t.factors.iter().any(|f| matches!(f, Factor::Field(o) if self.rule_for(o).is_some()))
    }

    fn expr(&mut self, e: &Expression) -> Result<Expression, CalcError> {
        let mut out = Vec::new();
        for t in e.terms() {
            if !self.reducible(t) {
                out.push(t.clone());
                continue;
            }
            let mut acc = Expression::constant(t.coeff.clone());
            for f in &t.factors {
                let x = match f {
                    Factor::Field(o) => self.var(o)?,
                    other => Expression::factor(other.clone()),
                };
                acc = acc.mul_expr(&x);
                if acc.is_zero() {
                    break;
                }
            }
            out.extend(acc.into_terms());
        }
        Ok(self.kernel.canonicalize(&Expression::from_terms(out))?)
    }
}

/// Rewrite `e` modulo the field equations: each equation component is
/// solved for its highest-ranked linear jet variable, and every
/// derivative of that variable is replaced by the matching derivative of
/// the solution until none remains.
pub fn reduce_on_shell(kernel: &Kernel, e: &Expression, eoms: &EomSet) -> Result<Reduction, CalcError> {
    let rules = build_rules(kernel, eoms)?;
    let mut r = Reducer { kernel, rules, memo: HashMap::new(), active: HashSet::new(), steps: Vec::new() };
    let canon = kernel.canonicalize(e)?;
    let result = r.expr(&canon)?;
    Ok(Reduction { result, steps: r.steps })
}

/// Re-apply logged steps as plain substitutions until none applies.
pub fn replay(kernel: &Kernel, e: &Expression, steps: &[Step]) -> Result<Expression, CalcError> {
    let mut cur = kernel.canonicalize(e)?;
    loop {
        let mut changed = false;
        for s in steps {
            let hit = cur
                .terms()
                .iter()
                .any(|t| t.factors.iter().any(|f| matches!(f, Factor::Field(o) if *o == s.variable)));
            if !hit {
                continue;
            }
            changed = true;
            let mut out = Vec::new();
            for t in cur.terms() {
                let x = splice(t, &s.variable.field, |o| {
                    if *o == s.variable {
                        s.replacement.clone()
                    } else {
                        Expression::field(o.clone())
                    }
                });
                out.extend(x.into_terms());
            }
            cur = kernel.canonicalize(&Expression::from_terms(out))?;
        }
        if !changed {
            return Ok(cur);
        }
    }
}
