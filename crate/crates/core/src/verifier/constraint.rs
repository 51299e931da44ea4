//! Linear relations among coupling symbols that make an obstruction vanish.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::coeff::Coeff;
use crate::model::{Model, TransformationRuleSet};
use crate::symexpr::{Expression, Factor, Label, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstraintError {
    #[error("obstruction is not linear in the couplings: {0}")]
    NonLinearConstraint(String),
    #[error("obstruction cannot vanish for any nonzero couplings: {0}")]
    Unsatisfiable(String),
}

/// A linear form `Σ c_s s + c_0` over coupling symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    pub terms: Vec<(Label, Coeff)>,
    pub constant: Coeff,
}

impl LinearForm {
    fn coeff(&self, s: &Label) -> Coeff {
        self.terms.iter().find(|(x, _)| x == s).map(|(_, c)| c.clone()).unwrap_or_else(Coeff::zero)
    }

    fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    fn combine(&self, k: &Coeff, o: &LinearForm, order: &[Label]) -> LinearForm {
        let terms = order
            .iter()
            .map(|s| (s.clone(), &self.coeff(s) + &(k * &o.coeff(s))))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        LinearForm { terms, constant: &self.constant + &(k * &o.constant) }
    }

    fn scale(&self, k: &Coeff) -> LinearForm {
        LinearForm {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// As an expression in coupling factors.
    pub fn to_expression(&self) -> Expression {
        let mut out: Vec<Term> = self
            .terms
            .iter()
            .map(|(s, c)| Term::new(c.clone(), vec![Factor::Coupling(s.clone())]))
            .collect();
        if !self.constant.is_zero() {
            out.push(Term::new(self.constant.clone(), vec![]));
        }
        Expression::from_terms(out)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, c: &Coeff, sym: Option<&str>, first: bool) -> fmt::Result {
    let (neg, mag) = match c.as_rational() {
        Some(r) if r.is_negative() => (true, Coeff::from_rational(-r.clone())),
        _ => (false, c.clone()),
    };
    match (first, neg) {
        (true, true) => f.write_str("-")?,
        (false, true) => f.write_str(" - ")?,
        (false, false) => f.write_str(" + ")?,
        (true, false) => {}
    }
    let simple = mag.as_rational().is_some();
    match sym {
        Some(s) if mag.is_one() => f.write_str(s),
        Some(s) if simple => write!(f, "{mag} {s}"),
        Some(s) => write!(f, "({mag}) {s}"),
        None if simple => write!(f, "{mag}"),
        None => write!(f, "({mag})"),
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, c) in &self.terms {
            write_term(f, c, Some(s), first)?;
            first = false;
        }
        if !self.constant.is_zero() || first {
            write_term(f, &self.constant, None, first)?;
        }
        Ok(())
    }
}

/// One derived relation `relation = 0`, solved as `pivot = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub relation: LinearForm,
    pub pivot: Label,
    pub rhs: LinearForm,
    pub applied: bool,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.relation)
    }
}

impl Constraint {
    /// Substitute the solution into an expression.
    pub fn apply(&self, e: &Expression) -> Expression {
        e.substitute_coupling(&self.pivot, &self.rhs.to_expression())
    }

    pub fn apply_rules(&self, rules: &TransformationRuleSet) -> TransformationRuleSet {
        let mut out = TransformationRuleSet::default();
        for r in rules.rules() {
            out.insert(r.pattern.clone(), self.apply(&r.variation));
        }
        out
    }
}

type Monomial = BTreeMap<Label, u32>;

fn split(t: &Term) -> (Monomial, Vec<Factor>) {
    let mut mono = Monomial::new();
    let mut rest = Vec::new();
    for f in &t.factors {
        match f {
            Factor::Coupling(c) => *mono.entry(c.clone()).or_default() += 1,
            other => rest.push(other.clone()),
        }
    }
    (mono, rest)
}

fn show_poly(p: &[(Monomial, Coeff)]) -> String {
    let parts: Vec<String> = p
        .iter()
        .map(|(m, c)| {
            let syms: Vec<String> = m.iter().map(|(s, k)| if *k == 1 { s.to_string() } else { format!("{s}^{k}") }).collect();
            format!("({c}) {}", syms.join(" "))
        })
        .collect();
    parts.join(" + ")
}

/// Coefficient polynomials of the obstruction, one per distinct field
/// monomial, with the common coupling monomial divided out.
fn coefficient_polynomials(parts: &[Expression]) -> Vec<Vec<(Monomial, Coeff)>> {
    let mut keys: HashMap<(usize, Vec<Factor>), usize> = HashMap::new();
    let mut polys: Vec<BTreeMap<Monomial, Coeff>> = Vec::new();
    for (k, e) in parts.iter().enumerate() {
        for t in e.terms() {
            let (mono, rest) = split(t);
            let slot = *keys.entry((k, rest)).or_insert_with(|| {
                polys.push(BTreeMap::new());
                polys.len() - 1
            });
            let c = polys[slot].entry(mono).or_insert_with(Coeff::zero);
            *c += &t.coeff;
        }
    }
    polys
        .into_iter()
        .map(|p| p.into_iter().filter(|(_, c)| !c.is_zero()).collect::<Vec<_>>())
        .filter(|p| !p.is_empty())
        .map(|p| {
            let mut gcd: Monomial = p[0].0.clone();
            for (m, _) in &p[1..] {
                gcd = gcd.into_iter().filter_map(|(s, k)| m.get(&s).map(|j| (s, k.min(*j)))).collect();
            }
            p.into_iter()
                .map(|(m, c)| {
                    let reduced = m
                        .into_iter()
                        .map(|(s, k)| (s.clone(), k - gcd.get(&s).copied().unwrap_or(0)))
                        .filter(|(_, k)| *k > 0)
                        .collect();
                    (reduced, c)
                })
                .collect()
        })
        .collect()
}

/// Solve `obstruction = 0` for the coupling symbols of `m`, preferring
/// charges as pivots and the gauge coupling last. Couplings are taken to be
/// nonzero, so a common monomial factor of a coefficient is discarded.
pub fn solve_coupling_constraint(parts: &[Expression], m: &Model) -> Result<Vec<Constraint>, ConstraintError> {
    let mut order: Vec<Label> = m.coupling_symbols().into_iter().skip(1).collect();
    let mut extra: Vec<Label> = parts.iter().flat_map(|e| e.couplings()).filter(|s| &**s != m.coupling()).collect();
    extra.sort();
    for s in extra {
        if !order.contains(&s) {
            order.push(s);
        }
    }
    order.push(crate::symexpr::label(m.coupling()));

    let mut rows: Vec<LinearForm> = Vec::new();
    for p in coefficient_polynomials(parts) {
        let mut form = LinearForm { terms: Vec::new(), constant: Coeff::zero() };
        for (mono, c) in &p {
            let degree: u32 = mono.values().sum();
            match degree {
                0 => form.constant += c,
                1 => {
                    let s = mono.keys().next().unwrap().clone();
                    form = form.combine(&Coeff::one(), &LinearForm { terms: vec![(s, c.clone())], constant: Coeff::zero() }, &order);
                }
                _ => return Err(ConstraintError::NonLinearConstraint(show_poly(&p))),
            }
        }
        if form.is_constant() {
            return Err(ConstraintError::Unsatisfiable(show_poly(&p)));
        }
        rows.push(form);
    }

    // reduced row echelon form
    let mut pivots: Vec<(Label, LinearForm)> = Vec::new();
    for mut r in rows {
        for (s, p) in &pivots {
            let c = r.coeff(s);
            if !c.is_zero() {
                r = r.combine(&-c, p, &order);
            }
        }
        let Some(s) = order.iter().find(|s| !r.coeff(s).is_zero()).cloned() else {
            if r.constant.is_zero() {
                continue;
            }
            return Err(ConstraintError::Unsatisfiable(format!("{r} = 0")));
        };
        let r = r.scale(&r.coeff(&s).inv().unwrap());
        for (_, p) in pivots.iter_mut() {
            let c = p.coeff(&s);
            if !c.is_zero() {
                *p = p.combine(&-c, &r, &order);
            }
        }
        pivots.push((s, r));
    }
    pivots.sort_by_key(|(s, _)| order.iter().position(|x| x == s));

    let mut out = Vec::new();
    for (s, relation) in pivots {
        let rhs = LinearForm {
            terms: relation.terms.iter().filter(|(x, _)| *x != s).map(|(x, c)| (x.clone(), -c)).collect(),
            constant: -&relation.constant,
        };
        if rhs.is_constant() && rhs.constant.is_zero() {
            return Err(ConstraintError::Unsatisfiable(format!("{relation} = 0")));
        }
        out.push(Constraint { relation, pivot: s, rhs, applied: false });
    }
    Ok(out)
}
