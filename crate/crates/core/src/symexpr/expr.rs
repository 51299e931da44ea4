use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::coeff::Coeff;

use super::factor::{Factor, FieldOcc, Selector};
use super::index::{label, Index, IndexClass, Label, Slot, Variance};
use super::metric_sign;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Coeff,
    pub factors: Vec<Factor>,
}

impl Term {
    pub fn new(coeff: Coeff, factors: Vec<Factor>) -> Self {
        Term { coeff, factors }
    }

    pub fn is_odd(&self) -> bool {
        self.factors.iter().filter(|f| f.is_odd()).count() % 2 == 1
    }

    /// Occurrence count of every label in the term.
    pub fn label_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        self.count_into(&mut counts);
        counts
    }

    fn count_into(&self, counts: &mut BTreeMap<Label, usize>) {
        for f in &self.factors {
            match f {
                Factor::Select(s) => *counts.entry(s.label.clone()).or_default() += 1,
                Factor::Deriv { index, inner } => {
                    if let Some(l) = index.label() {
                        *counts.entry(l.clone()).or_default() += 1;
                    }
                    let mut inner_counts: BTreeMap<Label, usize> = BTreeMap::new();
                    for t in inner.terms() {
                        for (l, n) in t.label_counts() {
                            let e = inner_counts.entry(l).or_default();
                            *e = (*e).max(n);
                        }
                    }
                    for (l, n) in inner_counts {
                        *counts.entry(l).or_default() += n;
                    }
                }
                other => {
                    for idx in other.indices() {
                        if let Some(l) = idx.label() {
                            *counts.entry(l.clone()).or_default() += 1;
                        }
                    }
                }
            }
        }
    }

    /// Replace a label everywhere in the term. Returns `None` when a
    /// selector resolves to a different component (the term vanishes).
    pub(crate) fn specialize(&self, from: &Label, to: &Slot, variance: Option<Variance>) -> Option<Term> {
        let mut coeff = self.coeff.clone();
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            match f {
                Factor::Select(s) if &s.label == from => {
                    let target_var = variance.unwrap_or(s.variance);
                    let flip = s.class == IndexClass::Lorentz && target_var != s.variance;
                    if flip && metric_sign(s.value) < 0 {
                        coeff = -coeff;
                    }
                    match to {
                        Slot::Label(l) => factors.push(Factor::Select(Selector {
                            label: l.clone(),
                            class: s.class,
                            variance: if s.class.has_variance() { target_var } else { Variance::Neutral },
                            value: s.value,
                        })),
                        Slot::Value(v) => {
                            if *v != s.value {
                                return None;
                            }
                        }
                    }
                }
                Factor::Deriv { index, inner } => {
                    let mut index = index.clone();
                    respecialize(&mut index, from, to, variance);
                    let inner = inner.specialize(from, to, variance);
                    factors.push(Factor::Deriv { index, inner: Box::new(inner) });
                }
                other => {
                    let mut g = other.clone();
                    for idx in g.indices_mut() {
                        respecialize(idx, from, to, variance);
                    }
                    if let Factor::Metric(a, b) = g {
                        g = Factor::metric(a, b);
                    }
                    factors.push(g);
                }
            }
        }
        Some(Term { coeff, factors })
    }
}

fn respecialize(idx: &mut Index, from: &Label, to: &Slot, variance: Option<Variance>) {
    if idx.label() == Some(from) {
        let v = variance.unwrap_or(idx.variance);
        *idx = Index::new(idx.class, v, to.clone());
    }
}

/// Sum of terms. Canonical expressions have sorted, distinct factor lists
/// and nonzero coefficients; the empty sum is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Expression {
    terms: Vec<Term>,
}

impl Expression {
    pub fn zero() -> Self {
        Expression::default()
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Expression { terms: terms.into_iter().filter(|t| !t.coeff.is_zero()).collect() }
    }

    pub fn term(coeff: Coeff, factors: Vec<Factor>) -> Self {
        Expression::from_terms(vec![Term::new(coeff, factors)])
    }

    pub fn constant(c: Coeff) -> Self {
        Expression::term(c, vec![])
    }

    pub fn one() -> Self {
        Expression::constant(Coeff::one())
    }

    pub fn factor(f: Factor) -> Self {
        Expression::term(Coeff::one(), vec![f])
    }

    pub fn field(o: FieldOcc) -> Self {
        Expression::factor(Factor::Field(o))
    }

    pub fn coupling(name: &str) -> Self {
        Expression::factor(Factor::coupling(name))
    }

    pub fn select(idx: &Index, value: u8) -> Self {
        let label = idx.label().expect("selector needs a symbolic index").clone();
        Expression::factor(Factor::Select(Selector { label, class: idx.class, variance: idx.variance, value }))
    }

    /// Formal derivative `∂_idx(self)` kept unexpanded.
    pub fn deriv(idx: Index, inner: Expression) -> Self {
        Expression::factor(Factor::Deriv { index: idx, inner: Box::new(inner) })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Structural zero. Only meaningful as "identically zero" on canonical input.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_odd(&self) -> bool {
        self.terms.first().is_some_and(Term::is_odd)
    }

    pub fn scale(&self, c: &Coeff) -> Expression {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression { terms: self.terms.iter().map(|t| Term::new(&t.coeff * c, t.factors.clone())).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Expression {
        self.scale(&Coeff::int(n))
    }

    /// Labels of every term, unioned.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.terms.iter().flat_map(|t| t.label_counts().into_keys()).collect()
    }

    /// Free indices read off the first term (labels occurring once).
    pub fn free_indices(&self) -> Vec<Index> {
        let Some(t) = self.terms.first() else { return vec![] };
        free_indices_of(t)
    }

    /// Rename a label (keeping variance).
    pub fn relabel(&self, from: &str, to: &str) -> Expression {
        self.specialize(&label(from), &Slot::Label(label(to)), None)
    }

    /// Replace a label by a slot, optionally forcing a variance on it.
    pub fn specialize(&self, from: &Label, to: &Slot, variance: Option<Variance>) -> Expression {
        Expression::from_terms(self.terms.iter().filter_map(|t| t.specialize(from, to, variance)).collect())
    }

    /// Merge terms with identical factor lists (no reordering).
    pub fn collect(&self) -> Expression {
        let mut order: Vec<Vec<Factor>> = Vec::new();
        let mut acc: HashMap<Vec<Factor>, Coeff> = HashMap::new();
        for t in &self.terms {
            match acc.get_mut(&t.factors) {
                Some(c) => *c += &t.coeff,
                None => {
                    order.push(t.factors.clone());
                    acc.insert(t.factors.clone(), t.coeff.clone());
                }
            }
        }
        Expression::from_terms(
            order
                .into_iter()
                .map(|f| {
                    let c = acc.remove(&f).unwrap();
                    Term::new(c, f)
                })
                .collect(),
        )
    }

    /// Expand every formal derivative of a product by the Leibniz rule.
    pub fn distribute_derivatives(&self) -> Expression {
        let mut out = Vec::new();
        for t in &self.terms {
            distribute_term(t, &mut out);
        }
        Expression::from_terms(out)
    }

    /// `∂_idx` of the expression, Leibniz over field factors.
    pub fn partial(&self, idx: &Index) -> Expression {
        let mut out = Vec::new();
        for t in self.distribute_derivatives().terms {
            for (k, f) in t.factors.iter().enumerate() {
                if let Factor::Field(o) = f {
                    let mut factors = t.factors.clone();
                    let mut o = o.clone();
                    o.derivs.push(idx.clone());
                    factors[k] = Factor::Field(o);
                    out.push(Term::new(t.coeff.clone(), factors));
                }
            }
        }
        Expression::from_terms(out)
    }

    /// Replace every occurrence of a coupling symbol by an expression.
    pub fn substitute_coupling(&self, name: &str, value: &Expression) -> Expression {
        let mut out = Vec::new();
        for t in &self.terms {
            let mut partial = vec![Term::new(t.coeff.clone(), vec![])];
            for f in &t.factors {
                match f {
                    Factor::Coupling(c) if &**c == name => {
                        let mut next = Vec::new();
                        for p in &partial {
                            for v in &value.terms {
                                let mut fs = p.factors.clone();
                                fs.extend(v.factors.iter().cloned());
                                next.push(Term::new(&p.coeff * &v.coeff, fs));
                            }
                        }
                        partial = next;
                    }
                    Factor::Deriv { index, inner } => {
                        let g = Factor::Deriv {
                            index: index.clone(),
                            inner: Box::new(inner.substitute_coupling(name, value)),
                        };
                        partial.iter_mut().for_each(|p| p.factors.push(g.clone()));
                    }
                    other => partial.iter_mut().for_each(|p| p.factors.push(other.clone())),
                }
            }
            out.extend(partial);
        }
        Expression::from_terms(out)
    }

    /// Coupling symbols present anywhere in the expression.
    pub fn couplings(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for t in &self.terms {
            for f in &t.factors {
                match f {
                    Factor::Coupling(c) => {
                        out.insert(c.clone());
                    }
                    Factor::Deriv { inner, .. } => out.extend(inner.couplings()),
                    _ => {}
                }
            }
        }
        out
    }

    /// Product with automatic renaming of clashing dummy labels.
    pub fn mul_expr(&self, rhs: &Expression) -> Expression {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            let ca = a.label_counts();
            for b in &rhs.terms {
                let cb = b.label_counts();
                let (a2, b2) = resolve_clashes(a, &ca, b, &cb);
                let mut factors = a2.factors;
                factors.extend(b2.factors);
                out.push(Term::new(&a2.coeff * &b2.coeff, factors));
            }
        }
        Expression::from_terms(out)
    }
}

pub(crate) fn free_indices_of(t: &Term) -> Vec<Index> {
    let counts = t.label_counts();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut visit = |idx: Index| {
        if let Some(l) = idx.label() {
            if counts.get(l) == Some(&1) && seen.insert(l.clone()) {
                out.push(idx.clone());
            }
        }
    };
    for f in &t.factors {
        match f {
            Factor::Select(s) => visit(s.index()),
            Factor::Deriv { index, inner } => {
                visit(index.clone());
                if let Some(it) = inner.terms().first() {
                    for i in free_indices_of(it) {
                        visit(i);
                    }
                }
            }
            other => other.indices().into_iter().cloned().for_each(&mut visit),
        }
    }
    out
}

fn fresh(base: &Label, used: &BTreeSet<Label>) -> Label {
    let mut name = format!("{base}'");
    while used.contains(name.as_str()) {
        name.push('\'');
    }
    label(&name)
}

fn resolve_clashes(
    a: &Term,
    ca: &BTreeMap<Label, usize>,
    b: &Term,
    cb: &BTreeMap<Label, usize>,
) -> (Term, Term) {
    let clash_b: Vec<&Label> = cb.iter().filter(|(l, n)| **n >= 2 && ca.contains_key(*l)).map(|(l, _)| l).collect();
    let clash_a: Vec<&Label> = ca.iter().filter(|(l, n)| **n >= 2 && cb.contains_key(*l)).map(|(l, _)| l).collect();
    if clash_a.is_empty() && clash_b.is_empty() {
        return (a.clone(), b.clone());
    }
    let mut used: BTreeSet<Label> = ca.keys().chain(cb.keys()).cloned().collect();
    let mut b2 = b.clone();
    for l in clash_b {
        let n = fresh(l, &used);
        used.insert(n.clone());
        b2 = b2.specialize(l, &Slot::Label(n), None).expect("label renaming keeps the term");
    }
    let mut a2 = a.clone();
    for l in clash_a {
        if cb.get(l).copied().unwrap_or(0) >= 2 {
            continue;
        }
        let n = fresh(l, &used);
        used.insert(n.clone());
        a2 = a2.specialize(l, &Slot::Label(n), None).expect("label renaming keeps the term");
    }
    (a2, b2)
}

fn distribute_term(t: &Term, out: &mut Vec<Term>) {
    let Some(k) = t.factors.iter().position(|f| matches!(f, Factor::Deriv { .. })) else {
        out.push(t.clone());
        return;
    };
    let Factor::Deriv { index, inner } = &t.factors[k] else { unreachable!() };
    let expanded = inner.distribute_derivatives().partial(index);
    for it in expanded.terms {
        let mut factors = t.factors[..k].to_vec();
        factors.extend(it.factors);
        factors.extend(t.factors[k + 1..].iter().cloned());
        distribute_term(&Term::new(&t.coeff * &it.coeff, factors), out);
    }
}

impl Add for &Expression {
    type Output = Expression;
    fn add(self, o: &Expression) -> Expression {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Expression { terms }
    }
}

impl Sub for &Expression {
    type Output = Expression;
    fn sub(self, o: &Expression) -> Expression {
        self + &(-o)
    }
}

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        self.scale(&Coeff::int(-1))
    }
}

impl Mul for &Expression {
    type Output = Expression;
    fn mul(self, o: &Expression) -> Expression {
        self.mul_expr(o)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for Expression {
            type Output = Expression;
            fn $m(self, o: Expression) -> Expression {
                (&self).$m(&o)
            }
        }
        impl $tr<&Expression> for Expression {
            type Output = Expression;
            fn $m(self, o: &Expression) -> Expression {
                (&self).$m(o)
            }
        }
        impl $tr<Expression> for &Expression {
            type Output = Expression;
            fn $m(self, o: Expression) -> Expression {
                self.$m(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

impl std::iter::Sum for Expression {
    fn sum<I: Iterator<Item = Expression>>(iter: I) -> Expression {
        let mut terms = Vec::new();
        for e in iter {
            terms.extend(e.terms);
        }
        Expression { terms }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        for x in &self.factors {
            write!(f, " {x}")?;
        }
        Ok(())
    }
}

/// Dump format: one term per line, coefficient then factors; `0` when empty.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
