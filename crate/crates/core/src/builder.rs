//! Construction of field strengths, Lagrangian parts and currents.

use std::collections::BTreeSet;
use std::fmt;

use crate::coeff::Coeff;
use crate::liealg::RepKind;
use crate::model::{FermionFields, ModelError, Model, Mutation};
use crate::symexpr::index::{adj, lo, spin, up};
use crate::symexpr::{label, Expression, Factor, Index, IndexClass, Label, Slot, SymError, Variance};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("unknown field {0}")]
    UnknownField(String),
    #[error("current has index signature {0}, expected one upper Lorentz and one adjoint index")]
    IndexSignatureMismatch(String),
    #[error("matter kinetic and interaction parts do not combine into a covariant derivative: {0}")]
    NotMinimallyCoupled(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}

impl From<ModelError> for BuildError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownField(n) => BuildError::UnknownField(n),
            other => BuildError::UnknownField(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PartKind {
    GaugeKinetic,
    MatterKinetic,
    Interaction,
}

impl fmt::Display for PartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartKind::GaugeKinetic => "gauge-kinetic",
            PartKind::MatterKinetic => "matter-kinetic",
            PartKind::Interaction => "interaction",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Part {
    pub kind: PartKind,
    /// Matter field the part belongs to, if any.
    pub field: Option<String>,
    pub expr: Expression,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct Lagrangian {
    pub parts: Vec<Part>,
}

impl Lagrangian {
    pub fn total(&self) -> Expression {
        self.parts.iter().map(|p| p.expr.clone()).sum()
    }

    pub fn parts_of(&self, kind: PartKind) -> impl Iterator<Item = &Part> {
        self.parts.iter().filter(move |p| p.kind == kind)
    }

    /// Sum of the parts attached to dynamical fermions.
    pub fn fermion_sector(&self) -> Expression {
        self.parts
            .iter()
            .filter(|p| p.kind != PartKind::GaugeKinetic && p.field.is_some() && p.note != EXTERNAL_NOTE)
            .map(|p| p.expr.clone())
            .sum()
    }

    pub fn map(&self, f: impl Fn(&Expression) -> Expression) -> Lagrangian {
        Lagrangian {
            parts: self.parts.iter().map(|p| Part { expr: f(&p.expr), ..p.clone() }).collect(),
        }
    }
}

const EXTERNAL_NOTE: &str = "coupling to a non-dynamical source";

/// A current with one free Lorentz index `mu` and one free adjoint index `a`.
#[derive(Debug, Clone)]
pub struct CurrentExpr {
    pub expr: Expression,
    pub mu: Index,
    pub a: Label,
    pub dynamical: bool,
}

/// Names based on `bases` that occur neither in `avoid` nor in each other.
pub fn fresh_names(avoid: &BTreeSet<Label>, bases: &[&str]) -> Vec<String> {
    let mut taken = avoid.clone();
    let mut out = Vec::new();
    for b in bases {
        let mut cand = b.to_string();
        let mut n = 1;
        while taken.contains(&label(&cand)) {
            cand = format!("{b}{n}");
            n += 1;
        }
        taken.insert(label(&cand));
        out.push(cand);
    }
    out
}

fn labels_of(idx: &[&Index], names: &[&str]) -> BTreeSet<Label> {
    let mut s: BTreeSet<Label> = idx.iter().filter_map(|i| i.label().cloned()).collect();
    s.extend(names.iter().map(|n| label(n)));
    s
}

fn structure(a: &str, b: &str, c: &str) -> Expression {
    Expression::factor(Factor::Structure(adj(a), adj(b), adj(c)))
}

/// `F^a_{μν} = ∂_μA^a_ν − ∂_νA^a_μ + e f^{abc} A^b_μ A^c_ν` with the
/// variances of `mu` and `nu` as given.
pub fn field_strength(m: &Model, mu: &Index, nu: &Index, a: &str) -> Expression {
    let g = |i: &Index, x: &str| m.gauge.at(vec![i.clone(), adj(x)]);
    let mut f = Expression::field(g(nu, a).d(mu.clone())) - Expression::field(g(mu, a).d(nu.clone()));
    if !m.is_abelian() {
        let n = fresh_names(&labels_of(&[mu, nu], &[a]), &["b", "c"]);
        let bilinear = structure(a, &n[0], &n[1])
            * m.e()
            * Expression::field(g(mu, &n[0]))
            * Expression::field(g(nu, &n[1]));
        f = f + bilinear.scale(&m.knob(Mutation::Commutator));
    }
    f
}

/// Adjoint covariant derivative `D_μX^a = ∂_μX^a + e f^{abc} A^b_μ X^c`,
/// where `x(l)` builds `X` with adjoint index `l`.
pub fn covariant_adjoint(m: &Model, mu: &Index, a: &str, x: impl Fn(&str) -> Expression) -> Expression {
    let probe = x(a);
    let d = Expression::deriv(mu.clone(), probe.clone());
    if m.is_abelian() {
        return d;
    }
    let mut avoid = probe.labels();
    avoid.extend(labels_of(&[mu], &[a]));
    let n = fresh_names(&avoid, &["b", "c"]);
    d + structure(a, &n[0], &n[1]) * m.e() * Expression::field(m.gauge.at(vec![mu.clone(), adj(&n[0])])) * x(&n[1])
}

/// `knob · F^a_{μν} F^{aμν}` with knob −1/4 by default.
pub fn gauge_lagrangian(m: &Model) -> Expression {
    let f1 = field_strength(m, &lo("mu"), &lo("nu"), "a");
    let f2 = field_strength(m, &up("mu"), &up("nu"), "a");
    (f1 * f2).scale(&m.knob(Mutation::GaugeKinetic))
}

/// `−½ tr(F_{μν} F^{μν})` with `F = F^a T^a` in the fundamental representation.
pub fn gauge_lagrangian_trace(m: &Model) -> Expression {
    let f1 = field_strength(m, &lo("mu"), &lo("nu"), "a");
    let f2 = field_strength(m, &up("mu"), &up("nu"), "d");
    let t = |x: &str, r: &str, c: &str| {
        Expression::factor(Factor::Generator {
            rep: RepKind::Fundamental,
            adj: adj(x),
            row: fund_idx(r, Variance::Up),
            col: fund_idx(c, Variance::Down),
        })
    };
    let tr = t("a", "i", "k") * t("d", "k", "i");
    (f1 * f2 * tr).scale(&Coeff::frac(-1, 2))
}

fn fund_idx(l: &str, v: Variance) -> Index {
    Index::new(IndexClass::Fundamental, v, Slot::Label(label(l)))
}

fn psibar_at(f: &FermionFields, s: &str, i: &str) -> Expression {
    Expression::field(f.psibar.at(vec![spin(s), f.internal(i, true)]))
}

fn psi_occ(f: &FermionFields, s: &str, i: &str) -> crate::symexpr::FieldOcc {
    f.psi.at(vec![spin(s), f.internal(i, false)])
}

fn gamma(mu: &Index, r: &str, c: &str) -> Expression {
    Expression::factor(Factor::Gamma { mu: mu.clone(), row: spin(r), col: spin(c) })
}

/// `ψ̄ γ^μ T^a ψ` for the named fermion; the variance of `mu` is kept.
pub fn matter_current(m: &Model, name: &str, mu: &Index, a: &str) -> Result<CurrentExpr, BuildError> {
    let f = m.fermion(name)?;
    let n = fresh_names(&labels_of(&[mu], &[a]), &["s1", "s2", "i", "k"]);
    let expr = psibar_at(f, &n[0], &n[2])
        * gamma(mu, &n[0], &n[1])
        * Expression::factor(f.generator(a, &n[2], &n[3]))
        * Expression::field(psi_occ(f, &n[1], &n[3]));
    Ok(CurrentExpr { expr, mu: mu.clone(), a: label(a), dynamical: true })
}

/// The declared external source `j^{μa}`.
pub fn external_current(m: &Model, name: &str) -> Result<CurrentExpr, BuildError> {
    let j = m.current(name)?;
    Ok(CurrentExpr {
        expr: Expression::field(j.at(vec![up("mu"), adj("a")])),
        mu: up("mu"),
        a: label("a"),
        dynamical: false,
    })
}

/// `c · e · A^a_μ j^{μa}`.
pub fn interaction_term(m: &Model, j: &CurrentExpr, c: &Coeff) -> Result<Expression, BuildError> {
    let mu = j.mu.label().cloned().ok_or_else(|| BuildError::IndexSignatureMismatch(j.mu.to_string()))?;
    let mut sig: Vec<(Label, IndexClass, Variance)> = j
        .expr
        .free_indices()
        .into_iter()
        .map(|i| (i.label().cloned().unwrap_or_else(|| label("?")), i.class, i.variance))
        .collect();
    sig.sort();
    let mut want = vec![(mu.clone(), IndexClass::Lorentz, Variance::Up), (j.a.clone(), IndexClass::Adjoint, Variance::Neutral)];
    want.sort();
    if j.expr.is_zero() {
        return Ok(Expression::zero());
    }
    if sig != want {
        let shown: Vec<String> = sig.iter().map(|(l, c, v)| Index::new(*c, *v, Slot::Label(l.clone())).to_string()).collect();
        return Err(BuildError::IndexSignatureMismatch(format!("{{{}}}", shown.join(","))));
    }
    let a = Expression::field(m.gauge.at(vec![Index::new(IndexClass::Lorentz, Variance::Down, Slot::Label(mu)), adj(&j.a)]));
    Ok((m.e() * a * &j.expr).scale(c))
}

/// `knob · i ψ̄ γ^μ ∂_μ ψ`.
pub fn dirac_kinetic(m: &Model, name: &str) -> Result<Expression, BuildError> {
    let f = m.fermion(name)?;
    let e = psibar_at(f, "s1", "i") * gamma(&up("mu"), "s1", "s2") * Expression::field(psi_occ(f, "s2", "i").d(lo("mu")));
    Ok(e.scale(&(&Coeff::i() * &m.knob(Mutation::DiracKinetic))))
}

/// Gauge kinetic term, then per fermion its kinetic and interaction
/// parts, then the source couplings.
pub fn assemble(m: &Model) -> Result<Lagrangian, BuildError> {
    let mut parts = vec![Part {
        kind: PartKind::GaugeKinetic,
        field: None,
        expr: gauge_lagrangian(m),
        note: "field-strength squared".into(),
    }];
    let k = m.knob(Mutation::Interaction);
    for f in &m.fermions {
        parts.push(Part {
            kind: PartKind::MatterKinetic,
            field: Some(f.name.clone()),
            expr: dirac_kinetic(m, &f.name)?,
            note: "free Dirac term".into(),
        });
        let j = matter_current(m, &f.name, &up("mu"), "a")?;
        parts.push(Part {
            kind: PartKind::Interaction,
            field: Some(f.name.clone()),
            expr: interaction_term(m, &j, &k)?,
            note: "minimal coupling".into(),
        });
    }
    for j in &m.currents {
        let c = external_current(m, j.name())?;
        parts.push(Part {
            kind: PartKind::Interaction,
            field: Some(j.name().to_string()),
            expr: interaction_term(m, &c, &-&k)?,
            note: EXTERNAL_NOTE.into(),
        });
    }
    Ok(Lagrangian { parts })
}

/// `D_μψ = ∂_μψ − i e A^a_μ T^a ψ` with free spinor `s` and colour `i`.
pub fn covariant_fermion(m: &Model, f: &FermionFields, mu: &Index, s: &str, i: &str) -> Expression {
    let n = fresh_names(&labels_of(&[mu], &[s, i]), &["b", "k"]);
    let d = Expression::field(psi_occ(f, s, i).d(mu.clone()));
    let a = Expression::field(m.gauge.at(vec![mu.clone(), adj(&n[0])]));
    let conn = a * Expression::factor(f.generator(&n[0], i, &n[1])) * Expression::field(psi_occ(f, s, &n[1]));
    d - (m.e() * conn).scale(&Coeff::i())
}

/// `Σ i ψ̄ γ^μ D_μ ψ` over the dynamical fermions.
pub fn covariant_sector(m: &Model) -> Expression {
    let mut out = Expression::zero();
    for f in &m.fermions {
        let d = covariant_fermion(m, f, &lo("mu"), "s2", "i");
        out = out + (psibar_at(f, "s1", "i") * gamma(&up("mu"), "s1", "s2") * d).scale(&Coeff::i());
    }
    out
}

/// Fermion sector written as `Σ i ψ̄ γ^μ D_μ ψ`; checked to expand back to
/// the kinetic plus interaction parts of `l`.
pub fn covariant_form(l: &Lagrangian, m: &Model) -> Result<Expression, BuildError> {
    let out = covariant_sector(m);
    let diff = m.kernel().canonicalize(&(&out - &l.fermion_sector()))?;
    if !diff.is_zero() {
        return Err(BuildError::NotMinimallyCoupled(diff.to_string()));
    }
    Ok(out)
}

/// `f^{abc} F^b_{μν} A^{νc}`; identically zero for U(1).
pub fn gauge_noether_current(m: &Model, mu: &Index, a: &str) -> CurrentExpr {
    let expr = if m.is_abelian() {
        Expression::zero()
    } else {
        let n = fresh_names(&labels_of(&[mu], &[a]), &["b", "c", "nu"]);
        let nu = Index::new(IndexClass::Lorentz, Variance::Down, Slot::Label(label(&n[2])));
        structure(a, &n[0], &n[1])
            * field_strength(m, mu, &nu, &n[0])
            * Expression::field(m.gauge.at(vec![nu.raised(), adj(&n[1])]))
    };
    CurrentExpr { expr, mu: mu.clone(), a: label(a), dynamical: false }
}

/// Gauge current plus the matter current of `name`, both with index `mu`.
pub fn total_current(m: &Model, name: &str, mu: &Index, a: &str) -> Result<CurrentExpr, BuildError> {
    let g = gauge_noether_current(m, mu, a);
    let j = matter_current(m, name, mu, a)?;
    Ok(CurrentExpr { expr: g.expr + j.expr, mu: mu.clone(), a: label(a), dynamical: true })
}
