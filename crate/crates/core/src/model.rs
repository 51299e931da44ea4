//! Theory declarations, the fields they introduce and their gauge rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::coeff::{Coeff, Rational};
use crate::liealg::{GroupKind, LieAlgebra, LieError, RepKind};
use crate::oracle::OracleContext;
use crate::symexpr::index::{adj, lo, spin, up};
use crate::symexpr::{label, Expression, Factor, Field, FieldOcc, FieldRank, Index, IndexClass, Kernel, Label, Variance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("field name {0} declared twice")]
    DuplicateField(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("matter fields require a gauge coupling declaration")]
    MissingCoupling,
    #[error("unknown field {0}")]
    UnknownField(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Charge {
    Symbol(String),
    Value(Rational),
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Charge::Symbol(s) => f.write_str(s),
            Charge::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatterKind {
    DiracFermion { rep: RepKind, charge: Charge },
    ExternalCurrent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatterDecl {
    pub name: String,
    pub kind: MatterKind,
}

impl MatterDecl {
    pub fn fermion(name: &str, rep: RepKind, charge: Charge) -> Self {
        MatterDecl { name: name.into(), kind: MatterKind::DiracFermion { rep, charge } }
    }

    pub fn external(name: &str) -> Self {
        MatterDecl { name: name.into(), kind: MatterKind::ExternalCurrent }
    }
}

/// Single-coefficient knobs used to build deliberately broken theories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Normalisation of the gauge kinetic term (default −1/4).
    GaugeKinetic,
    /// Factor on `i ψ̄ γ^μ ∂_μ ψ` (default 1).
    DiracKinetic,
    /// Factor on every gauge–matter interaction term (default 1).
    Interaction,
    /// Factor on the bilinear term of the field strength (default 1).
    Commutator,
    /// Factor on the `f A Λ` term of the gauge field rule (default 1).
    GaugeRule,
    /// Factor on the fermion rule (default 1).
    MatterRule,
    /// Factor on the conjugate fermion rule (default 1).
    ConjugateRule,
}

impl Mutation {
    pub const ALL: [Mutation; 7] = [
        Mutation::GaugeKinetic,
        Mutation::DiracKinetic,
        Mutation::Interaction,
        Mutation::Commutator,
        Mutation::GaugeRule,
        Mutation::MatterRule,
        Mutation::ConjugateRule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::GaugeKinetic => "gauge_kinetic",
            Mutation::DiracKinetic => "dirac_kinetic",
            Mutation::Interaction => "interaction",
            Mutation::Commutator => "commutator",
            Mutation::GaugeRule => "gauge_rule",
            Mutation::MatterRule => "matter_rule",
            Mutation::ConjugateRule => "conjugate_rule",
        }
    }

    pub fn from_name(s: &str) -> Option<Mutation> {
        Mutation::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn default_value(self) -> Coeff {
        match self {
            Mutation::GaugeKinetic => Coeff::frac(-1, 4),
            _ => Coeff::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheorySpec {
    pub name: String,
    pub group: GroupKind,
    /// Gauge coupling symbol and an optional numeric value used by the oracle.
    pub coupling: Option<(String, Option<Rational>)>,
    pub matter: Vec<MatterDecl>,
    pub checks: Vec<String>,
    pub overrides: BTreeMap<Mutation, Rational>,
}

impl TheorySpec {
    pub fn new(name: &str, group: GroupKind) -> Self {
        TheorySpec {
            name: name.into(),
            group,
            coupling: Some(("e".into(), None)),
            matter: Vec::new(),
            checks: Vec::new(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_matter(mut self, m: MatterDecl) -> Self {
        self.matter.push(m);
        self
    }

    pub fn with_override(mut self, m: Mutation, v: Rational) -> Self {
        self.overrides.insert(m, v);
        self
    }
}

#[derive(Debug, Clone)]
pub struct FermionFields {
    pub name: String,
    pub rep: RepKind,
    pub charge: Charge,
    pub psi: Field,
    pub psibar: Field,
}

impl FermionFields {
    /// Index class of the internal slot.
    pub fn internal_class(&self) -> IndexClass {
        match self.rep {
            RepKind::Adjoint => IndexClass::Adjoint,
            _ => IndexClass::Fundamental,
        }
    }

    /// Internal index of ψ (upper colour) and of ψ̄ (lower colour).
    pub fn internal(&self, name: &str, conjugate: bool) -> Index {
        let v = match (self.internal_class(), conjugate) {
            (IndexClass::Adjoint, _) => Variance::Neutral,
            (_, false) => Variance::Up,
            (_, true) => Variance::Down,
        };
        Index::new(self.internal_class(), v, crate::symexpr::Slot::Label(label(name)))
    }

    pub fn charge_expr(&self) -> Expression {
        match &self.charge {
            Charge::Symbol(s) => Expression::coupling(s),
            Charge::Value(v) => Expression::constant(Coeff::from_rational(v.clone())),
        }
    }

    /// `T^a` in this fermion's representation with the given labels.
    pub fn generator(&self, a: &str, row: &str, col: &str) -> Factor {
        Factor::Generator { rep: self.rep, adj: adj(a), row: self.internal(row, false), col: self.internal(col, true) }
    }
}

/// A validated theory: spec plus algebra data and field symbols.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: TheorySpec,
    algebra: Arc<LieAlgebra>,
    kernel: Kernel,
    pub gauge: Field,
    pub parameter: Field,
    pub fermions: Vec<FermionFields>,
    pub currents: Vec<Field>,
}

pub const GAUGE_FIELD: &str = "A";
pub const GAUGE_PARAMETER: &str = "Lambda";

pub fn declare_theory(spec: TheorySpec) -> Result<Model, ModelError> {
    let algebra = Arc::new(LieAlgebra::new(spec.group)?);
    let mut names: BTreeSet<String> = [GAUGE_FIELD, GAUGE_PARAMETER].iter().map(|s| s.to_string()).collect();
    let mut claim = |n: String| -> Result<(), ModelError> {
        if names.insert(n.clone()) {
            Ok(())
        } else {
            Err(ModelError::DuplicateField(n))
        }
    };
    let mut fermions = Vec::new();
    let mut currents = Vec::new();
    for m in &spec.matter {
        match &m.kind {
            MatterKind::DiracFermion { rep, charge } => {
                claim(m.name.clone())?;
                claim(format!("{}bar", m.name))?;
                algebra.generators(*rep)?;
                let internal = match rep {
                    RepKind::Adjoint => (IndexClass::Adjoint, Variance::Neutral, Variance::Neutral),
                    _ => (IndexClass::Fundamental, Variance::Up, Variance::Down),
                };
                let psi = Field::new(
                    &m.name,
                    FieldRank::Fermion,
                    true,
                    vec![(IndexClass::Spinor, Variance::Neutral), (internal.0, internal.1)],
                );
                let psibar = Field::new(
                    &format!("{}bar", m.name),
                    FieldRank::Conjugate,
                    true,
                    vec![(IndexClass::Spinor, Variance::Neutral), (internal.0, internal.2)],
                );
                fermions.push(FermionFields { name: m.name.clone(), rep: *rep, charge: charge.clone(), psi, psibar });
            }
            MatterKind::ExternalCurrent => {
                claim(m.name.clone())?;
                currents.push(Field::boson(
                    &m.name,
                    vec![(IndexClass::Lorentz, Variance::Up), (IndexClass::Adjoint, Variance::Neutral)],
                ));
            }
        }
    }
    if spec.coupling.is_none() && (!spec.matter.is_empty() || !algebra.is_abelian()) {
        return Err(ModelError::MissingCoupling);
    }
    let gauge = Field::boson(
        GAUGE_FIELD,
        vec![(IndexClass::Lorentz, Variance::Down), (IndexClass::Adjoint, Variance::Neutral)],
    );
    let parameter = Field::boson(GAUGE_PARAMETER, vec![(IndexClass::Adjoint, Variance::Neutral)]);
    let kernel = Kernel::new(algebra.clone());
    Ok(Model { spec, algebra, kernel, gauge, parameter, fermions, currents })
}

/// First-order variation of one field, written for `pattern`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub pattern: FieldOcc,
    pub variation: Expression,
}

#[derive(Debug, Clone, Default)]
pub struct TransformationRuleSet {
    rules: Vec<Rule>,
}

impl TransformationRuleSet {
    pub fn get(&self, f: &Field) -> Option<&Rule> {
        self.rules.iter().find(|r| &r.pattern.field == f)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn insert(&mut self, pattern: FieldOcc, variation: Expression) {
        self.rules.retain(|r| r.pattern.field != pattern.field);
        self.rules.push(Rule { pattern, variation });
    }

    pub fn without(&self, f: &Field) -> TransformationRuleSet {
        TransformationRuleSet { rules: self.rules.iter().filter(|r| &r.pattern.field != f).cloned().collect() }
    }
}

impl Model {
    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn is_abelian(&self) -> bool {
        self.algebra.is_abelian()
    }

    /// Gauge coupling symbol.
    pub fn coupling(&self) -> &str {
        self.spec.coupling.as_ref().map(|c| c.0.as_str()).unwrap_or("e")
    }

    pub fn e(&self) -> Expression {
        Expression::coupling(self.coupling())
    }

    /// Coefficient of a mutation knob (its default unless overridden).
    pub fn knob(&self, m: Mutation) -> Coeff {
        self.spec.overrides.get(&m).map(|v| Coeff::from_rational(v.clone())).unwrap_or_else(|| m.default_value())
    }

    pub fn fermion(&self, name: &str) -> Result<&FermionFields, ModelError> {
        self.fermions.iter().find(|f| f.name == name).ok_or_else(|| ModelError::UnknownField(name.into()))
    }

    pub fn current(&self, name: &str) -> Result<&Field, ModelError> {
        self.currents.iter().find(|f| f.name() == name).ok_or_else(|| ModelError::UnknownField(name.into()))
    }

    /// Every field symbol, bosons first.
    pub fn fields(&self) -> Vec<Field> {
        let mut out = vec![self.gauge.clone(), self.parameter.clone()];
        out.extend(self.currents.iter().cloned());
        for f in &self.fermions {
            out.push(f.psibar.clone());
            out.push(f.psi.clone());
        }
        out
    }

    /// Dynamical fields (those varied in the action).
    pub fn dynamical_fields(&self) -> Vec<Field> {
        let mut out = vec![self.gauge.clone()];
        for f in &self.fermions {
            out.push(f.psibar.clone());
            out.push(f.psi.clone());
        }
        out
    }

    /// Symbolic couplings: the gauge coupling then fermion charges.
    pub fn coupling_symbols(&self) -> Vec<Label> {
        let mut out = vec![label(self.coupling())];
        for f in &self.fermions {
            if let Charge::Symbol(s) = &f.charge {
                if !out.iter().any(|l| &**l == s) {
                    out.push(label(s));
                }
            }
        }
        out
    }

    pub fn oracle_context(&self) -> OracleContext {
        let mut ctx = OracleContext::new(self.algebra.clone(), self.fields(), self.coupling_symbols());
        if let Some((name, Some(v))) = &self.spec.coupling {
            ctx = ctx.pin(name, v.clone());
        }
        ctx
    }

    pub fn gauge_occ(&self, mu: Index, a: &str) -> FieldOcc {
        self.gauge.at(vec![mu, adj(a)])
    }

    pub fn parameter_occ(&self, a: &str) -> FieldOcc {
        self.parameter.at(vec![adj(a)])
    }
}

/// `e f^{abc} X^b Λ^c`: the rotation of an adjoint-valued object `X^b`.
pub fn adjoint_rotation(m: &Model, x_b: Expression) -> Expression {
    Expression::factor(Factor::Structure(adj("a"), adj("b"), adj("c")))
        * m.e()
        * x_b
        * Expression::field(m.parameter_occ("c"))
}

/// Infinitesimal gauge rules:
/// `δA^a_μ = ∂_μΛ^a + e f^{abc} A^b_μ Λ^c`, `δψ = i q Λ^a T^a ψ`,
/// `δψ̄ = −i q ψ̄ Λ^a T^a`, external currents rotate like `A` without the
/// inhomogeneous term, and `δΛ = 0`.
pub fn gauge_rules(m: &Model) -> TransformationRuleSet {
    let mut rules = TransformationRuleSet::default();

    let a_pat = m.gauge_occ(lo("mu"), "a");
    let mut da = Expression::field(m.parameter.at(vec![adj("a")]).d(lo("mu")));
    if !m.is_abelian() {
        let rot = adjoint_rotation(m, Expression::field(m.gauge_occ(lo("mu"), "b")));
        da = da + rot.scale(&m.knob(Mutation::GaugeRule));
    }
    rules.insert(a_pat, da);

    rules.insert(m.parameter_occ("a"), Expression::zero());

    for j in &m.currents {
        let pat = j.at(vec![up("mu"), adj("a")]);
        let dj = if m.is_abelian() {
            Expression::zero()
        } else {
            adjoint_rotation(m, Expression::field(j.at(vec![up("mu"), adj("b")])))
        };
        rules.insert(pat, dj);
    }

    for f in &m.fermions {
        let i_q = f.charge_expr().scale(&Coeff::i());
        let lam = Expression::field(m.parameter_occ("z"));
        let psi_pat = f.psi.at(vec![spin("al"), f.internal("i", false)]);
        let dpsi = i_q.clone()
            * lam.clone()
            * Expression::factor(f.generator("z", "i", "k"))
            * Expression::field(f.psi.at(vec![spin("al"), f.internal("k", false)]));
        rules.insert(psi_pat, dpsi.scale(&m.knob(Mutation::MatterRule)));

        let bar_pat = f.psibar.at(vec![spin("al"), f.internal("k", true)]);
        let dbar = -i_q
            * Expression::field(f.psibar.at(vec![spin("al"), f.internal("i", true)]))
            * lam
            * Expression::factor(f.generator("z", "i", "k"));
        rules.insert(bar_pat, dbar.scale(&m.knob(Mutation::ConjugateRule)));
    }
    rules
}
