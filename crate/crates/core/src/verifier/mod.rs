//! Pass/fail checks with exact residuals, run through a registry of
//! strategy objects and cross-checked by the oracle.

mod checks;
mod constraint;

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::builder::{assemble, covariant_adjoint, covariant_fermion, field_strength, BuildError, Lagrangian};
use crate::calculus::{
    classify_total_derivative, euler_lagrange, gauge_variation, reduce_on_shell, CalcError, Classification, EomSet,
    Step,
};
use crate::coeff::{Coeff, Rational};
use crate::model::{declare_theory, gauge_rules, Model, ModelError, Mutation, TheorySpec, TransformationRuleSet};
use crate::oracle::{OracleConfig, OracleError, Verdict};
use crate::symexpr::index::{adj, lo, spin, up};
use crate::symexpr::{splice, Expression, FieldOcc, SymError};

pub use checks::{
    AlgebraCheck, BianchiCheck, ConservationCheck, ConstructionCheck, EomCheck, InvarianceCheck, NoetherCheck,
};
pub use constraint::{solve_coupling_constraint, Constraint, ConstraintError, LinearForm};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("unknown check {0}")]
    UnknownCheck(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Obstruction,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Obstruction => "obstruction",
        })
    }
}

/// One identity inside a check. Most claims assert that `residual`
/// vanishes; a few assert that it does not.
#[derive(Debug, Clone)]
pub struct Claim {
    pub statement: String,
    pub expect_zero: bool,
    /// Canonical residual.
    pub residual: Expression,
    /// Uncanonicalised expression handed to the oracle.
    pub evidence: Option<Expression>,
    pub oracle: Option<Verdict>,
}

impl Claim {
    pub fn zero(statement: impl Into<String>, residual: Expression, evidence: Option<Expression>) -> Self {
        Claim { statement: statement.into(), expect_zero: true, residual, evidence, oracle: None }
    }

    pub fn nonzero(statement: impl Into<String>, residual: Expression, evidence: Option<Expression>) -> Self {
        Claim { statement: statement.into(), expect_zero: false, residual, evidence, oracle: None }
    }

    pub fn holds(&self) -> bool {
        self.residual.is_zero() == self.expect_zero
    }

    /// Whether the oracle verdict matches the symbolic one.
    pub fn oracle_agrees(&self) -> Option<bool> {
        self.oracle.as_ref().map(|v| v.zero == self.residual.is_zero())
    }
}

/// What a check returns before status and oracle bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub claims: Vec<Claim>,
    pub constraints: Vec<Constraint>,
    pub note: String,
    /// Set when the residual is an unresolved gauge obstruction.
    pub obstruction: bool,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    /// Residual of the first claim that does not hold, else zero.
    pub residual: Expression,
    pub constraints: Vec<Constraint>,
    pub note: String,
    pub claims: Vec<Claim>,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn from_outcome(name: &str, o: Outcome, elapsed: Duration) -> Self {
        let failing = o.claims.iter().find(|c| !c.holds());
        let residual = failing.map(|c| c.residual.clone()).unwrap_or_else(Expression::zero);
        let status = if o.obstruction {
            Status::Obstruction
        } else if failing.is_some() {
            Status::Fail
        } else {
            Status::Pass
        };
        CheckResult {
            name: name.into(),
            status,
            residual,
            constraints: o.constraints,
            note: o.note,
            claims: o.claims,
            elapsed,
        }
    }

    fn from_error(name: &str, e: &VerifyError, elapsed: Duration) -> Self {
        CheckResult {
            name: name.into(),
            status: Status::Fail,
            residual: Expression::zero(),
            constraints: vec![],
            note: format!("error: {e}"),
            claims: vec![],
            elapsed,
        }
    }

    /// Claims the oracle disagreed on.
    pub fn oracle_failures(&self) -> usize {
        self.claims.iter().filter(|c| c.oracle_agrees() == Some(false)).count()
    }

    /// Whether some claim that fails symbolically also has an oracle witness.
    pub fn oracle_detects_failure(&self) -> bool {
        self.claims
            .iter()
            .any(|c| !c.holds() && c.oracle.as_ref().is_some_and(|v| v.witness.is_some()))
    }
}

/// Variation of a Lagrangian under a rule set, classified.
#[derive(Debug, Clone)]
pub struct VariationAnalysis {
    pub classification: Classification,
    /// Expressions that must vanish for invariance.
    pub parts: Vec<Expression>,
    /// Something the oracle can evaluate: zero iff the variation is harmless.
    pub evidence: Option<Expression>,
    pub raw: Expression,
}

impl VariationAnalysis {
    pub fn obstruction(&self) -> Expression {
        self.parts.iter().cloned().sum()
    }
}

/// Invariance outcome shared by the checks that need the constrained theory.
#[derive(Debug, Clone)]
pub struct Invariance {
    pub before: VariationAnalysis,
    pub solution: Option<Result<Vec<Constraint>, ConstraintError>>,
    pub after: Option<VariationAnalysis>,
    pub lagrangian: Expression,
    pub rules: TransformationRuleSet,
}

impl Invariance {
    pub fn resolved(&self) -> bool {
        let ok = |a: &VariationAnalysis| a.classification != Classification::Obstruction;
        ok(&self.before) || self.after.as_ref().is_some_and(ok)
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        match &self.solution {
            Some(Ok(cs)) => cs.iter().map(|c| Constraint { applied: self.resolved(), ..c.clone() }).collect(),
            _ => vec![],
        }
    }
}

/// Everything the checks share: the theory, a copy without mutations, the
/// assembled Lagrangian and lazily computed intermediate results.
pub struct Context {
    pub model: Model,
    pub reference: Model,
    pub lagrangian: Lagrangian,
    pub rules: TransformationRuleSet,
    invariance: OnceLock<Result<Invariance, VerifyError>>,
    eoms: OnceLock<Result<EomSet, VerifyError>>,
}

impl Context {
    pub fn new(model: Model) -> Result<Context, VerifyError> {
        let mut spec = model.spec.clone();
        spec.overrides.clear();
        let reference = declare_theory(spec)?;
        let lagrangian = assemble(&model)?;
        let rules = gauge_rules(&model);
        Ok(Context { model, reference, lagrangian, rules, invariance: OnceLock::new(), eoms: OnceLock::new() })
    }

    pub fn invariance(&self) -> Result<&Invariance, VerifyError> {
        self.invariance
            .get_or_init(|| invariance_analysis(&self.model, &self.lagrangian.total(), &self.rules))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Field equations of the Lagrangian after the derived constraints.
    pub fn eoms(&self) -> Result<&EomSet, VerifyError> {
        self.eoms
            .get_or_init(|| {
                let inv = self.invariance()?;
                Ok(EomSet::from_lagrangian(self.model.kernel(), &inv.lagrangian, &eom_patterns(&self.model))?)
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Patterns of the dynamical fields: `A_ν^a`, then `ψ̄`, `ψ` per fermion.
pub fn eom_patterns(m: &Model) -> Vec<FieldOcc> {
    let mut out = vec![m.gauge_occ(lo("nu"), "a")];
    for f in &m.fermions {
        out.push(f.psibar.at(vec![spin("al"), f.internal("i", true)]));
        out.push(f.psi.at(vec![spin("al"), f.internal("i", false)]));
    }
    out
}

/// Equations the Lagrangian should produce, built without any knob:
/// `D_μF^{μνa} + e Σ ψ̄γ^νT^aψ − e Σ j^{νa}`, `i γ^μ D_μψ` and
/// `i ∂_μψ̄ γ^μ − e ψ̄ γ^μ A_μ^b T^b`.
pub fn expected_equations(m: &Model) -> EomSet {
    let mut out = EomSet::default();
    let patterns = eom_patterns(m);
    let mut a_eq = covariant_adjoint(m, &lo("mu"), "a", |x| field_strength(m, &up("mu"), &up("nu"), x));
    for f in &m.fermions {
        let j = crate::builder::matter_current(m, &f.name, &up("nu"), "a").expect("declared fermion");
        a_eq = a_eq + m.e() * j.expr;
    }
    for j in &m.currents {
        a_eq = a_eq - m.e() * Expression::field(j.at(vec![up("nu"), adj("a")]));
    }
    out.insert(m.gauge.name(), patterns[0].clone(), a_eq);
    let gamma = |mu: crate::symexpr::Index, r: &str, c: &str| {
        Expression::factor(crate::symexpr::Factor::Gamma { mu, row: spin(r), col: spin(c) })
    };
    for (k, f) in m.fermions.iter().enumerate() {
        let bar = (gamma(up("mu"), "al", "s2") * covariant_fermion(m, f, &lo("mu"), "s2", "i")).scale(&Coeff::i());
        out.insert(f.psibar.name(), patterns[1 + 2 * k].clone(), bar);

        let dbar = Expression::field(f.psibar.at(vec![spin("s1"), f.internal("i", true)]).d(lo("mu")));
        let kin = (dbar * gamma(up("mu"), "s1", "al")).scale(&Coeff::i());
        let conn = Expression::field(f.psibar.at(vec![spin("s1"), f.internal("k", true)]))
            * gamma(up("mu"), "s1", "al")
            * Expression::field(m.gauge_occ(lo("mu"), "b"))
            * Expression::factor(f.generator("b", "k", "i"));
        out.insert(f.psi.name(), patterns[2 + 2 * k].clone(), kin - m.e() * conn);
    }
    out
}

/// Variation of `l` classified. Without external sources this is the
/// Euler-operator test on `δL`; with them, `δL` is linear in `Λ`, so it
/// is a divergence iff `E_Λ(δL)` vanishes, which is tested modulo the
/// covariant conservation of the sources.
pub fn analyse_variation(m: &Model, l: &Expression, rules: &TransformationRuleSet) -> Result<VariationAnalysis, VerifyError> {
    let k = m.kernel();
    let raw = gauge_variation(l, rules)?;
    if m.currents.is_empty() {
        let rep = classify_total_derivative(k, &raw)?;
        let evidence = match (rep.classification, &rep.witness) {
            (Classification::TotalDerivative, Some(w)) => {
                Some(&raw - &Expression::deriv(lo("mu"), w.clone()))
            }
            (Classification::TotalDerivative, None) => None,
            _ => Some(raw.clone()),
        };
        let parts = rep.obstruction.into_iter().map(|(_, e)| e).collect();
        return Ok(VariationAnalysis { classification: rep.classification, parts, evidence, raw: rep.raw });
    }
    let canon = k.canonicalize(&raw)?;
    if canon.is_zero() {
        return Ok(VariationAnalysis {
            classification: Classification::Zero,
            parts: vec![],
            evidence: Some(raw),
            raw: canon,
        });
    }
    let e_lambda = euler_lagrange(k, &canon, &m.parameter_occ("a"))?;
    let mut sources = EomSet::default();
    for j in &m.currents {
        let div = covariant_adjoint(m, &lo("mu"), "a", |x| Expression::field(j.at(vec![up("mu"), adj(x)])));
        sources.insert(j.name(), j.at(vec![up("mu"), adj("a")]), div);
    }
    let red = reduce_on_shell(k, &e_lambda, &sources)?;
    let evidence = Some(substituted(m, &e_lambda, &red.steps)?);
    let classification =
        if red.result.is_zero() { Classification::TotalDerivative } else { Classification::Obstruction };
    let parts = if red.result.is_zero() { vec![] } else { vec![red.result] };
    Ok(VariationAnalysis { classification, parts, evidence, raw: canon })
}

/// Invariance of `l` under `rules`; on an obstruction, derive coupling
/// constraints, apply them and test again.
pub fn invariance_analysis(m: &Model, l: &Expression, rules: &TransformationRuleSet) -> Result<Invariance, VerifyError> {
    let before = analyse_variation(m, l, rules)?;
    if before.classification != Classification::Obstruction {
        return Ok(Invariance { before, solution: None, after: None, lagrangian: l.clone(), rules: rules.clone() });
    }
    let solution = solve_coupling_constraint(&before.parts, m);
    let (mut lc, mut rc) = (l.clone(), rules.clone());
    let mut after = None;
    if let Ok(cs) = &solution {
        for c in cs {
            lc = c.apply(&lc);
            rc = c.apply_rules(&rc);
        }
        after = Some(analyse_variation(m, &lc, &rc)?);
    }
    Ok(Invariance { before, solution: Some(solution), after, lagrangian: lc, rules: rc })
}

/// `e` with the logged on-shell substitutions spliced in, without a final
/// canonicalisation; equals the reduced form as a function.
pub fn substituted(m: &Model, e: &Expression, steps: &[Step]) -> Result<Expression, VerifyError> {
    let table: HashMap<&FieldOcc, &Expression> = steps.iter().map(|s| (&s.variable, &s.replacement)).collect();
    let mut cur = m.kernel().canonicalize(e)?;
    let fields = m.fields();
    for _ in 0..=steps.len() {
        let hit = cur.terms().iter().any(|t| {
            t.factors.iter().any(|f| matches!(f, crate::symexpr::Factor::Field(o) if table.contains_key(o)))
        });
        if !hit {
            return Ok(cur);
        }
        let mut next = Vec::new();
        for t in cur.terms() {
            let mut part = Expression::from_terms(vec![t.clone()]);
            for field in &fields {
                let mut acc = Vec::new();
                for u in part.terms() {
                    let x = splice(u, field, |o| {
                        table.get(o).map(|r| (*r).clone()).unwrap_or_else(|| Expression::field(o.clone()))
                    });
                    acc.extend(x.into_terms());
                }
                part = Expression::from_terms(acc);
            }
            next.extend(part.into_terms());
        }
        cur = Expression::from_terms(next).collect();
    }
    Ok(cur)
}

/// Reduce `e` modulo the field equations of the context: canonical
/// residual plus oracle evidence.
pub fn on_shell(cx: &Context, e: &Expression) -> Result<(Expression, Expression), VerifyError> {
    let red = reduce_on_shell(cx.model.kernel(), e, cx.eoms()?)?;
    let evidence = substituted(&cx.model, e, &red.steps)?;
    Ok((red.result, evidence))
}

/// A named verification strategy.
pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    /// One-line description of the identity being verified.
    fn claim(&self) -> &'static str;
    fn applies(&self, _cx: &Context) -> bool {
        true
    }
    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError>;
}

/// Checks in report order.
pub struct CheckRegistry {
    checks: Vec<Box<dyn Check>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut r = CheckRegistry { checks: Vec::new() };
        r.register(Box::new(AlgebraCheck));
        r.register(Box::new(ConstructionCheck));
        r.register(Box::new(InvarianceCheck));
        r.register(Box::new(BianchiCheck));
        r.register(Box::new(EomCheck));
        r.register(Box::new(ConservationCheck));
        r.register(Box::new(NoetherCheck));
        r
    }
}

impl CheckRegistry {
    pub fn empty() -> Self {
        CheckRegistry { checks: Vec::new() }
    }

    /// Add a check; a check with the same name is replaced in place.
    pub fn register(&mut self, c: Box<dyn Check>) {
        match self.checks.iter().position(|x| x.name() == c.name()) {
            Some(k) => self.checks[k] = c,
            None => self.checks.push(c),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn Check> {
        self.checks.iter().find(|c| c.name() == name).map(|c| c.as_ref())
    }

    /// Run the selected checks (all for an empty selection or `all`)
    /// concurrently; results keep registry order.
    pub fn run(&self, cx: &Context, selection: &[String], oracle: Option<&OracleConfig>) -> Result<Vec<CheckResult>, VerifyError> {
        for s in selection {
            if s != "all" && self.get(s).is_none() {
                return Err(VerifyError::UnknownCheck(s.clone()));
            }
        }
        let all = selection.is_empty() || selection.iter().any(|s| s == "all");
        let chosen: Vec<&dyn Check> = self
            .checks
            .iter()
            .map(|c| c.as_ref())
            .filter(|c| all || selection.iter().any(|s| s == c.name()))
            .filter(|c| c.applies(cx))
            .collect();
        Ok(chosen.par_iter().map(|c| run_one(*c, cx, oracle)).collect())
    }
}

fn run_one(c: &dyn Check, cx: &Context, oracle: Option<&OracleConfig>) -> CheckResult {
    let t0 = Instant::now();
    let outcome = c.run(cx).and_then(|mut o| {
        if let Some(cfg) = oracle {
            let ctx = cx.model.oracle_context();
            for claim in o.claims.iter_mut() {
                if let Some(ev) = &claim.evidence {
                    claim.oracle = Some(ctx.verify_zero(ev, cfg)?);
                }
            }
        }
        Ok(o)
    });
    match outcome {
        Ok(o) => CheckResult::from_outcome(c.name(), o, t0.elapsed()),
        Err(e) => CheckResult::from_error(c.name(), &e, t0.elapsed()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    pub seed: u64,
    pub samples: usize,
    /// Claims on which the oracle and the symbolic verdict disagree.
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub theory: String,
    pub checks: Vec<CheckResult>,
    pub constraints: Vec<Constraint>,
    pub oracle: Option<OracleSummary>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

/// Run the checks listed in `m.spec.checks`.
pub fn full_report(m: &Model, oracle: Option<&OracleConfig>) -> Result<Report, VerifyError> {
    run_report(m, &m.spec.checks, oracle)
}

pub fn run_report(m: &Model, selection: &[String], oracle: Option<&OracleConfig>) -> Result<Report, VerifyError> {
    let cx = Context::new(m.clone())?;
    let checks = CheckRegistry::default().run(&cx, selection, oracle)?;
    let mut constraints: Vec<Constraint> = Vec::new();
    for c in checks.iter().flat_map(|c| c.constraints.iter()) {
        if !constraints.contains(c) {
            constraints.push(c.clone());
        }
    }
    let oracle = oracle.map(|cfg| OracleSummary {
        seed: cfg.seed,
        samples: cfg.samples,
        failures: checks.iter().map(|c| c.oracle_failures()).sum(),
    });
    Ok(Report { theory: m.spec.name.clone(), checks, constraints, oracle })
}

/// `check_gauge_invariance` on its own: the raw variation of `l`, with the
/// constraint set that would remove an obstruction (not applied).
pub fn check_gauge_invariance(m: &Model, l: &Expression, rules: &TransformationRuleSet) -> Result<CheckResult, VerifyError> {
    let t0 = Instant::now();
    let a = analyse_variation(m, l, rules)?;
    let mut o = Outcome::default();
    match a.classification {
        Classification::Obstruction => {
            o.obstruction = true;
            match solve_coupling_constraint(&a.parts, m) {
                Ok(cs) => o.constraints = cs,
                Err(e) => o.note = e.to_string(),
            }
            o.claims.push(Claim::zero("variation is a divergence", a.obstruction(), a.evidence));
        }
        c => {
            o.note = format!("{c:?}");
            o.claims.push(Claim::zero("variation is a divergence", Expression::zero(), a.evidence));
        }
    }
    Ok(CheckResult::from_outcome("invariance", o, t0.elapsed()))
}

/// The documented single-coefficient mutations.
pub fn documented_mutations() -> Vec<(Mutation, Rational)> {
    Mutation::ALL
        .into_iter()
        .map(|m| match m {
            Mutation::GaugeKinetic => (m, crate::coeff::rat(-1, 3)),
            _ => (m, crate::coeff::rat(2, 1)),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MutationOutcome {
    pub mutation: Mutation,
    pub value: Rational,
    /// Checks that did not pass.
    pub failing: Vec<String>,
    pub symbolic: bool,
    pub oracle: bool,
}

/// Run every documented mutation of `base` through the full report.
pub fn mutation_suite(base: &TheorySpec, cfg: &OracleConfig) -> Result<Vec<MutationOutcome>, VerifyError> {
    documented_mutations()
        .into_iter()
        .map(|(mutation, value)| {
            let spec = base.clone().with_override(mutation, value.clone());
            let m = declare_theory(spec)?;
            let r = run_report(&m, &[], Some(cfg))?;
            let failing: Vec<String> = r.checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
            let oracle = r.checks.iter().any(|c| c.oracle_detects_failure());
            Ok(MutationOutcome { mutation, value, symbolic: !failing.is_empty(), failing, oracle })
        })
        .collect()
}
