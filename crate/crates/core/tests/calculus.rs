use gaugeforge::builder::*;
use gaugeforge::calculus::*;
use gaugeforge::coeff::{rat, Coeff};
use gaugeforge::liealg::{GroupKind, RepKind};
use gaugeforge::model::*;
use gaugeforge::oracle::OracleConfig;
use gaugeforge::symexpr::index::{lo, spin, up};
use gaugeforge::symexpr::{Expression, Factor};
use gaugeforge::verifier::eom_patterns;
use proptest::prelude::*;

fn theory(g: GroupKind) -> Model {
    declare_theory(TheorySpec::new("t", g).with_matter(MatterDecl::fermion("psi", RepKind::Fundamental, Charge::Symbol("q".into()))))
        .unwrap()
}

fn canon(m: &Model, e: &Expression) -> Expression {
    m.kernel().canonicalize(e).unwrap()
}

fn gamma(mu: gaugeforge::symexpr::Index, r: &str, c: &str) -> Expression {
    Expression::factor(Factor::Gamma { mu, row: spin(r), col: spin(c) })
}

/// Scalar building blocks for the linearity properties.
fn scalars(m: &Model) -> Vec<Expression> {
    let aa = Expression::field(m.gauge_occ(lo("mu"), "a")) * Expression::field(m.gauge_occ(up("mu"), "a"));
    let j = matter_current(m, "psi", &up("mu"), "a").unwrap();
    vec![
        gauge_lagrangian(m),
        dirac_kinetic(m, "psi").unwrap(),
        interaction_term(m, &j, &Coeff::one()).unwrap(),
        aa,
    ]
}

/// Vector currents `V^μ` whose divergences are exact.
fn vectors(m: &Model) -> Vec<Expression> {
    let a = |mu, x: &str| Expression::field(m.gauge_occ(mu, x));
    let da = Expression::field(m.gauge_occ(up("nu"), "a").d(lo("nu")));
    let f = &m.fermions[0];
    let chain = Expression::field(f.psibar.at(vec![spin("s1"), f.internal("i", true)]))
        * gamma(up("mu"), "s1", "s2")
        * gamma(up("nu"), "s2", "s3")
        * Expression::field(f.psi.at(vec![spin("s3"), f.internal("i", false)]).d(lo("nu")));
    vec![
        a(up("mu"), "a") * da,
        a(lo("nu"), "a") * field_strength(m, &up("mu"), &up("nu"), "a"),
        chain,
    ]
}

fn coeff(n: i64, d: i64) -> Coeff {
    Coeff::from(rat(n, d))
}

#[test]
fn yang_mills_term_is_gauge_invariant() {
    for g in [GroupKind::U1, GroupKind::SU(2)] {
        let m = theory(g);
        let raw = gauge_variation(&gauge_lagrangian(&m), &gauge_rules(&m)).unwrap();
        assert!(canon(&m, &raw).is_zero(), "{g}");
        let v = m.oracle_context().verify_zero(&raw, &OracleConfig { samples: 5, ..OracleConfig::with_seed(3) }).unwrap();
        assert!(v.zero, "{g}");
    }
}

#[test]
fn dirac_term_varies_into_its_source_coupling() {
    // δ(iψ̄γ∂ψ) = -q ∂_μΛ ψ̄γ^μψ for U(1)
    let m = theory(GroupKind::U1);
    let raw = gauge_variation(&dirac_kinetic(&m, "psi").unwrap(), &gauge_rules(&m)).unwrap();
    let j = matter_current(&m, "psi", &up("mu"), "a").unwrap().expr;
    let want = -(Expression::coupling("q") * Expression::field(m.parameter_occ("a").d(lo("mu"))) * j);
    assert!(canon(&m, &(raw - want)).is_zero());
}

#[test]
fn free_dirac_equations() {
    for g in [GroupKind::U1, GroupKind::SU(3)] {
        let m = theory(g);
        let f = &m.fermions[0];
        let l = dirac_kinetic(&m, "psi").unwrap();
        let p = eom_patterns(&m);
        let e_psi = euler_lagrange(m.kernel(), &l, &p[2]).unwrap();
        let want = (Expression::field(f.psibar.at(vec![spin("s1"), f.internal("i", true)]).d(lo("mu"))) * gamma(up("mu"), "s1", "al"))
            .scale(&Coeff::i());
        assert!(canon(&m, &(e_psi - want)).is_zero(), "{g}");
    }
}

#[test]
fn field_equation_of_the_gauge_term() {
    // E[A] of -¼F² is ∂_μF^{μν} for U(1)
    let m = theory(GroupKind::U1);
    let p = eom_patterns(&m);
    let got = euler_lagrange(m.kernel(), &gauge_lagrangian(&m), &p[0]).unwrap();
    let want = Expression::deriv(lo("mu"), field_strength(&m, &up("mu"), &up("nu"), "a"));
    assert!(canon(&m, &(got - want)).is_zero());
}

#[test]
fn non_divergence_is_classified_as_obstruction() {
    let m = theory(GroupKind::U1);
    let aa = Expression::field(m.gauge_occ(lo("mu"), "a")) * Expression::field(m.gauge_occ(up("mu"), "a"));
    let r = classify_total_derivative(m.kernel(), &aa).unwrap();
    assert_eq!(r.classification, Classification::Obstruction);
    assert!(!r.obstruction_sum().is_zero());
    let r = classify_total_derivative(m.kernel(), &Expression::zero()).unwrap();
    assert_eq!(r.classification, Classification::Zero);
}

#[test]
fn free_index_is_rejected_by_the_classifier() {
    let m = theory(GroupKind::U1);
    let a = Expression::field(m.gauge_occ(lo("mu"), "a"));
    assert!(matches!(classify_total_derivative(m.kernel(), &a), Err(CalcError::FreeIndex(_))));
}

#[test]
fn missing_rule_is_reported() {
    let m = theory(GroupKind::U1);
    let rules = gauge_rules(&m).without(&m.gauge);
    assert!(matches!(gauge_variation(&gauge_lagrangian(&m), &rules), Err(CalcError::MissingRule(_))));
}

#[test]
fn witness_reproduces_the_divergence() {
    let m = theory(GroupKind::U1);
    let v = &vectors(&m)[0];
    let r = classify_total_derivative(m.kernel(), &Expression::deriv(lo("mu"), v.clone())).unwrap();
    assert_eq!(r.classification, Classification::TotalDerivative);
    if let Some(w) = r.witness {
        assert!(canon(&m, &(Expression::deriv(lo("mu"), w) - r.raw)).is_zero());
    }
}

#[test]
fn on_shell_reduction_replays() {
    for g in [GroupKind::U1, GroupKind::SU(2)] {
        let m = theory(g);
        let l = assemble(&m).unwrap().total();
        let eoms = EomSet::from_lagrangian(m.kernel(), &l, &eom_patterns(&m)).unwrap();
        let div = covariant_adjoint(&m, &lo("mu"), "a", |x| matter_current(&m, "psi", &up("mu"), x).unwrap().expr);
        let red = reduce_on_shell(m.kernel(), &div, &eoms).unwrap();
        assert!(!red.steps.is_empty(), "{g}");
        assert_eq!(replay(m.kernel(), &div, &red.steps).unwrap(), red.result, "{g}");
        for s in &red.steps {
            assert!(s.to_string().contains("->"));
        }
    }
}

#[test]
fn u1_noether_current_is_the_matter_current() {
    let m = theory(GroupKind::U1);
    let l = assemble(&m).unwrap().total();
    let rules = gauge_rules(&m);
    assert!(global_variation(m.kernel(), &l, &rules, &m.parameter).unwrap().is_zero());
    let j = noether_current_global(m.kernel(), &l, &rules, &m.parameter, "mu", "a").unwrap();
    let want = Expression::coupling("q") * matter_current(&m, "psi", &up("mu"), "a").unwrap().expr;
    assert!(canon(&m, &(j.expr + want)).is_zero());
}

#[test]
fn noether_current_requires_global_invariance() {
    let m = theory(GroupKind::U1);
    let mass = Expression::field(m.fermions[0].psibar.at(vec![spin("s"), m.fermions[0].internal("i", true)]))
        * Expression::field(m.fermions[0].psi.at(vec![spin("s"), m.fermions[0].internal("i", false)]));
    let l = assemble(&m).unwrap().total() + mass.clone() * mass;
    let rules = gauge_rules(&m);
    assert!(global_variation(m.kernel(), &l, &rules, &m.parameter).unwrap().is_zero());

    let spec = TheorySpec::new("t", GroupKind::SU(2))
        .with_matter(MatterDecl::fermion("psi", RepKind::Fundamental, Charge::Symbol("q".into())))
        .with_matter(MatterDecl::fermion("chi", RepKind::Fundamental, Charge::Symbol("p".into())));
    let m = declare_theory(spec).unwrap();
    let (a, b) = (&m.fermions[0], &m.fermions[1]);
    let mix = Expression::field(a.psibar.at(vec![spin("s"), a.internal("i", true)]))
        * Expression::field(b.psi.at(vec![spin("s"), b.internal("i", false)]));
    let l = assemble(&m).unwrap().total() + mix;
    let rules = gauge_rules(&m);
    assert!(matches!(
        noether_current_global(m.kernel(), &l, &rules, &m.parameter, "mu", "a"),
        Err(CalcError::NotGloballyInvariant(_))
    ));
}

fn small() -> impl Strategy<Value = (i64, i64)> {
    (-6i64..=6, 1i64..=4)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn variation_is_linear(g in prop::sample::select(vec![GroupKind::U1, GroupKind::SU(2)]), i in 0usize..4, k in 0usize..4, (a, b) in small(), (c, d) in small()) {
        let m = theory(g);
        let s = scalars(&m);
        let rules = gauge_rules(&m);
        let (x, y) = (coeff(a, b), coeff(c, d));
        let lhs = gauge_variation(&(s[i].scale(&x) + s[k].scale(&y)), &rules).unwrap();
        let rhs = gauge_variation(&s[i], &rules).unwrap().scale(&x) + gauge_variation(&s[k], &rules).unwrap().scale(&y);
        prop_assert!(canon(&m, &(lhs - rhs)).is_zero());
    }

    #[test]
    fn euler_operator_is_linear(i in 0usize..4, k in 0usize..4, p in 0usize..3, (a, b) in small(), (c, d) in small()) {
        let m = theory(GroupKind::U1);
        let s = scalars(&m);
        let pat = &eom_patterns(&m)[p];
        let (x, y) = (coeff(a, b), coeff(c, d));
        let lhs = euler_lagrange(m.kernel(), &(s[i].scale(&x) + s[k].scale(&y)), pat).unwrap();
        let rhs = euler_lagrange(m.kernel(), &s[i], pat).unwrap().scale(&x) + euler_lagrange(m.kernel(), &s[k], pat).unwrap().scale(&y);
        prop_assert!(canon(&m, &(lhs - rhs)).is_zero());
    }

    #[test]
    fn divergences_are_annihilated(g in prop::sample::select(vec![GroupKind::U1, GroupKind::SU(2)]), cs in prop::collection::vec(small(), 3)) {
        let m = theory(g);
        let vs = vectors(&m);
        let mut e = Expression::zero();
        for (v, (n, d)) in vs.iter().zip(&cs) {
            e = e + Expression::deriv(lo("mu"), v.clone()).scale(&coeff(*n, *d));
        }
        let r = classify_total_derivative(m.kernel(), &e).unwrap();
        prop_assert_ne!(r.classification, Classification::Obstruction);
        prop_assert!(r.obstruction.is_empty());
    }

    #[test]
    fn variation_commutes_with_canonical_form(g in prop::sample::select(vec![GroupKind::U1, GroupKind::SU(2)]), i in 0usize..4) {
        let m = theory(g);
        let s = &scalars(&m)[i];
        let rules = gauge_rules(&m);
        let direct = canon(&m, &gauge_variation(s, &rules).unwrap());
        let via = canon(&m, &gauge_variation(&canon(&m, s), &rules).unwrap());
        prop_assert_eq!(direct, via);
    }
}
