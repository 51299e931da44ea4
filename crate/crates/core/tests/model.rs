use gaugeforge::builder::field_strength;
use gaugeforge::calculus::gauge_variation;
use gaugeforge::coeff::{rat, Coeff};
use gaugeforge::liealg::{GroupKind, LieError, RepKind};
use gaugeforge::model::*;
use gaugeforge::oracle::OracleConfig;
use gaugeforge::symexpr::index::{adj, lo};
use gaugeforge::symexpr::{Expression, Factor};

fn with_fermion(g: GroupKind, charge: Charge) -> TheorySpec {
    TheorySpec::new("t", g).with_matter(MatterDecl::fermion("psi", RepKind::Fundamental, charge))
}

fn q() -> Charge {
    Charge::Symbol("q".into())
}

#[test]
fn qed_and_su3_skeletons_declare() {
    let m = declare_theory(with_fermion(GroupKind::U1, q())).unwrap();
    assert!(m.is_abelian());
    assert_eq!(m.fields().len(), 4);
    assert_eq!(m.coupling_symbols().iter().map(|l| l.to_string()).collect::<Vec<_>>(), ["e", "q"]);

    let m = declare_theory(with_fermion(GroupKind::SU(3), q())).unwrap();
    assert!(!m.is_abelian());
    assert_eq!(m.algebra().adjoint_dim(), 8);
    assert_eq!(m.algebra().fundamental_dim(), 3);
}

#[test]
fn duplicate_names_are_rejected() {
    let spec = with_fermion(GroupKind::SU(2), q()).with_matter(MatterDecl::fermion("psi", RepKind::Fundamental, q()));
    assert_eq!(declare_theory(spec).unwrap_err(), ModelError::DuplicateField("psi".into()));
    let spec = with_fermion(GroupKind::U1, q()).with_matter(MatterDecl::external("A"));
    assert_eq!(declare_theory(spec).unwrap_err(), ModelError::DuplicateField("A".into()));
}

#[test]
fn unsupported_inputs_are_rejected() {
    let err = declare_theory(TheorySpec::new("t", GroupKind::SU(4))).unwrap_err();
    assert!(matches!(err, ModelError::Lie(LieError::UnsupportedGroup(_))));
    let spec = TheorySpec::new("t", GroupKind::U1).with_matter(MatterDecl::fermion("psi", RepKind::Adjoint, q()));
    assert!(matches!(declare_theory(spec).unwrap_err(), ModelError::Lie(LieError::UnsupportedRepresentation { .. })));
    let mut spec = with_fermion(GroupKind::U1, q());
    spec.coupling = None;
    assert_eq!(declare_theory(spec).unwrap_err(), ModelError::MissingCoupling);
}

#[test]
fn abelian_rules() {
    let m = declare_theory(with_fermion(GroupKind::U1, q())).unwrap();
    let rules = gauge_rules(&m);
    let da = &rules.get(&m.gauge).unwrap().variation;
    let want = Expression::field(m.parameter_occ("a").d(lo("mu")));
    assert!(m.kernel().canonicalize(&(da - &want)).unwrap().is_zero());

    let f = field_strength(&m, &lo("mu"), &lo("nu"), "a");
    let df = gauge_variation(&f, &rules).unwrap();
    assert!(m.kernel().canonicalize(&df).unwrap().is_zero());
}

#[test]
fn nonabelian_field_strength_rotates() {
    for g in [GroupKind::SU(2), GroupKind::SU(3)] {
        let m = declare_theory(TheorySpec::new("t", g)).unwrap();
        let rules = gauge_rules(&m);
        let f = |b: &str| field_strength(&m, &lo("mu"), &lo("nu"), b);
        let diff = gauge_variation(&f("a"), &rules).unwrap() - adjoint_rotation(&m, f("b"));
        assert!(m.kernel().canonicalize(&diff).unwrap().is_zero(), "{g}");
        let cfg = OracleConfig { samples: 3, ..OracleConfig::with_seed(11) };
        assert!(m.oracle_context().verify_zero(&diff, &cfg).unwrap().zero, "{g}");
    }
}

#[test]
fn neutral_fermion_does_not_transform() {
    let m = declare_theory(with_fermion(GroupKind::U1, Charge::Value(rat(0, 1)))).unwrap();
    let rules = gauge_rules(&m);
    for f in [&m.fermions[0].psi, &m.fermions[0].psibar] {
        let v = &rules.get(f).unwrap().variation;
        assert!(m.kernel().canonicalize(v).unwrap().is_zero());
    }
}

#[test]
fn rules_are_linear_in_the_parameter() {
    for g in [GroupKind::U1, GroupKind::SU(2), GroupKind::SU(3)] {
        let spec = with_fermion(g, q()).with_matter(MatterDecl::external("J"));
        let m = declare_theory(spec).unwrap();
        for r in gauge_rules(&m).rules() {
            for t in r.variation.distribute_derivatives().terms() {
                let n = t.factors.iter().filter(|f| matches!(f, Factor::Field(o) if o.field == m.parameter)).count();
                assert_eq!(n, 1, "{g}: {t}");
            }
        }
    }
}

#[test]
fn external_source_is_invariant_for_u1_and_rotates_otherwise() {
    let m = declare_theory(TheorySpec::new("t", GroupKind::U1).with_matter(MatterDecl::external("J"))).unwrap();
    assert!(gauge_rules(&m).get(m.current("J").unwrap()).unwrap().variation.is_zero());

    let m = declare_theory(TheorySpec::new("t", GroupKind::SU(2)).with_matter(MatterDecl::external("J"))).unwrap();
    let j = m.current("J").unwrap();
    let rules = gauge_rules(&m);
    let v = &rules.get(j).unwrap().variation;
    let want = adjoint_rotation(&m, Expression::field(j.at(vec![gaugeforge::symexpr::index::up("mu"), adj("b")])));
    assert!(m.kernel().canonicalize(&(v - &want)).unwrap().is_zero());
}

#[test]
fn knobs_default_and_override() {
    let spec = with_fermion(GroupKind::U1, q()).with_override(Mutation::Interaction, rat(2, 1));
    let m = declare_theory(spec).unwrap();
    assert_eq!(m.knob(Mutation::GaugeKinetic), Coeff::frac(-1, 4));
    assert_eq!(m.knob(Mutation::Interaction), Coeff::int(2));
    for k in Mutation::ALL {
        assert_eq!(Mutation::from_name(k.name()), Some(k));
    }
}
