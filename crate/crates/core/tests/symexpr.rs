use std::sync::Arc;

use gaugeforge::coeff::Coeff;
use gaugeforge::liealg::{GroupKind, LieAlgebra};
use gaugeforge::symexpr::index::{adj, afund, fund, lo, spin, up};
use gaugeforge::symexpr::{
    gamma_reduce, substitute, Expression, Factor, Field, FieldRank, IndexClass as C, Kernel, SymError, Variance as V,
};
use proptest::prelude::*;

struct Fields {
    a: Field,
    f: Field,
    j: Field,
    phi: Field,
    psi: Field,
    psibar: Field,
}

fn fields() -> Fields {
    Fields {
        a: Field::boson("A", vec![(C::Lorentz, V::Down), (C::Adjoint, V::Neutral)]),
        f: Field::boson("F", vec![(C::Lorentz, V::Down), (C::Lorentz, V::Down), (C::Adjoint, V::Neutral)]),
        j: Field::boson("j", vec![(C::Lorentz, V::Up), (C::Adjoint, V::Neutral)]),
        phi: Field::boson("phi", vec![]),
        psi: Field::new("psi", FieldRank::Fermion, true, vec![(C::Spinor, V::Neutral), (C::Fundamental, V::Up)]),
        psibar: Field::new("psibar", FieldRank::Conjugate, true, vec![(C::Spinor, V::Neutral), (C::Fundamental, V::Down)]),
    }
}

fn kernel(g: GroupKind) -> Kernel {
    Kernel::new(Arc::new(LieAlgebra::new(g).unwrap()))
}

fn fe(f: &Field, idx: Vec<gaugeforge::symexpr::Index>) -> Expression {
    Expression::field(f.at(idx))
}

fn canon(k: &Kernel, e: &Expression) -> Expression {
    k.canonicalize(e).unwrap()
}

#[test]
fn cancellation_gives_empty_expression() {
    let k = kernel(GroupKind::SU(2));
    let x = fields();
    let a = fe(&x.a, vec![lo("mu"), adj("a")]);
    let r = canon(&k, &(&a - &a));
    assert!(r.is_zero());
    assert_eq!(r.to_string(), "0");
}

#[test]
fn dummy_renaming_is_invisible() {
    let k = kernel(GroupKind::SU(2));
    let x = fields();
    let ff1 = fe(&x.f, vec![lo("mu"), lo("nu"), adj("a")]) * fe(&x.f, vec![up("mu"), up("nu"), adj("a")]);
    let ff2 = fe(&x.f, vec![lo("al"), lo("be"), adj("b")]) * fe(&x.f, vec![up("al"), up("be"), adj("b")]);
    assert!(k.equal(&ff1, &ff2).unwrap());
    assert!(!canon(&k, &ff1).is_zero());
}

#[test]
fn grassmann_swap_flips_sign() {
    let k = kernel(GroupKind::U1);
    let x = fields();
    let bar = fe(&x.psibar, vec![spin("al"), afund("i")]);
    let psi = fe(&x.psi, vec![spin("be"), fund("i")]);
    let ordered = &bar * &psi;
    let swapped = &psi * &bar;
    assert!(canon(&k, &(&ordered + &swapped)).is_zero());
    assert!(!canon(&k, &(&ordered - &swapped)).is_zero());
}

#[test]
fn square_of_a_grassmann_component_vanishes() {
    let k = kernel(GroupKind::SU(3));
    let x = fields();
    let p = Expression::field(x.psi.at(vec![gaugeforge::symexpr::index::spin_val(2), fund_val(1)]));
    assert!(canon(&k, &(&p * &p)).is_zero());
}

fn fund_val(v: u8) -> gaugeforge::symexpr::Index {
    gaugeforge::symexpr::Index::new(C::Fundamental, V::Up, gaugeforge::symexpr::Slot::Value(v))
}

#[test]
fn leibniz_rule() {
    let k = kernel(GroupKind::U1);
    let x = fields();
    let a = fe(&x.a, vec![lo("nu"), adj("a")]);
    let j = fe(&x.j, vec![up("nu"), adj("a")]);
    let lhs = Expression::deriv(lo("mu"), &a * &j);
    let rhs = Expression::field(x.a.at(vec![lo("nu"), adj("a")]).d(lo("mu"))) * &j
        + &a * Expression::field(x.j.at(vec![up("nu"), adj("a")]).d(lo("mu")));
    assert!(k.equal(&lhs, &rhs).unwrap());
}

#[test]
fn partial_derivatives_commute() {
    let k = kernel(GroupKind::U1);
    let x = fields();
    let a = Expression::field(x.phi.at(vec![]).d(lo("mu")).d(lo("nu")));
    let b = Expression::field(x.phi.at(vec![]).d(lo("nu")).d(lo("mu")));
    assert!(k.equal(&a, &b).unwrap());
}

#[test]
fn derivative_of_a_bilinear_keeps_its_sign() {
    let k = kernel(GroupKind::U1);
    let x = fields();
    let g = Expression::factor(Factor::Gamma { mu: up("nu"), row: spin("al"), col: spin("be") });
    let bar = x.psibar.at(vec![spin("al"), afund("i")]);
    let psi = x.psi.at(vec![spin("be"), fund("i")]);
    let lhs = Expression::deriv(lo("mu"), Expression::field(bar.clone()) * &g * Expression::field(psi.clone()));
    let rhs = Expression::field(bar.clone().d(lo("mu"))) * &g * Expression::field(psi.clone())
        + Expression::field(bar) * &g * Expression::field(psi.d(lo("mu")));
    assert!(k.equal(&lhs, &rhs).unwrap());
}

#[test]
fn substitute_field_strength_definition() {
    let k = kernel(GroupKind::U1);
    let x = fields();
    let def = Expression::field(x.a.at(vec![lo("nu"), adj("a")]).d(lo("mu")))
        - Expression::field(x.a.at(vec![lo("mu"), adj("a")]).d(lo("nu")));
    let pattern = x.f.at(vec![lo("mu"), lo("nu"), adj("a")]);
    let target = fe(&x.f, vec![lo("al"), lo("be"), adj("c")]);
    let out = substitute(&target, &pattern, &def).unwrap();
    let expect = Expression::field(x.a.at(vec![lo("be"), adj("c")]).d(lo("al")))
        - Expression::field(x.a.at(vec![lo("al"), adj("c")]).d(lo("be")));
    assert!(k.equal(&out, &expect).unwrap());

    // under a derivative and contracted with itself
    let target = Expression::field(x.f.at(vec![lo("al"), lo("be"), adj("c")]).d(up("al")))
        * fe(&x.j, vec![up("be"), adj("c")]);
    let out = substitute(&target, &pattern, &def).unwrap();
    let expect = (Expression::field(x.a.at(vec![lo("be"), adj("c")]).d(lo("al")).d(up("al")))
        - Expression::field(x.a.at(vec![lo("al"), adj("c")]).d(lo("be")).d(up("al"))))
        * fe(&x.j, vec![up("be"), adj("c")]);
    assert!(k.equal(&out, &expect).unwrap());
}

#[test]
fn identity_substitution_is_a_no_op() {
    let k = kernel(GroupKind::SU(2));
    let x = fields();
    let pattern = x.a.at(vec![lo("mu"), adj("a")]);
    let e = fe(&x.a, vec![lo("nu"), adj("b")]) * fe(&x.j, vec![up("nu"), adj("b")])
        + Expression::field(x.a.at(vec![lo("nu"), adj("b")]).d(lo("rho")))
            * fe(&x.j, vec![up("nu"), adj("b")])
            * Expression::field(x.phi.at(vec![]).d(up("rho")));
    let out = substitute(&e, &pattern, &Expression::field(pattern.clone())).unwrap();
    assert_eq!(canon(&k, &out), canon(&k, &e));
}

#[test]
fn substitution_rejects_bad_replacements() {
    let x = fields();
    let pattern = x.a.at(vec![lo("mu"), adj("a")]);
    let e = fe(&x.a, vec![lo("nu"), adj("b")]);
    let wrong_sig = fe(&x.a, vec![lo("nu"), adj("a")]);
    assert!(matches!(substitute(&e, &pattern, &wrong_sig), Err(SymError::IndexSignatureMismatch(_))));
    let odd = fe(&x.psi, vec![spin("al"), fund("i")]);
    assert!(matches!(substitute(&e, &pattern, &odd), Err(SymError::ParityMismatch(_))));
}

#[test]
fn malformed_and_mismatched_indices_are_rejected() {
    let k = kernel(GroupKind::U1);
    let x = fields();
    let triple = fe(&x.a, vec![lo("mu"), adj("a")]) * fe(&x.a, vec![lo("mu"), adj("a")]);
    assert!(matches!(k.canonicalize(&triple), Err(SymError::MalformedIndex(_))));
    let mixed = fe(&x.a, vec![lo("mu"), adj("a")]) + fe(&x.a, vec![lo("nu"), adj("a")]);
    assert!(matches!(k.canonicalize(&mixed), Err(SymError::FreeIndexMismatch(_))));
}

fn gamma(mu: gaugeforge::symexpr::Index, r: &str, c: &str) -> Expression {
    Expression::factor(Factor::Gamma { mu, row: spin(r), col: spin(c) })
}

#[test]
fn clifford_anticommutator() {
    let k = kernel(GroupKind::U1);
    let anti = gamma(up("mu"), "a", "b") * gamma(up("nu"), "b", "c") + gamma(up("nu"), "a", "b") * gamma(up("mu"), "b", "c");
    let expect = Expression::factor(Factor::metric(up("mu"), up("nu")))
        * Expression::factor(Factor::Delta(spin("a"), spin("c")))
        * Expression::constant(Coeff::int(2));
    // both explicit component evaluation and the symbolic rewrite agree
    assert!(k.equal(&anti, &expect).unwrap());
    let reduced = gamma_reduce(&anti).unwrap();
    assert_eq!(reduced.len(), 1);
    assert!(k.equal(&reduced, &expect).unwrap());
}

#[test]
fn gamma_contraction_gives_four() {
    let k = kernel(GroupKind::U1);
    let e = gamma(up("mu"), "a", "b") * gamma(lo("mu"), "b", "c");
    let reduced = gamma_reduce(&e).unwrap();
    assert_eq!(reduced.to_string(), "4 delta(a,c)");
    let expect = Expression::factor(Factor::Delta(spin("a"), spin("c"))).scale_int(4);
    assert!(k.equal(&e, &expect).unwrap());
}

#[test]
fn single_gamma_is_already_reduced() {
    let e = gamma(up("mu"), "a", "b");
    assert_eq!(gamma_reduce(&e).unwrap(), e);
}

#[test]
fn bad_spinor_wiring_is_reported() {
    let g = |mu, r, c| Factor::Gamma { mu, row: spin(r), col: spin(c) };
    let e = Expression::term(Coeff::one(), vec![g(up("mu"), "a", "b"), g(up("nu"), "b", "a"), g(up("rho"), "a", "c")]);
    assert!(matches!(gamma_reduce(&e), Err(SymError::SpinorWiring(_))));
}

#[test]
fn dump_is_deterministic() {
    let k = kernel(GroupKind::SU(2));
    let x = fields();
    let e = fe(&x.f, vec![lo("mu"), lo("nu"), adj("a")]) * fe(&x.f, vec![up("mu"), up("nu"), adj("a")]);
    let first = canon(&k, &e).to_string();
    for _ in 0..3 {
        assert_eq!(canon(&k, &e).to_string(), first);
    }
    assert!(first.lines().count() > 1);
}

// Random scalar building blocks with a free adjoint index `a`.
fn atom(k: u8) -> Expression {
    let x = fields();
    match k % 6 {
        0 => fe(&x.a, vec![lo("m"), adj("b")])
            * fe(&x.j, vec![up("m"), adj("b")])
            * Expression::field(x.phi.at(vec![]).d(lo("n")))
            * fe(&x.j, vec![up("n"), adj("a")]),
        1 => Expression::field(x.a.at(vec![lo("m"), adj("a")]).d(up("m"))),
        2 => Expression::factor(Factor::Structure(adj("a"), adj("b"), adj("c")))
            * fe(&x.a, vec![lo("m"), adj("b")])
            * fe(&x.j, vec![up("m"), adj("c")]),
        3 => Expression::field(x.phi.at(vec![]).d(lo("m"))) * fe(&x.j, vec![up("m"), adj("a")]),
        4 => fe(&x.psibar, vec![spin("s"), afund("i")])
            * Expression::factor(Factor::Gamma { mu: up("m"), row: spin("s"), col: spin("t") })
            * Expression::factor(Factor::Generator {
                rep: gaugeforge::liealg::RepKind::Fundamental,
                adj: adj("a"),
                row: fund("i"),
                col: afund("k"),
            })
            * Expression::field(x.psi.at(vec![spin("t"), fund("k")]).d(lo("m"))),
        _ => fe(&x.phi, vec![]) * Expression::field(x.j.at(vec![up("m"), adj("a")]).d(lo("m"))),
    }
}

fn scalar(k: u8) -> Expression {
    let x = fields();
    match k % 3 {
        0 => fe(&x.phi, vec![]),
        1 => Expression::coupling("e") * fe(&x.phi, vec![]) * fe(&x.phi, vec![]),
        _ => Expression::constant(Coeff::frac(-3, 2)) + Expression::coupling("q"),
    }
}

fn arb_expr() -> impl Strategy<Value = Expression> {
    prop::collection::vec((any::<u8>(), -3i64..=3), 1..4).prop_map(|parts| {
        parts.into_iter().map(|(k, c)| atom(k).scale_int(c)).sum::<Expression>()
    })
}

fn arb_scalar() -> impl Strategy<Value = Expression> {
    prop::collection::vec((any::<u8>(), -3i64..=3), 1..3)
        .prop_map(|parts| parts.into_iter().map(|(k, c)| scalar(k).scale_int(c)).sum::<Expression>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonicalize_is_idempotent(e in arb_expr()) {
        let k = kernel(GroupKind::SU(2));
        let once = canon(&k, &e);
        prop_assert_eq!(canon(&k, &once), once);
    }

    #[test]
    fn multiplication_distributes(a in arb_scalar(), b in arb_expr(), c in arb_expr()) {
        let k = kernel(GroupKind::SU(2));
        let lhs = &a * &(&b + &c);
        let rhs = &a * &b + &a * &c;
        prop_assert!(k.equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn addition_commutes_and_negation_cancels(a in arb_expr(), b in arb_expr()) {
        let k = kernel(GroupKind::SU(3));
        prop_assert_eq!(canon(&k, &(&a + &b)), canon(&k, &(&b + &a)));
        prop_assert!(canon(&k, &(&a - &a)).is_zero());
    }

    #[test]
    fn relabelling_a_dummy_is_invisible(e in arb_expr()) {
        let k = kernel(GroupKind::SU(2));
        prop_assert_eq!(canon(&k, &e.relabel("m", "w")), canon(&k, &e));
    }
}
