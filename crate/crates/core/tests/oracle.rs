use std::collections::BTreeMap;
use std::sync::Arc;

use gaugeforge::coeff::{rat, Coeff};
use gaugeforge::liealg::{GroupKind, LieAlgebra};
use gaugeforge::oracle::{OracleConfig, OracleContext};
use gaugeforge::symexpr::index::{adj, afund, fund, lo, spin, up};
use gaugeforge::symexpr::{label, Expression, Factor, Field, FieldRank, Index, IndexClass as C, Kernel, Variance as V};
use proptest::prelude::*;

struct Setup {
    ctx: OracleContext,
    kernel: Kernel,
    a: Field,
    psi: Field,
    psibar: Field,
}

fn setup(g: GroupKind) -> Setup {
    let alg = Arc::new(LieAlgebra::new(g).unwrap());
    let a = Field::boson("A", vec![(C::Lorentz, V::Down), (C::Adjoint, V::Neutral)]);
    let psi = Field::new("psi", FieldRank::Fermion, true, vec![(C::Spinor, V::Neutral), (C::Fundamental, V::Up)]);
    let psibar = Field::new("psibar", FieldRank::Conjugate, true, vec![(C::Spinor, V::Neutral), (C::Fundamental, V::Down)]);
    let ctx = OracleContext::new(alg.clone(), vec![a.clone(), psi.clone(), psibar.clone()], vec![label("e"), label("q")]);
    Setup { ctx, kernel: Kernel::new(alg), a, psi, psibar }
}

fn da(s: &Setup, d: Index, mu: Index, a: &str) -> Expression {
    Expression::field(s.a.at(vec![mu, adj(a)]).d(d))
}

/// Abelian-form field strength `∂_m A_n − ∂_n A_m` with the given variances.
fn f(s: &Setup, m: Index, n: Index, a: &str) -> Expression {
    da(s, m.clone(), n.clone(), a) - da(s, n, m, a)
}

fn cfg() -> OracleConfig {
    OracleConfig::with_seed(7)
}

#[test]
fn samples_are_deterministic() {
    let s = setup(GroupKind::U1);
    let x = s.ctx.sample(&cfg(), 3).unwrap();
    let y = s.ctx.sample(&cfg(), 3).unwrap();
    assert_eq!(x.point, y.point);
    assert_eq!(x.couplings, y.couplings);
    assert_eq!(x.component(&s.a, &[2, 0]), y.component(&s.a, &[2, 0]));
    let z = s.ctx.sample(&cfg(), 4).unwrap();
    assert_ne!(x.point, z.point);
}

#[test]
fn u1_sample_counts_components() {
    let s = setup(GroupKind::U1);
    let x = s.ctx.sample(&cfg(), 0).unwrap();
    assert_eq!(x.component_count(&s.a), 4);
    assert_eq!(x.component_count(&s.psi), 4);
    assert_eq!(x.component_count(&s.psibar), 4);
    assert_ne!(x.couplings[&label("e")], x.couplings[&label("q")]);
    assert!(x.couplings.values().all(|v| *v != rat(0, 1)));
}

#[test]
fn degree_zero_fields_have_no_derivatives() {
    let s = setup(GroupKind::U1);
    let c = OracleConfig { degree: 0, ..cfg() };
    let e = da(&s, lo("mu"), lo("nu"), "a");
    assert!(s.ctx.verify_zero(&e, &c).unwrap().zero);
    assert!(!s.ctx.verify_zero(&Expression::field(s.a.at(vec![lo("nu"), adj("a")])), &c).unwrap().zero);
}

#[test]
fn antisymmetry_and_renaming_evaluate_to_zero() {
    let s = setup(GroupKind::SU(2));
    let sym = f(&s, lo("mu"), lo("nu"), "a") + f(&s, lo("nu"), lo("mu"), "a");
    assert!(s.ctx.verify_zero(&sym, &cfg()).unwrap().zero);

    let ff1 = f(&s, lo("mu"), lo("nu"), "a") * f(&s, up("mu"), up("nu"), "a");
    let ff2 = f(&s, lo("al"), lo("be"), "b") * f(&s, up("al"), up("be"), "b");
    assert!(s.ctx.verify_zero(&(&ff1 - &ff2), &cfg()).unwrap().zero);

    let v = s.ctx.verify_zero(&ff1, &cfg()).unwrap();
    assert!(!v.zero);
    let w = v.witness.unwrap();
    assert_eq!(w.seed, 7);
    assert_eq!(w.point.len(), 4);
}

#[test]
fn grassmann_reordering_is_seen_by_the_oracle() {
    let s = setup(GroupKind::SU(2));
    let bar = Expression::field(s.psibar.at(vec![spin("al"), afund("i")]));
    let psi = Expression::field(s.psi.at(vec![spin("al"), fund("i")]));
    assert!(s.ctx.verify_zero(&(&bar * &psi + &psi * &bar), &cfg()).unwrap().zero);
    assert!(!s.ctx.verify_zero(&(&bar * &psi - &psi * &bar), &cfg()).unwrap().zero);
    // same component squared
    let one = Expression::field(s.psi.at(vec![gaugeforge::symexpr::index::spin_val(1), fund("i")]));
    let sq = &one * Expression::field(s.psi.at(vec![gaugeforge::symexpr::index::spin_val(1), fund("i")]));
    assert!(s.ctx.verify_zero(&sq, &cfg()).unwrap().zero);
}

#[test]
fn derivative_of_a_bilinear_matches_leibniz() {
    let s = setup(GroupKind::U1);
    let g = Expression::factor(Factor::Gamma { mu: up("nu"), row: spin("al"), col: spin("be") });
    let bar = s.psibar.at(vec![spin("al"), afund("i")]);
    let psi = s.psi.at(vec![spin("be"), fund("i")]);
    let lhs = Expression::deriv(lo("mu"), Expression::field(bar.clone()) * &g * Expression::field(psi.clone()));
    let rhs = Expression::field(bar.clone().d(lo("mu"))) * &g * Expression::field(psi.clone())
        + Expression::field(bar) * &g * Expression::field(psi.d(lo("mu")));
    assert!(s.ctx.verify_zero(&(&lhs - &rhs), &cfg()).unwrap().zero);
}

#[test]
fn coupling_obstruction_vanishes_only_when_pinned() {
    let s = setup(GroupKind::U1);
    let x = da(&s, up("mu"), lo("mu"), "a");
    let obstruction = (Expression::coupling("q") - Expression::coupling("e")) * &x;
    assert!(!s.ctx.verify_zero(&obstruction, &cfg()).unwrap().zero);
    let pinned = s.ctx.clone().pin("q", rat(3, 2)).pin("e", rat(3, 2));
    assert!(pinned.verify_zero(&obstruction, &cfg()).unwrap().zero);
}

#[test]
fn canonical_zero_is_oracle_zero() {
    let s = setup(GroupKind::SU(3));
    let e = f(&s, lo("mu"), lo("nu"), "a") + f(&s, lo("nu"), lo("mu"), "a");
    assert!(s.kernel.canonicalize(&e).unwrap().is_zero());
    let v = s.ctx.verify_zero(&e, &cfg()).unwrap();
    assert!(v.zero);
    assert_eq!(v.samples, 20);
}

#[test]
fn evaluate_matches_explicit_component_sum() {
    // A_μ A^μ at one sample equals Σ_m η^{mm} (A_m)² computed by hand
    let s = setup(GroupKind::U1);
    let e = Expression::field(s.a.at(vec![lo("mu"), adj("a")])) * Expression::field(s.a.at(vec![up("mu"), adj("a")]));
    let x = s.ctx.sample(&cfg(), 2).unwrap();
    let got = s.ctx.evaluate(&e, &x, &BTreeMap::new()).unwrap();
    let mut expect = Coeff::zero();
    for m in 0..4u8 {
        let v = x.component(&s.a, &[m, 0]).unwrap().value().body();
        let sq = &v * &v;
        expect += &(if m == 0 { sq } else { -sq });
    }
    assert_eq!(got.body(), expect);
}

// random expressions built from a small vocabulary, each with one free
// adjoint index `a`; the canonical form must evaluate like the raw one
fn atom(s: &Setup, k: u8) -> Expression {
    let a_ = |m: Index, x: &str| Expression::field(s.a.at(vec![m, adj(x)]));
    let fabc = || Expression::factor(Factor::Structure(adj("a"), adj("b"), adj("c")));
    match k % 5 {
        0 => fabc() * a_(lo("m"), "b") * da(s, up("m"), lo("n"), "c") * da(s, up("n"), lo("r"), "d") * a_(up("r"), "d"),
        1 => fabc() * a_(lo("m"), "b") * f(s, up("m"), up("n"), "c") * da(s, lo("n"), lo("r"), "e") * a_(up("r"), "e"),
        2 => Expression::field(s.psibar.at(vec![spin("s1"), afund("i")]))
            * Expression::factor(Factor::Gamma { mu: up("m"), row: spin("s1"), col: spin("s2") })
            * Expression::factor(Factor::Generator {
                rep: gaugeforge::liealg::RepKind::Fundamental,
                adj: adj("a"),
                row: fund("i"),
                col: afund("k"),
            })
            * Expression::field(s.psi.at(vec![spin("s2"), fund("k")]).d(lo("m")))
            * Expression::coupling("q"),
        3 => da(s, lo("m"), lo("n"), "a") * da(s, up("m"), up("n"), "b") * da(s, up("w"), lo("w"), "b"),
        _ => Expression::deriv(lo("m"), a_(up("m"), "a") * a_(lo("n"), "b") * a_(up("n"), "b")).scale(&Coeff::i()),
    }
}

fn arb_expr() -> impl Strategy<Value = Vec<(u8, i64)>> {
    prop::collection::vec((0u8..5, -2i64..=2), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn canonical_form_evaluates_like_the_raw_expression(parts in arb_expr()) {
        let s = setup(GroupKind::SU(2));
        let e: Expression = parts.iter().map(|(k, c)| atom(&s, *k).scale_int(*c)).sum();
        let canon = s.kernel.canonicalize(&e).unwrap();
        let c = OracleConfig { samples: 3, ..cfg() };
        prop_assert!(s.ctx.verify_zero(&(&e - &canon), &c).unwrap().zero);
        // a canonical zero must also be an oracle zero
        if canon.is_zero() {
            prop_assert!(s.ctx.verify_zero(&e, &c).unwrap().zero);
        }
    }
}
