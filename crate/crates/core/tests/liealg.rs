use gaugeforge::coeff::{rat, Coeff};
use gaugeforge::liealg::{
    adjoint_generators, verify_algebra, GroupKind, LieAlgebra, LieError, Matrix, RepKind, StructureConstants, Violation,
};

fn mat(rows: &[&[(i64, i64)]]) -> Matrix {
    let n = rows.len();
    let mut m = Matrix::zeros(n);
    for (r, row) in rows.iter().enumerate() {
        for (c, &(re, im)) in row.iter().enumerate() {
            m.set(r, c, Coeff::gaussian(rat(re, 1), rat(im, 1)));
        }
    }
    m
}

/// Gell-Mann λ₁…λ₈ written out entry by entry (λ₈ without its 1/√3).
fn literal_gell_mann() -> Vec<Matrix> {
    let o = (0, 0);
    let one = (1, 0);
    let m1 = (-1, 0);
    let i = (0, 1);
    let mi = (0, -1);
    let mut l = vec![
        mat(&[&[o, one, o], &[one, o, o], &[o, o, o]]),
        mat(&[&[o, mi, o], &[i, o, o], &[o, o, o]]),
        mat(&[&[one, o, o], &[o, m1, o], &[o, o, o]]),
        mat(&[&[o, o, one], &[o, o, o], &[one, o, o]]),
        mat(&[&[o, o, mi], &[o, o, o], &[i, o, o]]),
        mat(&[&[o, o, o], &[o, o, one], &[o, one, o]]),
        mat(&[&[o, o, o], &[o, o, mi], &[o, i, o]]),
        mat(&[&[one, o, o], &[o, one, o], &[o, o, (-2, 0)]]),
    ];
    let inv_sqrt3 = Coeff::sqrt3().scale(&rat(1, 3));
    l[7] = l[7].scale(&inv_sqrt3);
    l.into_iter().map(|m| m.scale(&Coeff::frac(1, 2))).collect()
}

/// f^{abc} extracted by solving [T^a,T^b] = i f^{abc} T^c with tr(T^c T^d) = δ/2.
fn oracle_f(gens: &[Matrix]) -> Vec<Vec<Vec<Coeff>>> {
    let d = gens.len();
    let mut out = vec![vec![vec![Coeff::zero(); d]; d]; d];
    for a in 0..d {
        for b in 0..d {
            let comm = gens[a].commutator(&gens[b]);
            for c in 0..d {
                // tr([T^a,T^b] T^c) = i f^{abc} / 2
                let t = comm.mul(&gens[c]).trace();
                out[a][b][c] = &t * &Coeff::from_parts(rat(0, 1), rat(-2, 1), rat(0, 1), rat(0, 1));
            }
        }
    }
    out
}

#[test]
fn su3_structure_constants_match_literal_gell_mann() {
    let g = LieAlgebra::new(GroupKind::SU(3)).unwrap();
    let lit = literal_gell_mann();
    assert_eq!(g.generators(RepKind::Fundamental).unwrap(), lit.as_slice());
    let f = g.structure_constants();
    let expect = oracle_f(&lit);
    for a in 0..8 {
        for b in 0..8 {
            for c in 0..8 {
                assert_eq!(f.get(a, b, c), &expect[a][b][c], "f({a},{b},{c})");
            }
        }
    }
    // the classic entries, written 1-based as f^{123}, f^{147}, f^{458}
    assert_eq!(f.get(0, 1, 2), &Coeff::one());
    assert_eq!(f.get(0, 3, 6), &Coeff::frac(1, 2));
    assert_eq!(f.get(3, 4, 7), &Coeff::sqrt3().scale(&rat(1, 2)));
    assert_eq!(f.get(1, 0, 2), &Coeff::int(-1));
}

#[test]
fn su2_fundamental_is_half_pauli() {
    let g = LieAlgebra::new(GroupKind::SU(2)).unwrap();
    let o = (0, 0);
    let pauli = [
        mat(&[&[o, (1, 0)], &[(1, 0), o]]),
        mat(&[&[o, (0, -1)], &[(0, 1), o]]),
        mat(&[&[(1, 0), o], &[o, (-1, 0)]]),
    ];
    for (t, s) in g.generators(RepKind::Fundamental).unwrap().iter().zip(&pauli) {
        assert_eq!(t, &s.scale(&Coeff::frac(1, 2)));
    }
    assert!(g.verify(RepKind::Fundamental).unwrap().passed());
}

#[test]
fn every_supported_representation_passes() {
    for kind in [GroupKind::SU(2), GroupKind::SU(3)] {
        let g = LieAlgebra::new(kind).unwrap();
        for rep in [RepKind::Fundamental, RepKind::Adjoint] {
            let check = g.verify(rep).unwrap();
            assert!(check.passed(), "{kind} {rep:?}: {:?}", check.violation);
        }
    }
    let u1 = LieAlgebra::new(GroupKind::U1).unwrap();
    assert!(u1.verify(RepKind::Fundamental).unwrap().passed());
    assert!(matches!(u1.generators(RepKind::Adjoint), Err(LieError::UnsupportedRepresentation { .. })));
}

#[test]
fn su3_brute_force_counts_every_tuple() {
    let g = LieAlgebra::new(GroupKind::SU(3)).unwrap();
    let check = g.verify(RepKind::Fundamental).unwrap();
    // antisymmetry 8³, Jacobi 8⁴, commutators 8², normalisation 8², traces 8
    assert_eq!(check.identities_checked, 512 + 4096 + 64 + 64 + 8);
}

#[test]
fn jacobi_holds_in_the_cyclic_second_index_form() {
    // Σ_e f^{abe}f^{ecd} + f^{cbe}f^{aed} + f^{dbe}f^{ace}, evaluated independently
    for kind in [GroupKind::SU(2), GroupKind::SU(3)] {
        let g = LieAlgebra::new(kind).unwrap();
        let f = g.structure_constants();
        let d = f.dim();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for dd in 0..d {
                        let mut s = Coeff::zero();
                        for e in 0..d {
                            s += &(f.get(a, b, e) * f.get(e, c, dd));
                            s += &(f.get(c, b, e) * f.get(a, e, dd));
                            s += &(f.get(dd, b, e) * f.get(a, c, e));
                        }
                        assert!(s.is_zero(), "{kind}: ({a},{b},{c},{dd})");
                    }
                }
            }
        }
    }
}

#[test]
fn adjoint_generators_follow_from_structure_constants() {
    let g = LieAlgebra::new(GroupKind::SU(2)).unwrap();
    let adj = g.generators(RepKind::Adjoint).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let eps = match (a, b, c) {
                    (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
                    (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
                    _ => 0,
                };
                assert_eq!(adj[a].get(b, c), &(-Coeff::i() * Coeff::int(eps)));
            }
        }
    }
}

fn flip_orbit(f: &mut StructureConstants, a: usize, b: usize, c: usize) {
    for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b), (b, a, c), (a, c, b), (c, b, a)] {
        let v = -f.get(x, y, z).clone();
        f.set(x, y, z, v);
    }
}

#[test]
fn corrupted_sign_is_located() {
    let g = LieAlgebra::new(GroupKind::SU(3)).unwrap();
    let gens = g.generators(RepKind::Fundamental).unwrap();

    // a single flipped entry breaks antisymmetry first
    let mut single = g.structure_constants().clone();
    single.set(0, 3, 6, Coeff::frac(-1, 2));
    let check = verify_algebra(&single, gens, true, true);
    assert_eq!(check.violation, Some(Violation::NotAntisymmetric { a: 0, b: 3, c: 6 }));

    // flipping a whole antisymmetric orbit keeps antisymmetry but breaks Jacobi
    let mut orbit = g.structure_constants().clone();
    flip_orbit(&mut orbit, 0, 3, 6);
    let check = verify_algebra(&orbit, &adjoint_generators(&orbit), false, true);
    match check.violation {
        Some(Violation::Jacobi { a, b, c, d }) => {
            let v = Violation::Jacobi { a, b, c, d };
            assert!(v.to_string().contains(&format!("({a},{b},{c},{d})")));
        }
        other => panic!("expected a Jacobi violation, got {other:?}"),
    }
}

#[test]
fn larger_groups_are_rejected() {
    assert!(matches!(LieAlgebra::new(GroupKind::SU(4)), Err(LieError::UnsupportedGroup(_))));
    assert!(matches!(LieAlgebra::new(GroupKind::SU(1)), Err(LieError::UnsupportedGroup(_))));
}
