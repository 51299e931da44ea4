//! Clifford-relation rewriting of explicit gamma chains.

use std::collections::BTreeMap;

use crate::coeff::Coeff;

use super::expr::{Expression, Term};
use super::factor::Factor;
use super::index::{Index, IndexClass, Label, Slot};
use super::kernel::SPACETIME_DIM;
use super::SymError;

enum Step {
    Done(Term),
    Split(Vec<Term>),
}

/// Bring every gamma chain to ordered form with
/// `γ^μ γ^ν = 2η^{μν}𝟙 − γ^ν γ^μ` and contract `γ^μ γ_μ = 4·𝟙`.
/// Like terms (identical factor lists) are merged afterwards.
pub fn gamma_reduce(e: &Expression) -> Result<Expression, SymError> {
    let mut work: Vec<Term> = e.distribute_derivatives().into_terms();
    let mut done = Vec::new();
    let mut guard = 0usize;
    while let Some(t) = work.pop() {
        guard += 1;
        if guard > 1_000_000 {
            return Err(SymError::SpinorWiring("gamma reduction did not terminate".into()));
        }
        match reduce_once(&t)? {
            Step::Done(t) => done.push(t),
            Step::Split(ts) => work.extend(ts),
        }
    }
    Ok(Expression::from_terms(done).collect())
}

fn spinor_label(idx: &Index) -> Option<&Label> {
    (idx.class == IndexClass::Spinor).then(|| idx.label()).flatten()
}

fn check_wiring(t: &Term) -> Result<(), SymError> {
    let mut counts: BTreeMap<&Label, usize> = BTreeMap::new();
    for f in &t.factors {
        for idx in f.indices() {
            if let Some(l) = spinor_label(idx) {
                *counts.entry(l).or_default() += 1;
            }
        }
    }
    if let Some((l, n)) = counts.into_iter().find(|(_, n)| *n > 2) {
        return Err(SymError::SpinorWiring(format!("spinor index {l} occurs {n} times")));
    }
    for f in &t.factors {
        if let Factor::Gamma { row, col, .. } = f {
            if row.class != IndexClass::Spinor || col.class != IndexClass::Spinor {
                return Err(SymError::SpinorWiring(format!("{f} has non-spinor matrix slots")));
            }
        }
    }
    Ok(())
}

fn reduce_once(t: &Term) -> Result<Step, SymError> {
    check_wiring(t)?;
    let gammas: Vec<usize> =
        t.factors.iter().enumerate().filter(|(_, f)| matches!(f, Factor::Gamma { .. })).map(|(k, _)| k).collect();
    for &i in &gammas {
        let Factor::Gamma { mu: m1, row: r1, col: c1 } = &t.factors[i] else { unreachable!() };
        let Some(link) = spinor_label(c1) else { continue };
        let Some(&j) = gammas.iter().find(|&&j| {
            j != i && matches!(&t.factors[j], Factor::Gamma { row, .. } if spinor_label(row) == Some(link))
        }) else {
            continue;
        };
        let Factor::Gamma { mu: m2, col: c2, .. } = &t.factors[j] else { unreachable!() };

        let same = m1.slot == m2.slot;
        if same && m1.label().is_some() {
            // γ^μ γ_μ = d·𝟙
            let mut rest = remove(t, i, j);
            rest.coeff *= &Coeff::int(SPACETIME_DIM as i64);
            return Ok(Step::Split(vec![with_identity(rest, r1, c2)]));
        }
        if same {
            // concrete γ^m γ^m = η^{mm} 𝟙
            let mut rest = remove(t, i, j);
            rest.factors.push(Factor::metric(m1.clone(), m2.clone()));
            return Ok(Step::Split(vec![with_identity(rest, r1, c2)]));
        }
        if m1.slot > m2.slot {
            let mut anti = remove(t, i, j);
            anti.coeff *= &Coeff::int(2);
            anti.factors.push(Factor::metric(m1.clone(), m2.clone()));
            let anti = with_identity(anti, r1, c2);

            let mut swapped = t.clone();
            swapped.coeff = -swapped.coeff;
            swapped.factors[i] = Factor::Gamma { mu: m2.clone(), row: r1.clone(), col: c1.clone() };
            swapped.factors[j] = Factor::Gamma { mu: m1.clone(), row: c1.clone(), col: c2.clone() };
            return Ok(Step::Split(vec![anti, swapped]));
        }
    }
    Ok(Step::Done(t.clone()))
}

fn remove(t: &Term, i: usize, j: usize) -> Term {
    let factors = t.factors.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, f)| f.clone()).collect();
    Term::new(t.coeff.clone(), factors)
}

/// Insert `δ_{row,col}`, absorbing it by renaming when one end is contracted.
fn with_identity(t: Term, row: &Index, col: &Index) -> Term {
    let counts = t.label_counts();
    if let Some(c) = col.label() {
        if counts.contains_key(c) {
            if let Some(r) = row.label() {
                return t.specialize(c, &Slot::Label(r.clone()), None).expect("rename keeps term");
            }
        }
    }
    if let Some(r) = row.label() {
        if counts.contains_key(r) {
            return t.specialize(r, &col.slot, None).expect("rename keeps term");
        }
    }
    let mut t = t;
    t.factors.push(Factor::Delta(row.clone(), col.clone()));
    t
}
