use std::collections::BTreeSet;

use super::expr::{free_indices_of, Expression, Term};
use super::factor::{Factor, Field, FieldOcc};
use super::index::{label, Label, Slot};
use super::SymError;

/// Replace every occurrence of `pattern`'s field (at any derivative order)
/// by `replacement`, whose free indices must match the pattern's.
/// Occurrences under derivatives receive the derivatives via Leibniz.
pub fn substitute(e: &Expression, pattern: &FieldOcc, replacement: &Expression) -> Result<Expression, SymError> {
    if !pattern.derivs.is_empty() {
        return Err(SymError::IndexSignatureMismatch("pattern must not carry derivatives".into()));
    }
    let mut pattern_sig = BTreeSet::new();
    for idx in &pattern.indices {
        let l = idx
            .label()
            .ok_or_else(|| SymError::IndexSignatureMismatch("pattern indices must be symbolic".into()))?;
        if !pattern_sig.insert((l.clone(), idx.class, idx.variance)) {
            return Err(SymError::IndexSignatureMismatch(format!("pattern repeats index {l}")));
        }
    }
    if let Some(t) = replacement.terms().first() {
        if replacement.is_odd() != pattern.field.is_odd() {
            return Err(SymError::ParityMismatch(pattern.field.name().to_string()));
        }
        let sig: BTreeSet<_> = free_indices_of(t)
            .into_iter()
            .map(|i| (i.label().cloned().unwrap(), i.class, i.variance))
            .collect();
        if sig != pattern_sig {
            return Err(SymError::IndexSignatureMismatch(format!(
                "replacement free indices do not match pattern {}",
                Factor::Field(pattern.clone())
            )));
        }
    }

    let mut out = Vec::new();
    for t in e.distribute_derivatives().terms() {
        out.extend(splice(t, &pattern.field, |o| instantiate(pattern, replacement, o)).into_terms());
    }
    Ok(Expression::from_terms(out))
}

/// The template written for `pattern`, moved onto the indices and
/// derivatives of `occ`. Dummy labels of the template are renamed away
/// from the labels of `occ` first, so nothing is captured.
pub fn instantiate(pattern: &FieldOcc, template: &Expression, occ: &FieldOcc) -> Expression {
    let pattern_labels: Vec<&Label> = pattern.indices.iter().filter_map(|i| i.label()).collect();
    let occ_labels: BTreeSet<Label> =
        occ.indices.iter().chain(&occ.derivs).filter_map(|i| i.label().cloned()).collect();
    let mut used: BTreeSet<Label> = template.labels();
    used.extend(occ_labels.iter().cloned());

    let mut inst = template.clone();
    for l in template.labels() {
        if pattern_labels.contains(&&l) || !occ_labels.contains(&l) {
            continue;
        }
        let mut n = 0usize;
        let fresh = loop {
            let cand = label(&format!("{l}~{n}"));
            if !used.contains(&cand) {
                break cand;
            }
            n += 1;
        };
        used.insert(fresh.clone());
        inst = inst.specialize(&l, &Slot::Label(fresh), None);
    }

    // two-phase renaming through placeholders avoids permutation clashes
    let temps: Vec<Label> = (0..pattern_labels.len()).map(|k| label(&format!("\u{1}{k}"))).collect();
    for (p, tmp) in pattern_labels.iter().zip(&temps) {
        inst = inst.specialize(p, &Slot::Label(tmp.clone()), None);
    }
    for (tmp, idx) in temps.iter().zip(&occ.indices) {
        inst = inst.specialize(tmp, &idx.slot, Some(idx.variance));
    }
    for d in &occ.derivs {
        inst = inst.partial(d);
    }
    inst
}

/// Rebuild `t` with every occurrence of `field` replaced by `f(occurrence)`,
/// keeping factor order (and so Grassmann signs) intact.
pub fn splice(t: &Term, field: &Field, mut f: impl FnMut(&FieldOcc) -> Expression) -> Expression {
    let hits = t.factors.iter().any(|x| matches!(x, Factor::Field(o) if &o.field == field));
    if !hits {
        return Expression::from_terms(vec![t.clone()]);
    }
    let mut avoid: BTreeSet<Label> = t.label_counts().into_keys().collect();
    let mut acc = Expression::constant(t.coeff.clone());
    let mut plain: Vec<Factor> = Vec::new();
    for x in &t.factors {
        match x {
            Factor::Field(o) if &o.field == field => {
                if !plain.is_empty() {
                    acc = append_factors(acc, std::mem::take(&mut plain));
                }
                let inst = freshen(&f(o), &mut avoid);
                acc = acc.mul_expr(&inst);
            }
            other => plain.push(other.clone()),
        }
    }
    if !plain.is_empty() {
        acc = append_factors(acc, plain);
    }
    acc
}

/// Product of `acc` with a single factor list, renaming clashing dummies.
pub fn append_factors(acc: Expression, factors: Vec<Factor>) -> Expression {
    acc.mul_expr(&Expression::from_terms(vec![Term::new(crate::coeff::Coeff::one(), factors)]))
}

/// Rename dummy labels of `e` that occur in `avoid`; new names are added
/// to `avoid`.
pub fn freshen(e: &Expression, avoid: &mut BTreeSet<Label>) -> Expression {
    let mut dummies = BTreeSet::new();
    for t in e.terms() {
        for (l, n) in t.label_counts() {
            if n >= 2 && avoid.contains(&l) {
                dummies.insert(l);
            }
        }
    }
    let mut out = e.clone();
    for l in dummies {
        let mut n = 0usize;
        let fresh = loop {
            let cand = label(&format!("{l}~{n}"));
            if !avoid.contains(&cand) && !e.labels().contains(&cand) {
                break cand;
            }
            n += 1;
        };
        avoid.insert(fresh.clone());
        out = out.specialize(&l, &Slot::Label(fresh), None);
    }
    out
}
