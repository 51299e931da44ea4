//! Noether currents of global (constant-parameter) transformations.

use std::collections::BTreeSet;

use crate::builder::{fresh_names, CurrentExpr};
use crate::model::TransformationRuleSet;
use crate::symexpr::index::{adj, up};
use crate::symexpr::{
    freshen, instantiate, label, Expression, Factor, Field, Index, IndexClass, Kernel, Label, Slot, Term,
};

use super::{gauge_variation, replace_at, CalcError};

/// The rules with every term containing a derivative of the parameter
/// dropped.
pub fn global_rules(rules: &TransformationRuleSet, parameter: &Field) -> TransformationRuleSet {
    let mut out = TransformationRuleSet::default();
    for r in rules.rules() {
        let kept: Vec<Term> = r
            .variation
            .distribute_derivatives()
            .into_terms()
            .into_iter()
            .filter(|t| !has_parameter_derivative(t, parameter))
            .collect();
        out.insert(r.pattern.clone(), Expression::from_terms(kept));
    }
    out
}

fn has_parameter_derivative(t: &Term, parameter: &Field) -> bool {
    t.factors.iter().any(|f| matches!(f, Factor::Field(o) if &o.field == parameter && !o.derivs.is_empty()))
}

/// Canonical variation of `l` under constant parameters: the global rules
/// with every derivative of the parameter set to zero afterwards.
pub fn global_variation(
    kernel: &Kernel,
    l: &Expression,
    rules: &TransformationRuleSet,
    parameter: &Field,
) -> Result<Expression, CalcError> {
    let global = global_rules(rules, parameter);
    let canon = kernel.canonicalize(&gauge_variation(l, &global)?)?;
    Ok(Expression::from_terms(canon.into_terms().into_iter().filter(|t| !has_parameter_derivative(t, parameter)).collect()))
}

/// Replace the (single, underived) parameter factor of each term by
/// `δ^{z a}`, i.e. take the coefficient of `Λ^a`.
fn strip_parameter(e: &Expression, parameter: &Field, a: &str) -> Expression {
    let mut out = Vec::new();
    for t in e.terms() {
        let mut factors = Vec::with_capacity(t.factors.len());
        let mut seen = false;
        for f in &t.factors {
            match f {
                Factor::Field(o) if &o.field == parameter && !seen => {
                    seen = true;
                    factors.push(Factor::Delta(o.indices[0].clone(), adj(a)));
                }
                other => factors.push(other.clone()),
            }
        }
        if seen {
            out.push(Term::new(t.coeff.clone(), factors));
        }
    }
    Expression::from_terms(out)
}

/// `j^{μa} = Σ_φ ∂L/∂(∂_μφ) · δφ/δΛ^a` for the constant-parameter version
/// of `rules`, after checking that `l` is invariant under it.
pub fn noether_current_global(
    kernel: &Kernel,
    l: &Expression,
    rules: &TransformationRuleSet,
    parameter: &Field,
    mu: &str,
    a: &str,
) -> Result<CurrentExpr, CalcError> {
    let residual = global_variation(kernel, l, rules, parameter)?;
    let global = global_rules(rules, parameter);
    if !residual.is_zero() {
        return Err(CalcError::NotGloballyInvariant(residual.to_string()));
    }
    let targets: BTreeSet<Label> = [label(mu), label(a)].into_iter().collect();
    let mut out = Expression::zero();
    for t in l.distribute_derivatives().terms() {
        let labels: BTreeSet<Label> = t.label_counts().into_keys().chain(targets.iter().cloned()).collect();
        for (k, f) in t.factors.iter().enumerate() {
            let Factor::Field(o) = f else { continue };
            if o.derivs.len() != 1 {
                continue;
            }
            let Some(rule) = global.get(&o.field) else { continue };
            if rule.variation.is_zero() {
                continue;
            }
            let d = &o.derivs[0];
            let Some(dl) = d.label() else { continue };
            let base = crate::symexpr::FieldOcc { derivs: vec![], ..o.clone() };
            let mut avoid = labels.clone();
            let names = fresh_names(&avoid, &["z", "m"]);
            avoid.extend(names.iter().map(|n| label(n)));
            let inst = freshen(&instantiate(&rule.pattern, &rule.variation, &base), &mut avoid);
            let inst = strip_parameter(&inst, parameter, &names[0]);
            let contrib = replace_at(t, k, &inst);
            // move the freed derivative label onto the requested names
            let tmp = Index::new(IndexClass::Lorentz, d.variance, Slot::Label(label(&names[1])));
            let contrib = contrib.specialize(dl, &Slot::Label(label(&names[1])), None);
            let mut avoid_targets = targets.clone();
            let contrib = freshen(&contrib, &mut avoid_targets);
            let contrib = contrib.relabel(&names[0], a)
                * Expression::factor(Factor::metric(up(mu), tmp));
            out = out + contrib;
        }
    }
    Ok(CurrentExpr { expr: out, mu: up(mu), a: label(a), dynamical: true })
}
