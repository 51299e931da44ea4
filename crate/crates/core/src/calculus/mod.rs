//! Variational calculus on canonical component expressions.

mod noether;
mod onshell;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::model::TransformationRuleSet;
use crate::symexpr::index::lo_val;
use crate::symexpr::{
    append_factors, freshen, instantiate, Expression, Factor, Field, FieldOcc, Index, Kernel, Label, Selector, Slot,
    SymError, Term,
};

pub use noether::{global_rules, global_variation, noether_current_global};
pub use onshell::{reduce_on_shell, replay, EomSet, Equation, Reduction, Step};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalcError {
    #[error("no transformation rule for field {0}")]
    MissingRule(String),
    #[error("second or higher derivatives of {0}")]
    HigherDerivative(String),
    #[error("expression is not a scalar: free indices {0}")]
    FreeIndex(String),
    #[error("equation {0} has no isolable leading derivative")]
    NotReducible(String),
    #[error("not invariant under the global transformation; residual {0}")]
    NotGloballyInvariant(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// First-order variation of `e`: every field occurrence is replaced in
/// turn by its rule (Leibniz), keeping factor order.
pub fn gauge_variation(e: &Expression, rules: &TransformationRuleSet) -> Result<Expression, CalcError> {
    let mut out = Vec::new();
    for t in e.distribute_derivatives().terms() {
        let labels: BTreeSet<Label> = t.label_counts().into_keys().collect();
        for (k, f) in t.factors.iter().enumerate() {
            let Factor::Field(o) = f else { continue };
            let rule = rules.get(&o.field).ok_or_else(|| CalcError::MissingRule(o.field.name().to_string()))?;
            if rule.variation.is_zero() {
                continue;
            }
            let mut avoid = labels.clone();
            let inst = freshen(&instantiate(&rule.pattern, &rule.variation, o), &mut avoid);
            out.extend(replace_at(t, k, &inst).into_terms());
        }
    }
    Ok(Expression::from_terms(out))
}

/// `t` with factor `k` replaced by `inst`.
pub(crate) fn replace_at(t: &Term, k: usize, inst: &Expression) -> Expression {
    let mut acc = Expression::constant(t.coeff.clone());
    if k > 0 {
        acc = append_factors(acc, t.factors[..k].to_vec());
    }
    acc = acc.mul_expr(inst);
    if k + 1 < t.factors.len() {
        acc = append_factors(acc, t.factors[k + 1..].to_vec());
    }
    acc
}

/// Every concrete component tuple of a field.
pub fn components(kernel: &Kernel, field: &Field) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for (class, _) in field.slots() {
        let n = kernel.range(*class) as u8;
        out = out.into_iter().flat_map(|p| (0..n).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

/// Component occurrence with storage variances and no derivatives.
pub fn component_occ(field: &Field, comps: &[u8]) -> FieldOcc {
    field.at(field.slots().iter().zip(comps).map(|((c, v), x)| Index::new(*c, *v, Slot::Value(*x))).collect())
}

fn same_base(o: &FieldOcc, base: &FieldOcc) -> bool {
    o.field == base.field && o.indices == base.indices
}

/// Left derivative of a canonical expression with respect to one jet
/// variable.
pub fn left_derivative(e: &Expression, var: &FieldOcc) -> Expression {
    let mut out = Vec::new();
    for t in e.terms() {
        let mut odd_before = 0;
        for (k, f) in t.factors.iter().enumerate() {
            if let Factor::Field(o) = f {
                if o == var {
                    let mut factors = t.factors.clone();
                    factors.remove(k);
                    let c = if var.field.is_odd() && odd_before % 2 == 1 { -&t.coeff } else { t.coeff.clone() };
                    out.push(Term::new(c, factors));
                }
            }
            if f.is_odd() {
                odd_before += 1;
            }
        }
    }
    Expression::from_terms(out)
}

/// `Σ_α (−D)^α ∂e/∂(∂^α φ)` for one field component `base`, canonical.
pub fn variational_derivative(kernel: &Kernel, e: &Expression, base: &FieldOcc) -> Result<Expression, CalcError> {
    let mut jets: BTreeSet<Vec<Index>> = BTreeSet::new();
    for t in e.terms() {
        for f in &t.factors {
            if let Factor::Field(o) = f {
                if same_base(o, base) {
                    jets.insert(o.derivs.clone());
                }
            }
        }
    }
    let mut total = Expression::zero();
    for derivs in jets {
        let var = FieldOcc { derivs: derivs.clone(), ..base.clone() };
        let mut p = left_derivative(e, &var);
        for d in &derivs {
            p = p.partial(d);
        }
        if derivs.len() % 2 == 1 {
            p = -p;
        }
        total = total + p;
    }
    Ok(kernel.canonicalize(&total)?)
}

fn require_scalar(c: &Expression) -> Result<(), CalcError> {
    let free: BTreeSet<String> = c
        .terms()
        .iter()
        .flat_map(|t| t.factors.iter())
        .filter_map(|f| match f {
            Factor::Select(s) => Some(s.label.to_string()),
            _ => None,
        })
        .collect();
    if free.is_empty() {
        Ok(())
    } else {
        Err(CalcError::FreeIndex(free.into_iter().collect::<Vec<_>>().join(",")))
    }
}

/// Euler–Lagrange expression `∂L/∂φ − ∂_μ ∂L/∂(∂_μφ)` with respect to the
/// field of `pattern`. The result carries the labels of `pattern` as free
/// indices with opposite variance. Odd fields use left derivatives.
pub fn euler_lagrange(kernel: &Kernel, l: &Expression, pattern: &FieldOcc) -> Result<Expression, CalcError> {
    let canon = kernel.canonicalize(l)?;
    require_scalar(&canon)?;
    let field = &pattern.field;
    for t in canon.terms() {
        for f in &t.factors {
            if let Factor::Field(o) = f {
                if &o.field == field && o.derivs.len() > 1 {
                    return Err(CalcError::HigherDerivative(field.name().to_string()));
                }
            }
        }
    }
    let labels: Vec<Label> = pattern
        .indices
        .iter()
        .map(|i| i.label().cloned().ok_or_else(|| SymError::MalformedIndex(format!("{i} in pattern"))))
        .collect::<Result<_, _>>()?;
    let comps = components(kernel, field);
    let parts: Vec<Result<Expression, CalcError>> = comps
        .par_iter()
        .map(|c| {
            let base = component_occ(field, c);
            let eq = variational_derivative(kernel, &canon, &base)?;
            if eq.is_zero() {
                return Ok(eq);
            }
            let sel: Vec<Factor> = field
                .slots()
                .iter()
                .zip(&labels)
                .zip(c)
                .map(|(((class, v), l), x)| {
                    Factor::Select(Selector { label: l.clone(), class: *class, variance: v.flip(), value: *x })
                })
                .collect();
            Ok(append_factors(eq, sel))
        })
        .collect();
    let mut total = Expression::zero();
    for p in parts {
        total = total + p?;
    }
    Ok(kernel.canonicalize(&total)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Zero,
    TotalDerivative,
    Obstruction,
}

/// Result of the total-derivative test on a variation.
#[derive(Debug, Clone)]
pub struct VariationReport {
    /// Canonical form of the tested expression.
    pub raw: Expression,
    pub classification: Classification,
    /// Nonvanishing variational derivatives, keyed by field component.
    pub obstruction: Vec<(FieldOcc, Expression)>,
    /// `V^μ` with `raw = ∂_μ V^μ`, when one was found.
    pub witness: Option<Expression>,
}

impl VariationReport {
    /// The obstruction terms summed into one expression.
    pub fn obstruction_sum(&self) -> Expression {
        self.obstruction.iter().map(|(_, e)| e.clone()).sum()
    }
}

/// Euler-operator test: `e` is a divergence iff every variational
/// derivative vanishes.
pub fn classify_total_derivative(kernel: &Kernel, e: &Expression) -> Result<VariationReport, CalcError> {
    let raw = kernel.canonicalize(e)?;
    require_scalar(&raw)?;
    if raw.is_zero() {
        return Ok(VariationReport { raw, classification: Classification::Zero, obstruction: vec![], witness: None });
    }
    let mut bases: BTreeSet<FieldOcc> = BTreeSet::new();
    for t in raw.terms() {
        for f in &t.factors {
            if let Factor::Field(o) = f {
                bases.insert(FieldOcc { derivs: vec![], ..o.clone() });
            }
        }
    }
    let bases: Vec<FieldOcc> = bases.into_iter().collect();
    let derived: Vec<Result<(FieldOcc, Expression), CalcError>> =
        bases.par_iter().map(|b| Ok((b.clone(), variational_derivative(kernel, &raw, b)?))).collect();
    let mut obstruction = Vec::new();
    for d in derived {
        let (b, x) = d?;
        if !x.is_zero() {
            obstruction.push((b, x));
        }
    }
    if obstruction.is_empty() {
        let witness = divergence_witness(kernel, &raw);
        Ok(VariationReport { raw, classification: Classification::TotalDerivative, obstruction, witness })
    } else {
        Ok(VariationReport { raw, classification: Classification::Obstruction, obstruction, witness: None })
    }
}

/// Greedy integration by parts: repeatedly peel one derivative off the
/// highest-ranked jet variable of the leading term. Succeeds when the
/// remainder vanishes.
fn divergence_witness(kernel: &Kernel, raw: &Expression) -> Option<Expression> {
    let mut v: BTreeMap<u8, Expression> = BTreeMap::new();
    let mut rest = raw.clone();
    let budget = 8 * raw.len() + 32;
    for _ in 0..budget {
        if rest.is_zero() {
            break;
        }
        let (t, k) = rest
            .terms()
            .iter()
            .filter_map(|t| {
                t.factors
                    .iter()
                    .enumerate()
                    .filter_map(|(k, f)| match f {
                        Factor::Field(o) if !o.derivs.is_empty() => Some((onshell::rank(o), k)),
                        _ => None,
                    })
                    .max()
                    .map(|(r, k)| (r, t, k))
            })
            .max_by(|a, b| a.0.cmp(&b.0))
            .map(|(_, t, k)| (t.clone(), k))?;
        let Factor::Field(o) = &t.factors[k] else { unreachable!() };
        let mut lowered = o.clone();
        let m = lowered.derivs.pop()?.value()?;
        let mut factors = t.factors.clone();
        factors[k] = Factor::Field(lowered);
        let prim = Expression::from_terms(vec![Term::new(t.coeff.clone(), factors)]);
        rest = kernel.canonicalize(&(&rest - &prim.partial(&lo_val(m)))).ok()?;
        let slot = v.entry(m).or_insert_with(Expression::zero);
        *slot = &*slot + &prim;
    }
    if !rest.is_zero() {
        return None;
    }
    let mut out = Expression::zero();
    for (m, x) in v {
        let sel = Factor::Select(Selector {
            label: crate::symexpr::label("mu"),
            class: crate::symexpr::IndexClass::Lorentz,
            variance: crate::symexpr::Variance::Up,
            value: m,
        });
        out = out + append_factors(x, vec![sel]);
    }
    kernel.canonicalize(&out).ok()
}
