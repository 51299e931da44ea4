use crate::builder::{
    covariant_adjoint, covariant_sector, field_strength, gauge_lagrangian, gauge_lagrangian_trace,
    gauge_noether_current, matter_current,
};
use crate::calculus::{gauge_variation, global_variation, noether_current_global, Classification};
use crate::liealg::RepKind;
use crate::model::adjoint_rotation;
use crate::symexpr::index::{lo, up};
use crate::symexpr::Expression;

use super::{expected_equations, on_shell, Check, Claim, Context, Outcome, VerifyError};

fn canon(cx: &Context, e: &Expression) -> Result<Expression, VerifyError> {
    Ok(cx.model.kernel().canonicalize(e)?)
}

fn identity(cx: &Context, statement: &str, e: Expression) -> Result<Claim, VerifyError> {
    Ok(Claim::zero(statement, canon(cx, &e)?, Some(e)))
}

pub struct AlgebraCheck;

impl Check for AlgebraCheck {
    fn name(&self) -> &'static str {
        "algebra"
    }

    fn claim(&self) -> &'static str {
        "structure constants and generators satisfy antisymmetry, Jacobi, the commutation relations and the trace normalisation"
    }

    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError> {
        let alg = cx.model.algebra();
        let mut reps = vec![RepKind::Fundamental];
        if !alg.is_abelian() {
            reps.push(RepKind::Adjoint);
        }
        let mut o = Outcome::default();
        let mut notes = Vec::new();
        for rep in reps {
            let r = alg.verify(rep).map_err(crate::model::ModelError::from)?;
            notes.push(format!("{rep}: {} identities", r.identities_checked));
            let residual = match &r.violation {
                None => Expression::zero(),
                Some(v) => {
                    notes.push(format!("{rep}: {v:?}"));
                    Expression::one()
                }
            };
            o.claims.push(Claim::zero(format!("{rep} representation identities"), residual, None));
        }
        o.note = notes.join("; ");
        Ok(o)
    }
}

pub struct ConstructionCheck;

impl Check for ConstructionCheck {
    fn name(&self) -> &'static str {
        "construction"
    }

    fn claim(&self) -> &'static str {
        "the field strength is antisymmetric and covariant, parts are scalars, trace and component forms agree, matter couples minimally"
    }

    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError> {
        let m = &cx.model;
        let mut o = Outcome::default();
        let f = |mu: &str, nu: &str, a: &str| field_strength(m, &lo(mu), &lo(nu), a);
        o.claims.push(identity(cx, "F_{mu nu} + F_{nu mu} = 0", f("mu", "nu", "a") + f("nu", "mu", "a"))?);

        let mut loose = Expression::zero();
        for p in &cx.lagrangian.parts {
            if !p.expr.free_indices().is_empty() {
                loose = loose + p.expr.clone();
            }
        }
        o.claims.push(Claim::zero("every Lagrangian part is a scalar", loose, None));

        let df = gauge_variation(&f("mu", "nu", "a"), &cx.rules)?;
        let rot = adjoint_rotation(m, f("mu", "nu", "b"));
        o.claims.push(identity(cx, "delta F^a = e f^{abc} F^b Lambda^c", df - rot)?);

        if !m.is_abelian() {
            o.claims.push(identity(
                cx,
                "-1/2 tr F F equals the component form",
                gauge_lagrangian_trace(m) - gauge_lagrangian(m),
            )?);
        }
        if !m.fermions.is_empty() {
            o.claims.push(identity(
                cx,
                "i psibar gamma D psi equals kinetic plus interaction parts",
                covariant_sector(m) - cx.lagrangian.fermion_sector(),
            )?);
        }
        Ok(o)
    }
}

pub struct InvarianceCheck;

impl Check for InvarianceCheck {
    fn name(&self) -> &'static str {
        "invariance"
    }

    fn claim(&self) -> &'static str {
        "the gauge variation of the Lagrangian vanishes or is a total derivative once coupling constraints are applied"
    }

    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError> {
        let inv = cx.invariance()?;
        let mut o = Outcome { constraints: inv.constraints(), ..Outcome::default() };
        let describe = |c: Classification| match c {
            Classification::Zero => "variation vanishes identically",
            Classification::TotalDerivative => "variation is a total derivative",
            Classification::Obstruction => "variation is not a total derivative",
        };
        let Some(solution) = &inv.solution else {
            o.note = describe(inv.before.classification).into();
            o.claims.push(Claim::zero("variation is a divergence", Expression::zero(), inv.before.evidence.clone()));
            return Ok(o);
        };
        o.claims.push(Claim::nonzero(
            "without constraints the variation is obstructed",
            inv.before.obstruction(),
            inv.before.evidence.clone(),
        ));
        match (solution, &inv.after) {
            (Err(e), _) => {
                o.obstruction = true;
                o.note = e.to_string();
                o.claims.push(Claim::zero("variation is a divergence", inv.before.obstruction(), inv.before.evidence.clone()));
            }
            (Ok(_), Some(after)) => {
                let shown: Vec<String> = o.constraints.iter().map(|c| c.to_string()).collect();
                if after.classification == Classification::Obstruction {
                    o.obstruction = true;
                    o.note = format!("obstruction remains after {}", shown.join(", "));
                } else {
                    o.note = format!("{} derived and applied; {}", shown.join(", "), describe(after.classification));
                }
                o.claims.push(Claim::zero(
                    "variation is a divergence under the derived constraints",
                    after.obstruction(),
                    after.evidence.clone(),
                ));
            }
            (Ok(_), None) => unreachable!("constraints are always re-tested"),
        }
        Ok(o)
    }
}

pub struct BianchiCheck;

impl Check for BianchiCheck {
    fn name(&self) -> &'static str {
        "bianchi"
    }

    fn claim(&self) -> &'static str {
        "the cyclic sum of covariant derivatives of the field strength vanishes identically"
    }

    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError> {
        let m = &cx.reference;
        let model = &cx.model;
        let d = |l: &str, mu: &str, nu: &str| {
            covariant_adjoint(m, &lo(l), "a", |x| field_strength(model, &lo(mu), &lo(nu), x))
        };
        let cyclic = d("la", "mu", "nu") + d("mu", "nu", "la") + d("nu", "la", "mu");
        Ok(Outcome { claims: vec![identity(cx, "D_[la F_mu nu] = 0", cyclic)?], ..Outcome::default() })
    }
}

pub struct EomCheck;

impl Check for EomCheck {
    fn name(&self) -> &'static str {
        "eom"
    }

    fn claim(&self) -> &'static str {
        "Euler-Lagrange equations reproduce the sourced field equations and the covariant Dirac equations"
    }

    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError> {
        let expected = expected_equations(&cx.reference);
        let eoms = cx.eoms()?;
        let mut o = Outcome::default();
        for want in &expected.equations {
            let got = eoms.by_name(&want.name).map(|e| e.expr.clone()).unwrap_or_else(Expression::zero);
            let diff = got - want.expr.clone();
            o.claims.push(identity(cx, &format!("E[{}] matches the expected equation", want.name), diff)?);
        }
        Ok(o)
    }
}

pub struct ConservationCheck;

impl Check for ConservationCheck {
    fn name(&self) -> &'static str {
        "conservation"
    }

    fn claim(&self) -> &'static str {
        "matter currents are covariantly conserved on-shell and the total current is conserved"
    }

    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError> {
        let m = &cx.reference;
        let model = &cx.model;
        let mut o = Outcome::default();
        for f in &m.fermions {
            let div = covariant_adjoint(m, &lo("mu"), "a", |x| {
                matter_current(m, &f.name, &up("mu"), x).expect("declared fermion").expr
            });
            let (residual, evidence) = on_shell(cx, &div)?;
            o.claims.push(Claim::zero(format!("D_mu j^mu({}) = 0 on-shell", f.name), residual, Some(evidence)));
        }
        if !m.is_abelian() && !m.fermions.is_empty() && m.currents.is_empty() {
            let mut total = gauge_noether_current(m, &lo("mu"), "a").expr;
            for f in &m.fermions {
                total = total + matter_current(m, &f.name, &lo("mu"), "a")?.expr;
            }
            let (residual, evidence) = on_shell(cx, &Expression::deriv(up("mu"), total))?;
            o.claims.push(Claim::zero("d^mu J_mu = 0 on-shell", residual, Some(evidence)));
        }
        let ddf = covariant_adjoint(m, &lo("nu"), "a", |x| {
            covariant_adjoint(m, &lo("mu"), x, |y| field_strength(model, &up("mu"), &up("nu"), y))
        });
        o.claims.push(identity(cx, "D_nu D_mu F^{mu nu} = 0 identically", ddf)?);
        Ok(o)
    }
}

pub struct NoetherCheck;

impl Check for NoetherCheck {
    fn name(&self) -> &'static str {
        "noether"
    }

    fn claim(&self) -> &'static str {
        "the Noether current of the global symmetry is the gauge plus matter current and is conserved on-shell"
    }

    fn applies(&self, cx: &Context) -> bool {
        !cx.model.fermions.is_empty() && (cx.model.is_abelian() || cx.model.currents.is_empty())
    }

    fn run(&self, cx: &Context) -> Result<Outcome, VerifyError> {
        let m = &cx.model;
        let inv = cx.invariance()?;
        let mut o = Outcome::default();
        let dl = global_variation(m.kernel(), &inv.lagrangian, &inv.rules, &m.parameter)?;
        let claim = Claim::zero("L is invariant under constant transformations", dl.clone(), Some(dl));
        if !claim.holds() {
            o.claims.push(claim);
            return Ok(o);
        }
        o.claims.push(claim);
        let j = noether_current_global(m.kernel(), &inv.lagrangian, &inv.rules, &m.parameter, "mu", "a")?;
        let mut expected = gauge_noether_current(&cx.reference, &up("mu"), "a").expr;
        for f in &m.fermions {
            expected = expected + matter_current(&cx.reference, &f.name, &up("mu"), "a")?.expr;
        }
        o.claims.push(identity(cx, "J^mu = -e (j_gauge^mu + j^mu)", j.expr.clone() + m.e() * expected)?);
        let (residual, evidence) = on_shell(cx, &Expression::deriv(lo("mu"), j.expr))?;
        o.claims.push(Claim::zero("d_mu J^mu = 0 on-shell", residual, Some(evidence)));
        Ok(o)
    }
}
