//! Independent numerical checks: exact evaluation of raw expressions on
//! seeded random polynomial field configurations.

pub mod grassmann;
pub mod jet;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coeff::{Coeff, Rational};
use crate::liealg::{LieAlgebra, Matrix};
use crate::symexpr::{
    dirac_gammas, metric_sign, Expression, Factor, Field, FieldOcc, Index, IndexClass, Label, Slot, Term, Variance,
};

pub use grassmann::Grassmann;
pub use jet::Jet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("field {0} is not covered by the sample")]
    UncoveredField(String),
    #[error("coupling {0} has no sampled value")]
    UncoveredCoupling(String),
    #[error("{0} Grassmann generators needed, at most 128 supported")]
    TooManyGenerators(usize),
    #[error("index {0} has inconsistent classes")]
    BadIndex(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleConfig {
    pub seed: u64,
    pub samples: usize,
    /// Total polynomial degree of every field component.
    pub degree: u8,
    /// Coefficients are `n/d` with `|n| ≤ numerator_bound`, `1 ≤ d ≤ denominator_bound`.
    pub numerator_bound: i64,
    pub denominator_bound: i64,
    /// Grassmann generators attached to each fermion component.
    pub generators_per_component: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 0x5eed,
            samples: 20,
            degree: 2,
            numerator_bound: 9,
            denominator_bound: 1,
            generators_per_component: 2,
        }
    }
}

impl OracleConfig {
    pub fn with_seed(seed: u64) -> Self {
        OracleConfig { seed, ..OracleConfig::default() }
    }
}

/// Everything the oracle needs to know about a theory: group data, field
/// symbols and coupling names.
#[derive(Clone, Debug)]
pub struct OracleContext {
    algebra: Arc<LieAlgebra>,
    gammas: Arc<Vec<Matrix>>,
    fields: Vec<Field>,
    couplings: Vec<Label>,
    pinned: BTreeMap<Label, Rational>,
}

/// One random configuration: Taylor data of every field component around
/// `point`, plus coupling values.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub k: usize,
    pub point: [Rational; 4],
    pub couplings: BTreeMap<Label, Rational>,
    components: HashMap<(Field, Vec<u8>), Jet>,
}

impl FieldSample {
    pub fn component(&self, field: &Field, comps: &[u8]) -> Option<&Jet> {
        self.components.get(&(field.clone(), comps.to_vec()))
    }

    pub fn component_count(&self, field: &Field) -> usize {
        self.components.keys().filter(|(f, _)| f == field).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub seed: u64,
    pub k: usize,
    pub point: Vec<String>,
    pub assignment: Vec<(String, u8)>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub zero: bool,
    pub samples: usize,
    pub witness: Option<Witness>,
}

/// Order large enough that sampled polynomials are represented exactly.
const EXACT: u32 = 64;

fn random_rational(rng: &mut ChaCha20Rng, cfg: &OracleConfig) -> Rational {
    let n = rng.gen_range(-cfg.numerator_bound..=cfg.numerator_bound);
    let d = rng.gen_range(1..=cfg.denominator_bound.max(1));
    Rational::new(n, d)
}

fn exponents(degree: u8) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for a in 0..=degree {
        for b in 0..=degree - a {
            for c in 0..=degree - a - b {
                for d in 0..=degree - a - b - c {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

fn all_components(ranges: &[usize]) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for &r in ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..r as u8).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

impl OracleContext {
    pub fn new(algebra: Arc<LieAlgebra>, fields: Vec<Field>, couplings: Vec<Label>) -> Self {
        OracleContext { algebra, gammas: Arc::new(dirac_gammas()), fields, couplings, pinned: BTreeMap::new() }
    }

    /// Fix a coupling to a value instead of sampling it.
    pub fn pin(mut self, name: &str, value: Rational) -> Self {
        self.pinned.insert(crate::symexpr::label(name), value);
        self
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    fn range(&self, class: IndexClass) -> usize {
        match class {
            IndexClass::Lorentz | IndexClass::Spinor => 4,
            IndexClass::Adjoint => self.algebra.adjoint_dim(),
            IndexClass::Fundamental => self.algebra.fundamental_dim(),
        }
    }

    fn field_components(&self, f: &Field) -> Vec<Vec<u8>> {
        let ranges: Vec<usize> = f.slots().iter().map(|(c, _)| self.range(*c)).collect();
        all_components(&ranges)
    }

    /// Deterministic sample `k` for the configured seed.
    pub fn sample(&self, cfg: &OracleConfig, k: usize) -> Result<FieldSample, OracleError> {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        let point = [0; 4].map(|_: u8| random_rational(&mut rng, cfg));

        let mut couplings = BTreeMap::new();
        let mut taken: Vec<Rational> = self.pinned.values().cloned().collect();
        for name in &self.couplings {
            if let Some(v) = self.pinned.get(name) {
                couplings.insert(name.clone(), v.clone());
                continue;
            }
            let v = loop {
                let v = random_rational(&mut rng, cfg);
                if v != Rational::zero() && !taken.contains(&v) {
                    break v;
                }
            };
            taken.push(v.clone());
            couplings.insert(name.clone(), v);
        }

        let odd_components: usize =
            self.fields.iter().filter(|f| f.is_odd()).map(|f| self.field_components(f).len()).sum();
        let needed = odd_components * cfg.generators_per_component;
        if needed > 128 {
            return Err(OracleError::TooManyGenerators(needed));
        }

        let monomials = exponents(cfg.degree);
        let mut next_gen = 0u32;
        let mut components = HashMap::new();
        for f in &self.fields {
            for comps in self.field_components(f) {
                let copies = if f.is_odd() { cfg.generators_per_component } else { 1 };
                let mut jet = Jet::zero(EXACT);
                for _ in 0..copies {
                    let poly: Vec<([u8; 4], Rational)> =
                        monomials.iter().map(|e| (*e, random_rational(&mut rng, cfg))).collect();
                    let taylor = jet::recentre(&poly, &point);
                    let unit = if f.is_odd() {
                        let g = Grassmann::generator(next_gen);
                        next_gen += 1;
                        g
                    } else {
                        Grassmann::scalar(Coeff::one())
                    };
                    let part = Jet::from_coeffs(
                        EXACT,
                        taylor.into_iter().map(|(e, c)| (e, unit.scale(&Coeff::from_rational(c)))),
                    );
                    jet = jet.add(&part);
                }
                components.insert((f.clone(), comps), jet);
            }
        }
        Ok(FieldSample { k, point, couplings, components })
    }

    /// Exact value of `e` at the sample point with free labels fixed by `env`.
    pub fn evaluate(
        &self,
        e: &Expression,
        sample: &FieldSample,
        env: &BTreeMap<Label, u8>,
    ) -> Result<Grassmann, OracleError> {
        let mut ev = Evaluator { ctx: self, sample, memo: HashMap::new(), inner_memo: HashMap::new() };
        let env: HashMap<Label, u8> = env.iter().map(|(k, v)| (k.clone(), *v)).collect();
        Ok(ev.expr(e, &env, 0)?.value())
    }

    /// Test `e = 0` at every configured sample and free-index assignment.
    pub fn verify_zero(&self, e: &Expression, cfg: &OracleConfig) -> Result<Verdict, OracleError> {
        let free = e.free_indices();
        let ranges: Vec<usize> = free.iter().map(|i| self.range(i.class)).collect();
        let assignments = all_components(&ranges);
        let labels: Vec<Label> = free.iter().map(|i| i.label().unwrap().clone()).collect();

        let found = (0..cfg.samples).into_par_iter().find_map_first(|k| {
            let run = || -> Result<Option<Witness>, OracleError> {
                let sample = self.sample(cfg, k)?;
                let mut ev = Evaluator { ctx: self, sample: &sample, memo: HashMap::new(), inner_memo: HashMap::new() };
                for vals in &assignments {
                    let env: HashMap<Label, u8> = labels.iter().cloned().zip(vals.iter().copied()).collect();
                    let v = ev.expr(e, &env, 0)?.value();
                    if !v.is_zero() {
                        return Ok(Some(Witness {
                            seed: cfg.seed,
                            k,
                            point: sample.point.iter().map(|r| r.to_string()).collect(),
                            assignment: labels.iter().map(|l| l.to_string()).zip(vals.iter().copied()).collect(),
                            value: v.to_string(),
                        }));
                    }
                }
                Ok(None)
            };
            run().transpose()
        });
        let witness = found.transpose()?;
        Ok(Verdict { zero: witness.is_none(), samples: cfg.samples, witness })
    }
}

struct Evaluator<'a> {
    ctx: &'a OracleContext,
    sample: &'a FieldSample,
    memo: HashMap<(Field, Vec<u8>, Vec<u8>, u32), Jet>,
    inner_memo: HashMap<(usize, Vec<u8>, u32), Jet>,
}

struct Walk<'w, 't> {
    vars: &'w [(Label, IndexClass)],
    ranges: &'w [usize],
    consts: &'w [(&'t Factor, Vec<Src>, usize)],
    pending: &'w [Pending<'t>],
    order: u32,
}

/// Where a slot gets its value from during enumeration.
#[derive(Clone, Copy)]
enum Src {
    Fixed(u8),
    Var(usize),
}

/// A non-constant factor with the enumeration depth at which all of its
/// labels are bound.
struct Pending<'t> {
    factor: &'t Factor,
    ready: usize,
    /// Labels of a derivative's inner expression, for memoisation.
    inner_free: Vec<Label>,
}

impl Evaluator<'_> {
    fn expr(&mut self, e: &Expression, env: &HashMap<Label, u8>, order: u32) -> Result<Jet, OracleError> {
        let mut acc = Jet::zero(order);
        for t in e.terms() {
            acc = acc.add(&self.term(t, env, order)?);
        }
        Ok(acc)
    }

    fn term(&mut self, t: &Term, env: &HashMap<Label, u8>, order: u32) -> Result<Jet, OracleError> {
        // labels bound at this level, constants first so zeros prune early
        let mut vars: Vec<(Label, IndexClass)> = Vec::new();
        let note = |idx: &Index, vars: &mut Vec<(Label, IndexClass)>| -> Result<(), OracleError> {
            if let Some(l) = idx.label() {
                if env.contains_key(l) {
                    return Ok(());
                }
                match vars.iter().find(|(x, _)| x == l) {
                    Some((_, c)) if *c != idx.class => return Err(OracleError::BadIndex(l.to_string())),
                    Some(_) => {}
                    None => vars.push((l.clone(), idx.class)),
                }
            }
            Ok(())
        };
        for f in t.factors.iter().filter(|f| f.is_constant_tensor()) {
            match f {
                Factor::Select(s) => note(&s.index(), &mut vars)?,
                other => {
                    for i in other.indices() {
                        note(i, &mut vars)?;
                    }
                }
            }
        }
        let mut pending: Vec<Pending> = Vec::new();
        for f in t.factors.iter().filter(|f| !f.is_constant_tensor()) {
            let mut labels: Vec<Index> = Vec::new();
            let mut inner_free = Vec::new();
            match f {
                Factor::Deriv { index, inner } => {
                    labels.push(index.clone());
                    let free = inner.free_indices();
                    inner_free = free.iter().filter_map(|i| i.label().cloned()).collect();
                    labels.extend(free);
                }
                Factor::Field(_) => labels.extend(f.indices().into_iter().cloned()),
                _ => continue,
            }
            for i in &labels {
                note(i, &mut vars)?;
            }
            let ready = labels
                .iter()
                .filter_map(|i| i.label())
                .filter_map(|l| vars.iter().position(|(x, _)| x == l))
                .map(|p| p + 1)
                .max()
                .unwrap_or(0);
            pending.push(Pending { factor: f, ready, inner_free });
        }
        // multiplying odd factors out of order costs the sign of the permutation
        let mut order_idx: Vec<usize> = (0..pending.len()).collect();
        order_idx.sort_by_key(|&k| (pending[k].ready, k));
        let odd: Vec<usize> = order_idx.iter().copied().filter(|&k| pending[k].factor.is_odd()).collect();
        let mut inversions = 0;
        for a in 0..odd.len() {
            for b in a + 1..odd.len() {
                if odd[a] > odd[b] {
                    inversions += 1;
                }
            }
        }
        let pending: Vec<Pending> = {
            let mut slots: Vec<Option<Pending>> = pending.into_iter().map(Some).collect();
            order_idx.iter().map(|&k| slots[k].take().unwrap()).collect()
        };

        let src = |idx: &Index| -> Src {
            match &idx.slot {
                Slot::Value(v) => Src::Fixed(*v),
                Slot::Label(l) => match env.get(l) {
                    Some(v) => Src::Fixed(*v),
                    None => Src::Var(vars.iter().position(|(x, _)| x == l).unwrap()),
                },
            }
        };

        let mut base = if inversions % 2 == 1 { -&t.coeff } else { t.coeff.clone() };
        let mut consts: Vec<(&Factor, Vec<Src>, usize)> = Vec::new();
        for f in &t.factors {
            match f {
                Factor::Coupling(c) => {
                    let v = self.sample.couplings.get(c).ok_or_else(|| OracleError::UncoveredCoupling(c.to_string()))?;
                    base *= &Coeff::from_rational(v.clone());
                }
                f if f.is_constant_tensor() => {
                    let srcs: Vec<Src> = match f {
                        Factor::Select(s) => vec![src(&s.index())],
                        other => other.indices().into_iter().map(src).collect(),
                    };
                    let ready = srcs.iter().filter_map(|s| if let Src::Var(p) = s { Some(p + 1) } else { None }).max();
                    consts.push((f, srcs, ready.unwrap_or(0)));
                }
                _ => {}
            }
        }

        let ranges: Vec<usize> = vars.iter().map(|(_, c)| self.ctx.range(*c)).collect();
        let mut assign = vec![0u8; vars.len()];
        let mut acc = Jet::zero(order);
        let mut env = env.clone();
        let walk = Walk { vars: &vars, ranges: &ranges, consts: &consts, pending: &pending, order };
        self.enumerate(&walk, 0, base, Jet::constant(order, Grassmann::scalar(Coeff::one())), &mut assign, &mut env, &mut acc)?;
        Ok(acc)
    }

    /// Bind variable `depth` and below; factors become available as soon as
    /// their last label is bound, so partial products are shared.
    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &mut self,
        w: &Walk,
        depth: usize,
        coeff: Coeff,
        jet: Jet,
        assign: &mut Vec<u8>,
        env: &mut HashMap<Label, u8>,
        acc: &mut Jet,
    ) -> Result<(), OracleError> {
        let mut c = coeff;
        for (f, srcs, ready) in w.consts {
            if *ready == depth {
                c *= &self.constant(f, &resolve(srcs, assign));
                if c.is_zero() {
                    return Ok(());
                }
            }
        }
        let mut jet = jet;
        for p in w.pending.iter().filter(|p| p.ready == depth) {
            let part = match p.factor {
                Factor::Field(o) => self.field(o, env, w.order)?,
                Factor::Deriv { index, inner } => {
                    let (m, sign) = lorentz_value(index, env);
                    let d = self.inner(inner, &p.inner_free, env, w.order + 1)?.derivative(m as usize);
                    if sign { d.scale(&Coeff::int(-1)) } else { d }
                }
                _ => unreachable!("only fields and derivatives are pending"),
            };
            jet = jet.mul(&part);
            if jet.is_zero() {
                return Ok(());
            }
        }
        if depth == w.vars.len() {
            *acc = acc.add(&jet.scale(&c));
            return Ok(());
        }
        for v in 0..w.ranges[depth] {
            assign[depth] = v as u8;
            env.insert(w.vars[depth].0.clone(), v as u8);
            self.enumerate(w, depth + 1, c.clone(), jet.clone(), assign, env, acc)?;
        }
        env.remove(&w.vars[depth].0);
        Ok(())
    }

    /// Value of a derivative's inner expression, memoised on the values of
    /// its free labels.
    fn inner(&mut self, e: &Expression, free: &[Label], env: &HashMap<Label, u8>, order: u32) -> Result<Jet, OracleError> {
        let key = (e as *const Expression as usize, free.iter().map(|l| env[l]).collect::<Vec<u8>>(), order);
        if let Some(j) = self.inner_memo.get(&key) {
            return Ok(j.clone());
        }
        let local: HashMap<Label, u8> = free.iter().map(|l| (l.clone(), env[l])).collect();
        let j = self.expr(e, &local, order)?;
        self.inner_memo.insert(key, j.clone());
        Ok(j)
    }

    fn constant(&self, f: &Factor, vals: &[u8]) -> Coeff {
        let u = |k: usize| vals[k] as usize;
        let sign = |m: u8| Coeff::int(metric_sign(m));
        match f {
            Factor::Metric(a, b) => match (vals[0] == vals[1], a.variance == b.variance) {
                (false, _) => Coeff::zero(),
                (true, true) => sign(vals[0]),
                (true, false) => Coeff::one(),
            },
            Factor::Delta(..) => Coeff::int((vals[0] == vals[1]) as i64),
            Factor::Structure(..) => self.ctx.algebra.structure_constants().get(u(0), u(1), u(2)).clone(),
            Factor::Generator { rep, .. } => match self.ctx.algebra.generators(*rep) {
                Ok(g) => g[u(0)].get(u(1), u(2)).clone(),
                Err(_) => Coeff::zero(),
            },
            Factor::Gamma { mu, .. } => {
                let g = self.ctx.gammas[u(0)].get(u(1), u(2)).clone();
                if mu.variance == Variance::Down {
                    &g * &sign(vals[0])
                } else {
                    g
                }
            }
            Factor::Gamma0 { .. } => self.ctx.gammas[0].get(u(0), u(1)).clone(),
            Factor::Select(s) => Coeff::int((s.value == vals[0]) as i64),
            _ => unreachable!("not a constant"),
        }
    }

    fn field(&mut self, o: &FieldOcc, env: &HashMap<Label, u8>, order: u32) -> Result<Jet, OracleError> {
        let mut negate = false;
        let mut comps = Vec::with_capacity(o.indices.len());
        for ((class, storage), idx) in o.field.slots().iter().zip(&o.indices) {
            let v = slot_value(idx, env);
            if *class == IndexClass::Lorentz && idx.variance != *storage && metric_sign(v) < 0 {
                negate = !negate;
            }
            comps.push(v);
        }
        let mut derivs = Vec::with_capacity(o.derivs.len());
        for d in &o.derivs {
            let (m, s) = lorentz_value(d, env);
            negate ^= s;
            derivs.push(m);
        }
        derivs.sort_unstable();
        let key = (o.field.clone(), comps, derivs, order);
        if !self.memo.contains_key(&key) {
            let base = self
                .sample
                .components
                .get(&(key.0.clone(), key.1.clone()))
                .ok_or_else(|| OracleError::UncoveredField(o.field.name().to_string()))?;
            let mut j = base.clone();
            for &m in &key.2 {
                j = j.derivative(m as usize);
            }
            self.memo.insert(key.clone(), j.truncate(order));
        }
        let j = self.memo[&key].clone();
        Ok(if negate { j.scale(&Coeff::int(-1)) } else { j })
    }
}

fn resolve(srcs: &[Src], assign: &[u8]) -> Vec<u8> {
    srcs.iter()
        .map(|s| match s {
            Src::Fixed(v) => *v,
            Src::Var(p) => assign[*p],
        })
        .collect()
}

fn slot_value(idx: &Index, env: &HashMap<Label, u8>) -> u8 {
    match &idx.slot {
        Slot::Value(v) => *v,
        Slot::Label(l) => env[l],
    }
}

/// Component of a derivative index and whether raising it costs a sign.
fn lorentz_value(idx: &Index, env: &HashMap<Label, u8>) -> (u8, bool) {
    let m = slot_value(idx, env);
    (m, idx.variance == Variance::Up && metric_sign(m) < 0)
}
