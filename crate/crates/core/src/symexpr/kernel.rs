use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::coeff::Coeff;
use crate::liealg::{LieAlgebra, Matrix};

use super::expr::{Expression, Term};
use super::factor::{Factor, FieldOcc, Selector};
use super::index::{Index, IndexClass, Label, Slot, Variance};
use super::SymError;

/// Spacetime dimension.
pub const SPACETIME_DIM: usize = 4;

/// Diagonal of the metric, signature (+,−,−,−).
pub fn metric_sign(m: u8) -> i64 {
    if m == 0 {
        1
    } else {
        -1
    }
}

/// Dirac-representation gamma matrices `γ^0 … γ^3`.
pub fn dirac_gammas() -> Vec<Matrix> {
    let one = Coeff::one();
    let i = Coeff::i();
    let mut g0 = Matrix::zeros(4);
    for k in 0..4 {
        g0.set(k, k, if k < 2 { one.clone() } else { -&one });
    }
    // Pauli matrices
    let mut sigma = vec![Matrix::zeros(2), Matrix::zeros(2), Matrix::zeros(2)];
    sigma[0].set(0, 1, one.clone());
    sigma[0].set(1, 0, one.clone());
    sigma[1].set(0, 1, -&i);
    sigma[1].set(1, 0, i.clone());
    sigma[2].set(0, 0, one.clone());
    sigma[2].set(1, 1, -&one);
    let mut out = vec![g0];
    for s in &sigma {
        let mut g = Matrix::zeros(4);
        for r in 0..2 {
            for c in 0..2 {
                g.set(r, c + 2, s.get(r, c).clone());
                g.set(r + 2, c, -s.get(r, c));
            }
        }
        out.push(g);
    }
    out
}

/// Evaluation context for constant tensors: the gauge algebra and the
/// Dirac matrices. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Kernel {
    algebra: Arc<LieAlgebra>,
    gammas: Arc<Vec<Matrix>>,
}

#[derive(Clone, Copy)]
enum SlotRef {
    Fixed(u8),
    Var(usize),
}

struct LabelInfo {
    label: Label,
    class: IndexClass,
    variance: Variance,
    free: bool,
}

impl Kernel {
    pub fn new(algebra: Arc<LieAlgebra>) -> Self {
        Kernel { algebra, gammas: Arc::new(dirac_gammas()) }
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> Arc<LieAlgebra> {
        self.algebra.clone()
    }

    pub fn gamma(&self, mu: usize) -> &Matrix {
        &self.gammas[mu]
    }

    pub fn range(&self, class: IndexClass) -> usize {
        match class {
            IndexClass::Lorentz | IndexClass::Spinor => SPACETIME_DIM,
            IndexClass::Adjoint => self.algebra.adjoint_dim(),
            IndexClass::Fundamental => self.algebra.fundamental_dim(),
        }
    }

    /// Value of a constant tensor factor at concrete index values.
    pub fn constant_value(&self, f: &Factor, vals: &[u8]) -> Coeff {
        let u = |k: usize| vals[k] as usize;
        match f {
            Factor::Metric(a, b) => {
                if vals[0] != vals[1] {
                    Coeff::zero()
                } else if a.variance != b.variance {
                    Coeff::one()
                } else {
                    Coeff::int(metric_sign(vals[0]))
                }
            }
            Factor::Delta(..) => Coeff::int((vals[0] == vals[1]) as i64),
            Factor::Structure(..) => self.algebra.structure_constants().get(u(0), u(1), u(2)).clone(),
            Factor::Generator { rep, .. } => match self.algebra.generators(*rep) {
                Ok(g) => g[u(0)].get(u(1), u(2)).clone(),
                Err(_) => Coeff::zero(),
            },
            Factor::Gamma { mu, .. } => {
                let v = self.gammas[u(0)].get(u(1), u(2)).clone();
                if mu.variance == Variance::Down && metric_sign(vals[0]) < 0 {
                    -v
                } else {
                    v
                }
            }
            Factor::Gamma0 { .. } => self.gammas[0].get(u(0), u(1)).clone(),
            Factor::Select(s) => Coeff::int((s.value == vals[0]) as i64),
            _ => unreachable!("not a constant tensor"),
        }
    }

    fn check_occurrence(&self, o: &FieldOcc) -> Result<(), SymError> {
        let slots = o.field.slots();
        if slots.len() != o.indices.len() {
            return Err(SymError::IndexSignatureMismatch(format!(
                "{} expects {} indices, got {}",
                o.field.name(),
                slots.len(),
                o.indices.len()
            )));
        }
        for ((class, var), idx) in slots.iter().zip(&o.indices) {
            if *class != idx.class {
                return Err(SymError::IndexSignatureMismatch(format!("{o}: wrong index class")));
            }
            if *class == IndexClass::Fundamental && *var != idx.variance {
                return Err(SymError::MalformedIndex(format!("{o}: colour index has wrong variance")));
            }
        }
        if o.derivs.iter().any(|d| d.class != IndexClass::Lorentz) {
            return Err(SymError::MalformedIndex(format!("{o}: derivative index must be Lorentz")));
        }
        Ok(())
    }

    fn analyze(&self, t: &Term) -> Result<Vec<LabelInfo>, SymError> {
        let mut occ: BTreeMap<Label, Vec<(IndexClass, Variance)>> = BTreeMap::new();
        let mut order: Vec<Label> = Vec::new();
        let mut push = |l: &Label, c: IndexClass, v: Variance, order: &mut Vec<Label>| {
            let e = occ.entry(l.clone()).or_default();
            if e.is_empty() {
                order.push(l.clone());
            }
            e.push((c, v));
        };
        // constants first so that pruning happens early in the expansion
        for f in t.factors.iter().filter(|f| f.is_constant_tensor()) {
            match f {
                Factor::Select(s) => push(&s.label, s.class, s.variance, &mut order),
                other => {
                    for idx in other.indices() {
                        if let Some(l) = idx.label() {
                            push(l, idx.class, idx.variance, &mut order);
                        }
                    }
                }
            }
        }
        for f in t.factors.iter().filter(|f| !f.is_constant_tensor()) {
            if let Factor::Field(o) = f {
                self.check_occurrence(o)?;
            }
            for idx in f.indices() {
                if let Some(l) = idx.label() {
                    push(l, idx.class, idx.variance, &mut order);
                }
            }
        }
        let mut out = Vec::with_capacity(order.len());
        for l in order {
            let uses = &occ[&l];
            match uses.as_slice() {
                [(c, v)] => out.push(LabelInfo { label: l, class: *c, variance: *v, free: true }),
                [(c1, v1), (c2, v2)] => {
                    if c1 != c2 {
                        return Err(SymError::MalformedIndex(format!("index {l} used with two classes")));
                    }
                    if c1.has_variance() && v1 == v2 {
                        return Err(SymError::MalformedIndex(format!("dummy index {l} must appear once up and once down")));
                    }
                    out.push(LabelInfo { label: l, class: *c1, variance: *v1, free: false });
                }
                _ => {
                    return Err(SymError::MalformedIndex(format!("index {l} occurs {} times", uses.len())));
                }
            }
        }
        Ok(out)
    }

    /// Canonical form: derivatives distributed, every index expanded into
    /// components (free ones recorded as selectors), constant tensors
    /// evaluated, factors sorted with Grassmann signs, like terms collected.
    pub fn canonicalize(&self, e: &Expression) -> Result<Expression, SymError> {
        let e = e.distribute_derivatives();
        let mut acc: HashMap<Vec<Factor>, Coeff> = HashMap::new();
        let mut signature: Option<Vec<(Label, IndexClass, Variance)>> = None;
        for t in e.terms() {
            let labels = self.analyze(t)?;
            let mut sig: Vec<_> =
                labels.iter().filter(|l| l.free).map(|l| (l.label.clone(), l.class, l.variance)).collect();
            sig.sort();
            match &signature {
                None => signature = Some(sig),
                Some(s) if *s != sig => {
                    return Err(SymError::FreeIndexMismatch(format!(
                        "{} vs {}",
                        render_sig(s),
                        render_sig(&sig)
                    )))
                }
                _ => {}
            }
            self.expand_term(t, &labels, &mut acc);
        }
        let mut terms: Vec<Term> =
            acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(f, c)| Term::new(c, f)).collect();
        terms.sort_by(|a, b| a.factors.cmp(&b.factors));
        Ok(Expression::from_terms(terms))
    }

    /// Canonicalize `a − b` and test for zero.
    pub fn equal(&self, a: &Expression, b: &Expression) -> Result<bool, SymError> {
        Ok(self.canonicalize(&(a - b))?.is_zero())
    }

    fn expand_term(&self, t: &Term, labels: &[LabelInfo], acc: &mut HashMap<Vec<Factor>, Coeff>) {
        let pos = |l: &Label| labels.iter().position(|x| &x.label == l).expect("analysed label");
        let slot_ref = |idx: &Index| match &idx.slot {
            Slot::Value(v) => SlotRef::Fixed(*v),
            Slot::Label(l) => SlotRef::Var(pos(l)),
        };

        let mut base = t.coeff.clone();
        // (factor, slot refs, depth at which all its labels are bound)
        let mut consts: Vec<(&Factor, Vec<SlotRef>, usize)> = Vec::new();
        let mut rest: Vec<&Factor> = Vec::new();
        for f in &t.factors {
            if !f.is_constant_tensor() {
                rest.push(f);
                continue;
            }
            let refs: Vec<SlotRef> = match f {
                Factor::Select(s) => vec![SlotRef::Var(pos(&s.label))],
                other => other.indices().into_iter().map(slot_ref).collect(),
            };
            let ready = refs
                .iter()
                .filter_map(|r| match r {
                    SlotRef::Var(p) => Some(p + 1),
                    SlotRef::Fixed(_) => None,
                })
                .max()
                .unwrap_or(0);
            if ready == 0 {
                let vals: Vec<u8> = refs.iter().map(|r| if let SlotRef::Fixed(v) = r { *v } else { 0 }).collect();
                base *= &self.constant_value(f, &vals);
                if base.is_zero() {
                    return;
                }
            } else {
                consts.push((f, refs, ready));
            }
        }

        let ranges: Vec<usize> = labels.iter().map(|l| self.range(l.class)).collect();
        let mut by_depth: Vec<Vec<usize>> = vec![Vec::new(); labels.len() + 1];
        for (k, c) in consts.iter().enumerate() {
            by_depth[c.2].push(k);
        }
        let mut assign = vec![0u8; labels.len()];
        let ctx = ExpandCtx { kernel: self, labels, ranges: &ranges, consts: &consts, by_depth: &by_depth, rest: &rest };
        ctx.recurse(0, base, &mut assign, acc);
    }
}

fn render_sig(s: &[(Label, IndexClass, Variance)]) -> String {
    let parts: Vec<String> = s
        .iter()
        .map(|(l, c, v)| Index::new(*c, *v, Slot::Label(l.clone())).to_string())
        .collect();
    format!("{{{}}}", parts.join(","))
}

struct ExpandCtx<'a> {
    kernel: &'a Kernel,
    labels: &'a [LabelInfo],
    ranges: &'a [usize],
    consts: &'a [(&'a Factor, Vec<SlotRef>, usize)],
    by_depth: &'a [Vec<usize>],
    rest: &'a [&'a Factor],
}

impl ExpandCtx<'_> {
    fn resolve(&self, r: SlotRef, assign: &[u8]) -> u8 {
        match r {
            SlotRef::Fixed(v) => v,
            SlotRef::Var(p) => assign[p],
        }
    }

    fn recurse(&self, depth: usize, coeff: Coeff, assign: &mut Vec<u8>, acc: &mut HashMap<Vec<Factor>, Coeff>) {
        if depth == self.labels.len() {
            self.emit(coeff, assign, acc);
            return;
        }
        for v in 0..self.ranges[depth] {
            assign[depth] = v as u8;
            let mut c = coeff.clone();
            for &k in &self.by_depth[depth + 1] {
                let (f, refs, _) = &self.consts[k];
                let vals: Vec<u8> = refs.iter().map(|r| self.resolve(*r, assign)).collect();
                c *= &self.kernel.constant_value(f, &vals);
                if c.is_zero() {
                    break;
                }
            }
            if !c.is_zero() {
                self.recurse(depth + 1, c, assign, acc);
            }
        }
    }

    fn concrete(&self, idx: &Index, assign: &[u8]) -> u8 {
        match &idx.slot {
            Slot::Value(v) => *v,
            Slot::Label(l) => assign[self.labels.iter().position(|x| &x.label == l).unwrap()],
        }
    }

    fn emit(&self, mut coeff: Coeff, assign: &[u8], acc: &mut HashMap<Vec<Factor>, Coeff>) {
        let mut factors: Vec<Factor> = Vec::with_capacity(self.rest.len() + 2);
        let mut negate = false;
        for f in self.rest {
            match f {
                Factor::Field(o) => {
                    let mut indices = Vec::with_capacity(o.indices.len());
                    for ((class, storage), idx) in o.field.slots().iter().zip(&o.indices) {
                        let v = self.concrete(idx, assign);
                        if *class == IndexClass::Lorentz && idx.variance != *storage && metric_sign(v) < 0 {
                            negate = !negate;
                        }
                        indices.push(Index::new(*class, *storage, Slot::Value(v)));
                    }
                    let mut dv: Vec<u8> = Vec::with_capacity(o.derivs.len());
                    for d in &o.derivs {
                        let v = self.concrete(d, assign);
                        if d.variance == Variance::Up && metric_sign(v) < 0 {
                            negate = !negate;
                        }
                        dv.push(v);
                    }
                    dv.sort_unstable();
                    let derivs = dv.into_iter().map(|v| Index::new(IndexClass::Lorentz, Variance::Down, Slot::Value(v))).collect();
                    factors.push(Factor::Field(FieldOcc { field: o.field.clone(), indices, derivs }));
                }
                other => factors.push((*other).clone()),
            }
        }
        for (p, info) in self.labels.iter().enumerate() {
            if info.free {
                factors.push(Factor::Select(Selector {
                    label: info.label.clone(),
                    class: info.class,
                    variance: info.variance,
                    value: assign[p],
                }));
            }
        }
        if negate {
            coeff = -coeff;
        }
        let Some(sign) = sort_factors(&mut factors) else { return };
        if sign < 0 {
            coeff = -coeff;
        }
        match acc.get_mut(&factors) {
            Some(c) => *c += &coeff,
            None => {
                acc.insert(factors, coeff);
            }
        }
    }
}

/// Sort into canonical order; returns the Grassmann sign, or `None` when
/// an odd factor repeats (the product vanishes).
pub fn sort_factors(factors: &mut [Factor]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..factors.len() {
        let mut j = i;
        while j > 0 && factors[j - 1] > factors[j] {
            if factors[j - 1].is_odd() && factors[j].is_odd() {
                sign = -sign;
            }
            factors.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in factors.windows(2) {
        if w[0].is_odd() && w[0] == w[1] {
            return None;
        }
    }
    Some(sign)
}
