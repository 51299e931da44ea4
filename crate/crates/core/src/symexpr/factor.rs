use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::liealg::RepKind;

use super::expr::Expression;
use super::index::{label, Index, IndexClass, Label, Variance};

/// Position of a field in the canonical factor order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldRank {
    Boson,
    Conjugate,
    Fermion,
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FieldDecl {
    pub name: Label,
    pub rank: FieldRank,
    pub odd: bool,
    /// Storage class and variance of each index slot.
    pub slots: Vec<(IndexClass, Variance)>,
}

/// Shared handle to a declared field symbol.
#[derive(Clone, Debug)]
pub struct Field(Arc<FieldDecl>);

impl Field {
    pub fn new(name: &str, rank: FieldRank, odd: bool, slots: Vec<(IndexClass, Variance)>) -> Self {
        Field(Arc::new(FieldDecl { name: label(name), rank, odd, slots }))
    }

    pub fn boson(name: &str, slots: Vec<(IndexClass, Variance)>) -> Self {
        Field::new(name, FieldRank::Boson, false, slots)
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn is_odd(&self) -> bool {
        self.0.odd
    }

    pub fn rank(&self) -> FieldRank {
        self.0.rank
    }

    pub fn slots(&self) -> &[(IndexClass, Variance)] {
        &self.0.slots
    }

    /// Occurrence with the given indices and no derivatives.
    pub fn at(&self, indices: Vec<Index>) -> FieldOcc {
        FieldOcc { field: self.clone(), indices, derivs: Vec::new() }
    }
}

impl PartialEq for Field {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.rank == o.0.rank && self.0.name == o.0.name)
    }
}
impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.rank.hash(h);
        self.0.name.hash(h);
    }
}

impl Ord for Field {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.0.rank, &self.0.name).cmp(&(o.0.rank, &o.0.name))
    }
}
impl PartialOrd for Field {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// A field with index slots and a multiset of partial derivatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldOcc {
    pub field: Field,
    pub indices: Vec<Index>,
    pub derivs: Vec<Index>,
}

impl FieldOcc {
    pub fn d(mut self, idx: Index) -> Self {
        self.derivs.push(idx);
        self
    }

    pub fn order(&self) -> usize {
        self.derivs.len()
    }
}

/// Component selector `sel(μ = m)`: carries a free index of a component
/// table. Behaves like a unit basis vector under contraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selector {
    pub label: Label,
    pub class: IndexClass,
    pub variance: Variance,
    pub value: u8,
}

impl Selector {
    pub fn index(&self) -> Index {
        Index::new(self.class, self.variance, super::index::Slot::Label(self.label.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    Metric(Index, Index),
    Delta(Index, Index),
    Structure(Index, Index, Index),
    Generator { rep: RepKind, adj: Index, row: Index, col: Index },
    Gamma { mu: Index, row: Index, col: Index },
    Gamma0 { row: Index, col: Index },
    Coupling(Label),
    Select(Selector),
    Field(FieldOcc),
    /// Formal derivative of a product, removed by `distribute_derivatives`.
    Deriv { index: Index, inner: Box<Expression> },
}

impl Factor {
    pub fn coupling(name: &str) -> Factor {
        Factor::Coupling(label(name))
    }

    pub fn metric(a: Index, b: Index) -> Factor {
        if a <= b {
            Factor::Metric(a, b)
        } else {
            Factor::Metric(b, a)
        }
    }

    pub fn is_odd(&self) -> bool {
        match self {
            Factor::Field(o) => o.field.is_odd(),
            Factor::Deriv { inner, .. } => inner.is_odd(),
            _ => false,
        }
    }

    /// True for numeric tensors evaluated away during canonicalisation.
    pub fn is_constant_tensor(&self) -> bool {
        matches!(
            self,
            Factor::Metric(..)
                | Factor::Delta(..)
                | Factor::Structure(..)
                | Factor::Generator { .. }
                | Factor::Gamma { .. }
                | Factor::Gamma0 { .. }
                | Factor::Select(_)
        )
    }

    fn rank(&self) -> u8 {
        match self {
            Factor::Metric(..) => 0,
            Factor::Delta(..) => 1,
            Factor::Structure(..) => 2,
            Factor::Generator { .. } => 3,
            Factor::Gamma { .. } => 4,
            Factor::Gamma0 { .. } => 5,
            Factor::Coupling(_) => 6,
            Factor::Select(_) => 7,
            Factor::Field(_) => 8,
            Factor::Deriv { .. } => 9,
        }
    }

    /// Every index carried by the factor, derivative indices included.
    pub fn indices(&self) -> Vec<&Index> {
        match self {
            Factor::Metric(a, b) | Factor::Delta(a, b) => vec![a, b],
            Factor::Structure(a, b, c) => vec![a, b, c],
            Factor::Generator { adj, row, col, .. } => vec![adj, row, col],
            Factor::Gamma { mu, row, col } => vec![mu, row, col],
            Factor::Gamma0 { row, col } => vec![row, col],
            Factor::Coupling(_) | Factor::Select(_) | Factor::Deriv { .. } => vec![],
            Factor::Field(o) => o.indices.iter().chain(&o.derivs).collect(),
        }
    }

    pub(crate) fn indices_mut(&mut self) -> Vec<&mut Index> {
        match self {
            Factor::Metric(a, b) | Factor::Delta(a, b) => vec![a, b],
            Factor::Structure(a, b, c) => vec![a, b, c],
            Factor::Generator { adj, row, col, .. } => vec![adj, row, col],
            Factor::Gamma { mu, row, col } => vec![mu, row, col],
            Factor::Gamma0 { row, col } => vec![row, col],
            Factor::Coupling(_) | Factor::Select(_) | Factor::Deriv { .. } => vec![],
            Factor::Field(o) => o.indices.iter_mut().chain(o.derivs.iter_mut()).collect(),
        }
    }
}

impl Ord for Factor {
    fn cmp(&self, o: &Self) -> Ordering {
        use Factor::*;
        match (self, o) {
            (Metric(a, b), Metric(c, d)) | (Delta(a, b), Delta(c, d)) => (a, b).cmp(&(c, d)),
            (Structure(a, b, c), Structure(d, e, f)) => (a, b, c).cmp(&(d, e, f)),
            (
                Generator { rep, adj, row, col },
                Generator { rep: r2, adj: a2, row: w2, col: c2 },
            ) => (rep, adj, row, col).cmp(&(r2, a2, w2, c2)),
            (Gamma { mu, row, col }, Gamma { mu: m2, row: r2, col: c2 }) => (mu, row, col).cmp(&(m2, r2, c2)),
            (Gamma0 { row, col }, Gamma0 { row: r2, col: c2 }) => (row, col).cmp(&(r2, c2)),
            (Coupling(a), Coupling(b)) => a.cmp(b),
            (Select(a), Select(b)) => a.cmp(b),
            (Field(a), Field(b)) => a.cmp(b),
            (Deriv { index: i, inner: a }, Deriv { index: j, inner: b }) => {
                i.cmp(j).then_with(|| a.to_string().cmp(&b.to_string()))
            }
            _ => self.rank().cmp(&o.rank()),
        }
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn join(idx: &[&Index]) -> String {
    idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FieldOcc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.derivs.is_empty() {
            write!(f, "d({})", join(&self.derivs.iter().collect::<Vec<_>>()))?;
        }
        write!(f, "{}({})", self.field.name(), join(&self.indices.iter().collect::<Vec<_>>()))
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Metric(a, b) => write!(f, "eta({a},{b})"),
            Factor::Delta(a, b) => write!(f, "delta({a},{b})"),
            Factor::Structure(a, b, c) => write!(f, "f({a},{b},{c})"),
            Factor::Generator { rep, adj, row, col } => {
                let tag = match rep {
                    RepKind::Trivial => "triv",
                    RepKind::Fundamental => "fund",
                    RepKind::Adjoint => "adj",
                };
                write!(f, "T[{tag}]({adj},{row},{col})")
            }
            Factor::Gamma { mu, row, col } => write!(f, "gamma({mu},{row},{col})"),
            Factor::Gamma0 { row, col } => write!(f, "gamma0({row},{col})"),
            Factor::Coupling(c) => f.write_str(c),
            Factor::Select(s) => write!(f, "sel({}={})", s.index(), s.value),
            Factor::Field(o) => write!(f, "{o}"),
            Factor::Deriv { index, inner } => {
                let body = inner.terms().iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" + ");
                write!(f, "d({index})[{body}]")
            }
        }
    }
}
