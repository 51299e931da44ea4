use std::fmt;
use std::sync::Arc;

/// Interned index or symbol name.
pub type Label = Arc<str>;

pub fn label(s: &str) -> Label {
    Arc::from(s)
}

/// Index families. Fundamental indices use variance to distinguish the
/// fundamental (`Up`) from the antifundamental (`Down`) slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexClass {
    Lorentz,
    Adjoint,
    Fundamental,
    Spinor,
}

impl IndexClass {
    /// Whether contraction pairs must have opposite variance.
    pub fn has_variance(self) -> bool {
        matches!(self, IndexClass::Lorentz | IndexClass::Fundamental)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variance {
    Up,
    Down,
    Neutral,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
            Variance::Neutral => Variance::Neutral,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Label(Label),
    Value(u8),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index {
    pub class: IndexClass,
    pub variance: Variance,
    pub slot: Slot,
}

impl Index {
    pub fn new(class: IndexClass, variance: Variance, slot: Slot) -> Self {
        let variance = if class.has_variance() { variance } else { Variance::Neutral };
        Index { class, variance, slot }
    }

    pub fn label(&self) -> Option<&Label> {
        match &self.slot {
            Slot::Label(l) => Some(l),
            Slot::Value(_) => None,
        }
    }

    pub fn value(&self) -> Option<u8> {
        match self.slot {
            Slot::Value(v) => Some(v),
            Slot::Label(_) => None,
        }
    }

    pub fn with_variance(&self, variance: Variance) -> Index {
        Index::new(self.class, variance, self.slot.clone())
    }

    pub fn raised(&self) -> Index {
        self.with_variance(Variance::Up)
    }

    pub fn lowered(&self) -> Index {
        self.with_variance(Variance::Down)
    }
}

/// Lower Lorentz index.
pub fn lo(s: &str) -> Index {
    Index::new(IndexClass::Lorentz, Variance::Down, Slot::Label(label(s)))
}

/// Upper Lorentz index.
pub fn up(s: &str) -> Index {
    Index::new(IndexClass::Lorentz, Variance::Up, Slot::Label(label(s)))
}

pub fn lo_val(v: u8) -> Index {
    Index::new(IndexClass::Lorentz, Variance::Down, Slot::Value(v))
}

pub fn up_val(v: u8) -> Index {
    Index::new(IndexClass::Lorentz, Variance::Up, Slot::Value(v))
}

pub fn adj(s: &str) -> Index {
    Index::new(IndexClass::Adjoint, Variance::Neutral, Slot::Label(label(s)))
}

pub fn adj_val(v: u8) -> Index {
    Index::new(IndexClass::Adjoint, Variance::Neutral, Slot::Value(v))
}

pub fn spin(s: &str) -> Index {
    Index::new(IndexClass::Spinor, Variance::Neutral, Slot::Label(label(s)))
}

pub fn spin_val(v: u8) -> Index {
    Index::new(IndexClass::Spinor, Variance::Neutral, Slot::Value(v))
}

/// Fundamental (colour) index.
pub fn fund(s: &str) -> Index {
    Index::new(IndexClass::Fundamental, Variance::Up, Slot::Label(label(s)))
}

/// Antifundamental (conjugate colour) index.
pub fn afund(s: &str) -> Index {
    Index::new(IndexClass::Fundamental, Variance::Down, Slot::Label(label(s)))
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variance {
            Variance::Up => f.write_str("^")?,
            Variance::Down => f.write_str("_")?,
            Variance::Neutral => {}
        }
        match &self.slot {
            Slot::Label(l) => f.write_str(l),
            Slot::Value(v) => write!(f, "{v}"),
        }
    }
}
