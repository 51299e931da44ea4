//! Exact Lie-algebra data for U(1) and SU(N).
//!
//! Generators are hermitian with `[T^a, T^b] = i f^{abc} T^c` and, in the
//! fundamental of SU(N), `tr(T^a T^b) = δ^{ab}/2`. Indices are 0-based.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{rat, Coeff};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("unsupported gauge group {0}")]
    UnsupportedGroup(String),
    #[error("representation {rep} is not supported for {group}")]
    UnsupportedRepresentation { group: String, rep: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    U1,
    SU(u8),
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::U1 => f.write_str("U(1)"),
            GroupKind::SU(n) => write!(f, "SU({n})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepKind {
    Trivial,
    Fundamental,
    Adjoint,
}

impl fmt::Display for RepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepKind::Trivial => "trivial",
            RepKind::Fundamental => "fundamental",
            RepKind::Adjoint => "adjoint",
        })
    }
}

/// Dense square matrix over ℚ(i, √3).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    data: Vec<Coeff>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![Coeff::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Coeff::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Coeff {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Coeff) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, k: &Coeff) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|a| a * k).collect() }
    }

    pub fn commutator(&self, o: &Matrix) -> Matrix {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> Coeff {
        (0..self.n).fold(Coeff::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn dagger(&self) -> Matrix {
        let mut out = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Coeff::is_zero)
    }
}

/// Totally antisymmetric structure constants `f^{abc}`, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    dim: usize,
    data: Vec<Coeff>,
}

impl StructureConstants {
    pub fn zeros(dim: usize) -> Self {
        StructureConstants { dim, data: vec![Coeff::zero(); dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &Coeff {
        &self.data[(a * self.dim + b) * self.dim + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: Coeff) {
        let d = self.dim;
        self.data[(a * d + b) * d + c] = v;
    }

    /// Nonzero entries in index order.
    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, usize, usize), &Coeff)> {
        let d = self.dim;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(move |(k, v)| ((k / (d * d), (k / d) % d, k % d), v))
    }
}

/// Exact algebra data for one gauge group.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    kind: GroupKind,
    f: StructureConstants,
    fundamental: Vec<Matrix>,
    adjoint: Vec<Matrix>,
}

impl LieAlgebra {
    pub fn new(kind: GroupKind) -> Result<Self, LieError> {
        match kind {
            GroupKind::U1 => Ok(LieAlgebra {
                kind,
                f: StructureConstants::zeros(1),
                fundamental: vec![Matrix::identity(1)],
                adjoint: vec![Matrix::zeros(1)],
            }),
            // Beyond SU(3) the diagonal generators need √6, √10, ... which
            // the coefficient field does not carry.
            GroupKind::SU(n @ 2..=3) => {
                let fundamental = gell_mann(n as usize);
                let f = structure_from_generators(&fundamental);
                let adjoint = adjoint_generators(&f);
                Ok(LieAlgebra { kind, f, fundamental, adjoint })
            }
            other => Err(LieError::UnsupportedGroup(other.to_string())),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.kind, GroupKind::U1)
    }

    /// Number of generators; U(1) counts as one (trivial adjoint).
    pub fn adjoint_dim(&self) -> usize {
        self.f.dim
    }

    pub fn fundamental_dim(&self) -> usize {
        match self.kind {
            GroupKind::U1 => 1,
            GroupKind::SU(n) => n as usize,
        }
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.f
    }

    pub fn generators(&self, rep: RepKind) -> Result<&[Matrix], LieError> {
        match (self.kind, rep) {
            (_, RepKind::Fundamental) => Ok(&self.fundamental),
            (GroupKind::SU(_), RepKind::Adjoint) => Ok(&self.adjoint),
            (g, r) => Err(LieError::UnsupportedRepresentation { group: g.to_string(), rep: r.to_string() }),
        }
    }

    pub fn rep_dim(&self, rep: RepKind) -> usize {
        match rep {
            RepKind::Trivial => 1,
            RepKind::Fundamental => self.fundamental_dim(),
            RepKind::Adjoint => self.adjoint_dim(),
        }
    }

    pub fn verify(&self, rep: RepKind) -> Result<AlgebraCheck, LieError> {
        let gens = self.generators(rep)?;
        let normalize = matches!(self.kind, GroupKind::SU(_)) && rep == RepKind::Fundamental;
        let traceless = matches!(self.kind, GroupKind::SU(_));
        Ok(verify_algebra(&self.f, gens, normalize, traceless))
    }
}

/// Generalised Gell-Mann matrices divided by two; reproduces the Pauli
/// ordering for N = 2 and the standard λ₁…λ₈ ordering for N = 3.
fn gell_mann(n: usize) -> Vec<Matrix> {
    let half = Coeff::frac(1, 2);
    let mut gens = Vec::new();
    for k in 1..n {
        for j in 0..k {
            let mut s = Matrix::zeros(n);
            s.set(j, k, half.clone());
            s.set(k, j, half.clone());
            gens.push(s);
            let mut a = Matrix::zeros(n);
            a.set(j, k, Coeff::i().scale(&rat(-1, 2)));
            a.set(k, j, Coeff::i().scale(&rat(1, 2)));
            gens.push(a);
        }
        // diag(1,…,1,−k,0,…)/sqrt(2k(k+1)); k = 1 gives 1/2, k = 2 gives 1/(2√3)
        let norm = match k {
            1 => Coeff::frac(1, 2),
            2 => Coeff::sqrt3().scale(&rat(1, 6)),
            _ => unreachable!("restricted to SU(2), SU(3)"),
        };
        let mut d = Matrix::zeros(n);
        for i in 0..k {
            d.set(i, i, norm.clone());
        }
        d.set(k, k, norm.scale(&rat(-(k as i64), 1)));
        gens.push(d);
    }
    gens
}

/// `f^{abc} = −2i tr([T^a, T^b] T^c)` under the ½ normalisation.
fn structure_from_generators(gens: &[Matrix]) -> StructureConstants {
    let d = gens.len();
    let mut f = StructureConstants::zeros(d);
    let k = Coeff::i().scale(&rat(-2, 1));
    for a in 0..d {
        for b in 0..d {
            let comm = gens[a].commutator(&gens[b]);
            if comm.is_zero() {
                continue;
            }
            for c in 0..d {
                let v = &k * &comm.mul(&gens[c]).trace();
                f.set(a, b, c, v);
            }
        }
    }
    f
}

/// `(T^a_adj)_{bc} = −i f^{abc}`.
pub fn adjoint_generators(f: &StructureConstants) -> Vec<Matrix> {
    let d = f.dim();
    let mi = -Coeff::i();
    (0..d)
        .map(|a| {
            let mut m = Matrix::zeros(d);
            for b in 0..d {
                for c in 0..d {
                    m.set(b, c, &mi * f.get(a, b, c));
                }
            }
            m
        })
        .collect()
}

/// First identity violated by a set of algebra data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotAntisymmetric { a: usize, b: usize, c: usize },
    Jacobi { a: usize, b: usize, c: usize, d: usize },
    Commutator { a: usize, b: usize, row: usize, col: usize },
    Normalization { a: usize, b: usize },
    NotTraceless { a: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAntisymmetric { a, b, c } => write!(f, "f^{{{a}{b}{c}}} not totally antisymmetric"),
            Violation::Jacobi { a, b, c, d } => write!(f, "Jacobi identity fails at (a,b,c,d) = ({a},{b},{c},{d})"),
            Violation::Commutator { a, b, row, col } => {
                write!(f, "[T^{a},T^{b}] != i f^{{{a}{b}c}} T^c at entry ({row},{col})")
            }
            Violation::Normalization { a, b } => write!(f, "tr(T^{a} T^{b}) != delta/2"),
            Violation::NotTraceless { a } => write!(f, "tr(T^{a}) != 0"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraCheck {
    pub identities_checked: usize,
    pub violation: Option<Violation>,
}

impl AlgebraCheck {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Brute-force check of antisymmetry, Jacobi, commutation relations and
/// (optionally) trace normalisation / tracelessness.
pub fn verify_algebra(f: &StructureConstants, gens: &[Matrix], normalize: bool, traceless: bool) -> AlgebraCheck {
    let d = f.dim();
    let mut checked = 0;
    let fail = |v, n| AlgebraCheck { identities_checked: n, violation: Some(v) };

    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                checked += 1;
                let v = f.get(a, b, c);
                let perms = [f.get(b, a, c), f.get(a, c, b), f.get(c, b, a)];
                if perms.iter().any(|p| !(*p + v).is_zero()) {
                    return fail(Violation::NotAntisymmetric { a, b, c }, checked);
                }
            }
        }
    }

    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for dd in 0..d {
                    checked += 1;
                    let mut sum = Coeff::zero();
                    for e in 0..d {
                        sum += &(f.get(a, b, e) * f.get(e, c, dd));
                        sum += &(f.get(b, c, e) * f.get(e, a, dd));
                        sum += &(f.get(c, a, e) * f.get(e, b, dd));
                    }
                    if !sum.is_zero() {
                        return fail(Violation::Jacobi { a, b, c, d: dd }, checked);
                    }
                }
            }
        }
    }

    let i = Coeff::i();
    for a in 0..d {
        for b in 0..d {
            checked += 1;
            let mut rhs = Matrix::zeros(gens[a].dim());
            for (c, g) in gens.iter().enumerate() {
                let k = &i * f.get(a, b, c);
                if !k.is_zero() {
                    rhs = rhs.add(&g.scale(&k));
                }
            }
            let diff = gens[a].commutator(&gens[b]).sub(&rhs);
            if let Some(pos) = diff.data.iter().position(|x| !x.is_zero()) {
                let n = diff.dim();
                return fail(Violation::Commutator { a, b, row: pos / n, col: pos % n }, checked);
            }
        }
    }

    if normalize {
        for a in 0..d {
            for b in 0..d {
                checked += 1;
                let expect = if a == b { Coeff::frac(1, 2) } else { Coeff::zero() };
                if gens[a].mul(&gens[b]).trace() != expect {
                    return fail(Violation::Normalization { a, b }, checked);
                }
            }
        }
    }
    if traceless {
        for (a, g) in gens.iter().enumerate() {
            checked += 1;
            if !g.trace().is_zero() {
                return fail(Violation::NotTraceless { a }, checked);
            }
        }
    }
    AlgebraCheck { identities_checked: checked, violation: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn levi_civita(a: usize, b: usize, c: usize) -> i64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
            _ => 0,
        }
    }

    #[test]
    fn u1_is_abelian_with_unit_charge() {
        let g = LieAlgebra::new(GroupKind::U1).unwrap();
        assert!(g.structure_constants().nonzero().next().is_none());
        assert_eq!(g.generators(RepKind::Fundamental).unwrap()[0], Matrix::identity(1));
        assert!(g.generators(RepKind::Adjoint).is_err());
    }

    #[test]
    fn su2_structure_constants_are_levi_civita() {
        let g = LieAlgebra::new(GroupKind::SU(2)).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(*g.structure_constants().get(a, b, c), Coeff::int(levi_civita(a, b, c)));
                }
            }
        }
    }

    #[test]
    fn su2_adjoint_generators() {
        let g = LieAlgebra::new(GroupKind::SU(2)).unwrap();
        let adj = g.generators(RepKind::Adjoint).unwrap();
        for (a, m) in adj.iter().enumerate() {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(*m.get(b, c), &-Coeff::i() * &Coeff::int(levi_civita(a, b, c)));
                }
            }
        }
        assert!(g.verify(RepKind::Adjoint).unwrap().passed());
    }

    #[test]
    fn su4_is_rejected() {
        assert!(matches!(LieAlgebra::new(GroupKind::SU(4)), Err(LieError::UnsupportedGroup(_))));
    }

    #[test]
    fn corrupted_entry_breaks_antisymmetry() {
        let g = LieAlgebra::new(GroupKind::SU(2)).unwrap();
        let mut f = g.structure_constants().clone();
        f.set(0, 1, 2, Coeff::int(-1));
        let r = verify_algebra(&f, g.generators(RepKind::Fundamental).unwrap(), true, true);
        assert_eq!(r.violation, Some(Violation::NotAntisymmetric { a: 0, b: 1, c: 2 }));
    }

    #[test]
    fn hermitian_generators() {
        for n in [2, 3] {
            let g = LieAlgebra::new(GroupKind::SU(n)).unwrap();
            for t in g.generators(RepKind::Fundamental).unwrap() {
                assert_eq!(&t.dagger(), t);
            }
        }
    }
}
