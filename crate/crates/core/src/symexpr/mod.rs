//! Indexed symbolic expressions over a fixed gauge group and spacetime.

pub mod expr;
pub mod factor;
pub mod gamma;
pub mod index;
pub mod kernel;
pub mod subst;

pub use expr::{Expression, Term};
pub use factor::{Factor, Field, FieldDecl, FieldOcc, FieldRank, Selector};
pub use gamma::gamma_reduce;
pub use index::{label, Index, IndexClass, Label, Slot, Variance};
pub use kernel::{dirac_gammas, metric_sign, sort_factors, Kernel, SPACETIME_DIM};
pub use subst::{append_factors, freshen, instantiate, splice, substitute};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymError {
    #[error("malformed index: {0}")]
    MalformedIndex(String),
    #[error("free index mismatch: {0}")]
    FreeIndexMismatch(String),
    #[error("parity mismatch for {0}")]
    ParityMismatch(String),
    #[error("index signature mismatch: {0}")]
    IndexSignatureMismatch(String),
    #[error("spinor wiring: {0}")]
    SpinorWiring(String),
}
