//! Exponential Riesz bases on finite unions of intervals: Paley–Wiener
//! calculus, lattice constructions, generating functions, Gram sections and
//! explicit biorthogonal systems.

pub mod biorth;
pub mod error;
pub mod genfun;
pub mod gram;
pub mod intervals;
pub mod lattice;
pub mod pw;

pub use error::{Error, Result};
pub use genfun::{GenFunctionSpec, TailPolicy};
pub use gram::{DualSystem, GramMatrix};
pub use intervals::{Interval, IntervalUnion};
pub use lattice::{FrequencySet, PerturbedLattice};
pub use pw::{ExpSum, ExpTerm, ExtSum, C64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
