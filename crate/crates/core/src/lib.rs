//! Subadditive thermodynamic formalism for matrix cocycles over subshifts of
//! finite type.

pub mod bunching;
pub mod cocycle;
pub mod error;
pub mod linalg;
pub mod mixing;
pub mod point;
pub mod potential;
pub mod sft;
pub mod thermo;

pub use cocycle::FiniteRangeCocycle;
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use point::PointSpec;
pub use sft::{Sft, Symbol, Word};
