//! Bunching certificates, holonomies, typicality, irreducibility and
//! Lyapunov exponents.

mod holonomy;
mod irreducibility;
mod lyapunov;
mod margin;
mod typicality;

pub use holonomy::{equivariance_defect, holonomy, holonomy_approximant, HolonomyApprox, Side};
pub use irreducibility::{burnside_irreducibility, IrreducibilityReport};
pub use lyapunov::{lyapunov_spectrum, LyapunovReport};
pub use margin::{bunching_margin, BunchingMode, BunchingReport};
pub use typicality::{typicality_report, TypicalityLevel, TypicalityReport, GENERAL_POSITION_TOL, PINCHING_GAP_TOL};
