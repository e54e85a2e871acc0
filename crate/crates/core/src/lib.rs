//! Time-domain bounds on the antiplane response of two-phase viscoelastic
//! composites.
//!
//! The averaged response to a step loading is linear in the residues of the
//! pole/residue representation of the effective tensor, so for fixed poles
//! the extremal response is a small linear program. The outer problem over
//! pole positions (and orientations) is searched numerically.

pub mod error;
pub mod geometry;
pub mod lp;
pub mod optimizer;
pub mod phase;
pub mod spectral;
pub mod sum_rules;

pub use error::{Error, Result};
pub use phase::{CompositePair, PhaseModel, Side};
pub use spectral::{SpectralConfig, StepLoading};
pub use sum_rules::InfoSet;
