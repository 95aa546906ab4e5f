//! Concurrence of bipartite pure states and bounds on the concurrence of
//! superpositions `αΨ + βΦ`.
//!
//! A state on `ℂⁿ ⊗ ℂᵐ` is stored as its `n × m` coefficient matrix `ψ`, read
//! row-major from the amplitude vector. Everything is built on a small dense
//! complex Hermitian eigensolver in [`linalg`].

pub mod bounds;
pub mod generators;
pub mod harness;
pub mod linalg;
pub mod states;

pub use bounds::{
    BoundOptions, BoundReport, BoundsError, LowerBoundForm, Theorem, TheoremSelector,
};
pub use harness::{CampaignConfig, CampaignKind, CampaignSummary, HarnessError, TrialRecord};
pub use linalg::{ComplexMatrix, LinalgError};
pub use num_complex::Complex64;
pub use states::{PureState, StateError, SuperpositionInput};
