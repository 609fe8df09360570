//! Numerical workbench for discretized relay fusion frame systems in
//! finite-dimensional real Hilbert spaces.
//!
//! A relay system couples an outer family of weighted subspaces `W_w` of the
//! ambient space with operators `Lambda_w` into local spaces `K_w`, each
//! carrying its own weighted inner family of subspaces `V_{w,v}`. This crate
//! builds the analysis / synthesis / frame operators of such systems,
//! computes optimal frame bounds, reconstructs vectors through the inverse
//! frame operator, constructs global, local and canonical duals and Parseval
//! tightenings, and checks the transform and perturbation bounds of the
//! theory as executable predicates.
//!
//! Everything is plain dense `f64` arithmetic with fixed summation orders,
//! so results are bit-reproducible across runs.

pub mod analysis;
pub mod duality;
pub mod error;
pub mod format;
pub mod measure;
pub mod model;
pub mod numerics;
pub mod ops;
pub mod perturbation;

#[cfg(feature = "testkit")]
pub mod testkit;

#[cfg(test)]
pub(crate) mod fixtures;

pub use error::{FrameError, Result};
pub use measure::{DiscreteMeasureSpace, MeasureAtom};
pub use model::{InnerAtom, LocalSystem, RelaySystem, Subspace};
pub use numerics::{DenseMatrix, Vector};
pub use ops::{CoefficientFamily, FrameOperatorHandle};
