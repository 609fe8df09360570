//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by system construction, validation and the numerical
/// operations built on top of them.
#[derive(Debug, Clone, Error)]
pub enum FrameError {
    /// Matrix or vector shape is inconsistent with its entry count.
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// A NaN or infinite entry was found where finite data is required.
    #[error("non-finite entry: {0}")]
    NonFinite(String),

    /// Every column was dropped during orthonormalization; the zero
    /// subspace is not a valid subspace of a relay system.
    #[error("all columns degenerate under orthonormalization (tol {tol})")]
    AllColumnsDegenerate { tol: f64 },

    /// Symmetry tolerance violated for an operation requiring a
    /// symmetric matrix.
    #[error("matrix not symmetric: max |A - A^T| = {deviation}")]
    NotSymmetric { deviation: f64 },

    /// Positive definiteness required but not satisfied.
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// Dimensions of two objects that must agree do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A stored basis fails the orthonormality tolerance.
    #[error("basis not orthonormal: {0}")]
    NonOrthonormalBasis(String),

    /// A local system carries no inner atoms.
    #[error("empty inner space: {0}")]
    EmptyInnerSpace(String),

    /// A measure weight or an alpha weight is zero, negative or non-finite.
    #[error("non-positive weight: {0}")]
    NonPositiveWeight(String),

    /// Atom ids must be unique within their space.
    #[error("duplicate id: {0}")]
    DuplicateId(String),

    /// A measure space must contain at least one atom.
    #[error("empty measure space")]
    EmptySpace,

    /// A plain-frame constructor received the zero vector.
    #[error("zero vector at position {0}")]
    ZeroVector(usize),

    /// A coefficient family does not match the index structure of the
    /// system it is used with.
    #[error("coefficient family index mismatch: {0}")]
    IndexMismatch(String),

    /// The operation requires a frame (lower bound above the frame
    /// tolerance) and the system is not one.
    #[error("not a frame: {0}")]
    NotAFrame(String),

    /// Two systems do not share the index structure required to compare
    /// their analysis/synthesis operators.
    #[error("incompatible systems: {0}")]
    IncompatibleSystems(String),

    /// Perturbation comparison requires the systems to agree on every
    /// component except the inner subspaces.
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),

    /// Perturbation constants outside their admissible ranges.
    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    /// A transform operator that must be invertible is numerically singular.
    #[error("singular transform: {0}")]
    SingularQ(String),

    /// A supplied local frame does not span its local space.
    #[error("local frame deficient: {0}")]
    LocalFrameDeficient(String),

    /// The requested transform data is absent from the system file.
    #[error("missing transforms: {0}")]
    MissingTransforms(String),

    /// System file could not be parsed (position info included).
    #[error("parse error: {0}")]
    Parse(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, FrameError>;
