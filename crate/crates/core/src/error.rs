//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two spectrum entries closer than the merge tolerance. Coalescing
    /// inputs must be supplied as one entry with a multiplicity.
    #[error("duplicate eigenvalue: entries {0} and {1} are closer than the merge tolerance")]
    DuplicateEigenvalue(f64, f64),

    #[error("multiplicity must be >= 1")]
    NonPositiveMultiplicity,

    /// Input violates the canonical ordering and sorting was not permitted.
    #[error("order violation: values are not in canonical order")]
    OrderViolation,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Dirichlet (or other distribution) parameter out of range.
    #[error("parameter must be positive, got {0}")]
    NonPositiveParameter(f64),

    #[error("root finder failed to converge: {0}")]
    ConvergenceFailure(String),

    /// A weight is below the floor where the secular pole structure
    /// degenerates and no reduction applies.
    #[error("degenerate weight configuration: {0}")]
    DegenerateWeight(String),

    /// Roots do not interlace the spectrum as the case requires.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// A residue that must be real came out with a large imaginary part.
    #[error("non-real residue: |imag| = {0}")]
    NonRealResidue(f64),

    /// HCIZ arguments too close together for the determinant formula.
    #[error("near-confluent arguments: min gap {0} below 1e-8")]
    NearConfluent(f64),

    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),

    #[error("empty sample")]
    EmptySample,

    #[error("quadrature tolerance not reached: error estimate {0}")]
    TolUnreached(f64),
}
