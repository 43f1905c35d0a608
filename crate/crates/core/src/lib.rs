//! Rank-one randomized Horn problems.
//!
//! Samples eigenvalues of four rank-one random-matrix ensembles by two
//! independent routes and evaluates their closed-form densities:
//!
//! * additive Hermitian perturbation `A + b xx†`,
//! * co-rank-1 projection `(I - xx†) A (I - xx†)`,
//! * the real-symmetric variants of both,
//! * the multiplicative unitary product `A W diag(e^{iφ},1,…,1) W†`.
//!
//! The *secular* route draws Dirichlet weights and root-finds the rational
//! secular equation; the *oracle* route builds the actual random matrix and
//! diagonalizes it. [`stats`] provides the machinery (KS tests, adaptive
//! quadrature, round-trip and Jacobian checks) that ties the two routes to
//! the closed forms in [`densities`].

// `!(x > y)` guards are deliberate throughout: they fail closed on NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod error;
pub mod oracle;
pub mod randsrc;
pub mod secular;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
pub use randsrc::{Field, RngState};
pub use spectra::{AngularSpectrum, CaseTag, EigenSample, SpectrumSpec, WeightVector};
pub use stats::TestReport;
