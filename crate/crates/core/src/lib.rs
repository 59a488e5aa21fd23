//! Exact Poincaré–Dulac normal forms for commuting families of diffeomorphism
//! germs over the Gaussian rationals.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactnum`]: rationals, Gaussian rationals, Gaussian-integer
//!   factorization, log-modulus coordinates and certified interval evaluation.
//! * [`series`]: truncated multivariate power series.
//! * [`germ`]: germs fixing the origin and commuting families.
//! * [`lattice`] and [`feasibility`]: integer lattices and exact rational
//!   linear programming.
//! * [`resonance`]: relation lattices, Ω and resonant sets.
//! * [`classify`]: deciders with re-checkable certificates.
//! * [`normalform`]: simultaneous normalization, first integrals and the
//!   integrable normal form certificate, plus the real-case transforms.
//!
//! All algebra is generic over the [`Scalar`] trait; the concrete aliases
//! below cover the two coefficient fields in use.

#![allow(clippy::needless_range_loop)]

pub mod classify;
pub mod error;
pub mod exactnum;
pub mod feasibility;
pub mod germ;
pub mod lattice;
pub mod linalg;
pub mod normalform;
pub mod resonance;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use exactnum::gaussian::GaussianRational;
pub use scalar::{Rational, Scalar};
pub use series::{MultiIndex, TruncatedSeries};

pub type Series = TruncatedSeries<GaussianRational>;
pub type RealSeries = TruncatedSeries<Rational>;
pub type Germ = germ::Germ<GaussianRational>;
pub type RealGerm = germ::Germ<Rational>;
pub type Family = germ::Family<GaussianRational>;
pub type RealFamily = germ::Family<Rational>;

