//! Exact scalar arithmetic and certified numerics.

pub mod angle;
pub mod factor;
pub mod gaussian;
pub mod interval;
pub mod logmod;
pub mod symbolic;

pub use angle::{certified_round_to_integer, ArgumentSum, Indeterminate, PrecisionBudget};
pub use factor::{factor_gaussian, factor_integer, GaussianFactorization, GaussianPrime};
pub use gaussian::GaussianRational;
pub use interval::{ComplexInterval, Interval};
pub use logmod::{log_modulus, LogModulusVector};
pub use symbolic::{SymPoly, Symbol};
