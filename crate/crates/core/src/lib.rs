pub mod defect;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod ness;
pub mod scalar;
pub mod su2k;
pub mod symbolic;
pub mod virasoro;

pub use error::{Error, Result};
pub use scalar::{Measured, Rational, Scalar};
