//! Finite-scale symbolic dynamics: shift spaces, orbit tracing, entropy and
//! pressure estimators, empirical measures, and the construction of invariant
//! sets with prescribed intermediate entropy.

pub mod construction;
pub mod entropy;
pub mod error;
pub mod measures;
pub mod pressure;
pub mod shift;
pub mod suites;
pub mod tracing;

pub use entropy::EpsScale;
pub use error::{Error, Result};
pub use shift::{ShiftSpace, SpaceSpec, Word};
