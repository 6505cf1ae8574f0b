//! Numerical tools for the Pekar functional, its Hessian and truncated
//! Fröhlich Hamiltonians.

pub mod bounds;
pub mod error;
pub mod fock;
pub mod hessian;
pub mod linalg;
pub mod par;
pub mod pekar;
pub mod radial;

pub use error::{Error, Result};
