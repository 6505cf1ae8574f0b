//! Radial grids, special functions and operators for spherically symmetric
//! problems.

pub mod ball;
pub mod bessel;
pub mod fourier;
pub mod grid;
pub mod ops;
pub mod quadrature;

pub use ball::{BallBasis, BallSector};
pub use fourier::{fourier_radial, inverse_fourier_radial, RadialTransform};
pub use grid::{GridKind, RadialFunction, RadialGrid};
pub use ops::{
    apply_radial_laplacian, inverse_square_convolution, newton_potential, Boundary,
    ConvolvedField,
};
