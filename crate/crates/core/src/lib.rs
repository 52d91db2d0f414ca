//! Semi-Galerkin solver for the 2D incompressible MHD equations on the unit square.
//!
//! The velocity lives in a truncated discrete Stokes eigenbasis, the magnetic field is
//! advanced as a full field by a Picard-iterated implicit step, and time-dependent
//! Dirichlet data for the magnetic field is handled through harmonic and parabolic lifts.

pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod fastsolve;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod lifting;
pub mod ops;
pub mod spectral;

pub use error::{MhdError, Result};
pub use grid::{Grid, ScalarField, ScalarWalls, VectorField, WallValues};
