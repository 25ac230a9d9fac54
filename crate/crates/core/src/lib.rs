//! Dirichlet eigenvalues of unit-volume boxes.
//!
//! Eigenvalues of `(0,a1) x (0,a2) x (0,a3)` are `pi² sum i_j²/a_j²` over
//! positive integer triples, so the counting function is a lattice-point
//! count in an ellipsoid. The crate counts those points exactly, checks
//! the inequalities that bound them, and searches for the box minimising
//! the k-th eigenvalue.

pub mod arith;
pub mod bounds;
pub mod cuboid;
pub mod lattice;
pub mod optimizer;
pub mod report;
pub mod spectrum;
pub mod verify;

pub use cuboid::{Cuboid, EllipsoidSpec, GeometryError};
pub use spectrum::{SpectralPoint, SpectrumError, SpectrumLimits};
