//! Laboratory for the Laplace double-layer operator on non-smooth boundaries.
//!
//! The crate builds the counterexample geometries on which piecewise-constant
//! Galerkin compressions of the double-layer operator stay large: sawtooth
//! graphs, a self-similar graph accumulating at the origin, extruded strip
//! panels, and the open-book polyhedra. On top of those it assembles the
//! Galerkin matrices, computes numerical ranges, norms and Toeplitz symbols,
//! and runs a finite-dimensional Galerkin stability lab.

pub mod assembly;
pub mod error;
pub mod galerkin_lab;
pub mod geometry2d;
pub mod geometry3d;
pub mod kernels;
pub mod matrixanalysis;
pub mod quadrature;
pub mod toeplitz;
pub mod weighted;

pub use error::{Error, Result};
