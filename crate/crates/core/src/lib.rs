//! Inversive-distance circle packings on closed triangulated surfaces.
//!
//! The cone-angle map of a packing is the gradient of a concave energy in
//! log-radius coordinates. This crate evaluates that map, its Hessian and
//! the energy, solves for radii with prescribed cone angles by damped
//! Newton iteration, and ships numerical certificates for the underlying
//! per-triangle identities.

// `!(x < bound)` is deliberate throughout: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod geometry;
pub mod inversion;
pub mod jacobian;
pub mod mesh;
pub mod quadrature;
pub mod roots;
pub mod solver;
pub mod verify;

pub use geometry::{
    AngleTriple, Geometry, GeometryError, LengthTriple, LogRadiusTriple, RadiusTriple, TriangleWeights,
};
pub use jacobian::Jacobian3;
