//! Lightning virtual element method on convex polygonal meshes.
//!
//! The local basis of a k=1 virtual element space consists of harmonic
//! functions with piecewise linear boundary traces. Instead of working with
//! them implicitly through projectors and a stabilisation term, this crate
//! fits each basis function by a rational approximation with poles clustered
//! exponentially close to the element corners, so the discrete functions are
//! known pointwise and the Galerkin system is assembled from the broken
//! bilinear form directly.
//!
//! Modules follow the pipeline: [`geometry`] builds centroidal Voronoi
//! meshes of the unit square, [`quadrature`] integrates over polygons and
//! edges, [`lightning`] fits the rational basis, [`assembly`] produces local
//! and global systems (with [`vanilla`] as the projector/stabilisation
//! baseline), and [`analyze`] solves and measures errors and rates.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analyze;
pub mod assembly;
pub mod error;
pub mod geometry;
pub mod lightning;
pub mod problems;
pub mod quadrature;
pub mod vanilla;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
