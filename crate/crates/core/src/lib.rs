//! Piecewise-linear finite elements on degenerating triangulations.
//!
//! The crate generates band-structured meshes (single bands, Babuška-Aziz
//! grids, subdivided bands, clusters), solves the Poisson problem with P1
//! elements, measures H¹ errors and evaluates band quantities that govern
//! whether the method converges. For meshes violating the maximum angle
//! condition it builds the modified Lagrange interpolant and the bump-based
//! correction function that restores an O(h) interpolation estimate.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod fem;
pub mod geometry;
pub mod interp;
pub mod mesh;
pub mod meshgen;
pub mod quadrature;
mod serde_float;
pub mod solution;
pub mod study;
pub mod verify;

use thiserror::Error;

pub use geometry::{Point2, TriangleGeom, Vec2};
pub use mesh::{MeshClassification, Triangulation};
pub use solution::ManufacturedSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Mesh(#[from] mesh::MeshError),
    #[error(transparent)]
    MeshGen(#[from] meshgen::MeshGenError),
    #[error(transparent)]
    Interp(#[from] interp::InterpError),
    #[error(transparent)]
    Fem(#[from] fem::FemError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error("invalid study configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
