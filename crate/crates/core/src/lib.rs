//! Meshfree derivative operators on point clouds.
//!
//! The crate builds discretization-corrected particle strength exchange
//! (DC PSE) collocation operators on arbitrary node sets and uses them to
//! recover gradients, strain and stress from nodal displacement fields.
//!
//! ```text
//! PointCloud ──► SpatialIndex ──► StencilOperator ──► apply(field)
//!                                      │
//!                  displacement ──► recover ──► strain / stress / von Mises
//! ```
//!
//! Modules:
//! - [`pointcloud`]: node storage, k-d tree neighbor queries, spacing estimates
//! - [`operator`]: monomial bases, moment systems, kernel solves, stencils
//! - [`elasticity`]: isotropic linear elastic recovery
//! - [`benchmarks`]: analytic oracles, node generators, error metrics, studies
//! - [`io`]: CSV / Gmsh node ingestion, field and report output

pub mod benchmarks;
pub mod elasticity;
pub mod error;
pub mod io;
pub mod operator;
pub mod pointcloud;

pub use error::{Error, Result};
pub use operator::{MultiIndex, OperatorSpec, StencilOperator};
pub use pointcloud::{NeighborSet, PointCloud, SpatialIndex};
