//! World-function geometry.
//!
//! Every geometric statement here is expressed through a single function
//! `sigma(P, Q)` (half the squared interval). Euclidean, Minkowski and the
//! distorted Minkowski space-time (`sigma_M + lambda0^2` on timelike
//! separations) are supported. On top of `sigma` the crate builds vector
//! predicates, multivariant equivalence solving, skeleton/envelope objects,
//! Monte-Carlo broken world lines and a 1-D ensemble hydrodynamics stepper.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod ensemble;
pub mod equivalence;
pub mod error;
pub mod geometry;
pub mod halton;
pub mod lorentz;
pub mod objects;
pub mod scene;
pub mod solver;
pub mod vector_algebra;
pub mod world_chain;

pub use error::{Error, Result};
pub use geometry::{approx_eq, GeometryKind, PairVector, Point, WorldFunctionSpec, DEFAULT_TOL};
pub use ensemble::{EnsembleConfig, EnsembleState, Grid};
pub use equivalence::{SolutionFamily, SolverConfig};
pub use objects::{ElementaryObject, ObjectKind};
pub use scene::Scene;
pub use vector_algebra::Skeleton;
pub use world_chain::{ChainConfig, ChainState, ChainStatistics};
