//! Solving `v eqv w` and the derived constructions: closed-form families in
//! the distorted space-time, a general multi-start numeric solver for
//! skeletons, and multivariant vector sum / scalar multiplication.

mod arithmetic;
mod closed_form;
mod family;
mod numeric;

pub use arithmetic::{scalar_multiply, vector_sum, MultiplyVersion, SumOrder};
pub use closed_form::{
    equivalent_family, scaled_displacement, solve_equivalent_null, solve_equivalent_timelike, TimelikeCase,
    TimelikeSolution,
};
pub use family::{Displacement, FamilyKind, FreeParameter, ParamDomain, SolutionFamily};
pub use numeric::{
    solve_skeleton_equivalence, ExistenceReport, ExistenceVerdict, NumericFindings, SolverConfig,
};
