//! Predicates and matrices built only from the world function: Gram
//! matrices, linear dependence, collinearity, parallelism and equivalence.
//!
//! Everything is compared in squared form, `(v1.v2)^2` against
//! `|v1|^2 |v2|^2` plus a sign condition, so no square root of a negative
//! squared length is ever taken.

mod euclideaness;

pub use euclideaness::{
    euclideaness_check, Condition1, Condition2, Condition3, Condition4, EuclideanessReport,
    SampleConfig,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{approx_eq, PairVector, Point, WorldFunctionSpec};

/// Ordered point tuple `P0, ..., Pn` (`n >= 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Skeleton {
    points: Vec<Point>,
}

impl Skeleton {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid(format!(
                "a skeleton needs at least 2 points, got {}",
                points.len()
            )));
        }
        let dim = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        Ok(Self { points })
    }

    /// Order `n`: one less than the number of points.
    pub fn order(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn vector(&self, i: usize, k: usize) -> PairVector {
        PairVector {
            origin: self.points[i].clone(),
            end: self.points[k].clone(),
        }
    }

    pub(crate) fn check(&self, spec: &WorldFunctionSpec) -> Result<()> {
        self.points.iter().try_for_each(|p| spec.check(p))
    }
}

impl TryFrom<Vec<Point>> for Skeleton {
    type Error = Error;
    fn try_from(points: Vec<Point>) -> Result<Self> {
        Skeleton::new(points)
    }
}

impl From<Skeleton> for Vec<Point> {
    fn from(s: Skeleton) -> Self {
        s.points
    }
}

/// `g_ik = (P0Pi . P0Pk) = sigma(P0,Pi) + sigma(P0,Pk) - sigma(Pi,Pk)`.
pub fn gram_matrix(spec: &WorldFunctionSpec, skeleton: &Skeleton) -> Result<DMatrix<f64>> {
    skeleton.check(spec)?;
    Ok(gram_matrix_raw(spec, skeleton.points()))
}

pub(crate) fn gram_matrix_raw(spec: &WorldFunctionSpec, pts: &[Point]) -> DMatrix<f64> {
    let n = pts.len() - 1;
    let p0 = pts[0].coords();
    let s0: Vec<f64> = pts[1..].iter().map(|p| spec.sigma_raw(p0, p.coords())).collect();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = 2.0 * s0[i];
        for k in (i + 1)..n {
            let v = s0[i] + s0[k] - spec.sigma_raw(pts[i + 1].coords(), pts[k + 1].coords());
            g[(i, k)] = v;
            g[(k, i)] = v;
        }
    }
    g
}

/// Gram determinant `F_n`.
pub fn gram_determinant(spec: &WorldFunctionSpec, skeleton: &Skeleton) -> Result<f64> {
    Ok(gram_matrix(spec, skeleton)?.determinant())
}

/// `|F_n| <= tol * scale^n` with `scale = max |g_ik|`.
pub fn is_linearly_dependent(spec: &WorldFunctionSpec, skeleton: &Skeleton, tol: f64) -> Result<bool> {
    let g = gram_matrix(spec, skeleton)?;
    Ok(dependent_gram(&g, tol))
}

pub(crate) fn dependent_gram(g: &DMatrix<f64>, tol: f64) -> bool {
    let scale = g.amax();
    if scale == 0.0 {
        return true;
    }
    g.determinant().abs() <= tol * scale.powi(g.nrows() as i32)
}

fn check_pair(spec: &WorldFunctionSpec, v1: &PairVector, v2: &PairVector) -> Result<()> {
    for p in [&v1.origin, &v1.end, &v2.origin, &v2.end] {
        spec.check(p)?;
    }
    Ok(())
}

/// The three numbers every two-vector predicate needs.
#[derive(Debug, Clone, Copy)]
pub struct PairInvariants {
    pub len1: f64,
    pub len2: f64,
    pub product: f64,
}

pub fn pair_invariants(spec: &WorldFunctionSpec, v1: &PairVector, v2: &PairVector) -> Result<PairInvariants> {
    check_pair(spec, v1, v2)?;
    Ok(PairInvariants {
        len1: spec.squared_length(v1)?,
        len2: spec.squared_length(v2)?,
        product: spec.scalar_product(v1, v2)?,
    })
}

/// `(v1.v2)^2 = |v1|^2 |v2|^2`.
pub fn is_collinear(spec: &WorldFunctionSpec, v1: &PairVector, v2: &PairVector, tol: f64) -> Result<bool> {
    let inv = pair_invariants(spec, v1, v2)?;
    Ok(approx_eq(inv.product * inv.product, inv.len1 * inv.len2, tol))
}

/// Residual `(v.w)^2 - |v|^2 |w|^2` of the collinearity condition.
pub fn collinearity_residual(spec: &WorldFunctionSpec, v: &PairVector, w: &PairVector) -> Result<f64> {
    let inv = pair_invariants(spec, v, w)?;
    Ok(inv.product * inv.product - inv.len1 * inv.len2)
}

fn timelike_or_null(inv: &PairInvariants) -> Result<()> {
    for l in [inv.len1, inv.len2] {
        if l < 0.0 {
            return Err(Error::SpacelikeUnsupported(l));
        }
    }
    Ok(())
}

fn signed_parallel(inv: &PairInvariants, sign: f64, tol: f64) -> bool {
    let scale = 1f64.max(inv.len1.abs()).max(inv.len2.abs());
    let sign_ok = sign * inv.product >= -tol * scale;
    sign_ok && approx_eq(inv.product * inv.product, inv.len1 * inv.len2, tol)
}

pub fn is_parallel(spec: &WorldFunctionSpec, v1: &PairVector, v2: &PairVector, tol: f64) -> Result<bool> {
    let inv = pair_invariants(spec, v1, v2)?;
    timelike_or_null(&inv)?;
    Ok(signed_parallel(&inv, 1.0, tol))
}

pub fn is_antiparallel(spec: &WorldFunctionSpec, v1: &PairVector, v2: &PairVector, tol: f64) -> Result<bool> {
    let inv = pair_invariants(spec, v1, v2)?;
    timelike_or_null(&inv)?;
    Ok(signed_parallel(&inv, -1.0, tol))
}

/// Parallel and of equal length. For two null vectors this reduces to
/// `(v1.v2) = 0`.
pub fn is_equivalent(spec: &WorldFunctionSpec, v1: &PairVector, v2: &PairVector, tol: f64) -> Result<bool> {
    let inv = pair_invariants(spec, v1, v2)?;
    timelike_or_null(&inv)?;
    Ok(equivalent_invariants(&inv, tol))
}

pub(crate) fn equivalent_invariants(inv: &PairInvariants, tol: f64) -> bool {
    if !approx_eq(inv.len1, inv.len2, tol) {
        return false;
    }
    if approx_eq(inv.len1, 0.0, tol) && approx_eq(inv.len2, 0.0, tol) {
        return approx_eq(inv.product, 0.0, tol);
    }
    signed_parallel(inv, 1.0, tol)
}

/// Residuals of the two equivalence equations in the smooth form used by
/// the solvers: `|w|^2 - |v|^2` and `(v.w) - |v|^2`.
pub fn equivalence_residuals(spec: &WorldFunctionSpec, v: &PairVector, w: &PairVector) -> Result<[f64; 2]> {
    let inv = pair_invariants(spec, v, w)?;
    Ok([inv.len2 - inv.len1, inv.product - inv.len1])
}
