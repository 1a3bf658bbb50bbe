//! Solution sets of equivalence systems.
//!
//! A closed-form family is a chain of displacements applied from a fixed
//! origin; each displacement may carry a free parameter (a direction on a
//! sphere or a real number). Numeric solves produce enumerated families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::halton::{halton, halton_direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    ClosedForm,
    Enumerated,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamDomain {
    /// Unit vector in `R^{dim+1}` (the sphere `S^dim`).
    Sphere { dim: usize },
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeParameter {
    pub name: String,
    pub domain: ParamDomain,
}

/// One step of a closed-form family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Displacement {
    Fixed {
        delta: Vec<f64>,
    },
    /// `time * e0 + radius * sum_k q_k e_k` with `(e0, e1, ...)` the columns
    /// of `frame` (row-major) and `q` a unit vector.
    Shell {
        frame: Vec<Vec<f64>>,
        time: f64,
        radius: f64,
    },
    /// `(offset + t) * direction` for real `t`.
    Ray {
        direction: Vec<f64>,
        offset: f64,
    },
}

impl Displacement {
    pub fn dim(&self) -> usize {
        match self {
            Displacement::Fixed { delta } => delta.len(),
            Displacement::Shell { frame, .. } => frame.len(),
            Displacement::Ray { direction, .. } => direction.len(),
        }
    }

    pub fn parameter(&self, step: usize) -> Option<FreeParameter> {
        match self {
            Displacement::Fixed { .. } => None,
            Displacement::Shell { frame, .. } => Some(FreeParameter {
                name: format!("q{}", step + 1),
                domain: ParamDomain::Sphere {
                    dim: frame.len().saturating_sub(2),
                },
            }),
            Displacement::Ray { .. } => Some(FreeParameter {
                name: format!("alpha{}", step + 1),
                domain: ParamDomain::Real,
            }),
        }
    }

    pub fn dof(&self) -> usize {
        match self {
            Displacement::Fixed { .. } => 0,
            Displacement::Shell { frame, .. } => frame.len().saturating_sub(2),
            Displacement::Ray { .. } => 1,
        }
    }

    /// The displacement vector for parameter value `param` (ignored for
    /// fixed steps).
    pub fn apply(&self, param: Option<&[f64]>) -> Result<Vec<f64>> {
        match self {
            Displacement::Fixed { delta } => Ok(delta.clone()),
            Displacement::Shell { frame, time, radius } => {
                let n = frame.len();
                let q = param.ok_or_else(|| Error::Invalid("shell step needs a direction".into()))?;
                if q.len() != n - 1 {
                    return Err(Error::DimensionMismatch {
                        expected: n - 1,
                        got: q.len(),
                    });
                }
                let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(qn > 0.0 && qn.is_finite()) {
                    return Err(Error::Invalid("direction must be a nonzero finite vector".into()));
                }
                Ok((0..n)
                    .map(|i| {
                        let mut x = time * frame[i][0];
                        for k in 1..n {
                            x += radius * q[k - 1] / qn * frame[i][k];
                        }
                        x
                    })
                    .collect())
            }
            Displacement::Ray { direction, offset } => {
                let t = param
                    .and_then(|p| p.first().copied())
                    .ok_or_else(|| Error::Invalid("ray step needs a real parameter".into()))?;
                Ok(direction.iter().map(|d| (offset + t) * d).collect())
            }
        }
    }

    pub(crate) fn approx_same(&self, other: &Displacement, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs());
        let close_v = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y));
        match (self, other) {
            (Displacement::Fixed { delta: a }, Displacement::Fixed { delta: b }) => close_v(a, b),
            (
                Displacement::Shell { frame: fa, time: ta, radius: ra },
                Displacement::Shell { frame: fb, time: tb, radius: rb },
            ) => {
                close(*ta, *tb)
                    && close(*ra, *rb)
                    && fa.len() == fb.len()
                    && fa.iter().zip(fb).all(|(x, y)| close(x[0], y[0]))
            }
            (
                Displacement::Ray { direction: da, offset: oa },
                Displacement::Ray { direction: db, offset: ob },
            ) => close_v(da, db) && close(*oa, *ob),
            _ => false,
        }
    }
}

/// Parametric or enumerated solution set of an equivalence system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub kind: FamilyKind,
    /// The fixed point the family is built from (`Q0`, `R0`, `P0`).
    pub origin: Point,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Displacement>,
    /// Enumerated solutions; each is the list of solved points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solutions: Vec<Vec<Point>>,
    pub free_parameters: Vec<FreeParameter>,
    pub dof: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_dependent: Option<bool>,
}

impl SolutionFamily {
    pub fn closed_form(origin: Point, steps: Vec<Displacement>) -> Self {
        let free_parameters = steps.iter().enumerate().filter_map(|(i, s)| s.parameter(i)).collect();
        let dof = steps.iter().map(Displacement::dof).sum();
        Self {
            kind: FamilyKind::ClosedForm,
            origin,
            steps,
            solutions: Vec::new(),
            free_parameters,
            dof,
            order_dependent: None,
        }
    }

    pub fn enumerated(origin: Point, solutions: Vec<Vec<Point>>, dof: usize) -> Self {
        Self {
            kind: if solutions.is_empty() {
                FamilyKind::Empty
            } else {
                FamilyKind::Enumerated
            },
            origin,
            steps: Vec::new(),
            solutions,
            free_parameters: Vec::new(),
            dof,
            order_dependent: None,
        }
    }

    pub fn empty(origin: Point) -> Self {
        Self::enumerated(origin, Vec::new(), 0)
    }

    pub fn is_empty(&self) -> bool {
        self.kind == FamilyKind::Empty
    }

    /// Points of one member. Closed form: one point per step, `params`
    /// holding one entry per free parameter in order. Enumerated: `params`
    /// may hold a single index (default 0).
    pub fn representative(&self, params: &[Vec<f64>]) -> Result<Vec<Point>> {
        match self.kind {
            FamilyKind::Empty => Err(Error::Invalid("empty family has no representatives".into())),
            FamilyKind::Enumerated => {
                let idx = params.first().and_then(|p| p.first()).map_or(0, |x| *x as usize);
                self.solutions
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| Error::Invalid(format!("solution index {idx} out of range")))
            }
            FamilyKind::ClosedForm => {
                let needed = self.free_parameters.len();
                if params.len() != needed {
                    return Err(Error::Invalid(format!(
                        "family has {needed} free parameters, got {}",
                        params.len()
                    )));
                }
                let mut it = params.iter();
                let mut cur = self.origin.clone();
                let mut out = Vec::with_capacity(self.steps.len());
                for s in &self.steps {
                    let p = match s {
                        Displacement::Fixed { .. } => None,
                        _ => it.next().map(Vec::as_slice),
                    };
                    cur = Point::try_new(cur.offset(&s.apply(p)?).coords().to_vec())?;
                    out.push(cur.clone());
                }
                Ok(out)
            }
        }
    }

    /// Deterministic parameter values covering the family.
    pub fn sample_params(&self, count: usize) -> Vec<Vec<Vec<f64>>> {
        match self.kind {
            FamilyKind::Empty => Vec::new(),
            FamilyKind::Enumerated => (0..self.solutions.len()).map(|i| vec![vec![i as f64]]).collect(),
            FamilyKind::ClosedForm => {
                if self.free_parameters.is_empty() {
                    return vec![Vec::new()];
                }
                (0..count as u64)
                    .map(|i| {
                        self.free_parameters
                            .iter()
                            .enumerate()
                            .map(|(k, p)| match p.domain {
                                ParamDomain::Sphere { dim } => {
                                    halton_direction(i * 7 + k as u64 * 1_000_003, dim + 1)
                                }
                                ParamDomain::Real => {
                                    vec![4.0 * halton(i + 1 + k as u64 * 977, 1)[0] - 2.0]
                                }
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    pub fn sample_representatives(&self, count: usize) -> Vec<Vec<Point>> {
        self.sample_params(count)
            .iter()
            .filter_map(|p| self.representative(p).ok())
            .collect()
    }

    /// Coordinate distance from `x` to the nearest final point of a
    /// single-parameter-step family (or to the nearest enumerated final
    /// point).
    pub fn distance_to(&self, x: &Point) -> Result<f64> {
        match self.kind {
            FamilyKind::Empty => Ok(f64::INFINITY),
            FamilyKind::Enumerated => Ok(self
                .solutions
                .iter()
                .filter_map(|s| s.last())
                .map(|p| p.distance(x))
                .fold(f64::INFINITY, f64::min)),
            FamilyKind::ClosedForm => {
                // Fold all fixed steps into the base; allow at most one
                // parametric step.
                let mut base = self.origin.coords().to_vec();
                let mut param_step = None;
                for s in &self.steps {
                    match s {
                        Displacement::Fixed { delta } => {
                            for (b, d) in base.iter_mut().zip(delta) {
                                *b += d;
                            }
                        }
                        other => {
                            if param_step.replace(other).is_some() {
                                return Err(Error::Invalid(
                                    "distance_to supports at most one parametric step".into(),
                                ));
                            }
                        }
                    }
                }
                let rel: Vec<f64> = x.coords().iter().zip(&base).map(|(a, b)| a - b).collect();
                let nearest = match param_step {
                    None => vec![0.0; rel.len()],
                    Some(Displacement::Shell { frame, .. }) => {
                        // components of rel in the frame: solve via the
                        // inverse Lorentz frame eta F^T eta
                        let n = frame.len();
                        let mut y = vec![0.0; n];
                        for k in 0..n {
                            let mut acc = 0.0;
                            for i in 0..n {
                                let g = if i == 0 { 1.0 } else { -1.0 };
                                acc += g * frame[i][k] * rel[i];
                            }
                            y[k] = if k == 0 { acc } else { -acc };
                        }
                        let q: Vec<f64> = y[1..].to_vec();
                        let q = if q.iter().all(|v| *v == 0.0) {
                            let mut e = vec![0.0; n - 1];
                            e[0] = 1.0;
                            e
                        } else {
                            q
                        };
                        param_step.unwrap().apply(Some(&q))?
                    }
                    Some(Displacement::Ray { direction, offset }) => {
                        let dd: f64 = direction.iter().map(|d| d * d).sum();
                        let t = rel.iter().zip(direction).map(|(a, b)| a * b).sum::<f64>() / dd - offset;
                        param_step.unwrap().apply(Some(&[t]))?
                    }
                    Some(Displacement::Fixed { .. }) => unreachable!(),
                };
                Ok(rel
                    .iter()
                    .zip(&nearest)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
    }

    #[test]
    fn shell_representatives_and_distance() {
        let fam = SolutionFamily::closed_form(
            Point::origin(4),
            vec![Displacement::Shell {
                frame: identity(4),
                time: 1.0,
                radius: 0.5,
            }],
        );
        assert_eq!(fam.dof, 2);
        let r = fam.representative(&[vec![0.0, 2.0, 0.0]]).unwrap();
        assert_eq!(r[0].coords(), &[1.0, 0.0, 0.5, 0.0]);
        assert!(fam.distance_to(&r[0]).unwrap() < 1e-15);
        let off = Point::from([1.0, 0.0, 0.7, 0.0]);
        assert!((fam.distance_to(&off).unwrap() - 0.2).abs() < 1e-12);
        for rep in fam.sample_representatives(10) {
            assert!(fam.distance_to(&rep[0]).unwrap() < 1e-12);
        }
    }

    #[test]
    fn ray_family() {
        let fam = SolutionFamily::closed_form(
            Point::from([1.0, 1.0, 0.0, 0.0]),
            vec![Displacement::Ray {
                direction: vec![1.0, 1.0, 0.0, 0.0],
                offset: 1.0,
            }],
        );
        assert_eq!(fam.dof, 1);
        let r = fam.representative(&[vec![0.7]]).unwrap();
        assert_eq!(r[0].coords(), &[2.7, 2.7, 0.0, 0.0]);
        assert!(fam.distance_to(&r[0]).unwrap() < 1e-15);
    }

    #[test]
    fn wrong_parameter_count() {
        let fam = SolutionFamily::closed_form(Point::origin(2), vec![Displacement::Fixed { delta: vec![1.0, 0.0] }]);
        assert!(fam.representative(&[vec![1.0]]).is_err());
        assert_eq!(fam.representative(&[]).unwrap()[0].coords(), &[1.0, 0.0]);
    }
}
