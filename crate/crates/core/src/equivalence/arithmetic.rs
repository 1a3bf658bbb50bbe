//! Multivariant vector sum and multiplication by a real number.

use serde::{Deserialize, Serialize};

use super::closed_form::scaled_displacement;
use super::family::{Displacement, SolutionFamily};
use crate::error::{Error, Result};
use crate::geometry::{PairVector, Point, WorldFunctionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumOrder {
    /// `R0R1 eqv v1`, then `R1R2 eqv v2`.
    #[serde(rename = "12")]
    FirstSecond,
    #[serde(rename = "21")]
    SecondFirst,
}

impl std::str::FromStr for SumOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "12" => Ok(SumOrder::FirstSecond),
            "21" => Ok(SumOrder::SecondFirst),
            _ => Err(Error::Invalid(format!("order must be 12 or 21, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiplyVersion {
    /// Parallel (antiparallel for negative `alpha`) with length `|alpha| |v|`,
    /// also at `alpha = 0`.
    A,
    /// As `A`, except that `alpha = 0` gives the point vector `P0P0`.
    B,
}

impl std::str::FromStr for MultiplyVersion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(MultiplyVersion::A),
            "B" | "b" => Ok(MultiplyVersion::B),
            _ => Err(Error::Invalid(format!("version must be A or B, got {s:?}"))),
        }
    }
}

fn probe_params(step: &Displacement) -> Vec<Option<Vec<f64>>> {
    match step {
        Displacement::Fixed { .. } => vec![None],
        Displacement::Shell { frame, .. } => {
            let m = frame.len() - 1;
            let mut out = Vec::new();
            for k in 0..m {
                for sgn in [1.0, -1.0] {
                    let mut e = vec![0.0; m];
                    e[k] = sgn;
                    out.push(Some(e));
                }
            }
            out
        }
        Displacement::Ray { .. } => [-1.0, 0.0, 1.0].iter().map(|t| Some(vec![*t])).collect(),
    }
}

fn chain(spec: &WorldFunctionSpec, first: &PairVector, second: &PairVector, r0: &Point) -> Result<Vec<Displacement>> {
    let a = scaled_displacement(spec, first, r0, 1.0)?;
    // The second step may only depend on the first through its origin;
    // it is accepted when every probed intermediate point yields the same
    // displacement.
    let mut second_step: Option<Displacement> = None;
    for p in probe_params(&a) {
        let r1 = r0.offset(&a.apply(p.as_deref())?);
        let b = scaled_displacement(spec, second, &r1, 1.0)?;
        match &second_step {
            None => second_step = Some(b),
            Some(prev) if prev.approx_same(&b, 1e-9) => {}
            Some(_) => {
                return Err(Error::NoClosedForm(
                    "the second summand's family varies with the first one's free parameter".into(),
                ))
            }
        }
    }
    Ok(vec![a, second_step.expect("at least one probe")])
}

fn same_multiset(x: &[Displacement], y: &[Displacement]) -> bool {
    // Two-step families compose commutatively, so compare as multisets.
    let mut used = vec![false; y.len()];
    x.len() == y.len()
        && x.iter().all(|a| {
            if let Some(i) = (0..y.len()).find(|&i| !used[i] && a.approx_same(&y[i], 1e-9)) {
                used[i] = true;
                true
            } else {
                false
            }
        })
}

fn fold_fixed(steps: &[Displacement]) -> Option<Vec<f64>> {
    let mut acc: Option<Vec<f64>> = None;
    for s in steps {
        match s {
            Displacement::Fixed { delta } => {
                let a = acc.get_or_insert_with(|| vec![0.0; delta.len()]);
                for (x, d) in a.iter_mut().zip(delta) {
                    *x += d;
                }
            }
            _ => return None,
        }
    }
    acc
}

/// `R0R2 = v1 + v2`: the family of `(R1, R2)` with the summands laid head
/// to tail from `R0` in the requested order. `order_dependent` reports
/// whether the opposite order yields a different family.
pub fn vector_sum(
    spec: &WorldFunctionSpec,
    v1: &PairVector,
    v2: &PairVector,
    r0: &Point,
    order: SumOrder,
) -> Result<SolutionFamily> {
    let (first, second) = match order {
        SumOrder::FirstSecond => (v1, v2),
        SumOrder::SecondFirst => (v2, v1),
    };
    let steps = chain(spec, first, second, r0)?;
    let other = chain(spec, second, first, r0);
    let order_dependent = other.ok().map(|o| match (fold_fixed(&steps), fold_fixed(&o)) {
        (Some(a), Some(b)) => !a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9 * 1f64.max(x.abs())),
        _ => !same_multiset(&steps, &o),
    });
    let mut fam = SolutionFamily::closed_form(r0.clone(), steps);
    fam.order_dependent = order_dependent;
    Ok(fam)
}

/// `P0P1 eqv (alpha v)`.
pub fn scalar_multiply(
    spec: &WorldFunctionSpec,
    v: &PairVector,
    alpha: f64,
    p0: &Point,
    version: MultiplyVersion,
) -> Result<SolutionFamily> {
    if !alpha.is_finite() {
        return Err(Error::Invalid(format!("alpha = {alpha} must be finite")));
    }
    let len = spec.squared_length(v)?;
    if len < 0.0 {
        return Err(Error::SpacelikeUnsupported(len));
    }
    spec.check(p0)?;
    if alpha == 0.0 && version == MultiplyVersion::B {
        return Ok(SolutionFamily::closed_form(
            p0.clone(),
            vec![Displacement::Fixed {
                delta: vec![0.0; spec.n],
            }],
        ));
    }
    let disp = scaled_displacement(spec, v, p0, alpha)?;
    Ok(SolutionFamily::closed_form(p0.clone(), vec![disp]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector_algebra::{is_antiparallel, is_equivalent, is_parallel};

    #[test]
    fn euclidean_sum_is_coordinate_addition() {
        let spec = WorldFunctionSpec::euclidean(3);
        let v1 = PairVector::new([0.0, 0.0, 0.0], [1.0, 2.0, 0.0]);
        let v2 = PairVector::new([5.0, 5.0, 5.0], [5.0, 4.0, 6.0]);
        let r0 = Point::from([1.0, 1.0, 1.0]);
        let fam = vector_sum(&spec, &v1, &v2, &r0, SumOrder::FirstSecond).unwrap();
        assert_eq!(fam.dof, 0);
        assert_eq!(fam.order_dependent, Some(false));
        let r = fam.representative(&[]).unwrap();
        assert_eq!(r[1].coords(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn euclidean_additive_inverse() {
        let spec = WorldFunctionSpec::euclidean(2);
        let v1 = PairVector::new([0.0, 0.0], [1.0, 3.0]);
        let r0 = Point::from([0.5, 0.5]);
        let fam = vector_sum(&spec, &v1, &v1.reversed(), &r0, SumOrder::FirstSecond).unwrap();
        assert_eq!(fam.representative(&[]).unwrap()[1], r0);
    }

    #[test]
    fn distorted_sum_has_four_dof() {
        let spec = WorldFunctionSpec::distorted_lambda(0.1);
        let v1 = PairVector::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]);
        let v2 = PairVector::new([0.0; 4], [1.2, 0.3, 0.0, 0.0]);
        let r0 = Point::from([10.0, 0.0, 0.0, 0.0]);
        let fam = vector_sum(&spec, &v1, &v2, &r0, SumOrder::FirstSecond).unwrap();
        assert_eq!(fam.dof, 4);
        for r in fam.sample_representatives(16) {
            assert!(is_equivalent(&spec, &PairVector::new(r0.clone(), r[0].clone()), &v1, 1e-9).unwrap());
            assert!(is_equivalent(&spec, &PairVector::new(r[0].clone(), r[1].clone()), &v2, 1e-9).unwrap());
        }
    }

    #[test]
    fn scaling() {
        let spec = WorldFunctionSpec::distorted_lambda(0.1);
        let v = PairVector::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]);
        let p0 = Point::from([3.0, 1.0, 0.0, 0.0]);
        let b0 = scalar_multiply(&spec, &v, 0.0, &p0, MultiplyVersion::B).unwrap();
        assert_eq!(b0.representative(&[]).unwrap()[0], p0);

        let two = scalar_multiply(&spec, &v, 2.0, &p0, MultiplyVersion::A).unwrap();
        assert_eq!(two.dof, 2);
        for r in two.sample_representatives(12) {
            let w = PairVector::new(p0.clone(), r[0].clone());
            assert!((spec.squared_length(&w).unwrap() - 4.08).abs() < 1e-9);
            assert!(is_parallel(&spec, &v, &w, 1e-9).unwrap());
        }
        let neg = scalar_multiply(&spec, &v, -1.5, &p0, MultiplyVersion::A).unwrap();
        for r in neg.sample_representatives(12) {
            let w = PairVector::new(p0.clone(), r[0].clone());
            assert!(is_antiparallel(&spec, &v, &w, 1e-9).unwrap());
        }
        let e = WorldFunctionSpec::euclidean(2);
        let ve = PairVector::new([0.0, 0.0], [1.0, 1.0]);
        let one = scalar_multiply(&e, &ve, 1.0, &Point::from([2.0, 0.0]), MultiplyVersion::A).unwrap();
        assert_eq!(one.representative(&[]).unwrap()[0].coords(), &[3.0, 1.0]);
    }
}
