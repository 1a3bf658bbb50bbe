//! Closed-form solutions of `v eqv w` (and `w eqv alpha v`) for a given
//! origin of `w`.
//!
//! In the rest frame of the Minkowski part of `v` (length `s`) every
//! solution is `w = (w0, rho q)` with `q` a unit spatial vector. With
//! distortion `d` and the distortion indicators `t(X,Y)` (1 for a timelike
//! pair, else 0) the two equivalence equations become
//!
//! ```text
//! s w0 + c d = alpha (s^2 + 2d),   w0^2 - rho^2 = alpha^2 (s^2 + 2d) - 2d
//! c = t(Q0,P1) + t(Q1,P0) - t(Q0,P0) - t(Q1,P1)
//! ```
//!
//! so the solution set is a sphere of radius `rho` once the indicators
//! involving the unknown end `Q1` are known. They are hypothesized and
//! then verified on probe directions. `c = 0` reproduces the disjoint
//! configuration (`alpha0 = 2 lambda0^2/s`), `c = -1` the adjacent one
//! (`alpha0 = 3 lambda0^2/s`).

use serde::{Deserialize, Serialize};

use super::family::{Displacement, SolutionFamily};
use crate::error::{Error, Result};
use crate::geometry::{PairVector, Point, WorldFunctionSpec};
use crate::halton::halton_direction;
use crate::lorentz::{frame_for, minkowski_dot};
use crate::vector_algebra::{equivalence_residuals, pair_invariants};

fn indicator(spec: &WorldFunctionSpec, a: &[f64], b: &[f64]) -> i32 {
    spec.sigma_parts(a, b).1
}

fn probe_directions(m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for k in 0..m {
        for sgn in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[k] = sgn;
            out.push(e);
        }
    }
    if m > 1 {
        out.extend((0..16).map(|i| halton_direction(i, m)));
    }
    out
}

fn residual_ok(spec: &WorldFunctionSpec, v: &PairVector, w: &PairVector, alpha: f64) -> bool {
    let Ok(inv) = pair_invariants(spec, v, w) else {
        return false;
    };
    let want_len = alpha * alpha * inv.len1;
    let want_prod = alpha * inv.len1;
    let scale = 1f64.max(inv.len1.abs()) * 1f64.max(alpha.abs()).powi(2);
    (inv.len2 - want_len).abs() <= 1e-9 * scale && (inv.product - want_prod).abs() <= 1e-9 * scale
}

/// The displacement taking `origin` to every `Q1` with
/// `|origin Q1|^2 = alpha^2 |v|^2` and `(v . origin Q1) = alpha |v|^2`.
/// For `alpha = 1` this is the equivalence family.
pub fn scaled_displacement(
    spec: &WorldFunctionSpec,
    v: &PairVector,
    origin: &Point,
    alpha: f64,
) -> Result<Displacement> {
    for p in [&v.origin, &v.end, origin] {
        spec.check(p)?;
    }
    let vm = v.components();
    if !spec.is_lorentzian() {
        return Ok(Displacement::Fixed {
            delta: vm.iter().map(|x| alpha * x).collect(),
        });
    }
    let len = spec.squared_length(v)?;
    if len < 0.0 {
        return Err(Error::SpacelikeUnsupported(len));
    }
    if len == 0.0 {
        return null_displacement(spec, v, origin);
    }

    let d = spec.d;
    let s2 = minkowski_dot(&vm, &vm);
    let s = s2.sqrt();
    let u: Vec<f64> = vm.iter().map(|x| x / s).collect();
    let frame = frame_for(&u);
    let frame_rows: Vec<Vec<f64>> = (0..spec.n).map(|i| frame.row(i).iter().copied().collect()).collect();

    let target_len = alpha * alpha * len;
    let target_prod = alpha * len;
    // Minkowski square of w, assuming the pair (Q0, Q1) is distorted when
    // its length allows it.
    let (w_m2, w_timelike) = if d == 0.0 {
        (target_len, target_len > 0.0)
    } else if target_len > 2.0 * d {
        (target_len - 2.0 * d, true)
    } else if alpha == 0.0 {
        (0.0, false)
    } else {
        return Err(Error::NoClosedForm(format!(
            "no vector has squared length {target_len} (between 0 and 2d = {})",
            2.0 * d
        )));
    };

    let o = origin.coords();
    let t_q0p1 = indicator(spec, o, v.end.coords());
    let t_q0p0 = indicator(spec, o, v.origin.coords());
    let m = spec.n - 1;
    let probes = probe_directions(m);
    let scale = 1.0 + s2 + d;

    for (h0, h1) in [(1, 1), (1, 0), (0, 1), (0, 0)] {
        let c = t_q0p1 + h0 - t_q0p0 - h1;
        let w0 = (target_prod - f64::from(c) * d) / s;
        let rho2 = w0 * w0 - w_m2;
        if rho2 < -1e-12 * scale {
            continue;
        }
        let rho = if rho2.abs() <= 1e-12 * scale { 0.0 } else { rho2.sqrt() };
        let disp = if rho == 0.0 {
            Displacement::Fixed {
                delta: u.iter().map(|x| w0 * x).collect(),
            }
        } else {
            Displacement::Shell {
                frame: frame_rows.clone(),
                time: w0,
                radius: rho,
            }
        };
        let consistent = probes.iter().all(|q| {
            let delta = disp.apply(Some(q)).expect("probe direction matches dimension");
            let q1 = origin.offset(&delta);
            let tw = indicator(spec, o, q1.coords()) == 1;
            indicator(spec, q1.coords(), v.origin.coords()) == h0
                && indicator(spec, q1.coords(), v.end.coords()) == h1
                && (d == 0.0 || tw == w_timelike || (alpha == 0.0 && w0 == 0.0))
                && residual_ok(spec, v, &PairVector::new(origin.clone(), q1), alpha)
        });
        if consistent {
            return Ok(disp);
        }
    }
    Err(Error::NoClosedForm(
        "the solution set is not a single sphere for this origin (mixed light-cone configuration)".into(),
    ))
}

/// Null `v`: the family `origin + t v`, valid when the distortion
/// indicators stay balanced along the ray (always for minkowski, and for
/// an origin at either end of `v`).
fn null_displacement(spec: &WorldFunctionSpec, v: &PairVector, origin: &Point) -> Result<Displacement> {
    let vm = v.components();
    if vm.iter().all(|x| *x == 0.0) {
        return Ok(Displacement::Fixed { delta: vm });
    }
    let disp = Displacement::Ray {
        direction: vm,
        offset: 0.0,
    };
    let ok = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0].iter().all(|t| {
        let q1 = origin.offset(&disp.apply(Some(&[*t])).expect("ray"));
        equivalence_residuals(spec, v, &PairVector::new(origin.clone(), q1))
            .map(|r| r.iter().all(|x| x.abs() <= 1e-12))
            .unwrap_or(false)
    });
    if ok {
        Ok(disp)
    } else {
        Err(Error::NoClosedForm(
            "null vector with an origin off its own light ray".into(),
        ))
    }
}

/// All `Q1` with `origin Q1 eqv v`.
pub fn equivalent_family(spec: &WorldFunctionSpec, v: &PairVector, origin: &Point) -> Result<SolutionFamily> {
    let disp = scaled_displacement(spec, v, origin, 1.0)?;
    Ok(SolutionFamily::closed_form(origin.clone(), vec![disp]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimelikeCase {
    /// All four points distinct, all pairs timelike.
    I,
    /// `Q0 = P1`: the adjacent (temporal evolution) configuration.
    II,
}

impl std::str::FromStr for TimelikeCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(TimelikeCase::I),
            "II" | "ii" | "2" => Ok(TimelikeCase::II),
            _ => Err(Error::Invalid(format!("case must be I or II, got {s:?}"))),
        }
    }
}

/// The equivalent of `P0P1 = (s,0,0,0)` from `Q0 = (a,b,0,0)` (case I) or
/// `Q0 = P1` (case II) in the distorted space-time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelikeSolution {
    pub case: TimelikeCase,
    pub s: f64,
    pub lambda0: f64,
    pub a: f64,
    pub b: f64,
    /// Unit direction of the transverse part.
    pub q: [f64; 3],
    /// Time correction of `Q0Q1` relative to `s`.
    pub alpha0: f64,
    pub gamma: [f64; 3],
    /// Transverse magnitude over `lambda0` (`kappa`), case II only.
    pub kappa: Option<f64>,
    pub p0: Point,
    pub p1: Point,
    pub q0: Point,
    pub q1: Point,
    pub family: SolutionFamily,
}

pub fn solve_equivalent_timelike(
    spec: &WorldFunctionSpec,
    s: f64,
    a: f64,
    b: f64,
    q: [f64; 3],
    case: TimelikeCase,
) -> Result<TimelikeSolution> {
    if spec.kind != crate::geometry::GeometryKind::Distorted || spec.n != 4 {
        return Err(Error::InvalidSpec(format!(
            "timelike closed forms need distorted:4, got {spec}"
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::NonTimelike(format!("s = {s} must be positive")));
    }
    let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    if !(qn > 0.0 && qn.is_finite()) {
        return Err(Error::Invalid("direction q must be nonzero".into()));
    }
    let qh = [q[0] / qn, q[1] / qn, q[2] / qn];
    let l = spec.lambda0();
    let l2 = spec.d;
    let (a, b) = match case {
        TimelikeCase::I => (a, b),
        TimelikeCase::II => (s, 0.0),
    };
    let (alpha0, mag, kappa) = match case {
        TimelikeCase::I => (2.0 * l2 / s, 2.0 * l * (1.0 + l2 / (s * s)).sqrt(), None),
        TimelikeCase::II => {
            let kappa = (6.0 * (1.0 + 3.0 * l2 / (2.0 * s * s))).sqrt();
            (3.0 * l2 / s, l * kappa, Some(kappa))
        }
    };
    let gamma = [mag * qh[0], mag * qh[1], mag * qh[2]];
    let p0 = Point::from([0.0; 4]);
    let p1 = Point::from([s, 0.0, 0.0, 0.0]);
    let q0 = Point::from([a, b, 0.0, 0.0]);
    let q1 = Point::from([s + a + alpha0, b + gamma[0], gamma[1], gamma[2]]);

    if l2 > 0.0 {
        let pts = [&p0, &p1, &q0, &q1];
        for i in 0..4 {
            for k in (i + 1)..4 {
                if case == TimelikeCase::II && i == 1 && k == 2 {
                    continue;
                }
                if !spec.is_distorted_pair(pts[i], pts[k]) {
                    return Err(Error::NonTimelike(format!(
                        "points {i} and {k} are not timelike-separated; the closed form assumes every pair carries the distortion"
                    )));
                }
            }
        }
    }

    let v = PairVector::new(p0.clone(), p1.clone());
    let disp = scaled_displacement(spec, &v, &q0, 1.0)?;
    let family = SolutionFamily::closed_form(q0.clone(), vec![disp]);
    Ok(TimelikeSolution {
        case,
        s,
        lambda0: l,
        a,
        b,
        q: qh,
        alpha0,
        gamma,
        kappa,
        p0,
        p1,
        q0,
        q1,
        family,
    })
}

/// The null vector `P0P1 = (s,s,0,0)` continued from `Q0 = P1`:
/// `Q2 = P1 + (s + alpha0)(1,1,0,0)`, one free real parameter.
pub fn solve_equivalent_null(spec: &WorldFunctionSpec, s: f64) -> Result<SolutionFamily> {
    if !spec.is_lorentzian() || spec.n < 2 {
        return Err(Error::InvalidSpec(format!("null vectors need a space-time spec, got {spec}")));
    }
    if s == 0.0 || !s.is_finite() {
        return Err(Error::Invalid(format!("s = {s} must be nonzero")));
    }
    let mut p1 = vec![0.0; spec.n];
    p1[0] = s;
    p1[1] = s;
    let mut dir = vec![0.0; spec.n];
    dir[0] = 1.0;
    dir[1] = 1.0;
    Ok(SolutionFamily::closed_form(
        Point::new(p1),
        vec![Displacement::Ray {
            direction: dir,
            offset: s,
        }],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector_algebra::is_equivalent;

    fn dspec(l: f64) -> WorldFunctionSpec {
        WorldFunctionSpec::distorted_lambda(l)
    }

    #[test]
    fn case_one_example() {
        let sol = solve_equivalent_timelike(&dspec(0.1), 1.0, 0.5, 0.2, [1.0, 0.0, 0.0], TimelikeCase::I).unwrap();
        assert!((sol.q1.coords()[0] - 1.52).abs() < 1e-15);
        let want = 0.2 + 0.2 * (1.01f64).sqrt();
        assert!((sol.q1.coords()[1] - want).abs() < 1e-15);
        assert!((sol.q1.coords()[1] - 0.4009975).abs() < 1e-7);
        // family agrees with the formula
        assert!(sol.family.distance_to(&sol.q1).unwrap() < 1e-14);
        assert_eq!(sol.family.dof, 2);
    }

    #[test]
    fn case_two_matches_general_family() {
        let l = 0.1;
        let sol = solve_equivalent_timelike(&dspec(l), 0.98f64.sqrt(), 0.0, 0.0, [0.0, 1.0, 0.0], TimelikeCase::II).unwrap();
        let s = sol.s;
        assert!((sol.alpha0 - 3.0 * l * l / s).abs() < 1e-15);
        match &sol.family.steps[0] {
            Displacement::Shell { time, radius, .. } => {
                assert!((time - (s + 3.0 * l * l / s)).abs() < 1e-13);
                assert!((radius - l * sol.kappa.unwrap()).abs() < 1e-13);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_distortion_collapses() {
        let sol = solve_equivalent_timelike(&dspec(0.0), 1.0, 0.5, 0.2, [0.0, 0.0, 1.0], TimelikeCase::I).unwrap();
        assert_eq!(sol.alpha0, 0.0);
        assert_eq!(sol.gamma, [0.0; 3]);
        assert_eq!(sol.family.dof, 0);
    }

    #[test]
    fn spacelike_shift_rejected_for_case_one() {
        let err = solve_equivalent_timelike(&dspec(0.1), 1.0, 0.0, 2.0, [1.0, 0.0, 0.0], TimelikeCase::I).unwrap_err();
        assert!(matches!(err, Error::NonTimelike(_)));
        let err = solve_equivalent_timelike(&dspec(0.1), -1.0, 0.5, 0.2, [1.0, 0.0, 0.0], TimelikeCase::I).unwrap_err();
        assert!(matches!(err, Error::NonTimelike(_)));
    }

    #[test]
    fn null_family_members_are_equivalent() {
        let spec = dspec(0.1);
        let fam = solve_equivalent_null(&spec, 1.0).unwrap();
        let v = PairVector::new([0.0; 4], [1.0, 1.0, 0.0, 0.0]);
        for a0 in [-3.0, -0.5, 0.0, 0.7, 5.0] {
            let q2 = fam.representative(&[vec![a0]]).unwrap().pop().unwrap();
            assert_eq!(spec.sigma(&v.origin, &q2).unwrap(), 0.0);
            let w = PairVector::new(v.end.clone(), q2);
            assert!(is_equivalent(&spec, &v, &w, 1e-12).unwrap());
        }
    }

    #[test]
    fn scaled_family_lengths() {
        let spec = dspec(0.1);
        let v = PairVector::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]);
        let origin = Point::from([5.0, 0.3, -0.2, 0.1]);
        let disp = scaled_displacement(&spec, &v, &origin, 2.0).unwrap();
        let fam = SolutionFamily::closed_form(origin.clone(), vec![disp]);
        for r in fam.sample_representatives(20) {
            let w = PairVector::new(origin.clone(), r[0].clone());
            assert!((spec.squared_length(&w).unwrap() - 4.08).abs() < 1e-9);
        }
    }

    #[test]
    fn minkowski_and_euclidean_are_unique() {
        let v = PairVector::new([0.0, 0.0, 0.0, 0.0], [2.0, 0.5, 0.1, 0.0]);
        let o = Point::from([1.0, 1.0, 1.0, 1.0]);
        for spec in [WorldFunctionSpec::minkowski(4), WorldFunctionSpec::euclidean(4)] {
            match scaled_displacement(&spec, &v, &o, 1.0).unwrap() {
                Displacement::Fixed { delta } => {
                    for (x, y) in delta.iter().zip(v.components()) {
                        assert!((x - y).abs() < 1e-12);
                    }
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
