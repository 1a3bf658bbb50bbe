//! Elementary geometric objects given by a skeleton and an envelope
//! function whose zero set is the object: segment, sphere, cylinder and the
//! straight line (collinearity tube). Also the tube surface of a timelike
//! segment in the distorted space-time, object equivalence and the
//! existence of temporal evolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equivalence::{solve_skeleton_equivalence, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{approx_eq, GeometryKind, PairVector, Point, WorldFunctionSpec};
use crate::vector_algebra::{gram_matrix_raw, is_parallel, Skeleton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    /// Skeleton `P0, P1`.
    Segment,
    /// Skeleton `O, Q`: center and a point of the surface.
    Sphere,
    /// Skeleton `P0, P1, Q`: axis and a point of the surface.
    Cylinder,
    /// Skeleton `P0, P1`.
    StraightLine,
}

impl ObjectKind {
    pub fn arity(self) -> usize {
        match self {
            ObjectKind::Cylinder => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ObjectKind::Segment => "segment",
            ObjectKind::Sphere => "sphere",
            ObjectKind::Cylinder => "cylinder",
            ObjectKind::StraightLine => "straight_line",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementaryObject {
    pub kind: ObjectKind,
    pub skeleton: Skeleton,
    pub spec: WorldFunctionSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    kind: ObjectKind,
    skeleton: Skeleton,
    spec: WorldFunctionSpec,
}

impl<'de> Deserialize<'de> for ElementaryObject {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RawObject::deserialize(d)?;
        ElementaryObject::new(r.kind, r.skeleton, r.spec).map_err(serde::de::Error::custom)
    }
}

impl ElementaryObject {
    pub fn new(kind: ObjectKind, skeleton: Skeleton, spec: WorldFunctionSpec) -> Result<Self> {
        if skeleton.points().len() != kind.arity() {
            return Err(Error::Invalid(format!(
                "{kind} needs {} skeleton points, got {}",
                kind.arity(),
                skeleton.points().len()
            )));
        }
        skeleton.check(&spec)?;
        Ok(Self { kind, skeleton, spec })
    }

    pub fn segment(spec: WorldFunctionSpec, p0: Point, p1: Point) -> Result<Self> {
        Self::new(ObjectKind::Segment, Skeleton::new(vec![p0, p1])?, spec)
    }

    pub fn sphere(spec: WorldFunctionSpec, center: Point, on_surface: Point) -> Result<Self> {
        Self::new(ObjectKind::Sphere, Skeleton::new(vec![center, on_surface])?, spec)
    }

    pub fn cylinder(spec: WorldFunctionSpec, p0: Point, p1: Point, on_surface: Point) -> Result<Self> {
        Self::new(ObjectKind::Cylinder, Skeleton::new(vec![p0, p1, on_surface])?, spec)
    }

    pub fn straight_line(spec: WorldFunctionSpec, p0: Point, p1: Point) -> Result<Self> {
        Self::new(ObjectKind::StraightLine, Skeleton::new(vec![p0, p1])?, spec)
    }

    fn pt(&self, i: usize) -> &[f64] {
        self.skeleton.points()[i].coords()
    }

    fn root_len(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let s = self.spec.sigma_raw(a, b);
        if s < 0.0 {
            Err(Error::NegativeSigma(s))
        } else {
            Ok((2.0 * s).sqrt())
        }
    }

    fn f2(&self, x: &[f64]) -> f64 {
        let pts = [
            self.skeleton.points()[0].clone(),
            self.skeleton.points()[1].clone(),
            Point::new(x.to_vec()),
        ];
        gram_matrix_raw(&self.spec, &pts).determinant()
    }

    /// Envelope function at `r`; zero on the object.
    pub fn envelope_value(&self, r: &Point) -> Result<f64> {
        self.spec.check(r)?;
        let x = r.coords();
        match self.kind {
            ObjectKind::Segment => {
                let (p0, p1) = (self.pt(0), self.pt(1));
                Ok(self.root_len(p0, x)? + self.root_len(x, p1)? - self.root_len(p0, p1)?)
            }
            ObjectKind::Sphere => {
                let (o, q) = (self.pt(0), self.pt(1));
                Ok(self.root_len(o, x)? - self.root_len(o, q)?)
            }
            ObjectKind::Cylinder => Ok(self.f2(self.pt(2)) - self.f2(x)),
            ObjectKind::StraightLine => {
                let (p0, p1) = (self.pt(0), self.pt(1));
                let p = self.spec.scalar_product_raw(p0, p1, p0, x);
                Ok(p * p - 4.0 * self.spec.sigma_raw(p0, p1) * self.spec.sigma_raw(p0, x))
            }
        }
    }

    /// Natural magnitude of the envelope function near `r`, used to make
    /// the membership threshold scale-free.
    fn envelope_scale(&self, r: &Point) -> f64 {
        let x = r.coords();
        let s = &self.spec;
        match self.kind {
            ObjectKind::Segment => (2.0 * s.sigma_raw(self.pt(0), self.pt(1))).abs().sqrt(),
            ObjectKind::Sphere => (2.0 * s.sigma_raw(self.pt(0), self.pt(1))).abs().sqrt(),
            ObjectKind::Cylinder => self.f2(self.pt(2)).abs().max(self.f2(x).abs()),
            ObjectKind::StraightLine => {
                let a = 2.0 * s.sigma_raw(self.pt(0), self.pt(1));
                let b = 2.0 * s.sigma_raw(self.pt(0), x);
                (a * b).abs()
            }
        }
    }

    /// `|f(r)| <= tol (1 + scale)`. Points where the envelope is undefined
    /// (negative world function under a square root) are outside.
    pub fn contains(&self, r: &Point, tol: f64) -> bool {
        self.contains_with(r, tol, |f| f)
    }

    /// Membership through a transformed envelope `phi(f)`, for any `phi`
    /// with `phi(0) = 0` and no other zeros.
    pub fn contains_with(&self, r: &Point, tol: f64, phi: impl Fn(f64) -> f64) -> bool {
        match self.envelope_value(r) {
            Ok(f) => {
                let scale = phi(self.envelope_scale(r)).abs();
                phi(f).abs() <= tol * (1.0 + scale)
            }
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSamplePoint {
    pub ct: f64,
    pub x: [f64; 3],
    pub r: f64,
    /// Segment envelope at the sample; `None` where it is undefined (the
    /// sample is Minkowski-spacelike to an end of the segment).
    pub envelope_residual: Option<f64>,
    /// `(v.w)^2 - |v|^2 |w|^2` for `v = P0P1`, `w = P0R`, relative to
    /// `|v|^2 |w|^2`.
    pub collinearity_residual: f64,
}

impl TubeSamplePoint {
    pub fn admissible(&self) -> bool {
        self.envelope_residual.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSample {
    pub mu: f64,
    pub lambda0: f64,
    /// Minkowski length of the axis, `sqrt(mu^2 - 2 lambda0^2)`.
    pub axis_length: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub radius_profile: Vec<(f64, f64)>,
    pub points: Vec<TubeSamplePoint>,
}

impl TubeSample {
    pub fn admissible_count(&self) -> usize {
        self.points.iter().filter(|p| p.admissible()).count()
    }

    pub fn max_envelope_residual(&self) -> Option<f64> {
        self.points
            .iter()
            .filter_map(|p| p.envelope_residual)
            .map(f64::abs)
            .reduce(f64::max)
    }
}

/// Tube radius of a timelike segment of length `mu` at time `ct`.
pub fn tube_radius(mu: f64, lambda0: f64, ct: f64) -> f64 {
    let l2 = lambda0 * lambda0;
    let axis = (mu * mu - 2.0 * l2).sqrt();
    let dt = ct - 0.5 * axis;
    (2.0 * l2 * dt * dt / (mu * mu) + 1.5 * l2).sqrt()
}

/// Samples the tube surface of the segment `P0 = 0`,
/// `P1 = (sqrt(mu^2 - 2 lambda0^2), 0, 0, 0)` on an `n_t x n_phi` grid:
/// slice midpoints in `0 < ct < axis` and an azimuthal circle in the
/// `x1 x2` plane (the surface is rotationally symmetric).
pub fn sample_tube_surface(spec: &WorldFunctionSpec, mu: f64, n_t: usize, n_phi: usize) -> Result<TubeSample> {
    if spec.kind != GeometryKind::Distorted || spec.n != 4 {
        return Err(Error::InvalidSpec(format!("tube sampling needs distorted:4, got {spec}")));
    }
    if n_t == 0 || n_phi == 0 {
        return Err(Error::Invalid("grid sizes must be positive".into()));
    }
    let lambda0 = spec.lambda0();
    let bound = 2f64.sqrt() * lambda0;
    if !(mu > bound) {
        return Err(Error::DegenerateTube { mu, bound });
    }
    let axis = (mu * mu - 2.0 * lambda0 * lambda0).sqrt();
    let p0 = Point::origin(4);
    let p1 = Point::from([axis, 0.0, 0.0, 0.0]);
    let seg = ElementaryObject::segment(*spec, p0.clone(), p1.clone())?;
    let v = PairVector::new(p0.clone(), p1);

    let slices: Vec<Vec<TubeSamplePoint>> = (0..n_t)
        .into_par_iter()
        .map(|i| {
            let ct = axis * (i as f64 + 0.5) / n_t as f64;
            let r = tube_radius(mu, lambda0, ct);
            (0..n_phi)
                .map(|j| {
                    let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
                    let x = [r * phi.cos(), r * phi.sin(), 0.0];
                    let rp = Point::from([ct, x[0], x[1], x[2]]);
                    let envelope_residual = seg.envelope_value(&rp).ok();
                    let w = PairVector::new(p0.clone(), rp);
                    let vw = spec.scalar_product(&v, &w).expect("dimensions checked");
                    let ll = spec.squared_length(&v).expect("checked") * spec.squared_length(&w).expect("checked");
                    TubeSamplePoint {
                        ct,
                        x,
                        r,
                        envelope_residual,
                        collinearity_residual: (vw * vw - ll) / 1f64.max(ll.abs()),
                    }
                })
                .collect()
        })
        .collect();

    let l2 = lambda0 * lambda0;
    Ok(TubeSample {
        mu,
        lambda0,
        axis_length: axis,
        r_min: (1.5f64).sqrt() * lambda0,
        r_max: (2.0 * l2 - l2 * l2 / (mu * mu)).sqrt(),
        radius_profile: slices.iter().map(|s| (s[0].ct, s[0].r)).collect(),
        points: slices.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectRelation {
    Equivalent,
    ShapeOnly,
    OrientationOnly,
    Neither,
}

/// Compares skeletons pair by pair: equal lengths give equal shape,
/// parallel pair vectors give equal orientation. Envelopes of same-kind
/// objects agree by construction, so only same-kind objects are compared.
pub fn objects_equivalent(a: &ElementaryObject, b: &ElementaryObject, tol: f64) -> Result<ObjectRelation> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch(a.kind.to_string(), b.kind.to_string()));
    }
    if a.spec != b.spec {
        return Err(Error::InvalidSpec("objects live in different geometries".into()));
    }
    let spec = &a.spec;
    let n = a.skeleton.points().len();
    let mut shape = true;
    let mut orientation = true;
    for i in 0..n {
        for k in (i + 1)..n {
            let va = a.skeleton.vector(i, k);
            let vb = b.skeleton.vector(i, k);
            if !approx_eq(spec.squared_length(&va)?, spec.squared_length(&vb)?, tol) {
                shape = false;
            }
            if !is_parallel(spec, &va, &vb, tol)? {
                orientation = false;
            }
        }
    }
    Ok(match (shape, orientation) {
        (true, true) => ObjectRelation::Equivalent,
        (true, false) => ObjectRelation::ShapeOnly,
        (false, true) => ObjectRelation::OrientationOnly,
        (false, false) => ObjectRelation::Neither,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionVerdict {
    SingleVariant,
    Multivariant,
    Nonexistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionStep {
    pub step: usize,
    pub exists: bool,
    pub dof: Option<usize>,
    pub clusters: usize,
    pub skeleton: Option<Skeleton>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub steps: Vec<EvolutionStep>,
    pub verdict: EvolutionVerdict,
    /// Step at which no solution was found.
    pub terminated_at: Option<usize>,
}

/// Evolves the skeleton step by step: the next skeleton is equivalent to
/// the current one and starts at its second point (`Q0 = P1`). Each step
/// takes the first solution cluster.
pub fn evolution_chain_exists(
    spec: &WorldFunctionSpec,
    skeleton: &Skeleton,
    n_steps: usize,
    cfg: &SolverConfig,
) -> Result<EvolutionReport> {
    skeleton.check(spec)?;
    let lead = spec.squared_length(&skeleton.vector(0, 1))?;
    if !(lead > 0.0) {
        return Err(Error::NonTimelike(format!("leading vector has squared length {lead}")));
    }
    let mut cur = skeleton.clone();
    let mut steps = Vec::new();
    let mut terminated_at = None;
    let mut max_dof = 0;
    for step in 0..n_steps {
        let q0 = cur.points()[1].clone();
        match solve_skeleton_equivalence(spec, &cur, &q0, cfg) {
            Ok((fam, rep)) => {
                let mut pts = vec![q0];
                pts.extend(fam.solutions[0].iter().cloned());
                let next = Skeleton::new(pts)?;
                max_dof = max_dof.max(fam.dof);
                steps.push(EvolutionStep {
                    step,
                    exists: true,
                    dof: Some(fam.dof),
                    clusters: rep.numeric_findings.map_or(0, |f| f.clusters),
                    skeleton: Some(next.clone()),
                });
                cur = next;
            }
            Err(Error::NoSolutionFound { .. }) => {
                steps.push(EvolutionStep {
                    step,
                    exists: false,
                    dof: None,
                    clusters: 0,
                    skeleton: None,
                });
                terminated_at = Some(step);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let verdict = if terminated_at.is_some() {
        EvolutionVerdict::Nonexistent
    } else if max_dof > 0 {
        EvolutionVerdict::Multivariant
    } else {
        EvolutionVerdict::SingleVariant
    };
    Ok(EvolutionReport {
        steps,
        verdict,
        terminated_at,
    })
}
