//! Points, world-function specifications and the three primitive
//! quantities every other module is built from: the world function
//! `sigma(P, Q)`, squared vector length and the two-vector scalar product.
//!
//! The world function is half the squared interval. For the distorted
//! space-time a constant `d = lambda0^2` is added on timelike separations
//! only; `sigma_M = 0` stays on the undistorted branch.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for every predicate in the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Scale-free comparison: `|a - b| <= tol * max(1, |a|, |b|)`.
#[inline]
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// A point given by its coordinates. For space-time geometries
/// `coords[0] = c t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Panics if any coordinate is not finite; use [`Point::try_new`] for
    /// untrusted input.
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self::try_new(coords).expect("point coordinates must be finite")
    }

    pub fn try_new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords = coords.into();
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Self { coords })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn origin(n: usize) -> Self {
        Self { coords: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `self + delta`, component-wise.
    pub fn offset(&self, delta: &[f64]) -> Point {
        debug_assert_eq!(delta.len(), self.dim());
        Point::new(
            self.coords
                .iter()
                .zip(delta)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        )
    }

    /// Coordinate difference `other - self`.
    pub fn delta_to(&self, other: &Point) -> Vec<f64> {
        other
            .coords
            .iter()
            .zip(&self.coords)
            .map(|(b, a)| b - a)
            .collect()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.delta_to(other).iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::try_new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(a: [f64; N]) -> Self {
        Point::new(a.to_vec())
    }
}

/// An ordered point pair, the vector `PQ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVector {
    pub origin: Point,
    pub end: Point,
}

impl PairVector {
    pub fn new(origin: impl Into<Point>, end: impl Into<Point>) -> Self {
        Self {
            origin: origin.into(),
            end: end.into(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            origin: self.end.clone(),
            end: self.origin.clone(),
        }
    }

    /// Coordinate components `end - origin`.
    pub fn components(&self) -> Vec<f64> {
        self.origin.delta_to(&self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Euclidean,
    Minkowski,
    Distorted,
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeometryKind::Euclidean => "euclidean",
            GeometryKind::Minkowski => "minkowski",
            GeometryKind::Distorted => "distorted",
        })
    }
}

fn default_c() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: GeometryKind,
    n: usize,
    #[serde(default)]
    d: f64,
    #[serde(default = "default_c")]
    c: f64,
}

/// Which geometry the world function describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct WorldFunctionSpec {
    pub kind: GeometryKind,
    /// Dimension of the point coordinates.
    pub n: usize,
    /// Distortion `d = lambda0^2` (length^2); zero unless `kind` is distorted.
    pub d: f64,
    /// Speed of light, used only for velocity and momentum conversions.
    pub c: f64,
}

impl TryFrom<RawSpec> for WorldFunctionSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        WorldFunctionSpec {
            kind: r.kind,
            n: r.n,
            d: r.d,
            c: r.c,
        }
        .validated()
    }
}

impl WorldFunctionSpec {
    pub fn euclidean(n: usize) -> Self {
        Self {
            kind: GeometryKind::Euclidean,
            n,
            d: 0.0,
            c: 1.0,
        }
    }

    pub fn minkowski(n: usize) -> Self {
        Self {
            kind: GeometryKind::Minkowski,
            n,
            d: 0.0,
            c: 1.0,
        }
    }

    pub fn distorted(n: usize, d: f64) -> Self {
        Self {
            kind: GeometryKind::Distorted,
            n,
            d,
            c: 1.0,
        }
    }

    /// Distorted four-dimensional space-time with elementary length `lambda0`.
    pub fn distorted_lambda(lambda0: f64) -> Self {
        Self::distorted(4, lambda0 * lambda0)
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validated(self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::InvalidSpec(format!("distortion {} must be >= 0", self.d)));
        }
        if self.kind != GeometryKind::Distorted && self.d != 0.0 {
            return Err(Error::InvalidSpec(format!(
                "distortion is only meaningful for distorted geometry, got d = {} for {}",
                self.d, self.kind
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidSpec(format!("speed of light {} must be > 0", self.c)));
        }
        Ok(self)
    }

    pub fn is_lorentzian(&self) -> bool {
        self.kind != GeometryKind::Euclidean
    }

    /// The same geometry with the distortion removed (minkowski for a
    /// distorted spec, unchanged otherwise).
    pub fn undistorted(&self) -> Self {
        match self.kind {
            GeometryKind::Distorted => Self {
                kind: GeometryKind::Minkowski,
                d: 0.0,
                ..*self
            },
            _ => *self,
        }
    }

    /// Elementary length `lambda0 = sqrt(d)`.
    pub fn lambda0(&self) -> f64 {
        self.d.sqrt()
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.dim(),
            })
        }
    }

    /// Undistorted half-interval and the number of distortion quanta it
    /// carries (0 or 1). Keeping the two apart lets sums of sigmas cancel
    /// the distortion exactly.
    #[inline]
    pub(crate) fn sigma_parts(&self, p: &[f64], q: &[f64]) -> (f64, i32) {
        match self.kind {
            GeometryKind::Euclidean => {
                let s: f64 = p.iter().zip(q).map(|(a, b)| (b - a) * (b - a)).sum();
                (0.5 * s, 0)
            }
            GeometryKind::Minkowski | GeometryKind::Distorted => {
                let dt = q[0] - p[0];
                let mut s = dt * dt;
                for (a, b) in p[1..].iter().zip(&q[1..]) {
                    s -= (b - a) * (b - a);
                }
                let base = 0.5 * s;
                let quanta = i32::from(self.kind == GeometryKind::Distorted && base > 0.0);
                (base, quanta)
            }
        }
    }

    #[inline]
    pub(crate) fn sigma_raw(&self, p: &[f64], q: &[f64]) -> f64 {
        let (base, k) = self.sigma_parts(p, q);
        if k == 0 {
            base
        } else {
            base + self.d
        }
    }

    /// World function `sigma(P, Q)`.
    pub fn sigma(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.sigma_raw(p.coords(), q.coords()))
    }

    /// True when the pair carries the distortion (distorted spec, timelike).
    pub fn is_distorted_pair(&self, p: &Point, q: &Point) -> bool {
        self.sigma_parts(p.coords(), q.coords()).1 == 1
    }

    /// `|PQ|^2 = 2 sigma(P, Q)`; negative for spacelike vectors.
    pub fn squared_length(&self, v: &PairVector) -> Result<f64> {
        Ok(2.0 * self.sigma(&v.origin, &v.end)?)
    }

    /// `(P0P1 . Q0Q1) = sigma(P0,Q1) + sigma(P1,Q0) - sigma(P0,Q0) - sigma(P1,Q1)`.
    pub fn scalar_product(&self, v1: &PairVector, v2: &PairVector) -> Result<f64> {
        for p in [&v1.origin, &v1.end, &v2.origin, &v2.end] {
            self.check(p)?;
        }
        Ok(self.scalar_product_raw(
            v1.origin.coords(),
            v1.end.coords(),
            v2.origin.coords(),
            v2.end.coords(),
        ))
    }

    pub(crate) fn scalar_product_raw(&self, p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
        let (a, ka) = self.sigma_parts(p0, q1);
        let (b, kb) = self.sigma_parts(p1, q0);
        let (c, kc) = self.sigma_parts(p0, q0);
        let (e, ke) = self.sigma_parts(p1, q1);
        let base = a + b - c - e;
        let quanta = ka + kb - kc - ke;
        if quanta == 0 {
            base
        } else {
            base + f64::from(quanta) * self.d
        }
    }

    /// Gradient of the undistorted part of `sigma(P, Q)` with respect to `Q`.
    /// The distortion is piecewise constant, so this is also the gradient of
    /// the distorted world function away from the light cone.
    pub(crate) fn sigma_grad_q(&self, p: &[f64], q: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let d = q[i] - p[i];
            *o = if self.is_lorentzian() && i > 0 { -d } else { d };
        }
    }
}

impl fmt::Display for WorldFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeometryKind::Distorted => write!(f, "{}:{}:{}", self.kind, self.n, self.d),
            _ => write!(f, "{}:{}", self.kind, self.n),
        }
    }
}

/// Command-line shorthand `kind:n[:d]`, e.g. `distorted:4:0.01`.
impl FromStr for WorldFunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidSpec(format!("expected kind:n[:d], got {s:?}"));
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let kind = match parts[0] {
            "euclidean" | "e" => GeometryKind::Euclidean,
            "minkowski" | "m" => GeometryKind::Minkowski,
            "distorted" | "d" => GeometryKind::Distorted,
            _ => return Err(bad()),
        };
        let n = parts[1].parse().map_err(|_| bad())?;
        let d = match parts.get(2) {
            Some(d) => d.parse().map_err(|_| bad())?,
            None => 0.0,
        };
        WorldFunctionSpec { kind, n, d, c: 1.0 }.validated()
    }
}
