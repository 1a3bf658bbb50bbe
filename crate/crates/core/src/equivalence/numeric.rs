//! Multi-start numeric solution of the skeleton equivalence system
//! `PiPk eqv QiQk` for all `0 <= i < k <= n`, given `Q0`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::SolutionFamily;
use crate::error::{Error, Result};
use crate::geometry::{Point, WorldFunctionSpec};
use crate::halton::halton_centered;
use crate::solver::{gauss_newton, numerical_rank, GaussNewtonOptions, Residuals};
use crate::vector_algebra::Skeleton;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub starts: usize,
    /// Radius of the start cloud; `None` picks `4 lambda0` (distorted) or
    /// `0.1 (1 + scale)`.
    pub radius: Option<f64>,
    pub max_iter: usize,
    /// Relative cluster radius (times `1 + scale`).
    pub cluster_tol: f64,
    /// Relative singular-value cutoff for the manifold dimension.
    pub rank_tol: f64,
    /// Relative residual accepted as a solution (times `1 + scale^2`).
    pub residual_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            radius: None,
            max_iter: 200,
            cluster_tol: 1e-6,
            rank_tol: 1e-8,
            residual_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceVerdict {
    /// Fewer equations than unknowns: multivariant solutions expected.
    Under,
    Balanced,
    /// More equations than unknowns: solutions need not exist.
    Over,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericFindings {
    pub starts: usize,
    pub converged_starts: usize,
    pub clusters: usize,
    pub manifold_dim: Option<usize>,
    pub best_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub n: usize,
    pub equations: usize,
    pub unknowns: usize,
    pub verdict: ExistenceVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric_findings: Option<NumericFindings>,
}

impl ExistenceReport {
    /// `n(n+1)` scalar equations against `n * dim` unknown coordinates.
    pub fn counting(n: usize, dim: usize) -> Self {
        let equations = n * (n + 1);
        let unknowns = n * dim;
        let verdict = match equations.cmp(&unknowns) {
            std::cmp::Ordering::Less => ExistenceVerdict::Under,
            std::cmp::Ordering::Equal => ExistenceVerdict::Balanced,
            std::cmp::Ordering::Greater => ExistenceVerdict::Over,
        };
        Self {
            n,
            equations,
            unknowns,
            verdict,
            numeric_findings: None,
        }
    }
}

pub(crate) struct SkeletonSystem<'a> {
    spec: &'a WorldFunctionSpec,
    p: Vec<&'a [f64]>,
    q0: &'a [f64],
    pairs: Vec<(usize, usize, f64)>,
}

impl<'a> SkeletonSystem<'a> {
    pub(crate) fn new(spec: &'a WorldFunctionSpec, skeleton: &'a Skeleton, q0: &'a Point) -> Self {
        let p: Vec<&[f64]> = skeleton.points().iter().map(|x| x.coords()).collect();
        let mut pairs = Vec::new();
        for i in 0..p.len() {
            for k in (i + 1)..p.len() {
                pairs.push((i, k, 2.0 * spec.sigma_raw(p[i], p[k])));
            }
        }
        Self {
            spec,
            p,
            q0: q0.coords(),
            pairs,
        }
    }

    fn q<'b>(&'b self, x: &'b [f64], i: usize) -> &'b [f64] {
        let dim = self.spec.n;
        if i == 0 {
            self.q0
        } else {
            &x[(i - 1) * dim..i * dim]
        }
    }
}

impl Residuals for SkeletonSystem<'_> {
    fn n_residuals(&self) -> usize {
        2 * self.pairs.len()
    }

    fn n_unknowns(&self) -> usize {
        (self.p.len() - 1) * self.spec.n
    }

    fn eval(&self, x: &[f64], r: &mut [f64]) {
        let s = self.spec;
        for (row, &(i, k, len)) in self.pairs.iter().enumerate() {
            let (qi, qk) = (self.q(x, i), self.q(x, k));
            let (pi, pk) = (self.p[i], self.p[k]);
            r[2 * row] = 2.0 * s.sigma_raw(qi, qk) - len;
            r[2 * row + 1] = s.scalar_product_raw(pi, pk, qi, qk) - len;
        }
    }

    fn jacobian(&self, x: &[f64], j: &mut DMatrix<f64>) {
        let s = self.spec;
        let dim = s.n;
        j.fill(0.0);
        let mut g1 = vec![0.0; dim];
        let mut g2 = vec![0.0; dim];
        for (row, &(i, k, _)) in self.pairs.iter().enumerate() {
            let (qi, qk) = (self.q(x, i), self.q(x, k));
            let (pi, pk) = (self.p[i], self.p[k]);
            // |QiQk|^2
            s.sigma_grad_q(qi, qk, &mut g1);
            for c in 0..dim {
                if k > 0 {
                    j[(2 * row, (k - 1) * dim + c)] += 2.0 * g1[c];
                }
                if i > 0 {
                    j[(2 * row, (i - 1) * dim + c)] -= 2.0 * g1[c];
                }
            }
            // sigma(Pi,Qk) + sigma(Pk,Qi) - sigma(Pi,Qi) - sigma(Pk,Qk)
            if k > 0 {
                s.sigma_grad_q(pi, qk, &mut g1);
                s.sigma_grad_q(pk, qk, &mut g2);
                for c in 0..dim {
                    j[(2 * row + 1, (k - 1) * dim + c)] += g1[c] - g2[c];
                }
            }
            if i > 0 {
                s.sigma_grad_q(pk, qi, &mut g1);
                s.sigma_grad_q(pi, qi, &mut g2);
                for c in 0..dim {
                    j[(2 * row + 1, (i - 1) * dim + c)] += g1[c] - g2[c];
                }
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Solve for `Q1..Qn` such that every `PiPk eqv QiQk`.
///
/// Starts are a Halton cloud around the rigid translate; converged runs are
/// clustered and sorted lexicographically, so the result does not depend on
/// thread scheduling. The manifold dimension is `unknowns - rank(J)` at the
/// cluster representatives; a single cluster is reported as an isolated
/// solution (`dof = 0`), which also covers the tangential roots of the
/// Euclidean and Minkowski systems where the Jacobian is rank-deficient.
pub fn solve_skeleton_equivalence(
    spec: &WorldFunctionSpec,
    skeleton: &Skeleton,
    q0: &Point,
    cfg: &SolverConfig,
) -> Result<(SolutionFamily, ExistenceReport)> {
    skeleton.check(spec)?;
    spec.check(q0)?;
    let n = skeleton.order();
    let dim = spec.n;
    for i in 0..=n {
        for k in (i + 1)..=n {
            let l = 2.0 * spec.sigma_raw(skeleton.points()[i].coords(), skeleton.points()[k].coords());
            if spec.is_lorentzian() && l < 0.0 {
                return Err(Error::SpacelikeUnsupported(l));
            }
        }
    }
    let mut report = ExistenceReport::counting(n, dim);

    let sys = SkeletonSystem::new(spec, skeleton, q0);
    let p0 = skeleton.points()[0].coords();
    let predicted: Vec<f64> = skeleton.points()[1..]
        .iter()
        .flat_map(|p| p.coords().iter().zip(p0).zip(q0.coords()).map(|((a, b), c)| a - b + c).collect::<Vec<_>>())
        .collect();
    let scale = skeleton
        .points()
        .iter()
        .flat_map(|p| p.coords().iter().zip(p0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let radius = cfg.radius.unwrap_or(if spec.d > 0.0 {
        4.0 * spec.lambda0()
    } else {
        0.1 * (1.0 + scale)
    });
    let opts = GaussNewtonOptions {
        max_iter: cfg.max_iter,
        ftol: cfg.residual_tol * (1.0 + scale * scale),
        ..Default::default()
    };

    let runs: Vec<_> = (0..cfg.starts)
        .into_par_iter()
        .map(|k| {
            let off = halton_centered(k as u64 + 1, predicted.len());
            let x0: Vec<f64> = predicted.iter().zip(&off).map(|(p, o)| p + radius * o).collect();
            gauss_newton(&sys, &x0, &opts)
        })
        .collect();

    let best_residual = runs.iter().map(|r| r.residual_norm).fold(f64::INFINITY, f64::min);
    let mut sols: Vec<Vec<f64>> = runs.iter().filter(|r| r.converged).map(|r| r.x.clone()).collect();
    let converged_starts = sols.len();
    sols.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let ctol = cfg.cluster_tol * (1.0 + scale);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for s in sols {
        if !clusters.iter().any(|c| dist(c, &s) <= ctol) {
            clusters.push(s);
        }
    }

    let unknowns = sys.n_unknowns();
    let mut jac = DMatrix::zeros(sys.n_residuals(), unknowns);
    let dims: Vec<usize> = clusters
        .iter()
        .map(|c| {
            sys.jacobian(c, &mut jac);
            unknowns - numerical_rank(&jac, cfg.rank_tol)
        })
        .collect();
    let manifold_dim = match clusters.len() {
        0 => None,
        1 => Some(0),
        _ => {
            let mut counts = std::collections::BTreeMap::new();
            for d in &dims {
                *counts.entry(*d).or_insert(0usize) += 1;
            }
            counts.into_iter().max_by_key(|(d, c)| (*c, usize::MAX - d)).map(|(d, _)| d)
        }
    };
    report.numeric_findings = Some(NumericFindings {
        starts: cfg.starts,
        converged_starts,
        clusters: clusters.len(),
        manifold_dim,
        best_residual,
    });

    if clusters.is_empty() {
        return Err(Error::NoSolutionFound {
            starts: cfg.starts,
            best_residual,
        });
    }
    let solutions = clusters
        .iter()
        .map(|c| c.chunks(dim).map(|x| Point::new(x.to_vec())).collect())
        .collect();
    let family = SolutionFamily::enumerated(q0.clone(), solutions, manifold_dim.unwrap_or(0));
    Ok((family, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::closed_form::equivalent_family;
    use crate::geometry::PairVector;

    #[test]
    fn counting_table() {
        let v: Vec<_> = (1..=4).map(|n| ExistenceReport::counting(n, 4)).collect();
        assert_eq!(
            v.iter().map(|r| (r.equations, r.unknowns)).collect::<Vec<_>>(),
            vec![(2, 4), (6, 8), (12, 12), (20, 16)]
        );
        assert_eq!(v[0].verdict, ExistenceVerdict::Under);
        assert_eq!(v[2].verdict, ExistenceVerdict::Balanced);
        assert_eq!(v[3].verdict, ExistenceVerdict::Over);
    }

    #[test]
    fn euclidean_skeleton_is_rigid() {
        let spec = WorldFunctionSpec::euclidean(3);
        let sk = Skeleton::new(vec![
            Point::from([0.0, 0.0, 0.0]),
            Point::from([1.0, 0.2, 0.0]),
            Point::from([0.3, 1.0, 0.1]),
            Point::from([0.1, 0.4, 1.2]),
        ])
        .unwrap();
        let q0 = Point::from([2.0, -1.0, 0.5]);
        let (fam, rep) = solve_skeleton_equivalence(&spec, &sk, &q0, &SolverConfig::default()).unwrap();
        assert_eq!(rep.numeric_findings.as_ref().unwrap().clusters, 1);
        assert_eq!(fam.dof, 0);
        for (q, p) in fam.solutions[0].iter().zip(&sk.points()[1..]) {
            let want: Vec<f64> = p.coords().iter().zip(q0.coords()).map(|(a, b)| a + b).collect();
            assert!(dist(q.coords(), &want) < 1e-6, "{q:?} vs {want:?}");
        }
    }

    #[test]
    fn distorted_link_recovers_closed_form() {
        let spec = WorldFunctionSpec::distorted_lambda(0.1);
        let p0 = Point::origin(4);
        let p1 = Point::from([1.0, 0.0, 0.0, 0.0]);
        let sk = Skeleton::new(vec![p0.clone(), p1.clone()]).unwrap();
        let (fam, rep) = solve_skeleton_equivalence(&spec, &sk, &p1, &SolverConfig::default()).unwrap();
        assert_eq!(fam.dof, 2);
        assert!(rep.numeric_findings.unwrap().clusters > 1);
        let cf = equivalent_family(&spec, &PairVector::new(p0, p1.clone()), &p1).unwrap();
        for s in &fam.solutions {
            assert!(cf.distance_to(&s[0]).unwrap() < 1e-6);
        }
    }
}
