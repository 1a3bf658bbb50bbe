//! Sampled check of the four conditions that characterize an `n`-dimensional
//! proper Euclidean space through its world function alone:
//!
//! 1. some `n`-point skeleton has a nonzero Gram determinant while every
//!    `(n+1)`-skeleton has a vanishing one;
//! 2. `sigma` is the quadratic form of the inverse metric in covariant
//!    coordinates `x_i(P) = (P0Pi . P0P)`;
//! 3. the metric (Gram) matrix is positive definite;
//! 4. `x_i(P) = y_i` has exactly one solution for every `y`.
//!
//! This is numeric evidence over samples, never a proof.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dependent_gram, gram_matrix_raw, Skeleton};
use crate::geometry::{approx_eq, Point, WorldFunctionSpec};
use crate::halton::halton_centered;
use crate::solver::{gauss_newton, GaussNewtonOptions, Residuals};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub seed: u64,
    /// Half-width of the coordinate box samples are drawn from.
    pub extent: f64,
    /// Candidate skeletons tried when searching the condition-I witness.
    pub witness_candidates: usize,
    /// Random `(n+2)`-point sets checked for a vanishing determinant.
    pub dependent_sets: usize,
    /// Random point pairs for the condition-II residual.
    pub pairs: usize,
    /// Random targets `y` for the condition-IV inversion.
    pub inversions: usize,
    /// Starts per inversion.
    pub inversion_starts: usize,
    pub tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            extent: 1.0,
            witness_candidates: 64,
            dependent_sets: 200,
            pairs: 1000,
            inversions: 50,
            inversion_starts: 8,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition1 {
    pub pass: bool,
    pub witness: Vec<Point>,
    /// `F_n` of the witness, relative to `scale^n`.
    pub witness_relative_det: f64,
    /// Largest relative `F_{n+1}` over the sampled sets.
    pub max_relative_det_next: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition2 {
    pub pass: bool,
    pub max_residual: f64,
    /// Largest residual among timelike-separated pairs (`None` for
    /// euclidean geometry or if no timelike pair was drawn).
    pub max_residual_timelike: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition3 {
    pub pass: bool,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition4 {
    pub pass: bool,
    pub failed_inversions: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanessReport {
    pub n_claim: usize,
    pub condition_1: Condition1,
    pub condition_2: Condition2,
    pub condition_3: Condition3,
    pub condition_4: Condition4,
    pub verdict: bool,
}

fn relative_det(g: &DMatrix<f64>) -> f64 {
    let scale = g.amax();
    if scale == 0.0 {
        return 0.0;
    }
    g.determinant().abs() / scale.powi(g.nrows() as i32)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, extent: f64) -> Point {
    Point::new((0..dim).map(|_| rng.random_range(-extent..extent)).collect::<Vec<_>>())
}

fn covariant(spec: &WorldFunctionSpec, skel: &[Point], p: &[f64]) -> DVector<f64> {
    let p0 = skel[0].coords();
    let s0p = spec.sigma_raw(p0, p);
    DVector::from_iterator(
        skel.len() - 1,
        skel[1..]
            .iter()
            .map(|pi| spec.sigma_raw(p0, pi.coords()) + s0p - spec.sigma_raw(pi.coords(), p)),
    )
}

/// `x_i(P) - y_i = 0` for the unknown point `P`.
struct Inversion<'a> {
    spec: &'a WorldFunctionSpec,
    skel: &'a [Point],
    y: DVector<f64>,
}

impl Residuals for Inversion<'_> {
    fn n_residuals(&self) -> usize {
        self.y.len()
    }
    fn n_unknowns(&self) -> usize {
        self.spec.n
    }
    fn eval(&self, x: &[f64], r: &mut [f64]) {
        let c = covariant(self.spec, self.skel, x);
        for i in 0..r.len() {
            r[i] = c[i] - self.y[i];
        }
    }
    fn jacobian(&self, x: &[f64], j: &mut DMatrix<f64>) {
        // d/dP [sigma(P0,P) - sigma(Pi,P)]
        let n = self.spec.n;
        let mut g0 = vec![0.0; n];
        let mut gi = vec![0.0; n];
        self.spec.sigma_grad_q(self.skel[0].coords(), x, &mut g0);
        for (row, pi) in self.skel[1..].iter().enumerate() {
            self.spec.sigma_grad_q(pi.coords(), x, &mut gi);
            for c in 0..n {
                j[(row, c)] = g0[c] - gi[c];
            }
        }
    }
}

/// Run the four sampled checks for a claimed dimension `n_claim`
/// (the skeleton has `n_claim + 1` points).
pub fn euclideaness_check(spec: &WorldFunctionSpec, n_claim: usize, cfg: &SampleConfig) -> EuclideanessReport {
    let dim = spec.n;
    let tol = cfg.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // I: best-conditioned Halton skeleton, then random (n+2)-point sets.
    let mut best: Option<(f64, Vec<Point>)> = None;
    for c in 0..cfg.witness_candidates.max(1) {
        let pts: Vec<Point> = (0..=n_claim)
            .map(|k| {
                let h = halton_centered(1 + (c * (n_claim + 1) + k) as u64, dim);
                Point::new(h.into_iter().map(|x| x * cfg.extent).collect::<Vec<_>>())
            })
            .collect();
        let rel = relative_det(&gram_matrix_raw(spec, &pts));
        if best.as_ref().is_none_or(|(b, _)| rel > *b) {
            best = Some((rel, pts));
        }
    }
    let (witness_rel, witness) = best.expect("at least one candidate");
    let mut max_next: f64 = 0.0;
    for _ in 0..cfg.dependent_sets {
        let pts: Vec<Point> = (0..n_claim + 2).map(|_| random_point(&mut rng, dim, cfg.extent)).collect();
        max_next = max_next.max(relative_det(&gram_matrix_raw(spec, &pts)));
    }
    let condition_1 = Condition1 {
        pass: witness_rel > tol.sqrt() && max_next <= tol,
        witness: witness.clone(),
        witness_relative_det: witness_rel,
        max_relative_det_next: max_next,
    };

    let g = gram_matrix_raw(spec, &witness);
    let ginv = g.clone().try_inverse();

    // II: sigma against the inverse-metric quadratic form.
    let mut max_res: f64 = 0.0;
    let mut max_tl: Option<f64> = None;
    let mut ok2 = ginv.is_some();
    if let Some(ginv) = &ginv {
        for _ in 0..cfg.pairs {
            let p = random_point(&mut rng, dim, cfg.extent);
            let q = random_point(&mut rng, dim, cfg.extent);
            let dx = covariant(spec, &witness, p.coords()) - covariant(spec, &witness, q.coords());
            let model = 0.5 * (dx.transpose() * ginv * &dx)[(0, 0)];
            let sigma = spec.sigma_raw(p.coords(), q.coords());
            let res = (sigma - model).abs();
            max_res = max_res.max(res);
            if !approx_eq(sigma, model, tol) {
                ok2 = false;
            }
            if spec.is_lorentzian() && spec.undistorted().sigma_raw(p.coords(), q.coords()) > 0.0 {
                max_tl = Some(max_tl.unwrap_or(0.0).max(res));
            }
        }
    }
    let condition_2 = Condition2 {
        pass: ok2,
        max_residual: max_res,
        max_residual_timelike: max_tl,
        samples: cfg.pairs,
    };

    // III: eigenvalues of the metric.
    let mut eigenvalues: Vec<f64> = g.clone().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let condition_3 = Condition3 {
        pass: !dependent_gram(&g, tol) && eigenvalues.iter().all(|&e| e > 0.0),
        eigenvalues,
    };

    // IV: the covariant coordinates must invert uniquely.
    let mut failed = 0;
    let opts = GaussNewtonOptions {
        ftol: 1e-10,
        ..Default::default()
    };
    for _ in 0..cfg.inversions {
        let target = random_point(&mut rng, dim, cfg.extent);
        let sys = Inversion {
            spec,
            skel: &witness,
            y: covariant(spec, &witness, target.coords()),
        };
        let scale = 1.0 + cfg.extent;
        let mut found: Vec<Vec<f64>> = Vec::new();
        for s in 0..cfg.inversion_starts {
            let start: Vec<f64> = halton_centered(1 + s as u64, dim)
                .into_iter()
                .map(|x| 2.0 * cfg.extent * x)
                .collect();
            let r = gauss_newton(&sys, &start, &opts);
            if r.converged && !found.iter().any(|f| dist(f, &r.x) <= 1e-6 * scale) {
                found.push(r.x);
            }
        }
        if found.len() != 1 {
            failed += 1;
        }
    }
    let condition_4 = Condition4 {
        pass: failed == 0,
        failed_inversions: failed,
        samples: cfg.inversions,
    };

    let verdict = condition_1.pass && condition_2.pass && condition_3.pass && condition_4.pass;
    EuclideanessReport {
        n_claim,
        condition_1,
        condition_2,
        condition_3,
        condition_4,
        verdict,
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl EuclideanessReport {
    /// The condition-I witness as a skeleton.
    pub fn witness_skeleton(&self) -> Option<Skeleton> {
        Skeleton::new(self.condition_1.witness.clone()).ok()
    }
}
