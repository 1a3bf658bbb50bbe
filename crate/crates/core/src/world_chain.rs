//! Monte-Carlo broken world lines: chains of equivalent timelike links of
//! length `mu` in the distorted space-time, and their ensemble statistics.
//!
//! Each new link is built in the rest frame of the previous one as
//! `(s + 3 lambda0^2/s, lambda0 kappa q)` with `s = sqrt(mu^2 - 2 lambda0^2)`,
//! `kappa = sqrt(6 (1 + 3 lambda0^2 / (2 s^2)))` and `q` uniform on the unit
//! sphere, then carried to the lab by the current frame. Its Minkowski
//! length is `s` again, so the frame is advanced by the pure boost along
//! the new link (`F' = F B(w/s)`), without extra spatial rotation.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PairVector, Point, WorldFunctionSpec};
use crate::lorentz::minkowski_dot;
use crate::vector_algebra::{is_equivalent, pair_invariants};

fn boost4(u: &Vector4<f64>) -> Matrix4<f64> {
    let g = u[0];
    let mut b = Matrix4::identity();
    b[(0, 0)] = g;
    for i in 1..4 {
        b[(0, i)] = u[i];
        b[(i, 0)] = u[i];
        for j in 1..4 {
            b[(i, j)] += u[i] * u[j] / (1.0 + g);
        }
    }
    b
}

/// Lorentz Gram-Schmidt on the columns, undoing the drift that repeated
/// boost products accumulate at large rapidity.
fn reorthonormalize(f: &mut Matrix4<f64>) {
    let dot = |a: &Vector4<f64>, b: &Vector4<f64>| a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
    let mut cols: [Vector4<f64>; 4] = std::array::from_fn(|j| f.column(j).into_owned());
    for i in 0..4 {
        for j in 0..i {
            let sign = if j == 0 { 1.0 } else { -1.0 };
            let c = dot(&cols[i], &cols[j]) * sign;
            cols[i] -= cols[j] * c;
        }
        let n = dot(&cols[i], &cols[i]).abs().sqrt();
        cols[i] /= n;
    }
    for (j, c) in cols.iter().enumerate() {
        f.set_column(j, c);
    }
}

fn eta_apply_transpose(f: &Matrix4<f64>, x: &Vector4<f64>) -> Vector4<f64> {
    // F^{-1} x = eta F^T eta x
    let ex = Vector4::new(x[0], -x[1], -x[2], -x[3]);
    let y = f.transpose() * ex;
    Vector4::new(y[0], -y[1], -y[2], -y[3])
}

/// Link geometry shared by every step of a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkShape {
    /// Minkowski length of a link.
    pub s: f64,
    /// Rest-frame time component of the next link.
    pub time: f64,
    /// Rest-frame transverse magnitude `lambda0 kappa`.
    pub transverse: f64,
}

impl LinkShape {
    pub fn new(mu: f64, lambda0: f64) -> Result<Self> {
        let l2 = lambda0 * lambda0;
        let bound = 2f64.sqrt() * lambda0;
        if !(mu.is_finite() && lambda0.is_finite() && lambda0 >= 0.0 && mu > bound) {
            return Err(Error::DegenerateLink { mu, bound });
        }
        let s = (mu * mu - 2.0 * l2).sqrt();
        let kappa = (6.0 * (1.0 + 3.0 * l2 / (2.0 * s * s))).sqrt();
        Ok(Self {
            s,
            time: s + 3.0 * l2 / s,
            transverse: lambda0 * kappa,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub points: Vec<Point>,
    pub mu: f64,
    pub lambda0: f64,
    pub seed: u64,
    /// Speed of light for momentum conversion.
    pub c: f64,
    /// Lorentz tetrad of the latest link (row-major; column 0 is its
    /// Minkowski direction).
    pub frame: [[f64; 4]; 4],
}

impl ChainState {
    /// `P0 = 0`, `P1 = (sqrt(mu^2 - 2 lambda0^2), 0, 0, 0)`.
    pub fn new(mu: f64, lambda0: f64, seed: u64) -> Result<Self> {
        let shape = LinkShape::new(mu, lambda0)?;
        Ok(Self {
            points: vec![Point::origin(4), Point::from([shape.s, 0.0, 0.0, 0.0])],
            mu,
            lambda0,
            seed,
            c: 1.0,
            frame: identity4(),
        })
    }

    pub fn spec(&self) -> WorldFunctionSpec {
        WorldFunctionSpec::distorted_lambda(self.lambda0).with_c(self.c)
    }

    pub fn links(&self) -> Vec<PairVector> {
        self.points
            .windows(2)
            .map(|w| PairVector::new(w[0].clone(), w[1].clone()))
            .collect()
    }

    fn frame_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.frame[i][j])
    }

    /// Appends the link with transverse rest-frame direction `q`.
    pub fn extend_with(&mut self, q: [f64; 3]) -> Result<()> {
        let shape = LinkShape::new(self.mu, self.lambda0)?;
        let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        if !(qn > 0.0 && qn.is_finite()) {
            return Err(Error::Invalid("direction q must be nonzero".into()));
        }
        let t = shape.transverse / qn;
        let w_rest = Vector4::new(shape.time, t * q[0], t * q[1], t * q[2]);
        let f = self.frame_matrix();
        let w = f * w_rest;
        let last = self.points.last().expect("chain has points");
        self.points.push(last.offset(w.as_slice()));
        let mut nf = f * boost4(&(w_rest / shape.s));
        reorthonormalize(&mut nf);
        for i in 0..4 {
            for j in 0..4 {
                self.frame[i][j] = nf[(i, j)];
            }
        }
        Ok(())
    }

    pub fn extend<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let q: [f64; 3] = UnitSphere.sample(rng);
        self.extend_with(q)
    }
}

fn identity4() -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// Functional form of [`ChainState::extend`].
pub fn extend_chain<R: Rng + ?Sized>(state: &ChainState, rng: &mut R) -> Result<ChainState> {
    let mut next = state.clone();
    next.extend(rng)?;
    Ok(next)
}

/// `cosh theta_M` of adjacent equivalent links as realized by the
/// construction (Minkowski form of the coordinates).
pub fn cosh_theta_m(mu: f64, lambda0: f64) -> f64 {
    let l2 = lambda0 * lambda0;
    (mu * mu + l2) / (mu * mu - 2.0 * l2)
}

/// `(mu^2 - lambda0^2) / (mu^2 - 2 lambda0^2)`, obtained when the
/// distortion is subtracted from the adjacent-link product instead of added.
pub fn cosh_theta_m_subtracted(mu: f64, lambda0: f64) -> f64 {
    let l2 = lambda0 * lambda0;
    (mu * mu - l2) / (mu * mu - 2.0 * l2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkAngle {
    /// Angle from the distorted scalar product (zero for equivalent links).
    pub theta: f64,
    /// Angle from the Minkowski form of the link coordinates.
    pub theta_m: f64,
    pub cosh_theta_m: f64,
}

/// Angles between two equivalent timelike links.
pub fn link_angle(spec: &WorldFunctionSpec, v1: &PairVector, v2: &PairVector, tol: f64) -> Result<LinkAngle> {
    let inv = pair_invariants(spec, v1, v2)?;
    if !(inv.len1 > 0.0 && inv.len2 > 0.0) {
        return Err(Error::NonTimelike("link angles need timelike links".into()));
    }
    if !is_equivalent(spec, v1, v2, tol)? {
        return Err(Error::NotEquivalent);
    }
    let cosh = (inv.product / (inv.len1 * inv.len2).sqrt()).max(1.0);
    let a = v1.components();
    let b = v2.components();
    let (na, nb) = (minkowski_dot(&a, &a), minkowski_dot(&b, &b));
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::NonTimelike("Minkowski parts of the links are not timelike".into()));
    }
    let cosh_m = (minkowski_dot(&a, &b) / (na * nb).sqrt()).max(1.0);
    Ok(LinkAngle {
        theta: cosh.acosh(),
        theta_m: cosh_m.acosh(),
        cosh_theta_m: cosh_m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassMomentum {
    pub m: f64,
    pub p: [f64; 4],
}

/// `m = b mu` and `p_k = b c (latest link)_k` in lab coordinates.
pub fn mass_and_momentum(state: &ChainState, b: f64) -> Result<MassMomentum> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Invalid(format!("b = {b} must be positive")));
    }
    let n = state.points.len();
    if n < 2 {
        return Err(Error::Invalid("chain has no link".into()));
    }
    let w = state.points[n - 2].delta_to(&state.points[n - 1]);
    let k = b * state.c;
    Ok(MassMomentum {
        m: b * state.mu,
        p: [k * w[0], k * w[1], k * w[2], k * w[3]],
    })
}

fn default_steps() -> usize {
    100
}
fn default_chains() -> usize {
    1000
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub mu: f64,
    pub lambda0: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_chains")]
    pub n_chains: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub c: f64,
    /// Mass transfer coefficient `b` (g/cm).
    #[serde(default = "one")]
    pub b_coeff: f64,
}

impl ChainConfig {
    pub fn new(mu: f64, lambda0: f64, n_steps: usize, n_chains: usize, seed: u64) -> Self {
        Self {
            mu,
            lambda0,
            n_steps,
            n_chains,
            seed,
            c: 1.0,
            b_coeff: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        LinkShape::new(self.mu, self.lambda0)?;
        if self.n_chains == 0 {
            return Err(Error::Invalid("n_chains must be >= 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) || !(self.b_coeff > 0.0 && self.b_coeff.is_finite()) {
            return Err(Error::Invalid("c and b_coeff must be positive".into()));
        }
        Ok(())
    }

    fn rng(&self, chain: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chain as u64);
        rng
    }
}

/// Chain number `index` of the ensemble described by `cfg`.
pub fn simulate_chain(cfg: &ChainConfig, index: usize) -> Result<ChainState> {
    cfg.validate()?;
    let mut state = ChainState::new(cfg.mu, cfg.lambda0, cfg.seed)?;
    state.c = cfg.c;
    let mut rng = cfg.rng(index);
    for _ in 0..cfg.n_steps {
        state.extend(&mut rng)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Default)]
struct Accum {
    n_pairs: usize,
    sum_cosh: f64,
    sum_cosh2: f64,
    sum_theta: f64,
    sum_dx2: f64,
    sum_dt: f64,
    sum_dx: [f64; 3],
    sum_dx_sq: [f64; 3],
    msd: Vec<f64>,
}

impl Accum {
    fn merge(&mut self, o: &Accum) {
        self.n_pairs += o.n_pairs;
        self.sum_cosh += o.sum_cosh;
        self.sum_cosh2 += o.sum_cosh2;
        self.sum_theta += o.sum_theta;
        self.sum_dx2 += o.sum_dx2;
        self.sum_dt += o.sum_dt;
        for k in 0..3 {
            self.sum_dx[k] += o.sum_dx[k];
            self.sum_dx_sq[k] += o.sum_dx_sq[k];
        }
        if self.msd.len() < o.msd.len() {
            self.msd.resize(o.msd.len(), 0.0);
        }
        for (a, b) in self.msd.iter_mut().zip(&o.msd) {
            *a += b;
        }
    }
}

fn run_one(cfg: &ChainConfig, index: usize) -> Result<Accum> {
    let shape = LinkShape::new(cfg.mu, cfg.lambda0)?;
    let mut state = ChainState::new(cfg.mu, cfg.lambda0, cfg.seed)?;
    let mut rng = cfg.rng(index);
    let mut acc = Accum {
        msd: vec![0.0; cfg.n_steps + 2],
        ..Default::default()
    };
    let mut prev = Vector4::from_column_slice(&state.points[0].delta_to(&state.points[1]));
    let start = state.points[0].coords().to_vec();
    let record = |acc: &mut Accum, k: usize, p: &Point| {
        let d: f64 = (1..4).map(|i| (p.coords()[i] - start[i]).powi(2)).sum();
        acc.msd[k] += d;
    };
    record(&mut acc, 1, &state.points[1]);
    for k in 0..cfg.n_steps {
        let f_prev = state.frame_matrix();
        state.extend(&mut rng)?;
        let n = state.points.len();
        let w = Vector4::from_column_slice(&state.points[n - 2].delta_to(&state.points[n - 1]));
        let cosh = minkowski_dot(prev.as_slice(), w.as_slice()) / (shape.s * shape.s);
        acc.n_pairs += 1;
        acc.sum_cosh += cosh;
        acc.sum_cosh2 += cosh * cosh;
        acc.sum_theta += cosh.max(1.0).acosh();
        let y = eta_apply_transpose(&f_prev, &w);
        for i in 0..3 {
            acc.sum_dx[i] += y[i + 1];
            acc.sum_dx_sq[i] += y[i + 1] * y[i + 1];
        }
        acc.sum_dx2 += y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
        acc.sum_dt += y[0] / cfg.c;
        record(&mut acc, k + 2, &state.points[n - 1]);
        prev = w;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStatistics {
    pub config: ChainConfig,
    /// Number of adjacent-link pairs averaged over.
    pub sample_count: usize,
    pub mean_cosh_theta_m: f64,
    pub stderr_cosh_theta_m: f64,
    pub mean_theta_m: f64,
    /// `cosh theta_M` implied by the link construction.
    pub expected_cosh_theta_m: f64,
    /// Mean stochastic speed `c tanh theta_M`.
    pub mean_v_st: f64,
    /// Mean squared lab-frame spatial displacement from `P0`, indexed by
    /// point number.
    pub transverse_msd: Vec<f64>,
    /// Mean rest-frame transverse step and its standard error per axis.
    pub mean_transverse_step: [f64; 3],
    pub stderr_transverse_step: [f64; 3],
    /// Mean squared rest-frame transverse step (`lambda0^2 kappa^2`).
    pub mean_transverse_step_sq: f64,
    /// Diffusion coefficient per axis from rest-frame increments.
    pub diffusion_empirical: f64,
    /// `hbar / 2m = c lambda0^2 / mu` under `m = b mu`, `lambda0^2 = hbar / 2bc`.
    pub hbar_over_2m: f64,
    pub hbar: f64,
    pub mass: f64,
    /// Prefactor making `alpha r_min c theta_M = hbar / 2m` with
    /// `theta_M = sqrt(2) lambda0 / mu`.
    pub alpha: f64,
    /// The same prefactor with the measured mean `theta_M`.
    pub alpha_measured: f64,
}

/// Simulates `n_chains` independent chains in parallel. Chain `i` draws
/// from stream `i` of a ChaCha generator seeded with `seed`, and partial
/// sums are merged in chain order, so results are reproducible bit for bit
/// regardless of thread count.
pub fn run_ensemble(cfg: &ChainConfig) -> Result<ChainStatistics> {
    cfg.validate()?;
    let parts: Vec<Accum> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|i| run_one(cfg, i))
        .collect::<Result<_>>()?;
    let mut acc = Accum::default();
    for p in &parts {
        acc.merge(p);
    }
    let chains = cfg.n_chains as f64;
    let np = acc.n_pairs.max(1) as f64;
    let mean_cosh = acc.sum_cosh / np;
    let var = (acc.sum_cosh2 / np - mean_cosh * mean_cosh).max(0.0) * np / (np - 1.0).max(1.0);
    let mean_theta = acc.sum_theta / np;
    let mut mean_step = [0.0; 3];
    let mut se_step = [0.0; 3];
    for k in 0..3 {
        let m = acc.sum_dx[k] / np;
        let v = (acc.sum_dx_sq[k] / np - m * m).max(0.0) * np / (np - 1.0).max(1.0);
        mean_step[k] = m;
        se_step[k] = (v / np).sqrt();
    }
    let mean_dx2 = acc.sum_dx2 / np;
    let mean_dt = acc.sum_dt / np;
    let diffusion = if acc.n_pairs > 0 { mean_dx2 / (3.0 * 2.0 * mean_dt) } else { 0.0 };

    let l2 = cfg.lambda0 * cfg.lambda0;
    let hbar = 2.0 * cfg.b_coeff * cfg.c * l2;
    let mass = cfg.b_coeff * cfg.mu;
    let hbar_over_2m = cfg.c * l2 / cfg.mu;
    let r_min = 1.5f64.sqrt() * cfg.lambda0;
    let theta_nominal = 2f64.sqrt() * cfg.lambda0 / cfg.mu;
    let alpha = if cfg.lambda0 > 0.0 {
        hbar_over_2m / (r_min * cfg.c * theta_nominal)
    } else {
        1.0 / 3f64.sqrt()
    };
    let alpha_measured = if mean_theta > 0.0 {
        hbar_over_2m / (r_min * cfg.c * mean_theta)
    } else {
        f64::NAN
    };

    Ok(ChainStatistics {
        config: *cfg,
        sample_count: acc.n_pairs,
        mean_cosh_theta_m: mean_cosh,
        stderr_cosh_theta_m: (var / np).sqrt(),
        mean_theta_m: mean_theta,
        expected_cosh_theta_m: cosh_theta_m(cfg.mu, cfg.lambda0),
        mean_v_st: cfg.c * mean_theta.tanh(),
        transverse_msd: acc.msd.iter().skip(1).map(|x| x / chains).collect(),
        mean_transverse_step: mean_step,
        stderr_transverse_step: se_step,
        mean_transverse_step_sq: mean_dx2,
        diffusion_empirical: diffusion,
        hbar_over_2m,
        hbar,
        mass,
        alpha,
        alpha_measured,
    })
}
