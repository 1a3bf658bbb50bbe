//! One-dimensional ensemble hydrodynamics: stochastic velocity, Bohm
//! potential and an explicit predictor–corrector stepper for
//!
//! ```text
//! rho_t + (rho v)_x = 0,    m (v_t + v v_x) = -(U_B)_x,
//! U_B = hbar^2/(8m) (rho_x/rho)^2 - hbar^2/(4m) rho_xx/rho.
//! ```
//!
//! Boundaries carry two ghost cells per side filled by quadratic
//! extrapolation of `ln rho` and `v`; a free Gaussian packet (quadratic
//! `ln rho`, linear `v`) is reproduced exactly there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RHO_FLOOR: f64 = 1e-300;
const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && dx > 0.0 && x_max > x_min) {
            return Err(Error::Invalid(format!("bad grid [{x_min}, {x_max}] with dx = {dx}")));
        }
        let n = ((x_max - x_min) / dx).round() as usize + 1;
        if n < 4 {
            return Err(Error::Invalid("grid needs at least 4 nodes".into()));
        }
        Ok(Self { x_min, dx, n })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub hbar: f64,
    pub m: f64,
    pub t: f64,
}

/// A field together with the nodes where the density fell below
/// [`RHO_FLOOR`]; the field is set to zero there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedField {
    pub values: Vec<f64>,
    pub zero_density: Vec<usize>,
}

impl EnsembleState {
    pub fn new(grid: Grid, rho: Vec<f64>, v: Vec<f64>, hbar: f64, m: f64) -> Result<Self> {
        let s = Self { grid, rho, v, hbar, m, t: 0.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.len() != self.grid.n {
            return Err(Error::DimensionMismatch { expected: self.grid.n, got: self.rho.len() });
        }
        if self.v.len() != self.grid.n {
            return Err(Error::DimensionMismatch { expected: self.grid.n, got: self.v.len() });
        }
        if self.rho.iter().chain(&self.v).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.rho.iter().any(|&r| r < 0.0) {
            return Err(Error::Invalid("density must be nonnegative".into()));
        }
        if !(self.m > 0.0 && self.m.is_finite()) || !(self.hbar >= 0.0 && self.hbar.is_finite()) {
            return Err(Error::Invalid("need m > 0 and hbar >= 0".into()));
        }
        Ok(())
    }

    /// Normalized Gaussian packet of width `s0` centred at `center`,
    /// moving with uniform velocity `v0`.
    pub fn gaussian(grid: Grid, s0: f64, center: f64, v0: f64, hbar: f64, m: f64) -> Result<Self> {
        if !(s0 > 0.0) {
            return Err(Error::Invalid(format!("width s0 = {s0} must be positive")));
        }
        let mut rho: Vec<f64> = grid
            .xs()
            .iter()
            .map(|x| (-(x - center).powi(2) / (2.0 * s0 * s0)).exp())
            .collect();
        let mass: f64 = rho.iter().sum::<f64>() * grid.dx;
        rho.iter_mut().for_each(|r| *r /= mass);
        Self::new(grid, rho, vec![v0; grid.n], hbar, m)
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.dx
    }

    pub fn mean_position(&self) -> f64 {
        let xs = self.grid.xs();
        xs.iter().zip(&self.rho).map(|(x, r)| x * r).sum::<f64>() * self.grid.dx / self.mass()
    }

    /// Standard deviation of `rho` as a distribution.
    pub fn width(&self) -> f64 {
        let mean = self.mean_position();
        let xs = self.grid.xs();
        let var = xs.iter().zip(&self.rho).map(|(x, r)| (x - mean).powi(2) * r).sum::<f64>() * self.grid.dx / self.mass();
        var.sqrt()
    }

    /// Largest admissible time step, `0.25 dx / max(|v| + pi hbar / (m dx))`.
    pub fn cfl_bound(&self) -> f64 {
        let wave = std::f64::consts::PI * self.hbar / (self.m * self.grid.dx);
        let vmax = self.v.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let speed = vmax + wave;
        if speed == 0.0 {
            f64::INFINITY
        } else {
            0.25 * self.grid.dx / speed
        }
    }
}

/// Width of a free Gaussian packet, `s(t)^2 = s0^2 + (hbar t / (2 m s0))^2`.
pub fn free_gaussian_width(s0: f64, hbar: f64, m: f64, t: f64) -> f64 {
    (s0 * s0 + (hbar * t / (2.0 * m * s0)).powi(2)).sqrt()
}

fn extend_quadratic(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = Vec::with_capacity(n + 2 * GHOST);
    out.push(6.0 * f[0] - 8.0 * f[1] + 3.0 * f[2]);
    out.push(3.0 * f[0] - 3.0 * f[1] + f[2]);
    out.extend_from_slice(f);
    out.push(3.0 * f[n - 1] - 3.0 * f[n - 2] + f[n - 3]);
    out.push(6.0 * f[n - 1] - 8.0 * f[n - 2] + 3.0 * f[n - 3]);
    out
}

fn ln_rho(rho: &[f64]) -> Vec<f64> {
    rho.iter().map(|r| r.max(RHO_FLOOR).ln()).collect()
}

fn flagged(rho: &[f64]) -> Vec<usize> {
    rho.iter().enumerate().filter(|(_, r)| **r <= RHO_FLOOR).map(|(i, _)| i).collect()
}

/// `u = -(hbar/2m) d/dx ln rho`.
pub fn stochastic_velocity(state: &EnsembleState) -> FlaggedField {
    let dx = state.grid.dx;
    let k = state.hbar / (2.0 * state.m);
    let l = extend_quadratic(&ln_rho(&state.rho));
    let zero = flagged(&state.rho);
    let mut u: Vec<f64> = (0..state.grid.n)
        .map(|i| {
            let j = i + GHOST;
            -k * (l[j + 1] - l[j - 1]) / (2.0 * dx)
        })
        .collect();
    for &i in &zero {
        u[i] = 0.0;
    }
    FlaggedField { values: u, zero_density: zero }
}

// U_B on the extended grid (ghosts included; the outermost ghost on each
// side is left at zero because it lacks a neighbour).
fn bohm_extended(rho_ext: &[f64], dx: f64, hbar: f64, m: f64) -> Vec<f64> {
    let a = hbar * hbar / (8.0 * m);
    let b = hbar * hbar / (4.0 * m);
    let mut u = vec![0.0; rho_ext.len()];
    for j in 1..rho_ext.len() - 1 {
        let r = rho_ext[j];
        if r <= RHO_FLOOR {
            continue;
        }
        let d1 = (rho_ext[j + 1] - rho_ext[j - 1]) / (2.0 * dx);
        let d2 = (rho_ext[j + 1] - 2.0 * r + rho_ext[j - 1]) / (dx * dx);
        u[j] = a * (d1 / r).powi(2) - b * d2 / r;
    }
    u
}

fn rho_extended(rho: &[f64]) -> Vec<f64> {
    let l = extend_quadratic(&ln_rho(rho));
    let mut out: Vec<f64> = l.iter().map(|x| x.exp()).collect();
    out[GHOST..GHOST + rho.len()].copy_from_slice(rho);
    out
}

/// Bohm potential from second-order central differences of `rho`.
pub fn bohm_potential(state: &EnsembleState) -> FlaggedField {
    let ext = rho_extended(&state.rho);
    let u = bohm_extended(&ext, state.grid.dx, state.hbar, state.m);
    let zero = flagged(&state.rho);
    let mut values = u[GHOST..GHOST + state.grid.n].to_vec();
    for &i in &zero {
        values[i] = 0.0;
    }
    FlaggedField { values, zero_density: zero }
}

fn rhs(rho: &[f64], v: &[f64], dx: f64, hbar: f64, m: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rho.len();
    let re = rho_extended(rho);
    let ve = extend_quadratic(v);
    let ub = bohm_extended(&re, dx, hbar, m);
    let flux = |j: usize| 0.5 * (re[j] * ve[j] + re[j + 1] * ve[j + 1]);
    let mut drho = vec![0.0; n];
    let mut dv = vec![0.0; n];
    for i in 0..n {
        let j = i + GHOST;
        drho[i] = -(flux(j) - flux(j - 1)) / dx;
        dv[i] = -ve[j] * (ve[j + 1] - ve[j - 1]) / (2.0 * dx) - (ub[j + 1] - ub[j - 1]) / (2.0 * dx * m);
    }
    (drho, dv)
}

/// One Heun (explicit trapezoidal) step of length `dt`.
pub fn step_hydrodynamics(state: &EnsembleState, dt: f64) -> Result<EnsembleState> {
    let bound = state.cfl_bound();
    if !(dt > 0.0 && dt.is_finite()) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    let dx = state.grid.dx;
    let (hbar, m) = (state.hbar, state.m);
    let (k1r, k1v) = rhs(&state.rho, &state.v, dx, hbar, m);
    let rho1: Vec<f64> = state.rho.iter().zip(&k1r).map(|(r, k)| r + dt * k).collect();
    let v1: Vec<f64> = state.v.iter().zip(&k1v).map(|(v, k)| v + dt * k).collect();
    let (k2r, k2v) = rhs(&rho1, &v1, dx, hbar, m);
    let rho = (0..state.grid.n)
        .map(|i| state.rho[i] + 0.5 * dt * (k1r[i] + k2r[i]))
        .collect();
    let v = (0..state.grid.n)
        .map(|i| state.v[i] + 0.5 * dt * (k1v[i] + k2v[i]))
        .collect();
    let next = EnsembleState {
        grid: state.grid,
        rho,
        v,
        hbar,
        m,
        t: state.t + dt,
    };
    if next.rho.iter().chain(&next.v).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeResiduals {
    /// RMS over interior space–time nodes of `rho_t + (rho v)_x`.
    pub continuity: f64,
    /// Density-weighted RMS of `v_t + v v_x + (U_B)_x / m`.
    pub momentum: f64,
}

/// Discrete residuals of both equations over a stored trajectory, with
/// centred differences in time and space.
pub fn residuals(states: &[EnsembleState]) -> Result<PdeResiduals> {
    if states.len() < 3 {
        return Err(Error::Invalid("need at least 3 states".into()));
    }
    let g = states[0].grid;
    if states.iter().any(|s| s.grid != g) {
        return Err(Error::Invalid("all states must share one grid".into()));
    }
    let dx = g.dx;
    let (mut c2, mut cn) = (0.0, 0usize);
    let (mut m2, mut mw) = (0.0, 0.0);
    for k in 1..states.len() - 1 {
        let (a, s, b) = (&states[k - 1], &states[k], &states[k + 1]);
        let dt = b.t - a.t;
        if !(dt > 0.0) {
            return Err(Error::Invalid("times must increase".into()));
        }
        let ub = bohm_potential(s).values;
        for i in 1..g.n - 1 {
            let rt = (b.rho[i] - a.rho[i]) / dt;
            let flux = (s.rho[i + 1] * s.v[i + 1] - s.rho[i - 1] * s.v[i - 1]) / (2.0 * dx);
            c2 += (rt + flux).powi(2);
            cn += 1;
            let vt = (b.v[i] - a.v[i]) / dt;
            let r = vt + s.v[i] * (s.v[i + 1] - s.v[i - 1]) / (2.0 * dx) + (ub[i + 1] - ub[i - 1]) / (2.0 * dx * s.m);
            m2 += s.rho[i] * r * r;
            mw += s.rho[i];
        }
    }
    Ok(PdeResiduals {
        continuity: (c2 / cn.max(1) as f64).sqrt(),
        momentum: if mw > 0.0 { (m2 / mw).sqrt() } else { 0.0 },
    })
}

fn d_xmin() -> f64 {
    -12.0
}
fn d_xmax() -> f64 {
    12.0
}
fn d_dx() -> f64 {
    0.05
}
fn d_one() -> f64 {
    1.0
}
fn d_tend() -> f64 {
    1.0
}
fn d_every() -> usize {
    100
}

/// Gaussian initial value problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "d_xmin")]
    pub x_min: f64,
    #[serde(default = "d_xmax")]
    pub x_max: f64,
    #[serde(default = "d_dx")]
    pub dx: f64,
    #[serde(default = "d_one")]
    pub s0: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default = "d_one")]
    pub hbar: f64,
    #[serde(default = "d_one")]
    pub m: f64,
    #[serde(default = "d_tend")]
    pub t_end: f64,
    /// Fixed step; `None` takes the CFL bound of the current state at
    /// every step.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Keep every `output_every`-th state (the final one is always kept).
    #[serde(default = "d_every")]
    pub output_every: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl EnsembleConfig {
    pub fn initial_state(&self) -> Result<EnsembleState> {
        let grid = Grid::new(self.x_min, self.x_max, self.dx)?;
        EnsembleState::gaussian(grid, self.s0, self.center, self.v0, self.hbar, self.m)
    }
}

/// Integrates to `t_end` and returns the kept states, the first being the
/// initial one.
pub fn run_trajectory(cfg: &EnsembleConfig) -> Result<Vec<EnsembleState>> {
    if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        return Err(Error::Invalid(format!("t_end = {} must be >= 0", cfg.t_end)));
    }
    let mut state = cfg.initial_state()?;
    let every = cfg.output_every.max(1);
    let mut out = vec![state.clone()];
    let mut k = 0usize;
    while state.t < cfg.t_end * (1.0 - 1e-14) {
        let dt = cfg.dt.unwrap_or_else(|| state.cfl_bound());
        let h = dt.min(cfg.t_end - state.t);
        state = step_hydrodynamics(&state, h)?;
        k += 1;
        if k.is_multiple_of(every) {
            out.push(state.clone());
        }
    }
    if !k.is_multiple_of(every) {
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(dx: f64) -> EnsembleState {
        EnsembleState::gaussian(Grid::new(-8.0, 8.0, dx).unwrap(), 1.0, 0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn velocity_of_gaussian() {
        let s = gauss(0.1);
        let u = stochastic_velocity(&s);
        for (x, u) in s.grid.xs().iter().zip(&u.values) {
            assert!((u - 0.5 * x).abs() < 1e-9);
        }
    }

    #[test]
    fn bohm_converges_second_order() {
        let err = |dx: f64| {
            let s = gauss(dx);
            let ub = bohm_potential(&s).values;
            s.grid
                .xs()
                .iter()
                .zip(&ub)
                .filter(|(x, _)| x.abs() <= 4.0)
                .map(|(x, u)| (u - (0.25 - x * x / 8.0)).abs())
                .fold(0.0, f64::max)
        };
        let r = err(0.1) / err(0.05);
        assert!((r - 4.0).abs() < 0.5, "ratio {r}");
    }

    #[test]
    fn static_state_is_unchanged() {
        let mut s = gauss(0.1);
        s.hbar = 0.0;
        let n = step_hydrodynamics(&s, 0.01).unwrap();
        assert_eq!(n.rho, s.rho);
        assert_eq!(n.v, s.v);
    }

    #[test]
    fn cfl_violation() {
        let s = gauss(0.1);
        let bound = s.cfl_bound();
        assert!(matches!(step_hydrodynamics(&s, 2.0 * bound), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn zero_density_flagged() {
        let mut s = gauss(0.5);
        s.rho[0] = 0.0;
        let u = stochastic_velocity(&s);
        assert_eq!(u.zero_density, vec![0]);
        assert_eq!(u.values[0], 0.0);
    }
}
