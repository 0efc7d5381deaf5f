//! Charging dynamics under the local field `(ω/2) Σ σ^x`, work and
//! maximal average power.
//!
//! In the σ^x eigenbasis the charging unitary is diagonal with phases
//! `e^{-iωt(N - 2|a|)/2}` (`|a|` the number of flipped spins), so
//!
//! ```text
//! Tr(H ρ(t)) = Σ_{d=-N..N} S_d e^{-iωdt},   S_{-d} = conj(S_d)
//! ```
//!
//! and `W(t)` is a trigonometric polynomial of degree `N` in `ωt`.
//! [`WorkSeries`] precomputes the `S_d`; evaluating `W` on a dense time grid
//! then costs `O(N)` per point.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hadamard_conjugate, hadamard_transform, DenseOperator, C64, ZERO};
use crate::model::{build_h0, normalize, ModelParams, NormalizedHamiltonian};
use crate::states::{prepare, QuantumState, StatePrep};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "OptimizerConfig::default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "OptimizerConfig::default_refine_tolerance")]
    pub refine_tolerance: f64,
}

impl OptimizerConfig {
    pub const DEFAULT_GRID_POINTS: usize = 2000;
    pub const DEFAULT_REFINE_TOLERANCE: f64 = 1e-10;

    fn default_grid_points() -> usize {
        Self::DEFAULT_GRID_POINTS
    }

    fn default_refine_tolerance() -> f64 {
        Self::DEFAULT_REFINE_TOLERANCE
    }

    pub fn with_grid_points(mut self, n: usize) -> Self {
        self.grid_points = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points", "must be at least 2"));
        }
        if !(self.refine_tolerance > 0.0) {
            return Err(Error::invalid("refine_tolerance", "must be positive"));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points: Self::DEFAULT_GRID_POINTS,
            refine_tolerance: Self::DEFAULT_REFINE_TOLERANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub t_star: f64,
    pub work_at_t_star: f64,
    pub p_max: f64,
    pub degenerate_ground: bool,
    pub grid_points: usize,
}

/// Applies `⊗_j exp(-i θ σ^x)` to a state vector in place.
fn apply_x_rotation(v: &mut [C64], n_sites: usize, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let ms = C64::new(0.0, -s);
    let cc = C64::new(c, 0.0);
    for k in 0..n_sites {
        let mask = 1usize << k;
        for b in 0..v.len() {
            if b & mask == 0 {
                let (a0, a1) = (v[b], v[b | mask]);
                v[b] = cc * a0 + ms * a1;
                v[b | mask] = ms * a0 + cc * a1;
            }
        }
    }
}

/// Charging unitary `U(t) = ⊗_j exp(-i (ω/2) σ^x t)` as a dense matrix.
pub fn charging_unitary(params: &ModelParams, t: f64) -> DenseOperator {
    let dim = params.dim();
    let mut u = DenseOperator::identity(dim);
    let theta = 0.5 * params.charging_omega * t;
    for j in 0..dim {
        let mut col = u.column(j).to_vec();
        apply_x_rotation(&mut col, params.n_sites, theta);
        for (i, x) in col.into_iter().enumerate() {
            u.set(i, j, x);
        }
    }
    u
}

/// `U(t) ρ U(t)†` (or `U(t)|ψ⟩`) with the factored charging unitary.
pub fn evolve(state0: &QuantumState, params: &ModelParams, t: f64) -> Result<QuantumState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", format!("{t} must be finite and non-negative")));
    }
    if state0.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: state0.dim(),
        });
    }
    let n = params.n_sites;
    let theta = 0.5 * params.charging_omega * t;
    Ok(match state0 {
        QuantumState::Pure(v) => {
            let mut out = v.clone();
            apply_x_rotation(&mut out, n, theta);
            QuantumState::Pure(out)
        }
        QuantumState::Mixed(rho) => {
            // U ρ U† = U (U ρ)†  for Hermitian ρ
            let left = rotate_columns(rho, n, theta);
            QuantumState::Mixed(rotate_columns(&left.adjoint(), n, theta))
        }
    })
}

fn rotate_columns(op: &DenseOperator, n: usize, theta: f64) -> DenseOperator {
    let d = op.dim();
    let mut out = DenseOperator::zeros(d);
    for j in 0..d {
        let mut col = op.column(j).to_vec();
        apply_x_rotation(&mut col, n, theta);
        for (i, x) in col.into_iter().enumerate() {
            out.set(i, j, x);
        }
    }
    out
}

/// `W = Tr(H ρ_t) - Tr(H ρ_0)`.
pub fn work(state_t: &QuantumState, state0: &QuantumState, h_norm: &NormalizedHamiltonian) -> Result<f64> {
    for s in [state_t, state0] {
        if s.dim() != h_norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: h_norm.dim(),
                found: s.dim(),
            });
        }
    }
    let w = state_t.expectation(&h_norm.matrix) - state0.expectation(&h_norm.matrix);
    Ok(w.re)
}

/// Fourier coefficients of `Tr(H ρ(t))` under uniform x-charging.
#[derive(Clone, Debug)]
pub struct WorkSeries {
    /// `S_d` for `d = 1..=N`.
    coeffs: Vec<C64>,
    omega: f64,
}

impl WorkSeries {
    pub fn new(state0: &QuantumState, h_norm: &NormalizedHamiltonian, omega: f64) -> Result<Self> {
        let dim = h_norm.dim();
        if state0.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: state0.dim(),
            });
        }
        let n = h_norm.n_sites();
        let hx = hadamard_conjugate(&h_norm.matrix);
        let pop: Vec<i64> = (0..dim).map(|a| (a as u64).count_ones() as i64).collect();
        let mut coeffs = vec![ZERO; n + 1];

        // S_d = Σ_{pop(b) - pop(a) = d} H'_{ba} ρ'_{ab}
        match state0 {
            QuantumState::Pure(psi) => {
                let mut c = psi.clone();
                hadamard_transform(&mut c);
                for a in 0..dim {
                    if c[a] == ZERO {
                        continue;
                    }
                    let col = hx.column(a);
                    for b in 0..dim {
                        let d = pop[b] - pop[a];
                        if d > 0 {
                            coeffs[d as usize] += col[b] * c[a] * c[b].conj();
                        }
                    }
                }
            }
            QuantumState::Mixed(rho) => {
                let rx = hadamard_conjugate(rho);
                for a in 0..dim {
                    let col = hx.column(a);
                    for b in 0..dim {
                        let d = pop[b] - pop[a];
                        if d > 0 {
                            coeffs[d as usize] += col[b] * rx.get(a, b);
                        }
                    }
                }
            }
        }
        Ok(Self { coeffs, omega })
    }

    /// `W(t) = 2 Σ_{d>0} Re[S_d (e^{-iωdt} - 1)]`.
    pub fn work(&self, t: f64) -> f64 {
        let x = self.omega * t;
        let mut w = 0.0;
        for (d, s) in self.coeffs.iter().enumerate().skip(1) {
            let phase = C64::from_polar(1.0, -(d as f64) * x) - 1.0;
            w += (s * phase).re;
        }
        2.0 * w
    }

    pub fn power(&self, t: f64) -> f64 {
        self.work(t) / t
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Maximum of `W(t)/t` over one charging period `(0, 2π/ω]`.
///
/// A uniform grid of `grid_points` times `k T / G` (never `t = 0`) locates
/// the best cell; golden-section search on the bracketing interval refines
/// it to `refine_tolerance`.
pub fn power_max(
    state0: &QuantumState,
    h_norm: &NormalizedHamiltonian,
    params: &ModelParams,
    opt: &OptimizerConfig,
) -> Result<PowerResult> {
    params.validate()?;
    opt.validate()?;
    let series = WorkSeries::new(state0, h_norm, params.charging_omega)?;
    Ok(maximize_power(&series, opt))
}

pub fn maximize_power(series: &WorkSeries, opt: &OptimizerConfig) -> PowerResult {
    let period = series.period();
    let g = opt.grid_points;
    let dt = period / g as f64;

    let mut best_k = 1;
    let mut best_p = f64::NEG_INFINITY;
    for k in 1..=g {
        let p = series.power(k as f64 * dt);
        if p > best_p {
            best_p = p;
            best_k = k;
        }
    }

    let mut t_star = best_k as f64 * dt;
    let lo = (best_k - 1) as f64 * dt;
    let hi = ((best_k + 1) as f64 * dt).min(period);
    let (t_ref, p_ref) = golden_section_max(|t| series.power(t), lo, hi, opt.refine_tolerance);
    if p_ref > best_p {
        t_star = t_ref;
    }
    let work = series.work(t_star);
    PowerResult {
        t_star,
        work_at_t_star: work,
        p_max: work / t_star,
        degenerate_ground: false,
        grid_points: g,
    }
}

/// Golden-section search for a maximum on `(lo, hi)`; only interior points
/// are evaluated.
fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Builds, normalizes and prepares the battery for `params`, then maximizes
/// its power.
pub fn battery_power(params: &ModelParams, prep: StatePrep, opt: &OptimizerConfig) -> Result<PowerResult> {
    let h_norm = normalize(&build_h0(params)?)?;
    let (state0, degenerate) = prepare(&h_norm, prep)?;
    let mut res = power_max(&state0, &h_norm, params, opt)?;
    res.degenerate_ground = degenerate;
    Ok(res)
}
