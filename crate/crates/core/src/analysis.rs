//! Figures of merit derived from power curves: interaction advantage,
//! jump-based critical points, finite-size scaling, and the finite- vs
//! zero-temperature power difference.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::dynamics::{power_max, OptimizerConfig, PowerResult};
use crate::error::{Error, Result};
use crate::model::{build_h0, normalize, ModelParams};
use crate::parallel::map_indexed;
use crate::states::{prepare, thermal_state, StatePrep};

/// Samples closer than this to `J = 0` count as the non-interacting point.
const ZERO_J_TOL: f64 = 1e-12;

/// `P_max` along a uniform-`J` sweep, in the order of `j_values`.
pub fn power_curve(
    base: &ModelParams,
    j_values: &[f64],
    prep: StatePrep,
    opt: &OptimizerConfig,
    workers: usize,
) -> Result<Vec<(f64, PowerResult)>> {
    map_indexed(workers, j_values.len(), |k| {
        let j = j_values[k];
        let params = base.clone().with_uniform_j(j);
        crate::dynamics::battery_power(&params, prep, opt).map(|r| (j, r))
    })
    .into_iter()
    .collect()
}

/// `start, start + step, ...` up to and including `stop` (within half a step).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "step must be positive");
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| {
            let x = start + k as f64 * step;
            // snap to the step lattice so J = 0 is hit exactly
            let snapped = (x / step).round() * step;
            if (snapped - x).abs() < 1e-9 * step {
                snapped
            } else {
                x
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageResult {
    pub j_max_over_h: f64,
    pub p_at_jmax: f64,
    pub p_at_zero: f64,
    pub p_adv: f64,
    pub relative_gain: f64,
}

/// Location and value of the power maximum over `search_range`, compared
/// with the non-interacting point. Ties go to the smallest `|J|`.
pub fn find_jmax(curve: &[(f64, f64)], search_range: (f64, f64)) -> Result<AdvantageResult> {
    let p_at_zero = curve
        .iter()
        .find(|(j, _)| j.abs() < ZERO_J_TOL)
        .map(|&(_, p)| p)
        .ok_or_else(|| Error::InsufficientData("power curve has no J = 0 sample".into()))?;
    let (lo, hi) = search_range;
    let in_range: Vec<(f64, f64)> = curve.iter().copied().filter(|(j, _)| *j >= lo && *j <= hi).collect();
    if in_range.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 samples in [{lo}, {hi}], found {}",
            in_range.len()
        )));
    }
    let mut best = in_range[0];
    for &(j, p) in &in_range[1..] {
        let better = p > best.1 || (p == best.1 && j.abs() < best.0.abs());
        if better {
            best = (j, p);
        }
    }
    let p_adv = best.1 - p_at_zero;
    Ok(AdvantageResult {
        j_max_over_h: best.0,
        p_at_jmax: best.1,
        p_at_zero,
        p_adv,
        relative_gain: p_adv / p_at_zero,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// From `J = 0` towards positive `J`.
    Ascending,
    /// From `J = 0` towards negative `J`.
    Descending,
}

/// Default jump threshold, as a multiple of the median adjacent `|ΔP|`.
pub const DEFAULT_JUMP_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub j_left: f64,
    pub j_right: f64,
    /// Signed `P(j_right) - P(j_left)`.
    pub delta: f64,
}

impl Jump {
    pub fn location(&self) -> f64 {
        0.5 * (self.j_left + self.j_right)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn check_uniform(curve: &[(f64, f64)]) -> Result<()> {
    if curve.len() < 3 {
        return Err(Error::InsufficientData("jump detection needs at least 3 samples".into()));
    }
    let step = curve[1].0 - curve[0].0;
    if !(step > 0.0) {
        return Err(Error::invalid("power_curve", "samples must be sorted by increasing J"));
    }
    for w in curve.windows(2) {
        if ((w[1].0 - w[0].0) - step).abs() > 1e-6 * step.max(1e-12) + 1e-12 {
            return Err(Error::invalid("power_curve", "samples must be uniformly spaced"));
        }
    }
    Ok(())
}

/// Every adjacent pair whose `|ΔP|` exceeds `threshold_factor` times the
/// median adjacent `|ΔP|` of the whole curve, in increasing `J`.
pub fn detect_jumps(curve: &[(f64, f64)], threshold_factor: f64) -> Result<Vec<Jump>> {
    check_uniform(curve)?;
    let diffs: Vec<f64> = curve.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let threshold = threshold_factor * median(diffs.clone());
    Ok(curve
        .windows(2)
        .zip(&diffs)
        .filter(|(_, &d)| d > threshold)
        .map(|(w, _)| Jump {
            j_left: w[0].0,
            j_right: w[1].0,
            delta: w[1].1 - w[0].1,
        })
        .collect())
}

/// Midpoints of the adjacent steps that are local maxima of `|Δy|` along
/// the curve and exceed `threshold_factor` times its median `|Δy|`.
///
/// A finite chain's order parameter changes abruptly at a ground-state level
/// crossing and drifts smoothly in between. Each crossing shows up as an
/// isolated peak in the step sizes, while the drift does not.
pub fn non_analytic_points(curve: &[(f64, f64)], threshold_factor: f64) -> Result<Vec<f64>> {
    check_uniform(curve)?;
    let diffs: Vec<f64> = curve.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let threshold = threshold_factor * median(diffs.clone());
    let last = diffs.len() - 1;
    Ok((0..diffs.len())
        .filter(|&k| {
            let d = diffs[k];
            d > threshold && (k == 0 || d > diffs[k - 1]) && (k == last || d >= diffs[k + 1])
        })
        .map(|k| 0.5 * (curve[k].0 + curve[k + 1].0))
        .collect())
}

/// Jumps on one side of `J = 0`, ordered outward from `J = 0`.
pub fn jumps_outward(curve: &[(f64, f64)], direction: Direction, threshold_factor: f64) -> Result<Vec<Jump>> {
    let mut jumps = detect_jumps(curve, threshold_factor)?;
    match direction {
        Direction::Ascending => jumps.retain(|j| j.j_left >= -ZERO_J_TOL),
        Direction::Descending => {
            jumps.retain(|j| j.j_right <= ZERO_J_TOL);
            jumps.reverse();
        }
    }
    Ok(jumps)
}

/// First jump met scanning outward from `J = 0`; `None` for smooth curves.
pub fn detect_first_jump(curve: &[(f64, f64)], direction: Direction, threshold_factor: f64) -> Result<Option<f64>> {
    Ok(jumps_outward(curve, direction, threshold_factor)?
        .first()
        .map(Jump::location))
}

/// Local minima of a fidelity scan that fall below `threshold`. Each dip is
/// placed at `J + δJ/2`, the middle of the pair of couplings it compares.
pub fn fidelity_dips(scan: &[(f64, f64)], delta_j: f64, threshold: f64) -> Vec<f64> {
    (0..scan.len())
        .filter(|&k| {
            let f = scan[k].1;
            let left = k.checked_sub(1).map_or(f64::INFINITY, |i| scan[i].1);
            let right = scan.get(k + 1).map_or(f64::INFINITY, |p| p.1);
            f < threshold && f <= left && f <= right
        })
        .map(|k| scan[k].0 + 0.5 * delta_j)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub j_c_by_n: BTreeMap<usize, f64>,
    pub j_c_infinity: f64,
    /// `a` in `|J^c_N - J^c_∞| = a N^b`.
    pub prefactor: f64,
    /// `b` in `|J^c_N - J^c_∞| = a N^b`.
    pub exponent: f64,
    pub r_squared: f64,
    /// `ln|J^c_N - J^c_∞| - (ln a + b ln N)` per size used in the fit.
    pub residuals: BTreeMap<usize, f64>,
    /// Sizes dropped because `J^c_N = J^c_∞`.
    pub excluded: Vec<usize>,
}

/// Least-squares line through `(ln N, ln|J^c_N - J^c_∞|)`.
pub fn scaling_fit(j_c_by_n: &BTreeMap<usize, f64>, j_c_infinity: f64) -> Result<ScalingFit> {
    let mut pts = Vec::new();
    let mut excluded = Vec::new();
    for (&n, &jc) in j_c_by_n {
        let dist = (jc - j_c_infinity).abs();
        if dist == 0.0 || n == 0 {
            excluded.push(n);
        } else {
            pts.push((n, (n as f64).ln(), dist.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 2 usable sizes, got {}",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.2).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.2 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all sizes identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: BTreeMap<usize, f64> = pts.iter().map(|p| (p.0, p.2 - (intercept + slope * p.1))).collect();
    let ss_res: f64 = residuals.values().map(|r| r * r).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ScalingFit {
        j_c_by_n: j_c_by_n.clone(),
        j_c_infinity,
        prefactor: intercept.exp(),
        exponent: slope,
        r_squared,
        residuals,
        excluded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalDiff {
    pub beta_over_h: f64,
    pub j_over_h: f64,
    /// `P_max(T > 0) - P_max(T = 0)`.
    pub p_t_diff: f64,
}

/// `P_max` with a thermal initial state minus `P_max` from the ground
/// state, on every `(J, β)` cell. Rows are ordered by `J`, then `β`.
pub fn thermal_diff_map(
    params: &ModelParams,
    beta_grid: &[f64],
    j_grid: &[f64],
    opt: &OptimizerConfig,
    workers: usize,
) -> Result<Vec<ThermalDiff>> {
    if beta_grid.is_empty() || j_grid.is_empty() {
        return Err(Error::InsufficientData("thermal map needs non-empty grids".into()));
    }
    if let Some(b) = beta_grid.iter().find(|b| !(**b >= 0.0)) {
        return Err(Error::invalid("beta", format!("{b} must be non-negative")));
    }
    let rows = map_indexed(workers, j_grid.len(), |k| -> Result<Vec<ThermalDiff>> {
        let j = j_grid[k];
        let p = params.clone().with_uniform_j(j);
        let h_norm = normalize(&build_h0(&p)?)?;
        let (ground, _) = prepare(&h_norm, StatePrep::Ground)?;
        let p_zero = power_max(&ground, &h_norm, &p, opt)?.p_max;
        beta_grid
            .iter()
            .map(|&beta| {
                let rho = thermal_state(&h_norm, beta)?;
                let p_beta = power_max(&rho, &h_norm, &p, opt)?.p_max;
                Ok(ThermalDiff {
                    beta_over_h: beta,
                    j_over_h: j,
                    p_t_diff: p_beta - p_zero,
                })
            })
            .collect()
    });
    let mut out = Vec::with_capacity(beta_grid.len() * j_grid.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}
