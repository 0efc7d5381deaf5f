//! Ground-state diagnostics: middle-pair entanglement, x-magnetization
//! order parameters under a symmetry-breaking bias, and fidelity scans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, inner, partial_trace, partial_transpose, reduced_density_pure, site_mask, C64};
use crate::model::{build_h0, ModelParams};
use crate::parallel::map_indexed;
use crate::states::{lowest_eigenvector, QuantumState, SymmetryBias};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementResult {
    /// Modulus of the negative part of the partial-transpose spectrum.
    pub negativity: f64,
    /// `log2 ‖ρ^{T_B}‖_1`.
    pub log_negativity: f64,
    pub pair: (usize, usize),
}

/// Central nearest-neighbour pair (1-indexed): `(N/2, N/2+1)` for even `N`,
/// `((N+1)/2, (N+1)/2+1)` for odd `N`.
pub fn middle_pair(n_sites: usize) -> Result<(usize, usize)> {
    if n_sites < 2 {
        return Err(Error::invalid("n_sites", "entanglement needs at least 2 sites"));
    }
    let left = if n_sites % 2 == 0 { n_sites / 2 } else { (n_sites + 1) / 2 };
    Ok((left, left + 1))
}

/// Negativity and logarithmic negativity of an arbitrary pair of sites.
pub fn pair_entanglement(state: &QuantumState, pair: (usize, usize)) -> Result<EntanglementResult> {
    let n = state.n_sites();
    let keep = [pair.0, pair.1];
    let rho = match state {
        QuantumState::Pure(v) => reduced_density_pure(v, &keep, n)?,
        QuantumState::Mixed(r) => partial_trace(r, &keep, n)?,
    };
    let spectrum = eig_hermitian(&partial_transpose(&rho, 2)?)?.eigenvalues;
    let negativity: f64 = spectrum.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let trace_norm: f64 = spectrum.iter().map(|l| l.abs()).sum();
    Ok(EntanglementResult {
        negativity,
        log_negativity: trace_norm.log2().max(0.0),
        pair,
    })
}

pub fn middle_pair_entanglement(state: &QuantumState, n_sites: usize) -> Result<EntanglementResult> {
    let pair = middle_pair(n_sites)?;
    if state.n_sites() != n_sites {
        return Err(Error::DimensionMismatch {
            expected: 1 << n_sites,
            found: state.dim(),
        });
    }
    pair_entanglement(state, pair)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParams {
    /// `Σ_j ⟨σ^x_j⟩ / N`.
    pub m_fm: f64,
    /// `Σ_j (-1)^j ⟨σ^x_j⟩ / N`.
    pub m_afm: f64,
    pub bias: SymmetryBias,
}

/// `⟨σ^x_j⟩` for every site of a pure state.
pub fn x_magnetization(psi: &[C64], n_sites: usize) -> Vec<f64> {
    (1..=n_sites)
        .map(|site| {
            let m = site_mask(site, n_sites);
            psi.iter()
                .enumerate()
                .map(|(b, a)| (a.conj() * psi[b ^ m]).re)
                .sum()
        })
        .collect()
}

pub fn order_parameters_of(psi: &[C64], n_sites: usize, bias: SymmetryBias) -> OrderParams {
    let mx = x_magnetization(psi, n_sites);
    let n = n_sites as f64;
    let m_fm = mx.iter().sum::<f64>() / n;
    let m_afm = mx
        .iter()
        .enumerate()
        .map(|(i, x)| if (i + 1) % 2 == 0 { *x } else { -x })
        .sum::<f64>()
        / n;
    OrderParams { m_fm, m_afm, bias }
}

/// Ground state of `H0 + bias` (raw energy units, not normalized).
pub fn biased_ground_state(params: &ModelParams, bias: Option<SymmetryBias>) -> Result<Vec<C64>> {
    let mut h = build_h0(params)?;
    if let Some(b) = bias {
        h = h.add(&b.operator(params.n_sites));
    }
    Ok(lowest_eigenvector(&eig_hermitian(&h)?))
}

pub fn order_parameters(params: &ModelParams, bias: SymmetryBias) -> Result<OrderParams> {
    let psi = biased_ground_state(params, Some(bias))?;
    Ok(order_parameters_of(&psi, params.n_sites, bias))
}

/// Default coupling increment for fidelity scans, in units of |h|.
pub const DEFAULT_DELTA_J: f64 = 0.005;

/// Couplings closer than this fraction of `δJ` share a diagonalization.
const SAME_J_TOL: f64 = 1e-6;

/// One point of a ground-state scan along uniform `J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub j: f64,
    /// `|⟨ψ_J|ψ_{J+δJ}⟩|`.
    pub fidelity: f64,
    pub m_fm: f64,
    pub m_afm: f64,
}

/// Ground-state fidelity and order parameters along `j_values`. The bias,
/// when given, is applied to both `J` and `J + δJ`. Couplings shared
/// between grid points (a grid spaced by exactly `δJ`) are diagonalized
/// once.
pub fn ground_state_scan(
    params: &ModelParams,
    j_values: &[f64],
    delta_j: f64,
    bias: Option<SymmetryBias>,
    workers: usize,
) -> Result<Vec<ScanPoint>> {
    if !(delta_j > 0.0) {
        return Err(Error::invalid("delta_j", format!("{delta_j} must be positive")));
    }
    let n = params.n_sites;
    let mut needed: Vec<f64> = j_values.iter().flat_map(|&j| [j, j + delta_j]).collect();
    needed.sort_by(f64::total_cmp);
    needed.dedup_by(|a, b| (*a - *b).abs() <= SAME_J_TOL * delta_j);
    let states = map_indexed(workers, needed.len(), |k| {
        biased_ground_state(&params.clone().with_uniform_j(needed[k]), bias)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let lookup = |j: f64| {
        let k = needed.partition_point(|&x| x < j - SAME_J_TOL * delta_j);
        &states[k]
    };
    let order_bias = bias.unwrap_or(SymmetryBias::uniform(0.0));
    Ok(j_values
        .iter()
        .map(|&j| {
            let a = lookup(j);
            let op = order_parameters_of(a, n, order_bias);
            ScanPoint {
                j,
                fidelity: inner(a, lookup(j + delta_j)).norm(),
                m_fm: op.m_fm,
                m_afm: op.m_afm,
            }
        })
        .collect())
}

/// `(J, |⟨ψ_J|ψ_{J+δJ}⟩|)` along `j_values`.
pub fn fidelity_scan(
    params: &ModelParams,
    j_values: &[f64],
    delta_j: f64,
    bias: Option<SymmetryBias>,
    workers: usize,
) -> Result<Vec<(f64, f64)>> {
    Ok(ground_state_scan(params, j_values, delta_j, bias, workers)?
        .into_iter()
        .map(|p| (p.j, p.fidelity))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::model::normalize;
    use crate::states::{ground_state, DEFAULT_BIAS_EPS};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn middle_pair_indices() {
        assert_eq!(middle_pair(2).unwrap(), (1, 2));
        assert_eq!(middle_pair(8).unwrap(), (4, 5));
        assert_eq!(middle_pair(7).unwrap(), (4, 5));
        assert!(middle_pair(1).is_err());
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let mut psi = vec![ZERO; 16];
        psi[0] = c(1.0);
        let e = middle_pair_entanglement(&QuantumState::Pure(psi), 4).unwrap();
        assert!(e.negativity.abs() < 1e-12);
        assert!(e.log_negativity.abs() < 1e-12);
    }

    #[test]
    fn bell_pair() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::Pure(vec![c(s), ZERO, ZERO, c(s)]);
        for st in [bell.clone(), QuantumState::Mixed(bell.density())] {
            let e = middle_pair_entanglement(&st, 2).unwrap();
            assert!((e.negativity - 0.5).abs() < 1e-10);
            assert!((e.log_negativity - 1.0).abs() < 1e-10);
        }
        assert!(middle_pair_entanglement(&bell, 3).is_err());
    }

    #[test]
    fn log_negativity_relation_holds_for_ground_states() {
        for (g, j, d) in [(0.0, 0.8, 0.0), (0.4, -1.3, 1.0), (0.1, 1.7, 0.5)] {
            let p = ModelParams::uniform(6, g, j, d);
            let h = normalize(&build_h0(&p).unwrap()).unwrap();
            let st = ground_state(&h, None).unwrap().state;
            let e = middle_pair_entanglement(&st, 6).unwrap();
            assert!((e.log_negativity - (1.0 + 2.0 * e.negativity).log2()).abs() < 1e-10);
        }
    }

    #[test]
    fn ferromagnetic_limit_polarizes_along_x() {
        let p = ModelParams::uniform(6, 1.0, -20.0, 0.0);
        let op = order_parameters(&p, SymmetryBias::uniform(DEFAULT_BIAS_EPS)).unwrap();
        assert!((op.m_fm - 1.0).abs() < 0.05, "m_fm = {}", op.m_fm);
        assert!(op.m_afm.abs() < 0.05);
    }

    #[test]
    fn antiferromagnetic_limit_with_staggered_bias() {
        let p = ModelParams::uniform(6, 1.0, 20.0, 0.0);
        let op = order_parameters(&p, SymmetryBias::staggered(DEFAULT_BIAS_EPS)).unwrap();
        assert!((op.m_afm - 1.0).abs() < 0.05, "m_afm = {}", op.m_afm);
    }

    #[test]
    fn paramagnet_has_vanishing_order_parameter() {
        let eps = DEFAULT_BIAS_EPS;
        let p = ModelParams::uniform(6, 0.3, 0.0, 0.0);
        let op = order_parameters(&p, SymmetryBias::uniform(eps)).unwrap();
        // site susceptibility of the spin-down product state is 1/h = 1
        assert!(op.m_fm.abs() <= 2.0 * eps, "m_fm = {}", op.m_fm);
        assert!(op.m_fm > 0.0);
    }

    #[test]
    fn fidelity_is_one_when_hamiltonian_ignores_j() {
        // γ = 1 and h, Δ nonzero but J enters nowhere because N = 1
        let p = ModelParams::uniform(1, 0.5, 0.0, 0.0);
        let scan = fidelity_scan(&p, &[-1.0, 0.0, 1.0], 0.005, None, 1).unwrap();
        assert!(scan.iter().all(|(_, f)| (f - 1.0).abs() < 1e-14));
    }

    #[test]
    fn shared_grid_matches_independent_points() {
        let p = ModelParams::uniform(5, 0.1, 0.0, 0.0);
        let bias = Some(SymmetryBias::staggered(DEFAULT_BIAS_EPS));
        let js: Vec<f64> = (0..40).map(|k| 0.8 + 0.005 * k as f64).collect();
        let shared = ground_state_scan(&p, &js, 0.005, bias, 1).unwrap();
        for (k, pt) in shared.iter().enumerate().step_by(7) {
            let single = ground_state_scan(&p, &js[k..=k], 0.005, bias, 1).unwrap()[0];
            assert!((pt.fidelity - single.fidelity).abs() < 1e-12);
            assert!((pt.m_afm - single.m_afm).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_scan_is_bounded_and_rejects_bad_step() {
        let p = ModelParams::uniform(4, 0.1, 0.0, 0.0);
        let js: Vec<f64> = (0..21).map(|k| -2.0 + 0.2 * k as f64).collect();
        let scan = fidelity_scan(&p, &js, DEFAULT_DELTA_J, Some(SymmetryBias::uniform(1e-4)), 2).unwrap();
        assert!(scan.iter().all(|(_, f)| *f >= 0.0 && *f <= 1.0 + 1e-12));
        assert!(fidelity_scan(&p, &js, 0.0, None, 1).is_err());
    }
}
