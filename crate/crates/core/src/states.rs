//! Initial battery states: ground and canonical thermal states of the
//! normalized Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, inner, norm, DenseOperator, EigenDecomposition, C64, HERMITIAN_TOL, PSD_TOL};
use crate::model::{x_field, NormalizedHamiltonian};

/// Lowest two levels closer than this count as a degenerate ground space.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Symmetry-breaking field magnitude, in units of |h|.
pub const DEFAULT_BIAS_EPS: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(Vec<C64>),
    Mixed(DenseOperator),
}

impl QuantumState {
    /// Pure state; rejects vectors whose norm is off by more than 1e-10.
    pub fn pure(psi: Vec<C64>) -> Result<Self> {
        let n = norm(&psi);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState {
                reason: format!("state vector norm {n} is not 1"),
            });
        }
        check_power_of_two(psi.len())?;
        Ok(Self::Pure(psi))
    }

    /// Pure state from an unnormalized, non-zero vector.
    pub fn pure_normalized(mut psi: Vec<C64>) -> Result<Self> {
        let n = norm(&psi);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState {
                reason: "zero or non-finite state vector".into(),
            });
        }
        psi.iter_mut().for_each(|x| *x /= n);
        check_power_of_two(psi.len())?;
        Ok(Self::Pure(psi))
    }

    /// Density matrix, validated as Hermitian with unit trace and
    /// non-negative spectrum. Eigenvalues in `[-PSD_TOL, 0)` are clipped to
    /// zero and the result renormalized.
    pub fn mixed(rho: DenseOperator) -> Result<Self> {
        check_power_of_two(rho.dim())?;
        let dev = rho.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState {
                reason: format!("density matrix not Hermitian (deviation {dev:e})"),
            });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState {
                reason: format!("trace {tr} is not 1"),
            });
        }
        let eig = eig_hermitian(&rho)?;
        if eig.min() < -PSD_TOL {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {}", eig.min()),
            });
        }
        if eig.min() < 0.0 {
            return Ok(Self::Mixed(density_from_weights(&eig, |l| l.max(0.0))));
        }
        Ok(Self::Mixed(rho))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Mixed(r) => r.dim(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Self::Pure(_))
    }

    pub fn density(&self) -> DenseOperator {
        match self {
            Self::Pure(v) => DenseOperator::projector(v),
            Self::Mixed(r) => r.clone(),
        }
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, op: &DenseOperator) -> C64 {
        match self {
            Self::Pure(v) => op.expectation(v),
            Self::Mixed(r) => op.trace_product(r),
        }
    }
}

fn check_power_of_two(d: usize) -> Result<()> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::InvalidState {
            reason: format!("dimension {d} is not a power of two"),
        });
    }
    Ok(())
}

/// `V diag(w(λ)) V† / Σ w(λ)`.
fn density_from_weights(eig: &EigenDecomposition, weight: impl Fn(f64) -> f64) -> DenseOperator {
    let w: Vec<f64> = eig.eigenvalues.iter().map(|&l| weight(l)).collect();
    let z: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / z).collect();
    let d = eig.eigenvalues.len();
    let v = &eig.eigenvectors;
    let mut rho = DenseOperator::zeros(d);
    for (k, &wk) in w.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        let col = v.column(k);
        for j in 0..d {
            let cj = col[j].conj() * wk;
            if cj == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..d {
                rho.add_to(i, j, col[i] * cj);
            }
        }
    }
    // exact Hermiticity
    for j in 0..d {
        rho.set(j, j, C64::new(rho.get(j, j).re, 0.0));
        for i in j + 1..d {
            let avg = 0.5 * (rho.get(i, j) + rho.get(j, i).conj());
            rho.set(i, j, avg);
            rho.set(j, i, avg.conj());
        }
    }
    rho
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasKind {
    /// Field along +x on every site; selects the +x ferromagnet.
    Uniform,
    /// Field alternating as `(-1)^j` along x; selects the Néel state with
    /// `(-1)^j ⟨σ^x_j⟩ > 0`.
    Staggered,
}

/// Small x-field added before diagonalization to pick one member of a
/// degenerate (or nearly degenerate) Z2 doublet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryBias {
    pub kind: BiasKind,
    pub eps: f64,
}

impl SymmetryBias {
    pub fn uniform(eps: f64) -> Self {
        Self {
            kind: BiasKind::Uniform,
            eps,
        }
    }

    pub fn staggered(eps: f64) -> Self {
        Self {
            kind: BiasKind::Staggered,
            eps,
        }
    }

    /// `-ε Σ_j s_j σ^x_j` with `s_j = 1` or `(-1)^j`.
    pub fn operator(&self, n_sites: usize) -> DenseOperator {
        let eps = self.eps;
        match self.kind {
            BiasKind::Uniform => x_field(n_sites, |_| -eps),
            BiasKind::Staggered => x_field(n_sites, |j| if j % 2 == 0 { -eps } else { eps }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub state: QuantumState,
    /// Lowest eigenvalue of the (possibly biased) normalized Hamiltonian.
    pub energy: f64,
    /// Gap to the next level.
    pub gap: f64,
    /// Set when the two lowest levels coincide within `DEGENERACY_TOL`; the
    /// returned vector is then one deterministic member of the ground space.
    pub degenerate: bool,
}

/// Eigenvector of the lowest eigenvalue, with its phase fixed so the
/// largest-modulus amplitude is real and positive.
pub fn lowest_eigenvector(eig: &EigenDecomposition) -> Vec<C64> {
    let mut v = eig.eigenvector(0);
    fix_phase(&mut v);
    v
}

fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, x) in v.iter().enumerate() {
        // strict comparison with slack keeps the choice stable under rounding
        if x.norm() > best_norm + 1e-12 {
            best = i;
            best_norm = x.norm();
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / v[best].norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Ground state of the normalized Hamiltonian, optionally with a symmetry
/// bias added before diagonalization.
pub fn ground_state(h_norm: &NormalizedHamiltonian, bias: Option<SymmetryBias>) -> Result<GroundState> {
    let biased;
    let eig = match bias {
        None => &h_norm.spectrum,
        Some(b) => {
            let op = h_norm.matrix.add(&b.operator(h_norm.n_sites()));
            biased = eig_hermitian(&op)?;
            &biased
        }
    };
    Ok(ground_from_spectrum(eig))
}

pub(crate) fn ground_from_spectrum(eig: &EigenDecomposition) -> GroundState {
    let energy = eig.min();
    let gap = eig.eigenvalues.get(1).map_or(f64::INFINITY, |&l| l - energy);
    GroundState {
        state: QuantumState::Pure(lowest_eigenvector(eig)),
        energy,
        gap,
        degenerate: gap <= DEGENERACY_TOL,
    }
}

/// `exp(-β H_norm) / Z`.
pub fn thermal_state(h_norm: &NormalizedHamiltonian, beta: f64) -> Result<QuantumState> {
    if !(beta >= 0.0) || beta.is_infinite() {
        return Err(Error::invalid("beta", format!("{beta} must be finite and non-negative")));
    }
    if beta == 0.0 {
        let d = h_norm.dim();
        return Ok(QuantumState::Mixed(DenseOperator::identity(d).scale(C64::new(1.0 / d as f64, 0.0))));
    }
    let eig = &h_norm.spectrum;
    let e0 = eig.min();
    // shifting by the ground energy keeps every weight in (0, 1]
    Ok(QuantumState::Mixed(density_from_weights(eig, |l| (-beta * (l - e0)).exp())))
}

/// Partition function `Tr exp(-β H_norm)`.
pub fn partition_function(h_norm: &NormalizedHamiltonian, beta: f64) -> f64 {
    h_norm.spectrum.eigenvalues.iter().map(|&l| (-beta * l).exp()).sum()
}

/// How the battery's initial state is prepared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StatePrep {
    Ground,
    Thermal { beta: f64 },
}

/// Prepared initial state plus the ground-degeneracy flag (always false for
/// thermal states).
pub fn prepare(h_norm: &NormalizedHamiltonian, prep: StatePrep) -> Result<(QuantumState, bool)> {
    match prep {
        StatePrep::Ground => {
            let g = ground_state(h_norm, None)?;
            Ok((g.state, g.degenerate))
        }
        StatePrep::Thermal { beta } => Ok((thermal_state(h_norm, beta)?, false)),
    }
}

/// `|⟨a|b⟩|` between two pure states.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::model::{build_h0, normalize, ModelParams};

    fn normalized(p: &ModelParams) -> NormalizedHamiltonian {
        normalize(&build_h0(p).unwrap()).unwrap()
    }

    fn m_fm(psi: &[C64], n: usize) -> f64 {
        let op = x_field(n, |_| 1.0 / n as f64);
        op.expectation(psi).re
    }

    #[test]
    fn single_spin_ground_state_is_spin_down() {
        let h = normalized(&ModelParams::uniform(1, 0.0, 0.0, 0.0));
        let g = ground_state(&h, None).unwrap();
        let QuantumState::Pure(v) = &g.state else { panic!() };
        assert!((v[1].norm() - 1.0).abs() < 1e-14);
        assert!(v[0].norm() < 1e-14);
        assert!((g.energy + 1.0).abs() < 1e-14);
        assert!(!g.degenerate);
    }

    #[test]
    fn zz_dimer_ground_space_is_flagged_degenerate() {
        let h = normalized(&ModelParams::uniform(2, 0.0, 0.0, 1.0).with_field(0.0));
        let g = ground_state(&h, None).unwrap();
        assert!(g.degenerate);
        let QuantumState::Pure(v) = &g.state else { panic!() };
        // support on |01⟩, |10⟩ only
        assert!(v[0].norm() < 1e-12 && v[3].norm() < 1e-12);
        // deterministic
        let again = ground_state(&h, None).unwrap();
        assert_eq!(g.state, again.state);
    }

    #[test]
    fn uniform_bias_selects_plus_x_ferromagnet() {
        let p = ModelParams::uniform(6, 1.0, -20.0, 0.0);
        let h = normalized(&p);
        let plain = ground_state(&h, None).unwrap();
        let QuantumState::Pure(v) = &plain.state else { panic!() };
        assert!(m_fm(v, 6).abs() < 0.05, "unbiased cat state has no net moment");
        let biased = ground_state(&h, Some(SymmetryBias::uniform(DEFAULT_BIAS_EPS))).unwrap();
        let QuantumState::Pure(v) = &biased.state else { panic!() };
        assert!(m_fm(v, 6) > 0.95, "m_fm = {}", m_fm(v, 6));
    }

    #[test]
    fn ground_energy_is_minus_one() {
        for p in [
            ModelParams::uniform(4, 0.3, 0.7, 0.2),
            ModelParams::uniform(5, 0.0, -1.4, 1.0),
        ] {
            let h = normalized(&p);
            let g = ground_state(&h, None).unwrap();
            let e = g.state.expectation(&h.matrix);
            assert!((e.re + 1.0).abs() < 1e-10);
            assert!(e.im.abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let h = normalized(&ModelParams::uniform(3, 0.4, 0.9, 0.3));
        let rho = thermal_state(&h, 0.0).unwrap().density();
        let expect = DenseOperator::identity(8).scale(C64::new(1.0 / 8.0, 0.0));
        assert!(rho.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn two_level_gibbs_state() {
        let h = normalized(&ModelParams::uniform(1, 0.0, 0.0, 0.0));
        assert!(h.matrix.max_abs_diff(&pauli::z()) < 1e-15);
        let rho = thermal_state(&h, 1.0).unwrap().density();
        let z = (-1f64).exp() + 1f64.exp();
        let expect = DenseOperator::from_diagonal(&[
            C64::new((-1f64).exp() / z, 0.0),
            C64::new(1f64.exp() / z, 0.0),
        ]);
        assert!(rho.max_abs_diff(&expect) < 1e-14);
        assert!((partition_function(&h, 1.0) - z).abs() < 1e-12);
    }

    #[test]
    fn low_temperature_approaches_ground_projector() {
        let p = ModelParams::uniform(3, 0.0, 0.0, 0.0).with_field(1.0);
        let h = normalized(&p);
        let g = ground_state(&h, None).unwrap();
        assert!(g.gap >= 0.5);
        let QuantumState::Pure(v) = &g.state else { panic!() };
        let rho = thermal_state(&h, 50.0).unwrap();
        let fid = rho.expectation(&DenseOperator::projector(v)).re;
        assert!(fid >= 1.0 - 1e-8, "fidelity {fid}");
    }

    #[test]
    fn thermal_energy_decreases_with_beta() {
        let h = normalized(&ModelParams::uniform(4, 0.2, 1.1, 0.5));
        let mut prev = f64::INFINITY;
        for k in 0..=40 {
            let beta = 0.25 * k as f64;
            let rho = thermal_state(&h, beta).unwrap();
            let QuantumState::Mixed(r) = &rho else { panic!() };
            assert!((r.trace().re - 1.0).abs() < 1e-12);
            let e = rho.expectation(&h.matrix).re;
            assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn thermal_rejects_negative_beta() {
        let h = normalized(&ModelParams::uniform(2, 0.0, 1.0, 0.0));
        assert!(thermal_state(&h, -0.1).is_err());
        assert!(thermal_state(&h, f64::NAN).is_err());
    }

    #[test]
    fn mixed_constructor_validates() {
        let half = C64::new(0.5, 0.0);
        assert!(QuantumState::mixed(DenseOperator::identity(2).scale(half)).is_ok());
        assert!(QuantumState::mixed(DenseOperator::identity(2)).is_err());
        let neg = DenseOperator::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(QuantumState::mixed(neg).is_err());
        let tiny = DenseOperator::from_real_rows(&[&[1.0 + 5e-11, 0.0], &[0.0, -5e-11]]);
        let QuantumState::Mixed(r) = QuantumState::mixed(tiny).unwrap() else { panic!() };
        assert!(r.get(1, 1).re >= 0.0);
        assert!((r.trace().re - 1.0).abs() < 1e-14);
        assert!(QuantumState::pure(vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]).is_err());
    }
}
