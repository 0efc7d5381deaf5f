//! XYZ chain in a transverse field with open boundaries, its local charging
//! field, spectral normalization, and Gaussian coupling disorder.
//!
//! ```text
//! H0 = (h/2) Σ_j σ^z_j
//!    + (1/4) Σ_j J_j [(1+γ) σ^x_j σ^x_{j+1} + (1-γ) σ^y_j σ^y_{j+1}]
//!    + (1/4) Σ_j Δ_j σ^z_j σ^z_{j+1}
//! H_charging = (ω/2) Σ_j σ^x_j
//! ```
//!
//! Energies are in units of |h| and ħ = 1.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, pauli, site_mask, DenseOperator, EigenDecomposition, C64};

/// Largest chain built by default; a dense operator at N = 14 is 16384².
pub const DEFAULT_MAX_SITES: usize = 14;

/// Spectra narrower than this cannot be normalized.
pub const DEGENERATE_WIDTH_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n_sites: usize,
    pub field_h: f64,
    pub anisotropy_gamma: f64,
    /// `J_j` for bonds `(j, j+1)`, length `n_sites - 1`.
    pub xy_couplings: Vec<f64>,
    /// `Δ_j` for bonds `(j, j+1)`, length `n_sites - 1`.
    pub zz_couplings: Vec<f64>,
    pub charging_omega: f64,
}

impl ModelParams {
    /// Site-independent couplings, `h = 1` and `ω = 2|h|`.
    pub fn uniform(n_sites: usize, gamma: f64, j: f64, delta: f64) -> Self {
        let bonds = n_sites.saturating_sub(1);
        Self {
            n_sites,
            field_h: 1.0,
            anisotropy_gamma: gamma,
            xy_couplings: vec![j; bonds],
            zz_couplings: vec![delta; bonds],
            charging_omega: 2.0,
        }
    }

    pub fn with_field(mut self, h: f64) -> Self {
        self.field_h = h;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.charging_omega = omega;
        self
    }

    /// Replaces every `J_j` by `j`.
    pub fn with_uniform_j(mut self, j: f64) -> Self {
        self.xy_couplings.iter_mut().for_each(|x| *x = j);
        self
    }

    /// Replaces every `Δ_j` by `delta`.
    pub fn with_uniform_delta(mut self, delta: f64) -> Self {
        self.zz_couplings.iter_mut().for_each(|x| *x = delta);
        self
    }

    pub fn n_bonds(&self) -> usize {
        self.n_sites.saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::invalid("n_sites", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.anisotropy_gamma) {
            return Err(Error::invalid(
                "anisotropy_gamma",
                format!("{} not in [0, 1]", self.anisotropy_gamma),
            ));
        }
        for (field, arr) in [("xy_couplings", &self.xy_couplings), ("zz_couplings", &self.zz_couplings)] {
            if arr.len() != self.n_bonds() {
                return Err(Error::invalid(
                    field,
                    format!("expected {} entries, got {}", self.n_bonds(), arr.len()),
                ));
            }
            if arr.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(field, "non-finite coupling"));
            }
        }
        if !self.field_h.is_finite() {
            return Err(Error::invalid("field_h", "must be finite"));
        }
        if !(self.charging_omega > 0.0 && self.charging_omega.is_finite()) {
            return Err(Error::invalid(
                "charging_omega",
                format!("{} must be positive", self.charging_omega),
            ));
        }
        Ok(())
    }

    fn validate_size(&self, max_sites: usize) -> Result<()> {
        self.validate()?;
        if self.n_sites > max_sites {
            return Err(Error::TooManySites {
                n_sites: self.n_sites,
                max_sites,
            });
        }
        Ok(())
    }
}

/// Battery Hamiltonian `H0` with the default size limit.
pub fn build_h0(params: &ModelParams) -> Result<DenseOperator> {
    build_h0_limited(params, DEFAULT_MAX_SITES)
}

pub fn build_h0_limited(params: &ModelParams, max_sites: usize) -> Result<DenseOperator> {
    params.validate_size(max_sites)?;
    let n = params.n_sites;
    let dim = params.dim();
    let gamma = params.anisotropy_gamma;
    let mut h0 = DenseOperator::zeros(dim);

    for b in 0..dim {
        let z = |site: usize| if b & site_mask(site, n) == 0 { 1.0 } else { -1.0 };
        let mut diag = 0.5 * params.field_h * (1..=n).map(z).sum::<f64>();
        for bond in 1..n {
            diag += 0.25 * params.zz_couplings[bond - 1] * z(bond) * z(bond + 1);
        }
        h0.set(b, b, C64::new(diag, 0.0));

        for bond in 1..n {
            let j = params.xy_couplings[bond - 1];
            if j == 0.0 {
                continue;
            }
            // σ^xσ^x and σ^yσ^y both flip the pair; σ^yσ^y carries -1 on
            // aligned pairs and +1 on anti-aligned ones.
            let aligned = z(bond) == z(bond + 1);
            let amp = if aligned { 0.5 * j * gamma } else { 0.5 * j };
            if amp != 0.0 {
                let flipped = b ^ site_mask(bond, n) ^ site_mask(bond + 1, n);
                h0.add_to(flipped, b, C64::new(amp, 0.0));
            }
        }
    }
    Ok(h0)
}

/// Single-site charging factor `(ω/2) σ^x`.
pub fn charging_factor(params: &ModelParams) -> DenseOperator {
    pauli::x().scale(C64::new(0.5 * params.charging_omega, 0.0))
}

/// `H_charging = (ω/2) Σ_j σ^x_j`.
pub fn build_charging(params: &ModelParams) -> Result<DenseOperator> {
    build_charging_limited(params, DEFAULT_MAX_SITES)
}

pub fn build_charging_limited(params: &ModelParams, max_sites: usize) -> Result<DenseOperator> {
    params.validate_size(max_sites)?;
    Ok(x_field(params.n_sites, |_| 0.5 * params.charging_omega))
}

/// `Σ_j w(j) σ^x_j` for 1-indexed sites.
pub fn x_field(n_sites: usize, weight: impl Fn(usize) -> f64) -> DenseOperator {
    let dim = 1usize << n_sites;
    let mut op = DenseOperator::zeros(dim);
    for site in 1..=n_sites {
        let w = weight(site);
        if w == 0.0 {
            continue;
        }
        let m = site_mask(site, n_sites);
        for b in 0..dim {
            op.add_to(b ^ m, b, C64::new(w, 0.0));
        }
    }
    op
}

/// `H0` affinely rescaled so its spectrum spans exactly `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct NormalizedHamiltonian {
    pub matrix: DenseOperator,
    /// Extremal eigenvalues before normalization.
    pub e_min: f64,
    pub e_max: f64,
    /// Eigendecomposition of `matrix`, kept for state preparation.
    pub spectrum: EigenDecomposition,
}

impl NormalizedHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn n_sites(&self) -> usize {
        self.matrix.n_qubits().expect("dimension is a power of two")
    }

    /// Maps a raw energy onto the normalized scale.
    pub fn to_normalized(&self, energy: f64) -> f64 {
        (2.0 * energy - (self.e_max + self.e_min)) / (self.e_max - self.e_min)
    }
}

/// `[2 H0 - (E_max + E_min) I] / (E_max - E_min)`.
pub fn normalize(h0: &DenseOperator) -> Result<NormalizedHamiltonian> {
    let eig = eig_hermitian(h0)?;
    let (e_min, e_max) = (eig.min(), eig.max());
    let width = e_max - e_min;
    if width < DEGENERATE_WIDTH_TOL {
        return Err(Error::DegenerateSpectrum { width });
    }
    let shift = e_max + e_min;
    let d = h0.dim();
    let matrix = DenseOperator::from_fn(d, |i, j| {
        let mut v = 2.0 * h0.get(i, j);
        if i == j {
            v -= C64::new(shift, 0.0);
        }
        v / width
    });
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|&e| (2.0 * e - shift) / width).collect();
    // pin the extremes exactly
    eigenvalues[0] = -1.0;
    *eigenvalues.last_mut().expect("non-empty") = 1.0;
    Ok(NormalizedHamiltonian {
        matrix,
        e_min,
        e_max,
        spectrum: EigenDecomposition {
            eigenvalues,
            eigenvectors: eig.eigenvectors,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderTarget {
    /// Randomize `J_j`.
    Xy,
    /// Randomize `Δ_j`.
    Zz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub target: DisorderTarget,
    pub mean: f64,
    pub sigma: f64,
    #[serde(default = "DisorderSpec::default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
}

impl DisorderSpec {
    pub const DEFAULT_REALIZATIONS: usize = 5000;

    fn default_realizations() -> usize {
        Self::DEFAULT_REALIZATIONS
    }

    pub fn new(target: DisorderTarget, mean: f64, sigma: f64) -> Self {
        Self {
            target,
            mean,
            sigma,
            n_realizations: Self::DEFAULT_REALIZATIONS,
            master_seed: 0,
        }
    }

    pub fn with_realizations(mut self, n: usize) -> Self {
        self.n_realizations = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("{} must be non-negative", self.sigma)));
        }
        if !self.mean.is_finite() {
            return Err(Error::invalid("mean", "must be finite"));
        }
        if self.n_realizations == 0 {
            return Err(Error::invalid("n_realizations", "must be at least 1"));
        }
        Ok(())
    }
}

/// Realization `index` of the disordered chain.
///
/// Draws come from a ChaCha20 stream keyed by `master_seed` with stream id
/// `index`; bond `k` takes the `k`-th standard normal of that stream, so a
/// realization never depends on which other realizations were evaluated.
pub fn sample_realization(base: &ModelParams, spec: &DisorderSpec, index: usize) -> ModelParams {
    let mut rng = ChaCha20Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(index as u64);
    let draws: Vec<f64> = (0..base.n_bonds())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            spec.mean + spec.sigma * z
        })
        .collect();
    let mut out = base.clone();
    match spec.target {
        DisorderTarget::Xy => out.xy_couplings = draws,
        DisorderTarget::Zz => out.zz_couplings = draws,
    }
    out
}
