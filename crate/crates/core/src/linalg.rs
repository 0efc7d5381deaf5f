//! Dense complex-matrix substrate for spin-1/2 chains.
//!
//! Basis convention: `σ^z = diag(1, -1)`, so `|0⟩` is spin up, and the
//! computational basis is ordered lexicographically with site 1 as the most
//! significant qubit. Site `j` of an `n`-site chain therefore lives on bit
//! `n - j` of the basis index.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Hermiticity tolerance for operators fed to the eigensolver, relative to
/// the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues of a density matrix above `-PSD_TOL` are clipped to zero.
pub const PSD_TOL: f64 = 1e-10;

/// Square complex matrix acting on `log2(dim)` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: Mat<C64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            mat: Mat::from_fn(dim, dim, f),
        }
    }

    /// Builds an operator from row-major real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.mat[(i, i)] = d;
        }
        op
    }

    pub fn from_mat(mat: Mat<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        Ok(Self { mat })
    }

    /// Outer product `|ψ⟩⟨ψ|`.
    pub fn projector(psi: &[C64]) -> Self {
        Self::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Number of qubits, if the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.mat[(i, j)] = value;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, value: C64) {
        self.mat[(i, j)] += value;
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    /// Column `j` as a contiguous slice (storage is column-major).
    pub fn column(&self, j: usize) -> &[C64] {
        self.mat.col_as_slice(j)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose().to_owned(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self {
            mat: &self.mat * &rhs.mat,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            mat: &self.mat + &rhs.mat,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            mat: &self.mat - &rhs.mat,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(factor);
        out
    }

    pub fn scale_in_place(&mut self, factor: C64) {
        let d = self.dim();
        for j in 0..d {
            for i in 0..d {
                self.mat[(i, j)] *= factor;
            }
        }
    }

    /// `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (da, db) = (self.dim(), rhs.dim());
        Self::from_fn(da * db, |i, j| {
            self.get(i / db, j / db) * rhs.get(i % db, j % db)
        })
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((self.get(i, j) - rhs.get(i, j)).norm());
            }
        }
        m
    }

    /// Largest entrywise modulus of `M - M†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in j..d {
                m = m.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    fn max_imag(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max(self.get(i, j).im.abs());
            }
        }
        m
    }

    /// `M |v⟩`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "dimension mismatch");
        let mut out = vec![ZERO; d];
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.column(j)) {
                *o += m * vj;
            }
        }
        out
    }

    /// `⟨v| M |v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        inner(v, &self.apply(v))
    }

    /// `Tr(M ρ)`.
    pub fn trace_product(&self, rho: &Self) -> C64 {
        assert_eq!(self.dim(), rho.dim(), "dimension mismatch");
        let d = self.dim();
        let mut acc = ZERO;
        for j in 0..d {
            for i in 0..d {
                acc += self.get(i, j) * rho.get(j, i);
            }
        }
        acc
    }
}

/// `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Single-qubit Pauli matrices and the 2x2 identity.
pub mod pauli {
    use super::{DenseOperator, C64};

    pub fn identity() -> DenseOperator {
        DenseOperator::identity(2)
    }

    pub fn x() -> DenseOperator {
        DenseOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> DenseOperator {
        let mut op = DenseOperator::zeros(2);
        op.set(0, 1, C64::new(0.0, -1.0));
        op.set(1, 0, C64::new(0.0, 1.0));
        op
    }

    pub fn z() -> DenseOperator {
        DenseOperator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
}

/// Bit mask of `site` (1-indexed, site 1 most significant) in an
/// `n_sites`-qubit basis index.
#[inline]
pub fn site_mask(site: usize, n_sites: usize) -> usize {
    1 << (n_sites - site)
}

fn check_site(site: usize, n_sites: usize) -> Result<()> {
    if site == 0 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    Ok(())
}

/// `I^{⊗(site-1)} ⊗ local ⊗ I^{⊗(n_sites-site)}`.
pub fn kron_embed(local: &DenseOperator, site: usize, n_sites: usize) -> Result<DenseOperator> {
    check_site(site, n_sites)?;
    if local.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: local.dim(),
        });
    }
    let dim = 1usize << n_sites;
    let shift = n_sites - site;
    let mask = 1usize << shift;
    let mut out = DenseOperator::zeros(dim);
    for col in 0..dim {
        let cb = (col >> shift) & 1;
        for rb in 0..2 {
            let row = (col & !mask) | (rb << shift);
            let v = local.get(rb, cb);
            if v != ZERO {
                out.set(row, col, v);
            }
        }
    }
    Ok(out)
}

/// Spectrum (ascending) and orthonormal eigenvectors of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DenseOperator,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k).to_vec()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    /// `V f(Λ) V†`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> C64) -> DenseOperator {
        let v = &self.eigenvectors;
        let d = v.dim();
        let weights: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let scaled = DenseOperator::from_fn(d, |i, k| v.get(i, k) * weights[k]);
        scaled.matmul(&v.adjoint())
    }

    pub fn reconstruct(&self) -> DenseOperator {
        self.spectral_map(|l| C64::new(l, 0.0))
    }
}

/// Full spectrum of a Hermitian operator. Real symmetric inputs take the
/// real solver, which is several times faster for the chain Hamiltonians.
pub fn eig_hermitian(op: &DenseOperator) -> Result<EigenDecomposition> {
    let d = op.dim();
    let scale = op.max_abs().max(1.0);
    let deviation = op.hermiticity_deviation();
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }

    let (mut eigenvalues, mut vectors) = if op.max_imag() <= 1e-15 * scale {
        let real = Mat::<f64>::from_fn(d, d, |i, j| 0.5 * (op.get(i, j).re + op.get(j, i).re));
        let evd = real
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::EigenSolver)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let vals: Vec<f64> = (0..d).map(|k| s[k]).collect();
        let vecs = DenseOperator::from_fn(d, |i, k| C64::new(u[(i, k)], 0.0));
        (vals, vecs)
    } else {
        let herm = Mat::<C64>::from_fn(d, d, |i, j| 0.5 * (op.get(i, j) + op.get(j, i).conj()));
        let evd = herm
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::EigenSolver)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let vals: Vec<f64> = (0..d).map(|k| s[k].re).collect();
        let vecs = DenseOperator::from_fn(d, |i, k| u[(i, k)]);
        (vals, vecs)
    };

    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let sorted_vals = order.iter().map(|&k| eigenvalues[k]).collect();
        let sorted_vecs = DenseOperator::from_fn(d, |i, k| vectors.get(i, order[k]));
        eigenvalues = sorted_vals;
        vectors = sorted_vecs;
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// `exp(-i H t)` via the spectral decomposition of `H`.
pub fn unitary_exp(op: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let eig = eig_hermitian(op)?;
    Ok(unitary_exp_from(&eig, t))
}

/// `exp(-i H t)` from a precomputed decomposition, for reuse across a time grid.
pub fn unitary_exp_from(eig: &EigenDecomposition, t: f64) -> DenseOperator {
    eig.spectral_map(|l| C64::from_polar(1.0, -l * t))
}

fn check_keep_sites(keep_sites: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    if keep_sites.is_empty() {
        return Err(Error::invalid("keep_sites", "must not be empty"));
    }
    let mut keep = keep_sites.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &s in &keep {
        check_site(s, n_sites)?;
    }
    Ok(keep)
}

/// Splits basis indices into (kept-subsystem index, environment index).
struct SiteSplit {
    keep_masks: Vec<usize>,
    env_masks: Vec<usize>,
}

impl SiteSplit {
    fn new(keep: &[usize], n_sites: usize) -> Self {
        let keep_masks = keep.iter().map(|&s| site_mask(s, n_sites)).collect();
        let env_masks = (1..=n_sites)
            .filter(|s| !keep.contains(s))
            .map(|s| site_mask(s, n_sites))
            .collect();
        Self {
            keep_masks,
            env_masks,
        }
    }

    /// Full basis index from a kept-subsystem index and an environment index.
    /// Both sub-indices are ordered with the lowest site most significant.
    fn combine(&self, kept: usize, env: usize) -> usize {
        let mut idx = 0;
        let k = self.keep_masks.len();
        for (pos, &m) in self.keep_masks.iter().enumerate() {
            if (kept >> (k - 1 - pos)) & 1 == 1 {
                idx |= m;
            }
        }
        let e = self.env_masks.len();
        for (pos, &m) in self.env_masks.iter().enumerate() {
            if (env >> (e - 1 - pos)) & 1 == 1 {
                idx |= m;
            }
        }
        idx
    }
}

/// Reduced density matrix on `keep_sites` (ascending site order).
pub fn partial_trace(rho: &DenseOperator, keep_sites: &[usize], n_sites: usize) -> Result<DenseOperator> {
    let dim = 1usize << n_sites;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.dim(),
        });
    }
    let keep = check_keep_sites(keep_sites, n_sites)?;
    let split = SiteSplit::new(&keep, n_sites);
    let kd = 1usize << keep.len();
    let ed = 1usize << (n_sites - keep.len());
    let mut out = DenseOperator::zeros(kd);
    for c in 0..kd {
        for r in 0..kd {
            let mut acc = ZERO;
            for e in 0..ed {
                acc += rho.get(split.combine(r, e), split.combine(c, e));
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

/// Reduced density matrix of the pure state `psi` on `keep_sites`, without
/// forming `|ψ⟩⟨ψ|`.
pub fn reduced_density_pure(psi: &[C64], keep_sites: &[usize], n_sites: usize) -> Result<DenseOperator> {
    let dim = 1usize << n_sites;
    if psi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.len(),
        });
    }
    let keep = check_keep_sites(keep_sites, n_sites)?;
    let split = SiteSplit::new(&keep, n_sites);
    let kd = 1usize << keep.len();
    let ed = 1usize << (n_sites - keep.len());
    let mut out = DenseOperator::zeros(kd);
    for e in 0..ed {
        let amps: Vec<C64> = (0..kd).map(|k| psi[split.combine(k, e)]).collect();
        for c in 0..kd {
            for r in 0..kd {
                out.add_to(r, c, amps[r] * amps[c].conj());
            }
        }
    }
    Ok(out)
}

/// Partial transpose of a two-qubit operator on subsystem 1 or 2.
pub fn partial_transpose(rho: &DenseOperator, subsystem: usize) -> Result<DenseOperator> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    if subsystem != 1 && subsystem != 2 {
        return Err(Error::invalid("subsystem", format!("{subsystem} (expected 1 or 2)")));
    }
    Ok(DenseOperator::from_fn(4, |r, c| {
        let (ra, rb) = (r >> 1, r & 1);
        let (ca, cb) = (c >> 1, c & 1);
        let (src_r, src_c) = if subsystem == 2 {
            ((ra << 1) | cb, (ca << 1) | rb)
        } else {
            ((ca << 1) | rb, (ra << 1) | cb)
        };
        rho.get(src_r, src_c)
    }))
}

/// Trace norm `Σ|λ_k|` of a Hermitian operator.
pub fn trace_norm(op: &DenseOperator) -> Result<f64> {
    Ok(eig_hermitian(op)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// In-place normalized Walsh-Hadamard transform `(H^{⊗n}) v`, mapping
/// the σ^z basis to the σ^x basis. Self-inverse.
pub fn hadamard_transform(v: &mut [C64]) {
    let d = v.len();
    assert!(d.is_power_of_two(), "length must be a power of two");
    let mut h = 1;
    while h < d {
        for block in (0..d).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (d as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= s);
}

/// `H^{⊗n} M H^{⊗n}`.
pub fn hadamard_conjugate(op: &DenseOperator) -> DenseOperator {
    let d = op.dim();
    let mut cols: Vec<Vec<C64>> = (0..d).map(|j| op.column(j).to_vec()).collect();
    cols.iter_mut().for_each(|c| hadamard_transform(c));
    let mut out = DenseOperator::zeros(d);
    let mut row = vec![ZERO; d];
    for i in 0..d {
        for (j, c) in cols.iter().enumerate() {
            row[j] = c[i];
        }
        hadamard_transform(&mut row);
        for (j, &x) in row.iter().enumerate() {
            out.set(i, j, x);
        }
    }
    out
}
