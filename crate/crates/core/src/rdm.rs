//! Partial traces of pure states.
//!
//! Entry formula: with `I = (L; K)` split into kept sites `L` and traced
//! sites `K`, `(Tr_K psi psi^*)_{L, L'} = sum_K a_{(L;K)} conj(a_{(L';K)})`.
//! Kept multi-indices are linearized lexicographically in ascending site
//! order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{MultiIndex, StateVector};

/// Absolute eigenvalue tolerance for PSD and rank checks.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    site_dim: usize,
    kept: Vec<usize>,
    matrix: Vec<Complex64>,
    asymmetry: f64,
}

fn check_sites(n: usize, sites: &[usize], what: &str) -> Result<Vec<usize>> {
    let mut s = sites.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != sites.len() {
        return Err(Error::InvalidSites(format!(
            "{what} sites {sites:?} contain duplicates"
        )));
    }
    if let Some(&bad) = s.iter().find(|&&p| p >= n) {
        return Err(Error::InvalidSites(format!(
            "{what} site {bad} out of range for N = {n}"
        )));
    }
    Ok(s)
}

fn complement(n: usize, sites: &[usize]) -> Vec<usize> {
    (0..n).filter(|p| !sites.contains(p)).collect()
}

/// Linear index of the digits at `sites` (ascending) of a full multi-index.
fn sub_linear(digits: &[usize], sites: &[usize], d: usize) -> usize {
    sites.iter().fold(0, |acc, &p| acc * d + digits[p])
}

fn digits_into(mut lin: usize, d: usize, out: &mut [usize]) {
    for x in out.iter_mut().rev() {
        *x = lin % d;
        lin /= d;
    }
}

impl ReducedDensity {
    /// Wraps an explicit matrix over the kept sites (row-major).
    pub fn from_matrix(site_dim: usize, kept: Vec<usize>, matrix: Vec<Complex64>) -> Result<Self> {
        let dim = site_dim.pow(kept.len() as u32);
        if matrix.len() != dim * dim {
            return Err(Error::MatrixSize {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        Ok(Self {
            site_dim,
            kept,
            matrix,
            asymmetry: 0.0,
        })
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    /// Matrix dimension `D^{|kept|}`.
    pub fn dim(&self) -> usize {
        self.site_dim.pow(self.kept.len() as u32)
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// Frobenius norm of `R - R^dagger` before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.matrix[i * n + j] - self.matrix[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|i| self.matrix[i * n + i].re).sum()
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.matrix[i * n + i].re).collect()
    }

    /// Diagonal entries keyed by the kept multi-index.
    pub fn diagonal(&self) -> BTreeMap<MultiIndex, f64> {
        let mut digits = vec![0; self.kept.len()];
        self.diagonal_values()
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                digits_into(i, self.site_dim, &mut digits);
                (MultiIndex(digits.clone()), v)
            })
            .collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(self.dim(), &self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, tolerance: f64) -> bool {
        self.min_eigenvalue() >= -tolerance
    }

    /// Number of eigenvalues above `tolerance`.
    pub fn rank(&self, tolerance: f64) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|&&x| x > tolerance)
            .count()
    }

    /// `|| R - (tr R / dim) I ||_F`; zero exactly when `R` is proportional
    /// to the identity.
    pub fn deviation_from_maximally_mixed(&self) -> f64 {
        let n = self.dim();
        let c = self.trace() / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut x = self.matrix[i * n + j];
                if i == j {
                    x -= c;
                }
                sum += x.norm_sqr();
            }
        }
        libm::sqrt(sum)
    }
}

/// Partial trace of `psi psi^*` over the sites in `traced` (0-based).
pub fn partial_trace(state: &StateVector, traced: &[usize]) -> Result<ReducedDensity> {
    let n = state.shape().particles();
    let traced = check_sites(n, traced, "traced")?;
    if traced.is_empty() || traced.len() == n {
        return Err(Error::InvalidSites(format!(
            "traced set must be a proper nonempty subset of the {n} sites"
        )));
    }
    let kept = complement(n, &traced);
    let d = state.shape().site_dim();
    let dim = d.pow(kept.len() as u32);
    let mut groups: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); d.pow(traced.len() as u32)];
    let mut digits = vec![0; n];
    for (lin, a) in state.entries() {
        digits_into(lin, d, &mut digits);
        groups[sub_linear(&digits, &traced, d)].push((sub_linear(&digits, &kept, d), a));
    }
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for g in &groups {
        for &(l, a) in g {
            for &(lp, b) in g {
                m[l * dim + lp] += a * b.conj();
            }
        }
    }
    Ok(symmetrized(d, kept, m))
}

/// The full projector `psi psi^*` viewed as a marginal on all sites.
pub fn projector(state: &StateVector) -> ReducedDensity {
    let n = state.shape().particles();
    let dim = state.shape().basis_len();
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (i, a) in state.entries() {
        for (j, b) in state.entries() {
            m[i * dim + j] = a * b.conj();
        }
    }
    symmetrized(state.shape().site_dim(), (0..n).collect(), m)
}

fn symmetrized(site_dim: usize, kept: Vec<usize>, mut m: Vec<Complex64>) -> ReducedDensity {
    let dim = site_dim.pow(kept.len() as u32);
    let mut asym = 0.0;
    for i in 0..dim {
        for j in 0..=i {
            let (x, y) = (m[i * dim + j], m[j * dim + i]);
            let diff = x - y.conj();
            asym += if i == j {
                diff.norm_sqr()
            } else {
                2.0 * diff.norm_sqr()
            };
            let avg = (x + y.conj()) * 0.5;
            m[i * dim + j] = avg;
            m[j * dim + i] = avg.conj();
        }
    }
    ReducedDensity {
        site_dim,
        kept,
        matrix: m,
        asymmetry: libm::sqrt(asym),
    }
}

/// Marginal on `kept`: a partial trace over the complement, or the full
/// projector when every site is kept.
pub fn marginal(state: &StateVector, kept: &[usize]) -> Result<ReducedDensity> {
    let n = state.shape().particles();
    let kept = check_sites(n, kept, "kept")?;
    match kept.len() {
        0 => Err(Error::InvalidSites("kept set must be nonempty".into())),
        k if k == n => Ok(projector(state)),
        _ => partial_trace(state, &complement(n, &kept)),
    }
}

/// Diagonal of the marginal on `kept` (any nonempty site set, including all
/// sites), computed directly as sums of `|a_I|^2`. Indexed by the kept
/// multi-index linearized in ascending site order.
pub fn marginal_diagonal(state: &StateVector, kept: &[usize]) -> Result<Vec<f64>> {
    let n = state.shape().particles();
    let kept = check_sites(n, kept, "kept")?;
    if kept.is_empty() {
        return Err(Error::InvalidSites("kept set must be nonempty".into()));
    }
    let d = state.shape().site_dim();
    let mut out = vec![0.0; d.pow(kept.len() as u32)];
    let mut digits = vec![0; n];
    for (lin, a) in state.entries() {
        digits_into(lin, d, &mut digits);
        out[sub_linear(&digits, &kept, d)] += a.norm_sqr();
    }
    Ok(out)
}

/// Linear index of a kept multi-index (entries in ascending site order).
pub fn kept_linear(site_dim: usize, index: &[usize]) -> usize {
    index.iter().fold(0, |acc, &i| acc * site_dim + i)
}
