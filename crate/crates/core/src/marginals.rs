//! Two-body marginal data and the constant-weight liftability certificate.
//!
//! For a pure state in `V_(w)` and a pivot site `p`, let
//! `T_r(I0) = sum_{q != p} rho^{p,q}_{(I0, r), (I0, r)}`. The one-site
//! relation says `sum_r (alpha_r - (w - weight(I0)) / (N - 1)) T_r(I0) = 0`,
//! which is affine in `w` and pins it down as
//!
//! ```text
//! w0(I0) = weight(I0) + (N - 1) sum_r alpha_r T_r(I0) / sum_r T_r(I0).
//! ```
//!
//! For marginals of an arbitrary pure state, `w0(I0)` is the mean total weight
//! conditioned on the pivot carrying `I0`. When these conditional means agree
//! for every pivot and every populated `I0`, the covariance of the total
//! weight with each site weight vanishes, and so does its variance. A single
//! pivot is not enough: `|up> (|up up> + |down down>)` has constant
//! conditional mean at the first site yet spans two sectors.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::partitions::is_feasible;
use crate::rdm;
use crate::state::{weight_components, StateVector, SystemShape};
use crate::weights::Weight;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Default candidate-agreement tolerance, in doubled-weight units.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-6;
/// Pivot values with population below this fraction of the family trace
/// carry no usable candidate.
pub const POPULATION_FLOOR: f64 = 1e-12;

/// Two-body marginals keyed by site pairs `(p, q)` with `p < q`, each a
/// row-major `D^2 x D^2` matrix in index order `(i_p, i_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalFamily {
    shape: SystemShape,
    pairs: BTreeMap<(usize, usize), Vec<Complex64>>,
}

/// Reorders a pair matrix from `(i_q, i_p)` to `(i_p, i_q)` or back.
fn swap_order(d: usize, m: &[Complex64]) -> Vec<Complex64> {
    let n = d * d;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    out[(b * d + a) * n + (e * d + c)] = m[(a * d + b) * n + (c * d + e)];
                }
            }
        }
    }
    out
}

impl MarginalFamily {
    pub fn new(shape: SystemShape) -> Self {
        Self {
            shape,
            pairs: BTreeMap::new(),
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    /// Adds `rho^{p,q}` given in index order `(i_p, i_q)`; `p > q` is allowed.
    /// Rejects wrong sizes, non-Hermitian and non-PSD matrices.
    pub fn insert(&mut self, p: usize, q: usize, matrix: Vec<Complex64>) -> Result<()> {
        let n = self.shape.particles();
        if p == q || p >= n || q >= n {
            return Err(Error::MalformedMarginal(format!(
                "invalid pair ({p}, {q}) for N = {n}"
            )));
        }
        let d = self.shape.site_dim();
        let dim = d * d;
        if matrix.len() != dim * dim {
            return Err(Error::MatrixSize {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::MalformedMarginal(format!(
                "pair ({p}, {q}) has non-finite entries"
            )));
        }
        for i in 0..dim {
            for j in 0..=i {
                if (matrix[i * dim + j] - matrix[j * dim + i].conj()).norm() > HERMITIAN_TOLERANCE {
                    return Err(Error::MalformedMarginal(format!(
                        "pair ({p}, {q}) is not Hermitian"
                    )));
                }
            }
        }
        let min = hermitian_eigenvalues(dim, &matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -PSD_TOLERANCE {
            return Err(Error::MalformedMarginal(format!(
                "pair ({p}, {q}) has negative eigenvalue {min:e}"
            )));
        }
        let (key, m) = if p < q {
            ((p, q), matrix)
        } else {
            ((q, p), swap_order(d, &matrix))
        };
        self.pairs.insert(key, m);
        Ok(())
    }

    /// Matrix of the pair in index order `(i_p, i_q)`.
    pub fn get(&self, p: usize, q: usize) -> Option<Vec<Complex64>> {
        if p < q {
            self.pairs.get(&(p, q)).cloned()
        } else {
            self.pairs
                .get(&(q, p))
                .map(|m| swap_order(self.shape.site_dim(), m))
        }
    }

    /// Stored pairs with `p < q`, in order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &[Complex64])> {
        self.pairs.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs `{pivot, q}` that are absent, as `(min, max)`.
    pub fn missing_star(&self, pivot: usize) -> Vec<(usize, usize)> {
        (0..self.shape.particles())
            .filter(|&q| q != pivot)
            .map(|q| (pivot.min(q), pivot.max(q)))
            .filter(|k| !self.pairs.contains_key(k))
            .collect()
    }

    /// Sites whose full star of pairs is present.
    pub fn complete_pivots(&self) -> Vec<usize> {
        (0..self.shape.particles())
            .filter(|&p| self.missing_star(p).is_empty())
            .collect()
    }

    /// Common trace of all pairs; rejects an empty family or disagreeing traces.
    pub fn common_trace(&self) -> Result<f64> {
        let dim = self.shape.site_dim().pow(2);
        let mut traces = self
            .pairs
            .iter()
            .map(|(k, m)| (k, (0..dim).map(|i| m[i * dim + i].re).sum::<f64>()));
        let (_, first) = traces
            .next()
            .ok_or_else(|| Error::MalformedMarginal("family has no pairs".into()))?;
        for (k, t) in traces {
            if (t - first).abs() > TRACE_TOLERANCE {
                return Err(Error::MalformedMarginal(format!(
                    "pair {k:?} has trace {t}, expected {first}"
                )));
            }
        }
        Ok(first)
    }

    /// Diagonal of `rho^{pivot,q}` indexed by `i_pivot * D + i_q`.
    fn star_diagonal(&self, pivot: usize, q: usize) -> Vec<f64> {
        let d = self.shape.site_dim();
        let m = &self.pairs[&(pivot.min(q), pivot.max(q))];
        let dim = d * d;
        let mut out = vec![0.0; dim];
        for a in 0..d {
            for b in 0..d {
                let idx = if pivot < q { a * d + b } else { b * d + a };
                out[a * d + b] = m[idx * dim + idx].re;
            }
        }
        out
    }

    fn require_star(&self, pivot: usize) -> Result<()> {
        let n = self.shape.particles();
        if pivot >= n {
            return Err(Error::InvalidSites(format!(
                "pivot {pivot} out of range for N = {n}"
            )));
        }
        let missing = self.missing_star(pivot);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingPairs(missing))
        }
    }
}

/// Largest entrywise disagreement between the one-site marginals of `pivot`
/// obtained from its different partners.
pub fn trivial_compatibility(family: &MarginalFamily, pivot: usize) -> Result<f64> {
    family.require_star(pivot)?;
    let d = family.shape.site_dim();
    let dim = d * d;
    let mut reference: Option<Vec<Complex64>> = None;
    let mut worst: f64 = 0.0;
    for q in (0..family.shape.particles()).filter(|&q| q != pivot) {
        let m = family.get(pivot, q).expect("star checked");
        let mut one = vec![Complex64::new(0.0, 0.0); d * d];
        for a in 0..d {
            for c in 0..d {
                for b in 0..d {
                    one[a * d + c] += m[(a * d + b) * dim + (c * d + b)];
                }
            }
        }
        match &reference {
            None => reference = Some(one),
            Some(r) => {
                for (x, y) in r.iter().zip(&one) {
                    worst = worst.max((x - y).norm());
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Consistent(Weight),
    Inconsistent,
    Underdetermined,
}

/// One pivot value's contribution to the certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub pivot: usize,
    pub i0: usize,
    /// `sum_r T_r(I0)`.
    pub population: f64,
    /// `w0(I0)`, absent when the population is below the floor.
    pub candidate: Option<Vec<f64>>,
    /// `sum_r b_r T_r(I0)` with `b` built from the reference weight.
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    /// Componentwise mean of the candidates, if any.
    pub estimate: Option<Vec<f64>>,
    /// Largest componentwise spread `max - min` among candidates.
    pub spread: f64,
    /// Distance from `estimate` to the nearest integer vector.
    pub snap_distance: f64,
    pub rows: Vec<CertificateRow>,
}

/// Decides whether the stars of `pivots` are consistent with a pure state in
/// a single constant-weight sector. Candidates must agree within `tolerance`
/// across all pivots, snap to an integer vector within `tolerance`, and name
/// an achievable sector.
pub fn constant_weight_certificate(
    family: &MarginalFamily,
    pivots: &[usize],
    tolerance: f64,
) -> Result<Certificate> {
    if pivots.is_empty() {
        return Err(Error::InvalidSites(
            "certificate needs at least one pivot".into(),
        ));
    }
    for &p in pivots {
        family.require_star(p)?;
    }
    let trace = family.common_trace()?;
    let shape = &family.shape;
    let (n, d, model) = (shape.particles(), shape.site_dim(), shape.model());
    let cd = model.cartan_dim();
    let floor = POPULATION_FLOOR * (n - 1) as f64 * trace.abs();

    let mut rows = Vec::new();
    let mut t_tables = Vec::new();
    for &pivot in pivots {
        let mut t = vec![vec![0.0; d]; d];
        for q in (0..n).filter(|&q| q != pivot) {
            let diag = family.star_diagonal(pivot, q);
            for (a, ta) in t.iter_mut().enumerate() {
                for (r, x) in ta.iter_mut().enumerate() {
                    *x += diag[a * d + r];
                }
            }
        }
        for (i0, ti) in t.iter().enumerate() {
            let population: f64 = ti.iter().sum();
            let candidate = (population > floor).then(|| {
                (0..cd)
                    .map(|c| {
                        let mean: f64 = ti
                            .iter()
                            .enumerate()
                            .map(|(r, x)| model.weight(r)[c] as f64 * x)
                            .sum();
                        model.weight(i0)[c] as f64 + (n - 1) as f64 * mean / population
                    })
                    .collect::<Vec<f64>>()
            });
            rows.push(CertificateRow {
                pivot,
                i0,
                population,
                candidate,
                residual: Vec::new(),
            });
        }
        t_tables.push(t);
    }

    let candidates: Vec<&Vec<f64>> = rows.iter().filter_map(|r| r.candidate.as_ref()).collect();
    if candidates.is_empty() {
        return Ok(Certificate {
            verdict: Verdict::Underdetermined,
            estimate: None,
            spread: 0.0,
            snap_distance: 0.0,
            rows,
        });
    }
    let mut spread: f64 = 0.0;
    let mut estimate = vec![0.0; cd];
    for (c, e) in estimate.iter_mut().enumerate() {
        let vals = candidates.iter().map(|v| v[c]);
        let lo = vals.clone().fold(f64::INFINITY, f64::min);
        let hi = vals.clone().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        *e = vals.sum::<f64>() / candidates.len() as f64;
    }
    let snapped: Weight = estimate.iter().map(|x| libm::round(*x) as i64).collect();
    let snap_distance = estimate
        .iter()
        .zip(&snapped)
        .map(|(x, s)| (x - *s as f64).abs())
        .fold(0.0, f64::max);

    // residuals against the integer reference when it exists
    let reference: Vec<f64> = if snap_distance <= tolerance {
        snapped.iter().map(|&x| x as f64).collect()
    } else {
        estimate.clone()
    };
    for (row, t) in rows.iter_mut().zip(t_tables.iter().flat_map(|t| t.iter())) {
        row.residual = (0..cd)
            .map(|c| {
                let shift = (reference[c] - model.weight(row.i0)[c] as f64) / (n - 1) as f64;
                t.iter()
                    .enumerate()
                    .map(|(r, x)| (model.weight(r)[c] as f64 - shift) * x)
                    .sum()
            })
            .collect();
    }

    let verdict =
        if spread <= tolerance && snap_distance <= tolerance && is_feasible(model, n, &snapped) {
            Verdict::Consistent(snapped)
        } else {
            Verdict::Inconsistent
        };
    Ok(Certificate {
        verdict,
        estimate: Some(estimate),
        spread,
        snap_distance,
        rows,
    })
}

/// First and second moments of the total weight about `w0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMoments {
    pub mean_gap: Vec<f64>,
    pub variance: Vec<f64>,
}

/// `sum_w p_w (w - w0)` and `sum_w p_w (w - w0)^2` per component, with `p_w`
/// normalized by the total norm.
pub fn weight_variance(state: &StateVector, w0: &[i64]) -> Result<WeightMoments> {
    let cd = state.shape().model().cartan_dim();
    if w0.len() != cd {
        return Err(Error::WeightLength {
            expected: cd,
            found: w0.len(),
        });
    }
    let comps = weight_components(state);
    let total: f64 = comps.values().map(|c| c.probability).sum();
    let mut out = WeightMoments {
        mean_gap: vec![0.0; cd],
        variance: vec![0.0; cd],
    };
    if total == 0.0 {
        return Ok(out);
    }
    for (w, comp) in &comps {
        let p = comp.probability / total;
        for c in 0..cd {
            let gap = (w[c] - w0[c]) as f64;
            out.mean_gap[c] += p * gap;
            out.variance[c] += p * gap * gap;
        }
    }
    Ok(out)
}

/// Two-body marginals of `state`: every pair, or only the star of `pivot`.
pub fn family_from_state(state: &StateVector, pivot: Option<usize>) -> Result<MarginalFamily> {
    let shape = state.shape().clone();
    let n = shape.particles();
    let mut family = MarginalFamily::new(shape);
    for p in 0..n {
        for q in p + 1..n {
            if pivot.is_some_and(|v| v != p && v != q) {
                continue;
            }
            let r = rdm::marginal(state, &[p, q])?;
            family.pairs.insert((p, q), r.matrix().to_vec());
        }
    }
    if let Some(v) = pivot {
        family.require_star(v)?;
    }
    Ok(family)
}
