//! Multi-particle bases, constant-weight sectors and state vectors.
//!
//! Basis vectors of `V = W^{(x) N}` are multi-indices `I = (i_1, ..., i_N)`
//! with 0-based entries. Linearization is row-major with particle 1 most
//! significant, so lexicographic order on multi-indices equals ascending
//! linear index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::partitions;
use crate::sampling::GaussianStream;
use crate::weights::{add_assign, Weight, WeightModel};

/// Tolerance on `|1 - ||psi||^2|` for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemShape {
    model: WeightModel,
    particles: usize,
}

impl SystemShape {
    pub fn new(model: WeightModel, particles: usize) -> Result<Self> {
        if particles < 2 {
            return Err(Error::TooFewParticles(particles));
        }
        Ok(Self { model, particles })
    }

    pub fn model(&self) -> &WeightModel {
        &self.model
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// Single-particle dimension `D`.
    pub fn site_dim(&self) -> usize {
        self.model.dim()
    }

    /// `D^N`.
    pub fn basis_len(&self) -> usize {
        self.site_dim().pow(self.particles as u32)
    }

    pub fn check(&self, index: &MultiIndex) -> Result<()> {
        if index.len() != self.particles || index.0.iter().any(|&i| i >= self.site_dim()) {
            return Err(Error::IndexOutOfRange(index.0.clone()));
        }
        Ok(())
    }

    pub fn linear(&self, index: &MultiIndex) -> usize {
        index.0.iter().fold(0, |acc, &i| acc * self.site_dim() + i)
    }

    pub fn multi(&self, mut linear: usize) -> MultiIndex {
        let d = self.site_dim();
        let mut idx = vec![0; self.particles];
        for slot in idx.iter_mut().rev() {
            *slot = linear % d;
            linear /= d;
        }
        MultiIndex(idx)
    }

    /// `weight(I) = sum_k alpha_{i_k}`.
    pub fn weight_of(&self, index: &MultiIndex) -> Result<Weight> {
        self.check(index)?;
        Ok(self.weight_unchecked(&index.0))
    }

    pub(crate) fn weight_unchecked(&self, indices: &[usize]) -> Weight {
        let mut w = vec![0; self.model.cartan_dim()];
        for &i in indices {
            add_assign(&mut w, self.model.weight(i));
        }
        w
    }

    pub(crate) fn linear_weight(&self, mut linear: usize) -> Weight {
        let d = self.site_dim();
        let mut w = vec![0; self.model.cartan_dim()];
        for _ in 0..self.particles {
            add_assign(&mut w, self.model.weight(linear % d));
            linear /= d;
        }
        w
    }
}

/// All multi-indices of weight `w`, in lexicographic order.
pub fn constant_weight_basis(shape: &SystemShape, w: &[i64]) -> Result<Vec<MultiIndex>> {
    Ok(
        partitions::enumerate_tuples(shape.model(), shape.particles(), w)?
            .into_iter()
            .map(MultiIndex)
            .collect(),
    )
}

/// Every weight `w` with a nonempty sector, sorted.
pub fn achievable_weights(shape: &SystemShape) -> Vec<Weight> {
    let mut current: BTreeSet<Weight> = BTreeSet::new();
    current.insert(vec![0; shape.model().cartan_dim()]);
    for _ in 0..shape.particles() {
        let mut next = BTreeSet::new();
        for w in &current {
            for a in shape.model().weights() {
                let mut s = w.clone();
                add_assign(&mut s, a);
                next.insert(s);
            }
        }
        current = next;
    }
    current.into_iter().collect()
}

/// A state stored densely over a declared support (the full space or one or
/// more weight sectors).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    shape: SystemShape,
    support: Vec<usize>,
    amplitudes: Vec<Complex64>,
    support_weight: Option<Weight>,
}

impl StateVector {
    /// Builds a state from `(index, amplitude)` pairs. When `support_weight`
    /// is given, every nonzero amplitude must sit in that sector.
    pub fn from_entries(
        shape: SystemShape,
        entries: Vec<(MultiIndex, Complex64)>,
        support_weight: Option<Weight>,
    ) -> Result<Self> {
        if let Some(w) = &support_weight {
            if w.len() != shape.model().cartan_dim() {
                return Err(Error::WeightLength {
                    expected: shape.model().cartan_dim(),
                    found: w.len(),
                });
            }
        }
        let mut pairs = Vec::with_capacity(entries.len());
        for (idx, a) in entries {
            shape.check(&idx)?;
            if let Some(w) = &support_weight {
                if a != Complex64::new(0.0, 0.0) && shape.weight_unchecked(&idx.0) != *w {
                    return Err(Error::OffSector { index: idx.0 });
                }
            }
            pairs.push((shape.linear(&idx), a));
        }
        pairs.sort_by_key(|p| p.0);
        if let Some(dup) = pairs.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(Error::DuplicateIndex(shape.multi(dup[0].0).0));
        }
        let (support, amplitudes) = pairs.into_iter().unzip();
        Ok(Self {
            shape,
            support,
            amplitudes,
            support_weight,
        })
    }

    /// Full-space state from `D^N` amplitudes in linear order.
    pub fn from_dense(shape: SystemShape, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != shape.basis_len() {
            return Err(Error::MatrixSize {
                expected: shape.basis_len(),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            support: (0..amplitudes.len()).collect(),
            shape,
            amplitudes,
            support_weight: None,
        })
    }

    /// The product basis state `e_I`.
    pub fn basis_state(shape: SystemShape, index: MultiIndex) -> Result<Self> {
        let w = shape.weight_of(&index)?;
        Self::from_entries(shape, vec![(index, Complex64::new(1.0, 0.0))], Some(w))
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn support_weight(&self) -> Option<&[i64]> {
        self.support_weight.as_deref()
    }

    /// `(linear index, amplitude)` pairs in ascending index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.amplitudes.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn amplitude(&self, index: &MultiIndex) -> Complex64 {
        let lin = self.shape.linear(index);
        match self.support.binary_search(&lin) {
            Ok(k) => self.amplitudes[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for a in &mut out.amplitudes {
            *a *= factor;
        }
        out
    }

    /// Relabels particles: site `k` of the result carries site `perm[k]` of `self`.
    pub fn permute_sites(&self, perm: &[usize]) -> Result<Self> {
        let n = self.shape.particles();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || core::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidSites(alloc::format!(
                "{perm:?} is not a permutation of {n} sites"
            )));
        }
        let entries = self
            .entries()
            .map(|(lin, a)| {
                let old = self.shape.multi(lin);
                (MultiIndex(perm.iter().map(|&p| old.0[p]).collect()), a)
            })
            .collect();
        Self::from_entries(self.shape.clone(), entries, self.support_weight.clone())
    }

    /// Sum of states with the given coefficients over the union of supports.
    pub fn superpose(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let shape = terms.first().ok_or(Error::EmptyModel)?.1.shape.clone();
        let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
        let mut weights: BTreeSet<Option<Weight>> = BTreeSet::new();
        for (c, s) in terms {
            if s.shape != shape {
                return Err(Error::InvalidSites(alloc::string::String::from(
                    "superposed states differ in shape",
                )));
            }
            weights.insert(s.support_weight.clone());
            for (lin, a) in s.entries() {
                *acc.entry(lin).or_default() += c * a;
            }
        }
        let support_weight = if weights.len() == 1 {
            weights.pop_first().flatten()
        } else {
            None
        };
        let (support, amplitudes) = acc.into_iter().unzip();
        Ok(Self {
            shape,
            support,
            amplitudes,
            support_weight,
        })
    }
}

fn sector_support(shape: &SystemShape, w: &[i64]) -> Result<Vec<usize>> {
    let basis = constant_weight_basis(shape, w)?;
    if basis.is_empty() {
        return Err(Error::EmptySector(w.to_vec()));
    }
    Ok(basis.iter().map(|i| shape.linear(i)).collect())
}

fn normalized_draw(g: &mut GaussianStream, len: usize, mass: f64) -> Vec<Complex64> {
    let mut amps: Vec<Complex64> = (0..len).map(|_| g.next_complex()).collect();
    let norm = libm::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>());
    let scale = libm::sqrt(mass) / norm;
    for a in &mut amps {
        *a *= scale;
    }
    amps
}

/// Random normalized state: i.i.d. standard complex Gaussian amplitudes on
/// the sector `w` (or the full space), drawn in ascending basis order, then
/// normalized.
pub fn sample_state(shape: &SystemShape, w: Option<&[i64]>, seed: u64) -> Result<StateVector> {
    let support = match w {
        Some(w) => sector_support(shape, w)?,
        None => (0..shape.basis_len()).collect(),
    };
    let mut g = GaussianStream::new(seed);
    let amplitudes = normalized_draw(&mut g, support.len(), 1.0);
    Ok(StateVector {
        shape: shape.clone(),
        support,
        amplitudes,
        support_weight: w.map(<[i64]>::to_vec),
    })
}

/// Random normalized state with equal mass `1/k` on each of `k` distinct
/// sectors. Sectors are drawn from one stream in the order given.
pub fn sample_multi_sector(
    shape: &SystemShape,
    sectors: &[Weight],
    seed: u64,
) -> Result<StateVector> {
    let distinct: BTreeSet<&Weight> = sectors.iter().collect();
    if sectors.is_empty() || distinct.len() != sectors.len() {
        return Err(Error::InvalidSites(alloc::string::String::from(
            "sectors must be nonempty and distinct",
        )));
    }
    let mut g = GaussianStream::new(seed);
    let mass = 1.0 / sectors.len() as f64;
    let mut pairs = Vec::new();
    for w in sectors {
        let support = sector_support(shape, w)?;
        let amps = normalized_draw(&mut g, support.len(), mass);
        pairs.extend(support.into_iter().zip(amps));
    }
    pairs.sort_by_key(|p| p.0);
    let (support, amplitudes) = pairs.into_iter().unzip();
    let support_weight = if sectors.len() == 1 {
        Some(sectors[0].clone())
    } else {
        None
    };
    Ok(StateVector {
        shape: shape.clone(),
        support,
        amplitudes,
        support_weight,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightComponent {
    /// `||psi_w||^2`.
    pub probability: f64,
    /// `psi_w / ||psi_w||`.
    pub state: StateVector,
}

/// Orthogonal decomposition of a state into its weight-sector projections.
/// Sectors carrying no amplitude are omitted.
pub fn weight_components(state: &StateVector) -> BTreeMap<Weight, WeightComponent> {
    let mut groups: BTreeMap<Weight, (Vec<usize>, Vec<Complex64>)> = BTreeMap::new();
    for (lin, a) in state.entries() {
        let g = groups.entry(state.shape.linear_weight(lin)).or_default();
        g.0.push(lin);
        g.1.push(a);
    }
    groups
        .into_iter()
        .filter_map(|(w, (support, amps))| {
            let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if p == 0.0 {
                return None;
            }
            let s = 1.0 / libm::sqrt(p);
            let amplitudes = amps.into_iter().map(|a| a * s).collect();
            let component = StateVector {
                shape: state.shape.clone(),
                support,
                amplitudes,
                support_weight: Some(w.clone()),
            };
            Some((
                w,
                WeightComponent {
                    probability: p,
                    state: component,
                },
            ))
        })
        .collect()
}
