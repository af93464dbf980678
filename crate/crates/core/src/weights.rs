//! Single-particle weight systems.
//!
//! A [`WeightModel`] lists, for every basis vector `e_r` of one particle
//! space, its weight under the Cartan generator(s). SU(2) weights are stored
//! doubled (`2 x spin`) so half-integer spins stay exact.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Weight vector of one basis element (length = cartan dimension).
pub type Weight = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightModel {
    cartan_dim: usize,
    weights: Vec<Weight>,
    label: String,
}

impl WeightModel {
    /// Builds a model from explicit weights. Order is kept as given: basis
    /// index `r` in every downstream object refers to this order.
    pub fn new(cartan_dim: usize, weights: Vec<Weight>, label: impl Into<String>) -> Result<Self> {
        if cartan_dim == 0 {
            return Err(Error::ZeroCartanDim);
        }
        if weights.is_empty() {
            return Err(Error::EmptyModel);
        }
        if let Some(bad) = weights.iter().find(|w| w.len() != cartan_dim) {
            return Err(Error::WeightLength {
                expected: cartan_dim,
                found: bad.len(),
            });
        }
        Ok(Self {
            cartan_dim,
            weights,
            label: label.into(),
        })
    }

    pub fn cartan_dim(&self) -> usize {
        self.cartan_dim
    }

    /// Number of basis vectors `D`.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn weight(&self, r: usize) -> &[i64] {
        &self.weights[r]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Componentwise sum of all weights.
    pub fn weight_sum(&self) -> Weight {
        let mut sum = vec![0; self.cartan_dim];
        for w in &self.weights {
            add_assign(&mut sum, w);
        }
        sum
    }

    /// True when the weights sum to zero, as they do for any full representation.
    pub fn is_balanced(&self) -> bool {
        self.weight_sum().iter().all(|&c| c == 0)
    }

    /// Returns `Some(two_j)` when the model is exactly `spin_model(two_j)`.
    pub fn su2_irreducible(&self) -> Option<u32> {
        if self.cartan_dim != 1 {
            return None;
        }
        let two_j = self.dim() as i64 - 1;
        let expected = (0..self.dim() as i64).map(|r| -two_j + 2 * r);
        if self.weights.iter().map(|w| w[0]).eq(expected) {
            Some(two_j as u32)
        } else {
            None
        }
    }
}

/// Spin `two_j / 2` irreducible of SU(2): weights `-two_j, -two_j + 2, ..., two_j`.
pub fn spin_model(two_j: u32) -> WeightModel {
    let t = two_j as i64;
    let weights = (0..=t).map(|r| vec![-t + 2 * r]).collect();
    WeightModel {
        cartan_dim: 1,
        weights,
        label: format!("spin(two_j={two_j})"),
    }
}

/// Concatenates the weight lists of models sharing a cartan dimension.
pub fn direct_sum(models: &[WeightModel]) -> Result<WeightModel> {
    let first = models.first().ok_or(Error::EmptyModel)?;
    let mut weights = Vec::new();
    let mut labels = Vec::new();
    for m in models {
        if m.cartan_dim != first.cartan_dim {
            return Err(Error::CartanMismatch(first.cartan_dim, m.cartan_dim));
        }
        weights.extend(m.weights.iter().cloned());
        labels.push(m.label.as_str());
    }
    WeightModel::new(first.cartan_dim, weights, labels.join("+"))
}

/// SU(3) defining representation.
///
/// Normalization: the Cartan generators are `diag(1, -1, 0)` and
/// `diag(1, 1, -2)`, giving weights `(1, 1)`, `(-1, 1)`, `(0, -2)`.
/// They are stored in ascending lexicographic order.
pub fn su3_fundamental() -> WeightModel {
    WeightModel {
        cartan_dim: 2,
        weights: vec![vec![-1, 1], vec![0, -2], vec![1, 1]],
        label: String::from("su3(fundamental)"),
    }
}

/// Constraint imposed on the frequency vector of an unordered tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `sum_r n_r alpha_r = target` componentwise (the constant-weight condition).
    LinearWeight(Weight),
    /// `sum_r n_r |alpha_r|^2 = target`.
    QuadraticWeight(i64),
    /// `sum_r n_r score_r = target` for an explicit per-basis-vector score.
    Custom { scores: Vec<i64>, target: i64 },
}

impl Constraint {
    pub fn validate(&self, model: &WeightModel) -> Result<()> {
        match self {
            Constraint::LinearWeight(t) if t.len() != model.cartan_dim() => {
                Err(Error::InvalidConstraint(format!(
                    "linear target has length {}, model cartan dimension is {}",
                    t.len(),
                    model.cartan_dim()
                )))
            }
            Constraint::Custom { scores, .. } if scores.len() != model.dim() => {
                Err(Error::InvalidConstraint(format!(
                    "{} scores for a model with {} basis vectors",
                    scores.len(),
                    model.dim()
                )))
            }
            _ => Ok(()),
        }
    }

    /// Per-basis-vector score vectors and the target they must sum to.
    pub(crate) fn scores(&self, model: &WeightModel) -> (Vec<Vec<i64>>, Vec<i64>) {
        match self {
            Constraint::LinearWeight(t) => (model.weights().to_vec(), t.clone()),
            Constraint::QuadraticWeight(s) => (
                model
                    .weights()
                    .iter()
                    .map(|w| vec![w.iter().map(|c| c * c).sum()])
                    .collect(),
                vec![*s],
            ),
            Constraint::Custom { scores, target } => {
                (scores.iter().map(|&s| vec![s]).collect(), vec![*target])
            }
        }
    }
}

pub(crate) fn add_assign(acc: &mut [i64], w: &[i64]) {
    for (a, b) in acc.iter_mut().zip(w) {
        *a += b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(m: &WeightModel) -> Vec<i64> {
        m.weights().iter().map(|w| w[0]).collect()
    }

    #[test]
    fn spin_models() {
        assert_eq!(flat(&spin_model(1)), [-1, 1]);
        assert_eq!(flat(&spin_model(2)), [-2, 0, 2]);
        assert_eq!(flat(&spin_model(0)), [0]);
        for t in 0..8 {
            let m = spin_model(t);
            assert_eq!(m.dim(), t as usize + 1);
            assert!(m.is_balanced());
            assert_eq!(m.su2_irreducible(), Some(t));
            let mut neg: Vec<i64> = flat(&m).iter().map(|x| -x).collect();
            neg.sort();
            assert_eq!(neg, flat(&m));
        }
    }

    #[test]
    fn direct_sums_concatenate() {
        let m = direct_sum(&[spin_model(1), spin_model(1)]).unwrap();
        assert_eq!(flat(&m), [-1, 1, -1, 1]);
        assert_eq!(m.su2_irreducible(), None);
        assert_eq!(flat(&direct_sum(&[spin_model(0)]).unwrap()), [0]);
        let m = direct_sum(&[spin_model(2), spin_model(0)]).unwrap();
        assert_eq!(flat(&m), [-2, 0, 2, 0]);
        assert!(m.is_balanced());
    }

    #[test]
    fn direct_sum_is_associative() {
        let (a, b, c) = (spin_model(1), spin_model(2), spin_model(3));
        let left = direct_sum(&[direct_sum(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = direct_sum(&[a, direct_sum(&[b, c]).unwrap()]).unwrap();
        assert_eq!(left.weights(), right.weights());
    }

    #[test]
    fn direct_sum_rejects_mixed_cartan() {
        assert_eq!(
            direct_sum(&[spin_model(1), su3_fundamental()]),
            Err(Error::CartanMismatch(1, 2))
        );
        assert_eq!(direct_sum(&[]), Err(Error::EmptyModel));
    }

    #[test]
    fn su3_weights() {
        let m = su3_fundamental();
        assert_eq!((m.dim(), m.cartan_dim()), (3, 2));
        assert_eq!(m.weight_sum(), [0, 0]);
        for i in 0..3 {
            for j in i + 1..3 {
                assert_ne!(m.weight(i), m.weight(j));
            }
        }
        assert!(m.weights().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn model_validation() {
        assert_eq!(WeightModel::new(1, vec![], "x"), Err(Error::EmptyModel));
        assert_eq!(
            WeightModel::new(2, vec![vec![1]], "x"),
            Err(Error::WeightLength {
                expected: 2,
                found: 1
            })
        );
        assert_eq!(
            WeightModel::new(0, vec![vec![]], "x"),
            Err(Error::ZeroCartanDim)
        );
    }

    #[test]
    fn constraint_validation() {
        let m = spin_model(2);
        assert!(Constraint::LinearWeight(vec![0]).validate(&m).is_ok());
        assert!(Constraint::LinearWeight(vec![0, 0]).validate(&m).is_err());
        assert!(Constraint::Custom {
            scores: vec![1, 2],
            target: 3
        }
        .validate(&m)
        .is_err());
        let (scores, target) = Constraint::QuadraticWeight(8).scores(&m);
        assert_eq!(scores, [vec![4], vec![0], vec![4]]);
        assert_eq!(target, [8]);
    }
}
