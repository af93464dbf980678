//! JSON file formats. Site positions and basis indices are 1-based on disk
//! and 0-based in memory.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cwrdm_core::marginals::MarginalFamily;
use cwrdm_core::rdm::ReducedDensity;
use cwrdm_core::state::{MultiIndex, StateVector, SystemShape};
use cwrdm_core::weights::WeightModel;
use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

/// A failure to read or write a file, as opposed to bad content.
#[derive(Debug)]
pub struct IoFailure(pub String);

impl fmt::Display for IoFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for IoFailure {}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| IoFailure(format!("cannot read {}: {e}", path.display())).into())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| IoFailure(format!("cannot write {}: {e}", path.display())).into())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelJson {
    pub cartan_dim: usize,
    pub weights: Vec<Vec<i64>>,
    #[serde(default)]
    pub label: String,
}

impl From<&WeightModel> for ModelJson {
    fn from(m: &WeightModel) -> Self {
        Self {
            cartan_dim: m.cartan_dim(),
            weights: m.weights().to_vec(),
            label: m.label().to_string(),
        }
    }
}

impl ModelJson {
    pub fn into_model(self) -> Result<WeightModel> {
        Ok(WeightModel::new(self.cartan_dim, self.weights, self.label)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AmplitudeJson {
    pub index: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateJson {
    pub model: ModelJson,
    #[serde(rename = "N")]
    pub n: usize,
    pub support_weight: Option<Vec<i64>>,
    pub amplitudes: Vec<AmplitudeJson>,
}

fn zero_based(index: &[usize], what: &str) -> Result<Vec<usize>> {
    index
        .iter()
        .map(|&i| match i {
            0 => bail!("{what} {index:?} contains 0; indices are 1-based"),
            _ => Ok(i - 1),
        })
        .collect()
}

impl StateJson {
    pub fn from_state(state: &StateVector) -> Self {
        let shape = state.shape();
        Self {
            model: shape.model().into(),
            n: shape.particles(),
            support_weight: state.support_weight().map(<[i64]>::to_vec),
            amplitudes: state
                .entries()
                .map(|(lin, a)| AmplitudeJson {
                    index: shape.multi(lin).0.iter().map(|i| i + 1).collect(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    pub fn into_state(self) -> Result<StateVector> {
        let shape = SystemShape::new(self.model.into_model()?, self.n)?;
        let entries = self
            .amplitudes
            .into_iter()
            .map(|a| {
                Ok((
                    MultiIndex(zero_based(&a.index, "amplitude index")?),
                    Complex64::new(a.re, a.im),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StateVector::from_entries(
            shape,
            entries,
            self.support_weight,
        )?)
    }
}

pub fn read_state(path: &Path) -> Result<StateVector> {
    read_json::<StateJson>(path)?
        .into_state()
        .with_context(|| format!("invalid state in {}", path.display()))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RdmJson {
    pub model: ModelJson,
    #[serde(rename = "N")]
    pub n: usize,
    pub kept: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
}

impl RdmJson {
    pub fn from_rdm(model: &WeightModel, n: usize, r: &ReducedDensity) -> Self {
        Self {
            model: model.into(),
            n,
            kept: r.kept().iter().map(|p| p + 1).collect(),
            matrix: r.matrix().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn into_rdm(self) -> Result<ReducedDensity> {
        let model = self.model.into_model()?;
        let kept = zero_based(&self.kept, "kept sites")?;
        let matrix = self
            .matrix
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Ok(ReducedDensity::from_matrix(model.dim(), kept, matrix)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PairJson {
    pub p: usize,
    pub q: usize,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FamilyJson {
    pub model: ModelJson,
    #[serde(rename = "N")]
    pub n: usize,
    pub pairs: Vec<PairJson>,
}

impl FamilyJson {
    pub fn from_family(family: &MarginalFamily) -> Self {
        let shape = family.shape();
        Self {
            model: shape.model().into(),
            n: shape.particles(),
            pairs: family
                .pairs()
                .map(|((p, q), m)| PairJson {
                    p: p + 1,
                    q: q + 1,
                    matrix: m.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn into_family(self) -> Result<MarginalFamily> {
        let shape = SystemShape::new(self.model.into_model()?, self.n)?;
        let mut family = MarginalFamily::new(shape);
        for pair in self.pairs {
            let (p, q) = (pair.p, pair.q);
            let sites = zero_based(&[p, q], "pair")?;
            let matrix = pair
                .matrix
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect();
            family
                .insert(sites[0], sites[1], matrix)
                .with_context(|| format!("pair ({p}, {q})"))?;
        }
        Ok(family)
    }
}

pub fn read_family(path: &Path) -> Result<MarginalFamily> {
    read_json::<FamilyJson>(path)?
        .into_family()
        .with_context(|| format!("invalid family in {}", path.display()))
}
