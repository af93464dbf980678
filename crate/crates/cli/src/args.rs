//! Command-line definitions.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use cwrdm_core::weights::{spin_model, su3_fundamental, WeightModel};

use crate::io::{read_json, ModelJson};
use crate::report::Units;

/// Environment variable supplying the default tolerance; `--tolerance` wins.
pub const TOLERANCE_ENV: &str = "CWRDM_TOLERANCE";

#[derive(Debug, Parser)]
#[command(
    name = "cwrdm",
    version,
    about = "Linear relations on reduced density matrices of constant-weight states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate partitions, frequency matrices, b-vectors and ranks.
    Partitions(PartitionsArgs),
    /// Check the diagonal relations on sampled sector states.
    Verify(VerifyArgs),
    /// Decide whether two-body marginals lift to one weight sector.
    Certify(CertifyArgs),
    /// Exhibit the relation that rules out perfect tensors.
    Witness(WitnessArgs),
    /// Partial trace of a JSON state.
    TraceState(TraceStateArgs),
    /// Emit a random state, optionally its two-body marginals.
    Sample(SampleArgs),
}

/// A weight vector given as comma-separated integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightArg(pub Vec<i64>);

impl FromStr for WeightArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<i64>()
                    .map_err(|e| format!("bad weight component {x:?}: {e}"))
            })
            .collect::<std::result::Result<_, _>>()
            .map(WeightArg)
    }
}

/// A list of 1-based positive integers, comma-separated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexList(pub Vec<usize>);

impl FromStr for IndexList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| match x.trim().parse::<usize>() {
                Ok(0) => Err("indices are 1-based".to_string()),
                Ok(v) => Ok(v - 1),
                Err(e) => Err(format!("bad index {x:?}: {e}")),
            })
            .collect::<std::result::Result<_, _>>()
            .map(IndexList)
    }
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct ModelArgs {
    /// SU(2) irreducible with doubled spin TWO_J (dimension TWO_J + 1).
    #[arg(long, value_name = "TWO_J")]
    pub spin: Option<u32>,
    /// SU(3) defining representation.
    #[arg(long)]
    pub su3: bool,
    /// Weight model JSON file.
    #[arg(long = "model", value_name = "FILE")]
    pub model_file: Option<PathBuf>,
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<Option<WeightModel>> {
        Ok(match (&self.spin, self.su3, &self.model_file) {
            (Some(t), _, _) => Some(spin_model(*t)),
            (_, true, _) => Some(su3_fundamental()),
            (_, _, Some(path)) => Some(read_json::<ModelJson>(path)?.into_model()?),
            _ => None,
        })
    }

    pub fn require(&self) -> Result<WeightModel> {
        match self.resolve()? {
            Some(m) => Ok(m),
            None => bail!("a model is required: --spin TWO_J, --su3 or --model FILE"),
        }
    }
}

pub fn tolerance(flag: Option<f64>, default: f64) -> Result<f64> {
    let t = flag.unwrap_or(default);
    if !(t.is_finite() && t > 0.0) {
        bail!("tolerance must be positive and finite, got {t}");
    }
    Ok(t)
}

#[derive(Debug, Args)]
pub struct PartitionsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of free slots N - M.
    #[arg(long)]
    pub slots: usize,
    /// Target weight S (doubled units, comma-separated components); repeatable.
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "quadratic"
    )]
    pub target: Vec<WeightArg>,
    /// Use the squared-norm score with this total instead of the weight.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "target")]
    pub quadratic: Option<i64>,
    #[arg(long, value_enum, default_value_t)]
    pub units: Units,
    /// Also write the report to FILE.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of particles.
    #[arg(long = "n")]
    pub n: usize,
    /// Sector weight (doubled units).
    #[arg(long, allow_hyphen_values = true)]
    pub w: WeightArg,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub m_min: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Mix in the nearest other sector (negative control).
    #[arg(long)]
    pub break_weight: bool,
    /// Residual tolerance [default: 1e-10].
    #[arg(long, env = TOLERANCE_ENV)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub units: Units,
    /// Write the per-context CSV table to FILE.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Marginal family JSON file.
    #[arg(long)]
    pub family: PathBuf,
    /// Pivot site (1-based), repeatable [default: every site with all its pairs].
    #[arg(long)]
    pub pivot: Vec<usize>,
    /// Candidate agreement tolerance [default: 1e-6].
    #[arg(long, env = TOLERANCE_ENV)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub units: Units,
    /// Write the residual CSV table to FILE.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Sector weight (doubled units).
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<WeightArg>,
    /// Use this leading index (1-based, comma-separated) instead of searching.
    #[arg(long)]
    pub i0: Option<IndexList>,
    /// Report the perfect-tensor deviation of a JSON state.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub units: Units,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("sites").required(true).args(["trace", "kept"])))]
pub struct TraceStateArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Sites to trace out (1-based, comma-separated).
    #[arg(long)]
    pub trace: Option<IndexList>,
    /// Sites to keep (1-based, comma-separated).
    #[arg(long)]
    pub kept: Option<IndexList>,
    /// Write the marginal JSON to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Print the diagonal as CSV after the checks.
    #[arg(long)]
    pub diagonal: bool,
    /// Eigenvalue tolerance for the PSD and rank checks [default: 1e-10].
    #[arg(long, env = TOLERANCE_ENV)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "n")]
    pub n: usize,
    /// Sector weight; omit for the full space.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<WeightArg>,
    /// Additional sectors with equal mass; repeatable.
    #[arg(long, allow_hyphen_values = true, requires = "w")]
    pub also_w: Vec<WeightArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the state JSON to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write the two-body marginal family JSON to FILE.
    #[arg(long, value_name = "FILE")]
    pub family_out: Option<PathBuf>,
    /// Restrict the family to pairs containing this site (1-based).
    #[arg(long, requires = "family_out")]
    pub family_pivot: Option<usize>,
}
