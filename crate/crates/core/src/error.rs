use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("a weight model needs at least one basis vector")]
    EmptyModel,
    #[error("cartan dimension must be positive")]
    ZeroCartanDim,
    #[error("weight vector has length {found}, expected {expected}")]
    WeightLength { expected: usize, found: usize },
    #[error("direct sum of models with cartan dimensions {0} and {1}")]
    CartanMismatch(usize, usize),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("slot count must be positive")]
    ZeroSlots,
    #[error("model is not an SU(2) irreducible: {0}")]
    NotIrreducible(String),
    #[error("need at least 2 particles, got {0}")]
    TooFewParticles(usize),
    #[error("multi-index {0:?} is out of range")]
    IndexOutOfRange(Vec<usize>),
    #[error("multi-index {0:?} appears twice")]
    DuplicateIndex(Vec<usize>),
    #[error("amplitude at {index:?} lies outside the declared weight sector")]
    OffSector { index: Vec<usize> },
    #[error("constant-weight sector {0:?} is empty")]
    EmptySector(Vec<i64>),
    #[error("invalid site set: {0}")]
    InvalidSites(String),
    #[error("invalid relation context: {0}")]
    InvalidContext(String),
    #[error("state declares support weight {declared:?} but the relation targets {requested:?}")]
    SupportMismatch {
        declared: Vec<i64>,
        requested: Vec<i64>,
    },
    #[error("perfect-tensor witness needs N >= 4 (got N = {0}); for N = 2, 3 no context with M >= 1 and M + 1 <= floor(N/2) exists")]
    WitnessNeedsFourParticles(usize),
    #[error("no impossibility witness found for sector {0:?}")]
    NoWitness(Vec<i64>),
    #[error("marginal family is missing pairs {0:?}")]
    MissingPairs(Vec<(usize, usize)>),
    #[error("malformed marginal: {0}")]
    MalformedMarginal(String),
    #[error("matrix has {found} entries, expected {expected}")]
    MatrixSize { expected: usize, found: usize },
}
