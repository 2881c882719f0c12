use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("site label {label} at position {position} is not binary")]
    InvalidLabel { position: usize, label: u8 },
    #[error("configuration must have at least one site")]
    EmptyConfiguration,
    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoop(usize),
    #[error("edge ({a}, {b}) references a site outside 0..{n_sites}")]
    EdgeOutOfRange { a: usize, b: usize, n_sites: usize },
    #[error("edge ({0}, {1}) is listed twice")]
    DuplicateEdge(usize, usize),
    #[error("site count mismatch: expected {expected}, found {found}")]
    SiteCountMismatch { expected: usize, found: usize },
    #[error("prior interval [{low}, {high}] is empty or not finite")]
    InvalidPrior { low: f64, high: f64 },
    #[error("model weights must be non-negative and sum to 1 (sum = {sum})")]
    InvalidModelPrior { sum: f64 },
    #[error("at least one candidate model is required")]
    NoModels,
    #[error("{sites} sites exceed the enumeration cap of {cap}")]
    EnumerationCap { sites: usize, cap: usize },
    #[error("statistic vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("distance list is empty")]
    EmptyDistances,
    #[error("quantile {0} is outside (0, 1]")]
    InvalidQuantile(f64),
    #[error("no accepted proposals, posterior probability is undefined")]
    NoAcceptances,
    #[error("plug-in Bayes factor undefined: no acceptances for model {0}")]
    PluginUndefined(usize),
    #[error("model index {index} out of range for {models} models")]
    ModelIndex { index: usize, models: usize },
    #[error("probability {0} is outside the admissible range")]
    InvalidProbability(f64),
    #[error("epsilon must be non-negative, got {0}")]
    InvalidEpsilon(f64),
    #[error("statistic value {value} outside [0, {max}]")]
    StatisticRange { value: usize, max: usize },
    #[error("this operation requires exactly two models, got {0}")]
    NotTwoModels(usize),
    #[error("invalid residue {residue:?} at position {position}")]
    InvalidResidue { position: usize, residue: char },
    #[error("quadrature failed to converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
}
