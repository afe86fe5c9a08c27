use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid label space: {0}")]
    InvalidLabelSpace(String),

    #[error("invalid observation alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("every log weight is -inf; normalization undefined")]
    AllZeroWeights,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("sample {sample}: expected sequence length {expected}, found {found}")]
    LengthMismatch {
        sample: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown symbol {symbol} at position {position}")]
    UnknownSymbol { position: usize, symbol: usize },

    #[error("unknown label index {0}")]
    UnknownLabel(usize),

    #[error("zero evidence: the observation has zero probability under every label")]
    ZeroEvidence,

    #[error("prior must be strictly positive (label {label} has probability 0)")]
    ZeroPrior { label: usize },

    #[error("zero marginal probability for symbol {symbol} at position {position}")]
    ZeroMarginal { position: usize, symbol: usize },

    #[error("symbol {symbol} has zero probability under every state")]
    ZeroSymbolMarginal { symbol: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("model has no posterior columns L_y")]
    MissingPosteriors,

    #[error("model has no emission table")]
    MissingEmissions,

    #[error("posterior column for symbol {symbol} is inconsistent with prior and emissions (deviation {deviation:e})")]
    InconsistentPosteriors { symbol: usize, deviation: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state space too large for enumeration: {paths} paths (limit {limit})")]
    StateSpaceTooLarge { paths: u128, limit: u128 },

    #[error("loss diverged at epoch {epoch}")]
    DivergedLoss { epoch: usize },

    #[error("malformed model document: {0}")]
    MalformedModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
