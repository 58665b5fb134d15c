use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid variety descriptor `{0}`")]
    InvalidDescriptor(String),

    #[error("unsupported variety for this operation: {0}")]
    Unsupported(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("multidegree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("point sampling failed after {0} retries")]
    SamplingFailed(usize),

    #[error("linear ideal backends disagree: symbolic rank {symbolic}, evaluation rank {evaluation}")]
    BackendDisagreement { symbolic: usize, evaluation: usize },

    #[error("evaluation kernel did not stabilize: rank {before} -> {after}")]
    RankUnstable { before: usize, after: usize },

    #[error("no distinguished monomial restricts to the product of chart coordinates")]
    InvalidDistinguishedMonomial,

    #[error("operator produces a negative exponent at non-distinguished index {0}")]
    NegativeExponent(usize),

    #[error("sign pattern does not determine the distinguished coordinates of the lattice")]
    DegenerateSignPattern,

    #[error("arithmetic invariant violated: {0}")]
    Arithmetic(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
