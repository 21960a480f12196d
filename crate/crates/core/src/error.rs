use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: malformed record: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("paper `{paper_id}` is invalid: {reason}")]
    InvalidPaper { paper_id: String, reason: String },

    #[error("duplicate paper_id `{0}`")]
    DuplicatePaper(String),

    #[error("duplicate embedding for paper `{0}`")]
    DuplicateEmbedding(String),

    #[error("embedding for `{paper_id}` has dimension {found}, expected {expected}")]
    DimMismatch {
        paper_id: String,
        expected: usize,
        found: usize,
    },

    #[error("embedding for `{0}` has zero norm")]
    ZeroNorm(String),

    #[error("embedding for `{0}` contains a non-finite element")]
    NonFinite(String),

    #[error("unknown author `{0}`")]
    UnknownAuthor(String),

    #[error("author `{author_id}` has {found} papers, below the minimum of {required}")]
    BelowThreshold {
        author_id: String,
        found: usize,
        required: usize,
    },

    #[error("no paper of author `{0}` carries a field label")]
    NoFieldLabel(String),

    #[error("need at least {needed} papers with embeddings, found {found}")]
    TooFewPapers { needed: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("author position {position} out of range for {n_authors} authors")]
    PositionOutOfRange { position: usize, n_authors: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("author `{0}` has no cited references")]
    NoReferences(String),

    #[error("author `{0}` has no previously published own papers that could be cited")]
    NoCitableOpportunities(String),

    #[error("each group needs at least {needed} values, found {found}")]
    GroupTooSmall { needed: usize, found: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing score for author `{0}`")]
    MissingScore(String),

    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
