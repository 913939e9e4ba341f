use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not decomposable: chordless cycle {}", .witness.join(" - "))]
    NotDecomposable { witness: Vec<String> },

    #[error("invalid clique order: {0}")]
    InvalidOrder(String),

    #[error("invalid cell: {0}")]
    InvalidCell(String),

    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("distribution is not Markov with respect to the graph: |theta({set})| = {value:e} exceeds tolerance {tolerance:e}")]
    NotMarkov {
        set: String,
        value: f64,
        tolerance: f64,
    },

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("{set} is not a cut: component {{{}}} has boundary vertices {} and {} that are not adjacent", .component.join(","), .pair.0, .pair.1)]
    NotACut {
        set: String,
        component: Vec<String>,
        pair: (String, String),
    },

    #[error("table too large: {what} has {cells} cells (limit {limit})")]
    TooLarge {
        what: String,
        cells: u128,
        limit: u128,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("internal defect: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
