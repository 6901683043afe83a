use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("not a chain complex in degree {degree}: {reason}")]
    NotAComplex { degree: i64, reason: String },

    #[error("not a chain map in degree {degree}: {reason}")]
    NotAChainMap { degree: i64, reason: String },

    #[error("maps are not parallel: {0}")]
    NotParallel(String),

    #[error("section is not a common section: {0}")]
    BadSection(String),

    #[error("cube does not commute: {0}")]
    NonCommutingCube(String),

    #[error("grafting slot {slot} out of range for a tree with {leaves} leaves")]
    SlotOutOfRange { slot: usize, leaves: usize },

    #[error("not an inner edge: {0}")]
    NotInnerEdge(String),

    #[error("no edge at path {0:?}")]
    InvalidPath(Vec<usize>),

    #[error("malformed tree code `{code}`: {reason}")]
    MalformedCode { code: String, reason: String },

    #[error("unbounded request: {0}")]
    Unbounded(String),

    #[error("axiom violation: {0}")]
    AxiomViolation(String),

    #[error("sequence did not stabilize within bounds: {0}")]
    NotStabilized(String),

    #[error("truncation bound mismatch: {0}")]
    BoundMismatch(String),

    #[error("map does not descend to the quotient: {0}")]
    Descent(String),

    #[error("split coequalizer identity `{identity}` fails at basis element {witness}")]
    SplitIdentity { identity: String, witness: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
