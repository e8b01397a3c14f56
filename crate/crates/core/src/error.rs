use thiserror::Error;

/// Errors raised by the numerical core and the scenario layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QdtError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: max |A - A†| = {deviation:.3e}")]
    Hermiticity { deviation: f64 },

    #[error("matrix is not unitary: max |U†U - I| = {deviation:.3e}")]
    Unitarity { deviation: f64 },

    #[error("vector is not normalized: norm = {norm}")]
    Normalization { norm: f64 },

    #[error("index {index} out of range for {len} entries")]
    Index { index: usize, len: usize },

    #[error("conditioning on an event of vanishing probability ({probability:.3e} <= {threshold:.0e}){}", label_suffix(.label))]
    ZeroProbabilityConditioning {
        probability: f64,
        threshold: f64,
        label: Option<String>,
    },

    #[error("measure is not complete: {0}")]
    IncompleteMeasure(String),

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("invalid projector: {0}")]
    InvalidProjector(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("probability {value} lies outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { value: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Scenario(#[from] ScenarioError),
}

fn label_suffix(label: &Option<String>) -> String {
    match label {
        Some(l) => format!(" on `{l}`"),
        None => String::new(),
    }
}

/// Failures while reading a scenario document.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("invariant violated at {path}: {message}")]
    Invariant { path: String, message: String },
}

impl ScenarioError {
    pub fn path(&self) -> Option<&str> {
        match self {
            ScenarioError::Syntax { .. } => None,
            ScenarioError::Schema { path, .. } | ScenarioError::Invariant { path, .. } => {
                Some(path)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Syntax { .. } => "syntax",
            ScenarioError::Schema { .. } => "schema",
            ScenarioError::Invariant { .. } => "invariant",
        }
    }
}

impl QdtError {
    /// True for errors caused by malformed input rather than by evaluation.
    pub fn is_validation(&self) -> bool {
        matches!(self, QdtError::Scenario(_) | QdtError::InvalidArgument(_))
    }

    /// Short remediation hint for command-line rendering.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            QdtError::ZeroProbabilityConditioning { .. } => {
                Some("pick a first choice with non-zero prior probability or change the initial state")
            }
            QdtError::IncompleteMeasure(_) => {
                Some("supply a full basis (as many vectors as the ambient dimension) or a behaviorally normalized state")
            }
            QdtError::Unitarity { .. } => Some("check the evolution matrix or use a hermitian generator"),
            QdtError::Hermiticity { .. } => Some("generators and density matrices must equal their conjugate transpose"),
            QdtError::Normalization { .. } => Some("rescale the vector to unit length"),
            QdtError::Scenario(ScenarioError::Schema { .. }) => {
                Some("compare the document against the qdt/1 schema in the README")
            }
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, QdtError>;
