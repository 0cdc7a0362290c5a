use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid extent: {0}")]
    InvalidExtent(String),
    #[error("unsupported boundary condition for this dimension: {0}")]
    UnsupportedBcDimension(String),
    #[error("field does not live on this mesh")]
    MeshMismatch,
    #[error("negative time: {0}")]
    NegativeTime(f64),
    #[error("empty epsilon list")]
    EmptyEpsilonList,
    #[error("unknown nonlinearity: {0}")]
    UnknownNonlinearity(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("newton iteration failed to converge: {0}")]
    NewtonNoConvergence(String),
    #[error("singular linear system: {0}")]
    SingularJacobian(String),
    #[error("degenerate samples: regression needs spread")]
    DegenerateSamples,
    #[error("nonpositive value in series: {0}")]
    NegativeSample(String),
    #[error("too few samples: need {need}, have {have}")]
    TooFewSamples { need: usize, have: usize },
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("coercivity check failed: {0}")]
    NotCoercive(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
