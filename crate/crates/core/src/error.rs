use std::fmt;

/// Shape list wrapper so dimension errors print as `[2, 3]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape(pub Vec<usize>);

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&[usize]> for Shape {
    fn from(s: &[usize]) -> Self {
        Shape(s.to_vec())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op}: incompatible shapes {lhs} and {rhs}")]
    Dimension {
        op: &'static str,
        lhs: Shape,
        rhs: Shape,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("value outside the function's domain: {0}")]
    Domain(String),

    #[error("non-finite value produced by {0}")]
    Numeric(String),

    #[error("input of {len} samples is shorter than the {min}-sample encoder window")]
    InputTooShort { len: usize, min: usize },

    #[error("reference signal is identically zero")]
    UndefinedReference,

    #[error("training diverged at step {step}")]
    TrainingDiverged { step: usize },

    #[error("out of memory: {requested} elements requested with {live} live (limit {limit})")]
    OutOfMemory {
        requested: usize,
        live: usize,
        limit: usize,
    },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Self {
        Error::Dimension {
            op,
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }
}
