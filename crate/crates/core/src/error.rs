use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("index {index:?} out of range for grid shape {shape:?}")]
    IndexOutOfRange { index: Vec<usize>, shape: Vec<usize> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch { expected: &'static str, found: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("unknown projection family `{0}`")]
    UnknownFamily(String),

    #[error("parameter error for `{model}`: {message}")]
    Parameter { model: String, message: String },

    #[error("field lies outside the range of the projection (relative defect {defect:.3e})")]
    OutsideRange { defect: f64 },

    #[error("degenerate manufactured problem: projected field vanished after {attempts} draws")]
    DegenerateManufactured { attempts: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("field file error: {0}")]
    FieldFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
