use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("parameter `{0}` cannot be the target of a substitution")]
    ParamBinding(String),

    #[error("`{0}` is not a spectral variable")]
    NotSpectral(String),

    #[error("unknown basis element `{0}`")]
    UnknownBasis(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("basis name `{0}` occurs in both summands")]
    NameCollision(String),

    #[error("not a subalgebra: [{a} l {b}] has a component along `{outside}`")]
    NotSubalgebra {
        a: String,
        b: String,
        outside: String,
    },

    #[error("map on Q is not invertible over C[d]: {0}")]
    NotInvertible(String),

    #[error("nonlinear occurrence of unknowns: {0}")]
    Nonlinear(String),

    #[error("invalid flag datum: {0}")]
    Flag(String),

    #[error("invalid element: {0}")]
    Element(String),

    #[error("datum has the wrong shape: {0}")]
    Shape(String),

    #[error("parameters must be specialized before solving: {0}")]
    Unspecialized(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
