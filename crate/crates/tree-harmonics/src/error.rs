use thiserror::Error;

/// Errors produced by the library. Each variant maps to a CLI exit code:
/// domain/precondition errors exit with 2, resource caps with 3, I/O and
/// parse failures with 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank {0} out of range (need 2 <= r <= 63)")]
    RankOutOfRange(u32),
    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: u32, rank: u32 },
    #[error("ball of radius {radius} for rank {rank} has {size} vertices, exceeding cap {cap}")]
    BallCapExceeded {
        rank: u32,
        radius: u32,
        size: u128,
        cap: usize,
    },
    #[error("integer overflow computing {0}")]
    Overflow(&'static str),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u32, u32),
    #[error("spectral parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("quadrature size {0} rejected: {1}")]
    QuadratureSize(usize, &'static str),
    #[error("convolution on the boundary Im(theta1+theta2) = ln(3)/2 is undefined")]
    ConvolutionBoundary,
    #[error("kernel denominator vanishes near (theta1, theta2, theta3) = ({0}, {1}, {2})")]
    KernelSingular(String, String, f64),
    #[error("hypergroup kernel is only available for rank 2, got rank {0}")]
    KernelRankUnsupported(u32),
    #[error("{0}")]
    Precondition(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// CLI exit code for this error (spec'd codes: 2 domain, 3 resource, 4 I/O).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BallCapExceeded { .. } | Error::Overflow(_) => 3,
            Error::Parse { .. } | Error::Io { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
