use std::path::PathBuf;

use crate::lattice::WaveVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("the zero vector has no class")]
    ZeroVector,

    #[error("norm 0 has no fourth-power split")]
    ZeroNorm,

    #[error("domain limit must be at least 1, got {0}")]
    DomainTooSmall(u32),

    #[error("domain limit {limit} exceeds the supported maximum {max}")]
    DomainTooLarge { limit: u32, max: u32 },

    #[error("brute force is limited to D <= {max}, got {limit}")]
    OracleLimit { limit: u32, max: u32 },

    #[error("vectors {u} and {v} have different norms")]
    NormMismatch { u: WaveVector, v: WaveVector },

    #[error("identical vectors {0} give the excluded zero deficiency")]
    IdenticalPair(WaveVector),

    #[error("not a two-class resonant quadruple: {0}")]
    InvalidQuad(String),

    #[error("malformed solution record at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("failed writing solutions to {path}: {source}")]
    Sink {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
