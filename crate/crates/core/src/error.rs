use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("rank {rank} outside [{min}, {max}]")]
    RankOutOfRange { rank: usize, min: usize, max: usize },

    #[error("layout caches {distinct} distinct files but the catalog only holds {file_count}")]
    InfeasibleLayout { distinct: usize, file_count: usize },

    #[error("paper-literal accounting has no per-request interpretation and cannot be simulated")]
    UnsupportedMode,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
