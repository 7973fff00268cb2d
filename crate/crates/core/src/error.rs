use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::device::BlockType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Shortfall of one block type when a design does not pack into a region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deficit {
    pub block_type: BlockType,
    /// Placeable groups (chains and singletons) the design needs.
    pub required: usize,
    /// Groups that the best canonical packing managed to place.
    pub placed: usize,
}

impl fmt::Display for Deficit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} of {} groups placeable (short {})",
            self.block_type,
            self.placed,
            self.required,
            self.required - self.placed
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: parse error: {msg}")]
    Parse { path: String, msg: String },

    #[error("invalid {field}: {msg}")]
    Validation { field: String, msg: String },

    #[error("infeasible capacity: {}", join(.0))]
    Infeasible(Vec<Deficit>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("block {0} has no site assignment")]
    MissingAssignment(u32),

    #[error("non-finite objective value: {0}")]
    NonFinite(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no fit: {0}")]
    NoFit(String),

    #[error("replication overflow: {0}")]
    Overflow(String),

    #[error("flow step {step}: {source}")]
    Flow {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },
}

fn join(deficits: &[Deficit]) -> String {
    deficits
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Tags an error with the flow step it came from.
    pub fn in_step(self, step: &'static str) -> Self {
        Error::Flow {
            step,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through flow-step tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Flow { source, .. } => source.root(),
            other => other,
        }
    }
}
