//! Text formats: the STRIPS/typing subset of PDDL, case files, plan files
//! and experiment CSV rows.

mod case;
mod csv;
mod domain;
mod plan;
mod problem;
pub mod sexpr;

use thiserror::Error;

use crate::model::ModelError;

pub use self::case::{read_case, read_library, write_case, write_library, CaseFile};
pub use self::csv::{read_rows, write_rows, ExperimentRow, CSV_HEADER};
pub use self::domain::{parse_domain, write_domain};
pub use self::plan::{read_plan, write_plan};
pub use self::problem::{parse_problem, write_problem};

#[derive(Debug, Error)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unsupported PDDL feature `{construct}`")]
    Unsupported { construct: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed case file: {0}")]
    MalformedCase(String),
    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PddlError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        PddlError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Keywords that name PDDL constructs outside the STRIPS subset.
const UNSUPPORTED_HEADS: &[&str] = &[
    "not",
    "or",
    "imply",
    "exists",
    "forall",
    "when",
    "=",
    "increase",
    "decrease",
    "assign",
    "scale-up",
    "scale-down",
    "either",
    "preference",
    "<",
    ">",
    "<=",
    ">=",
];

pub(crate) fn unsupported(construct: impl Into<String>) -> PddlError {
    PddlError::Unsupported {
        construct: construct.into(),
    }
}

pub(crate) fn is_unsupported_head(head: &str) -> bool {
    UNSUPPORTED_HEADS.contains(&head)
}
