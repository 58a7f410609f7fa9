use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("csv error at row {row}, column {col}: {msg}")]
    Csv { row: usize, col: usize, msg: String },

    #[error("concept cap exceeded: more than {cap} closed itemsets")]
    ConceptCapExceeded { cap: usize },

    #[error("concept family incomplete: {detail}")]
    IncompleteConcepts { detail: String },

    #[error(
        "candidate cap exceeded while mining level {level}: {tested} candidates tested (cap {cap})"
    )]
    CandidateCapExceeded {
        level: usize,
        tested: usize,
        cap: usize,
    },

    #[error("{unleveled} concepts left unleveled by the max-level cutoff {max_level}")]
    Unleveled { max_level: usize, unleveled: usize },

    #[error("oracle limit exceeded: {detail}")]
    OracleLimit { detail: String },

    #[error("exhaustive budget exceeded: {combinations} removal sets of size {size} (budget {budget})")]
    BudgetExceeded {
        size: usize,
        combinations: u128,
        budget: u128,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
