//! Crate-wide error type.

use thiserror::Error;

/// A type alias for `Result<T, Error>`.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A corpus file line did not match the `token<TAB>tag` format.
    #[error("corpus parse error at line {line}: {message}")]
    CorpusParse { line: usize, message: String },

    /// The parsed corpus contained no sentences.
    #[error("empty corpus")]
    EmptyCorpus,

    /// A language code was not two ASCII letters.
    #[error("invalid language code {0:?}: expected two ASCII letters")]
    InvalidLanguage(String),

    /// A corpus is too small for the requested token budget.
    #[error("language {language} has {available} tokens, {required} required")]
    InsufficientTokens {
        language: String,
        available: usize,
        required: usize,
    },

    /// No sentence of length >= 3 exists, so no trigram vocabulary can be built.
    #[error("no sentence with at least 3 tokens; cannot build a trigram vocabulary")]
    NoTrigrams,

    /// Feature vectors built from different specs were mixed.
    #[error("feature spec mismatch: {0}")]
    SpecMismatch(String),

    /// Vector length does not match the expected feature dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Training data contains a single class.
    #[error("training data contains a single class; need both labels")]
    SingleClass,

    /// A class has fewer instances than the number of folds.
    #[error("class {label:?} has {count} instances, fewer than {folds} folds")]
    ClassTooSmall {
        label: String,
        count: usize,
        folds: usize,
    },

    /// A label had no entry in the provided mapping.
    #[error("no mapping for label {0:?}")]
    UnmappedLabel(String),

    /// The SMO solver exceeded its pass budget without converging.
    #[error("SMO did not converge within {passes} passes")]
    NoConvergence { passes: usize },

    /// Newick text could not be parsed.
    #[error("newick parse error at byte {pos}: {message}")]
    NewickParse { pos: usize, message: String },

    /// A Newick node had more or fewer than two children.
    #[error("non-binary node ({arity} children) at byte {pos}")]
    NonBinaryNode { pos: usize, arity: usize },

    /// A label was not found among the tree leaves.
    #[error("unknown leaf label {0:?}")]
    UnknownLabel(String),

    /// Two trees were compared but their leaf sets differ.
    #[error("leaf sets differ: only in first tree {only_left:?}, only in second {only_right:?}")]
    LeafSetMismatch {
        only_left: Vec<String>,
        only_right: Vec<String>,
    },

    /// The operation needs merge heights, which only clustering output carries.
    #[error("tree has no merge heights; expected clustering output")]
    NoMergeHeights,

    /// A configuration value failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A precondition on operation inputs failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("TOML parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
