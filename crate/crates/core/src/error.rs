use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::query::SearchResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("index directory {0} is already populated")]
    PathPopulated(PathBuf),

    #[error("shard count must be at least 1")]
    InvalidShardCount,

    #[error("index writer is closed")]
    WriterClosed,

    #[error("shard {shard} is full ({docs} documents)")]
    ShardFull { shard: usize, docs: u64 },

    #[error("unknown document id {0}")]
    UnknownDocId(u64),

    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("{0}: no `text` column")]
    MissingTextColumn(PathBuf),

    #[error("{failed} input files could not be read; the rest were indexed")]
    PartialIngest { failed: u64 },

    #[error("average document size must be positive")]
    ZeroAvgDocSize,

    #[error("analyzer configuration mismatch: {0}")]
    AnalyzerMismatch(String),

    #[error("document count mismatch after merge: expected {expected}, wrote {actual}")]
    DocCountMismatch { expected: u64, actual: u64 },

    #[error("unknown query type `{0}`")]
    UnknownQueryType(String),

    #[error("query timed out after {elapsed_ms:.1} ms")]
    QueryTimeout { elapsed_ms: f64, partial: Box<SearchResult> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("keyword file {0} contains no queries")]
    EmptyKeywords(PathBuf),

    #[error("index is empty")]
    EmptyIndex,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().to_path_buf(), source }
    }

    pub fn corrupt(path: impl AsRef<Path>, reason: impl Into<String>) -> Self {
        Error::Corrupt { path: path.as_ref().to_path_buf(), reason: reason.into() }
    }

    /// True for out-of-space and similar storage conditions.
    pub fn is_storage_full(&self) -> bool {
        matches!(self, Error::Io { source, .. } if source.kind() == io::ErrorKind::StorageFull)
    }
}

pub(crate) trait IoContext<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
