//! Sharded positional inverted index.
//!
//! Layout on disk:
//!
//! ```text
//! <root>/manifest.json
//! <root>/shard-<k>/segment-<n>.{terms,postings,docs}
//! <root>/shard-<k>/pending/          spill runs of an uncommitted writer
//! ```
//!
//! Each document is stored once and indexed under three field variants:
//! `main` (web_content chain), `exact` (exact_match chain) and `keyword`
//! (the whole lowercased text as one term).

mod codec;
mod manifest;
pub(crate) mod merger;
mod reader;
pub(crate) mod segment;
mod writer;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use manifest::{
    IndexManifest, SegmentInfo, ShardMetadata, FORMAT_VERSION, MANIFEST_FILE, MAX_DOCS_PER_SHARD,
};
pub use reader::{CorpusStats, DictEntry, IndexReader, IndexStats, PostingList, ReaderOptions};
pub use segment::FileAccess;
pub use writer::{compact, AnalyzedDocument, IndexWriter, WriterOptions};

pub(crate) use manifest::shard_dir;

use crate::analysis::AnalyzerConfig;
use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Field {
    Main = 0,
    Exact = 1,
    Keyword = 2,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Main, Field::Exact, Field::Keyword];

    pub fn from_u8(v: u8) -> Option<Field> {
        Field::ALL.get(v as usize).copied()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Main => "main",
            Field::Exact => "exact",
            Field::Keyword => "keyword",
        })
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Field::Main),
            "exact" => Ok(Field::Exact),
            "keyword" => Ok(Field::Keyword),
            other => Err(Error::InvalidConfig(format!("unknown field `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: u64,
    pub text: String,
    pub url: String,
    pub source_file: String,
    pub row_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: u64,
    pub term_frequency: u32,
    pub positions: Vec<u32>,
}

/// FNV-1a over the little-endian bytes of `doc_id`.
pub fn route(doc_id: u64, n_shards: usize) -> usize {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0100_0000_01b3;
    let mut h = OFFSET;
    for b in doc_id.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    (h % n_shards as u64) as usize
}

/// Creates an empty index at `path` with a fixed shard count.
pub fn create_index(path: &Path, n_shards: usize, analyzer: AnalyzerConfig) -> Result<IndexManifest> {
    create_named(path, n_shards, analyzer, None)
}

pub(crate) fn create_named(
    path: &Path,
    n_shards: usize,
    analyzer: AnalyzerConfig,
    name: Option<String>,
) -> Result<IndexManifest> {
    if n_shards == 0 {
        return Err(Error::InvalidShardCount);
    }
    crate::analysis::Analyzer::new(analyzer.clone())?;
    if path.exists() {
        let populated = fs::read_dir(path).at(path)?.next().is_some();
        if populated {
            return Err(Error::PathPopulated(path.to_path_buf()));
        }
    }
    fs::create_dir_all(path).at(path)?;
    for k in 0..n_shards {
        let dir = shard_dir(path, k);
        fs::create_dir_all(&dir).at(&dir)?;
    }
    let name = name.unwrap_or_else(|| {
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "index".to_owned())
    });
    let manifest = IndexManifest::new(name, n_shards, analyzer);
    manifest.store(path)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn route_is_stable_and_in_range() {
        for id in 0..1000u64 {
            let s = route(id, 16);
            assert!(s < 16);
            assert_eq!(s, route(id, 16));
        }
        assert_eq!(route(12345, 1), 0);
    }

    #[test]
    fn fnv_reference_values() {
        // Computed with an independent FNV-1a implementation.
        assert_eq!(route(0, 16), 5);
        assert_eq!(route(1, 16), 4);
        assert_eq!(route(12345, 7), 2);
    }

    #[test]
    fn create_rejects_zero_shards_and_populated_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let m = create_index(&dir.path().join("a"), 16, AnalyzerConfig::default()).unwrap();
        assert_eq!(m.shards.len(), 16);
        assert!(m.shards.iter().all(|s| s.doc_count == 0));

        assert!(matches!(
            create_index(&dir.path().join("b"), 0, AnalyzerConfig::default()),
            Err(Error::InvalidShardCount)
        ));
        assert!(matches!(
            create_index(&dir.path().join("a"), 4, AnalyzerConfig::default()),
            Err(Error::PathPopulated(_))
        ));
        let single = create_index(&dir.path().join("c"), 1, AnalyzerConfig::default()).unwrap();
        assert_eq!(single.n_shards, 1);
        assert!(dir.path().join("c/shard-0").is_dir());
    }
}
