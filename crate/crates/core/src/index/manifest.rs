use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::AnalyzerConfig;
use crate::error::{Error, IoContext, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;
/// Per-shard document ceiling, inherited from Lucene's per-index limit.
pub const MAX_DOCS_PER_SHARD: u64 = 2_147_483_519;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub id: u32,
    pub doc_count: u64,
    pub main_tokens: u64,
    pub exact_tokens: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardMetadata {
    pub shard_id: usize,
    pub doc_count: u64,
    pub total_token_count_main: u64,
    pub avg_doc_length_main: f64,
    pub total_token_count_exact: u64,
    pub on_disk_bytes: u64,
    pub segments: Vec<SegmentInfo>,
    pub next_segment: u32,
}

impl ShardMetadata {
    pub fn empty(shard_id: usize) -> Self {
        ShardMetadata {
            shard_id,
            doc_count: 0,
            total_token_count_main: 0,
            avg_doc_length_main: 0.0,
            total_token_count_exact: 0,
            on_disk_bytes: 0,
            segments: Vec::new(),
            next_segment: 0,
        }
    }

    /// Recomputes the aggregate counts from the segment list.
    pub fn refresh(&mut self) {
        self.doc_count = self.segments.iter().map(|s| s.doc_count).sum();
        self.total_token_count_main = self.segments.iter().map(|s| s.main_tokens).sum();
        self.total_token_count_exact = self.segments.iter().map(|s| s.exact_tokens).sum();
        self.on_disk_bytes = self.segments.iter().map(|s| s.bytes).sum();
        self.avg_doc_length_main = if self.doc_count > 0 {
            self.total_token_count_main as f64 / self.doc_count as f64
        } else {
            0.0
        };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexManifest {
    pub format_version: u32,
    pub index_name: String,
    pub n_shards: usize,
    pub analyzer_digest: String,
    pub analyzer: AnalyzerConfig,
    /// One past the largest document id ever committed.
    pub next_doc_id: u64,
    pub shards: Vec<ShardMetadata>,
}

impl IndexManifest {
    pub fn new(index_name: String, n_shards: usize, analyzer: AnalyzerConfig) -> Self {
        IndexManifest {
            format_version: FORMAT_VERSION,
            index_name,
            n_shards,
            analyzer_digest: analyzer.digest(),
            analyzer,
            next_doc_id: 0,
            shards: (0..n_shards).map(ShardMetadata::empty).collect(),
        }
    }

    pub fn doc_count(&self) -> u64 {
        self.shards.iter().map(|s| s.doc_count).sum()
    }

    pub fn on_disk_bytes(&self) -> u64 {
        self.shards.iter().map(|s| s.on_disk_bytes).sum()
    }

    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        let bytes = fs::read(&path).at(&path)?;
        let manifest: IndexManifest = serde_json::from_slice(&bytes)
            .map_err(|e| Error::corrupt(&path, e.to_string()))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::corrupt(
                &path,
                format!("unsupported format_version {}", manifest.format_version),
            ));
        }
        if manifest.shards.len() != manifest.n_shards || manifest.n_shards == 0 {
            return Err(Error::corrupt(&path, "shard list does not match n_shards"));
        }
        if manifest.analyzer.digest() != manifest.analyzer_digest {
            return Err(Error::corrupt(&path, "analyzer digest does not match analyzer config"));
        }
        Ok(manifest)
    }

    /// Writes the manifest through a temp file and rename, so readers see
    /// either the old or the new commit point.
    pub fn store(&self, root: &Path) -> Result<()> {
        let path = root.join(MANIFEST_FILE);
        let tmp = root.join(format!("{MANIFEST_FILE}.tmp"));
        let bytes = serde_json::to_vec_pretty(self)?;
        {
            let mut f = fs::File::create(&tmp).at(&tmp)?;
            f.write_all(&bytes).at(&tmp)?;
            f.sync_all().at(&tmp)?;
        }
        fs::rename(&tmp, &path).at(&path)?;
        Ok(())
    }

    /// Digest of the manifest file on disk.
    pub fn file_digest(root: &Path) -> Result<String> {
        let path = root.join(MANIFEST_FILE);
        let bytes = fs::read(&path).at(&path)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}

pub fn shard_dir(root: &Path, shard: usize) -> PathBuf {
    root.join(format!("shard-{shard}"))
}
