use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::Serialize;

use super::manifest::{shard_dir, IndexManifest, ShardMetadata};
use super::segment::{FileAccess, SegmentPaths, SegmentReader};
use super::{route, DocumentRecord, Field, Posting};
use crate::analysis::Analyzer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct ReaderOptions {
    pub access: FileAccess,
}

/// Collection-wide statistics used by BM25.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub main_tokens: u64,
    pub exact_tokens: u64,
    pub avg_main_len: f64,
    pub avg_exact_len: f64,
}

impl CorpusStats {
    pub fn avg_len(&self, field: Field) -> f64 {
        match field {
            Field::Exact => self.avg_exact_len,
            _ => self.avg_main_len,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PostingList {
    pub df: u64,
    /// Sorted by doc id.
    pub postings: Vec<Posting>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictEntry {
    pub term: String,
    pub df: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexStats {
    pub index_name: String,
    pub n_shards: usize,
    pub doc_count: u64,
    pub on_disk_bytes: u64,
    pub analyzer_digest: String,
    pub manifest_sha256: String,
    pub corpus: CorpusStats,
    pub shards: Vec<ShardMetadata>,
}

/// Snapshot of an index at the commit point current when it was opened.
/// Later commits are not visible; open a new reader to see them.
pub struct IndexReader {
    root: PathBuf,
    manifest: IndexManifest,
    manifest_sha256: String,
    analyzer: Analyzer,
    shards: Vec<Vec<SegmentReader>>,
    stats: CorpusStats,
    dictionary: OnceLock<Vec<DictEntry>>,
}

impl IndexReader {
    pub fn open(root: &Path) -> Result<Self> {
        Self::open_with(root, ReaderOptions::default())
    }

    pub fn open_with(root: &Path, options: ReaderOptions) -> Result<Self> {
        let manifest_sha256 = IndexManifest::file_digest(root)?;
        let manifest = IndexManifest::load(root)?;
        let analyzer = Analyzer::new(manifest.analyzer.clone())?;
        let mut shards = Vec::with_capacity(manifest.n_shards);
        for meta in &manifest.shards {
            let dir = shard_dir(root, meta.shard_id);
            let segs = meta
                .segments
                .iter()
                .map(|s| SegmentReader::open(SegmentPaths::new(&dir, &format!("segment-{}", s.id)), options.access))
                .collect::<Result<Vec<_>>>()?;
            shards.push(segs);
        }
        let doc_count = manifest.doc_count();
        let main_tokens: u64 = manifest.shards.iter().map(|s| s.total_token_count_main).sum();
        let exact_tokens: u64 = manifest.shards.iter().map(|s| s.total_token_count_exact).sum();
        let avg = |t: u64| if doc_count == 0 { 0.0 } else { t as f64 / doc_count as f64 };
        let stats = CorpusStats {
            doc_count,
            main_tokens,
            exact_tokens,
            avg_main_len: avg(main_tokens),
            avg_exact_len: avg(exact_tokens),
        };
        Ok(IndexReader {
            root: root.to_path_buf(),
            manifest,
            manifest_sha256,
            analyzer,
            shards,
            stats,
            dictionary: OnceLock::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &IndexManifest {
        &self.manifest
    }

    pub fn manifest_sha256(&self) -> &str {
        &self.manifest_sha256
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn stats(&self) -> CorpusStats {
        self.stats
    }

    pub fn doc_count(&self) -> u64 {
        self.stats.doc_count
    }

    fn segments(&self) -> impl Iterator<Item = &SegmentReader> {
        self.shards.iter().flatten()
    }

    /// Postings for `term` gathered from every shard, in doc id order.
    pub fn term_postings(&self, field: Field, term: &str) -> Result<PostingList> {
        let mut postings = Vec::new();
        let mut df = 0;
        for seg in self.segments() {
            if let Some(entry) = seg.find(field, term) {
                df += entry.df;
                postings.extend(seg.postings(&entry)?);
            }
        }
        postings.sort_unstable_by_key(|p| p.doc_id);
        Ok(PostingList { df, postings })
    }

    /// Document frequency without decoding postings.
    pub fn doc_freq(&self, field: Field, term: &str) -> u64 {
        self.segments().filter_map(|s| s.find(field, term)).map(|e| e.df).sum()
    }

    /// Token counts `(main, exact)` of a document.
    pub fn doc_lengths(&self, doc_id: u64) -> Option<(u32, u32)> {
        let shard = route(doc_id, self.shards.len());
        self.shards[shard]
            .iter()
            .find_map(|s| s.doc_entry(doc_id))
            .map(|e| (e.main_len, e.exact_len))
    }

    pub fn doc_len(&self, doc_id: u64, field: Field) -> Option<u32> {
        self.doc_lengths(doc_id).map(|(m, e)| if field == Field::Exact { e } else { m })
    }

    pub fn fetch_document(&self, doc_id: u64) -> Result<DocumentRecord> {
        let shard = route(doc_id, self.shards.len());
        for seg in &self.shards[shard] {
            if let Some(doc) = seg.fetch(doc_id)? {
                return Ok(doc.into_record());
            }
        }
        Err(Error::UnknownDocId(doc_id))
    }

    /// Every stored document id, ascending.
    pub fn doc_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.segments().flat_map(|s| s.doc_table().iter().map(|e| e.doc_id)).collect();
        ids.sort_unstable();
        ids
    }

    /// Distinct `main` terms with global document frequencies, sorted by term.
    pub fn main_dictionary(&self) -> &[DictEntry] {
        self.dictionary.get_or_init(|| {
            let mut acc: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
            for seg in self.segments() {
                for e in seg.field_entries(Field::Main) {
                    *acc.entry(e.term).or_default() += e.df;
                }
            }
            acc.into_iter()
                .map(|(t, df)| DictEntry { term: String::from_utf8_lossy(&t).into_owned(), df })
                .collect()
        })
    }

    pub fn index_stats(&self) -> IndexStats {
        IndexStats {
            index_name: self.manifest.index_name.clone(),
            n_shards: self.manifest.n_shards,
            doc_count: self.manifest.doc_count(),
            on_disk_bytes: self.manifest.on_disk_bytes(),
            analyzer_digest: self.manifest.analyzer_digest.clone(),
            manifest_sha256: self.manifest_sha256.clone(),
            corpus: self.stats,
            shards: self.manifest.shards.clone(),
        }
    }
}
