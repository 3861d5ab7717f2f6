use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use log::{debug, warn};
use rustc_hash::FxHashMap;

use super::manifest::{shard_dir, IndexManifest, SegmentInfo, ShardMetadata, MAX_DOCS_PER_SHARD};
use super::merger::{merge_segments, DocIdMap, MergeSource};
use super::segment::{encode_positions, SegmentPaths, SegmentWriter, StoredDoc};
use super::{route, DocumentRecord, Field};
use crate::analysis::Analyzer;
use crate::error::{Error, IoContext, Result};

const PENDING_DIR: &str = "pending";
/// Rough per-entry bookkeeping cost of the in-memory buffers.
const ENTRY_OVERHEAD: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct WriterOptions {
    /// Total bytes of buffered postings and documents across all shards
    /// before a shard spills to a run file.
    pub memory_budget_bytes: usize,
}

impl Default for WriterOptions {
    fn default() -> Self {
        WriterOptions { memory_budget_bytes: 128 * 1024 * 1024 }
    }
}

/// A document with its per-field term positions, ready for a shard buffer.
/// Building one is the expensive, embarrassingly parallel part of indexing.
#[derive(Debug, Clone)]
pub struct AnalyzedDocument {
    pub record: DocumentRecord,
    pub main: Vec<(String, Vec<u32>)>,
    pub exact: Vec<(String, Vec<u32>)>,
    pub keyword: Option<String>,
    pub main_len: u32,
    pub exact_len: u32,
}

impl AnalyzedDocument {
    pub fn new(analyzer: &Analyzer, record: DocumentRecord) -> Self {
        let fields = analyzer.analyze_fields(&record.text);
        let main_len = fields.main.len() as u32;
        let exact_len = fields.exact.len() as u32;
        let group = |tokens: Vec<crate::analysis::Token>| {
            let mut map: FxHashMap<String, Vec<u32>> = FxHashMap::default();
            for t in tokens {
                map.entry(t.term).or_default().push(t.position);
            }
            map.into_iter().collect::<Vec<_>>()
        };
        let keyword = analyzer.keyword_term(&record.text);
        AnalyzedDocument {
            main: group(fields.main),
            exact: group(fields.exact),
            keyword,
            main_len,
            exact_len,
            record,
        }
    }
}

#[derive(Default)]
struct TermBuf {
    data: Vec<u8>,
    /// (doc id, start, end) of each encoded posting in `data`.
    records: Vec<(u64, u32, u32)>,
}

#[derive(Default)]
struct ShardBuffer {
    /// One term table per field, indexed by `Field as usize`.
    terms: [FxHashMap<Box<str>, TermBuf>; 3],
    docs: Vec<StoredDoc>,
    bytes: usize,
}

impl ShardBuffer {
    fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    fn insert(&mut self, doc: AnalyzedDocument) {
        let id = doc.record.doc_id;
        let fields = [
            (Field::Main, doc.main),
            (Field::Exact, doc.exact),
            (Field::Keyword, doc.keyword.map(|k| vec![(k, vec![0])]).unwrap_or_default()),
        ];
        for (field, terms) in fields {
            for (term, positions) in terms {
                let table = &mut self.terms[field as usize];
                if !table.contains_key(term.as_str()) {
                    self.bytes += term.len() + ENTRY_OVERHEAD;
                    table.insert(term.as_str().into(), TermBuf::default());
                }
                let buf = table.get_mut(term.as_str()).expect("term was just inserted");
                let start = buf.data.len();
                encode_positions(&mut buf.data, &positions);
                buf.records.push((id, start as u32, buf.data.len() as u32));
                self.bytes += buf.data.len() - start + 16;
            }
        }
        let r = doc.record;
        self.bytes += r.text.len() + r.url.len() + r.source_file.len() + ENTRY_OVERHEAD;
        self.docs.push(StoredDoc {
            doc_id: r.doc_id,
            url: r.url,
            source_file: r.source_file,
            row_index: r.row_index,
            text: r.text,
            main_len: doc.main_len,
            exact_len: doc.exact_len,
        });
    }

    /// Writes the buffer as one segment and empties it.
    fn write_segment(&mut self, paths: SegmentPaths, id: u32) -> Result<SegmentInfo> {
        let mut w = SegmentWriter::create(paths)?;
        let tables = std::mem::take(&mut self.terms);
        for (field, table) in Field::ALL.into_iter().zip(tables) {
            let mut terms: Vec<_> = table.into_iter().collect();
            terms.sort_unstable_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            for (term, mut buf) in terms {
                buf.records.sort_unstable_by_key(|r| r.0);
                w.start_term(field, term.as_bytes())?;
                for (doc, start, end) in buf.records {
                    w.push_encoded(doc, &buf.data[start as usize..end as usize])?;
                }
                w.finish_term()?;
            }
        }
        let mut docs = std::mem::take(&mut self.docs);
        docs.sort_unstable_by_key(|d| d.doc_id);
        for d in &docs {
            w.add_doc(d)?;
        }
        self.bytes = 0;
        w.finish(id)
    }
}

struct ShardWriter {
    shard: usize,
    dir: PathBuf,
    buffer: ShardBuffer,
    runs: Vec<SegmentPaths>,
    next_run: u32,
    committed_docs: u64,
    session_docs: u64,
}

impl ShardWriter {
    fn pending_dir(&self) -> PathBuf {
        self.dir.join(PENDING_DIR)
    }

    fn spill(&mut self) -> Result<()> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        let dir = self.pending_dir();
        fs::create_dir_all(&dir).at(&dir)?;
        let paths = SegmentPaths::new(&dir, &format!("run-{}", self.next_run));
        debug!("shard {} spilling {} bytes to {}", self.shard, self.buffer.bytes, paths.terms.display());
        self.buffer.write_segment(paths.clone(), self.next_run)?;
        self.next_run += 1;
        self.runs.push(paths);
        Ok(())
    }

    /// Turns everything buffered or spilled into one segment file set.
    fn flush(&mut self, segment_id: u32) -> Result<Option<SegmentInfo>> {
        if self.buffer.is_empty() && self.runs.is_empty() {
            return Ok(None);
        }
        let paths = SegmentPaths::new(&self.dir, &format!("segment-{segment_id}"));
        let info = if self.runs.is_empty() {
            self.buffer.write_segment(paths, segment_id)?
        } else {
            self.spill()?;
            let sources: Vec<_> = self
                .runs
                .iter()
                .map(|p| MergeSource { paths: p.clone(), map: DocIdMap::Identity })
                .collect();
            let mut out = [SegmentWriter::create(paths)?];
            merge_segments(&sources, &mut out, |_| 0, |_| {})?;
            let [w] = out;
            let info = w.finish(segment_id)?;
            for r in self.runs.drain(..) {
                r.remove()?;
            }
            info
        };
        self.committed_docs += self.session_docs;
        self.session_docs = 0;
        Ok(Some(info))
    }

    fn discard(&mut self) {
        self.buffer = ShardBuffer::default();
        self.runs.clear();
        self.session_docs = 0;
        let _ = fs::remove_dir_all(self.pending_dir());
    }
}

/// Append-only writer. Documents become visible to readers opened after
/// [`IndexWriter::commit`]. Safe to share between threads; each shard has
/// its own lock so at most one thread writes a shard at a time.
pub struct IndexWriter {
    root: PathBuf,
    analyzer: Analyzer,
    manifest: Mutex<IndexManifest>,
    shards: Vec<Mutex<ShardWriter>>,
    budget_per_shard: usize,
    max_doc_id: AtomicU64,
    any_docs: AtomicBool,
    closed: AtomicBool,
}

impl IndexWriter {
    pub fn open(root: &Path) -> Result<Self> {
        Self::open_with(root, WriterOptions::default())
    }

    pub fn open_with(root: &Path, options: WriterOptions) -> Result<Self> {
        let manifest = IndexManifest::load(root)?;
        let analyzer = Analyzer::new(manifest.analyzer.clone())?;
        remove_orphans(root, &manifest)?;
        let shards = manifest
            .shards
            .iter()
            .map(|meta| {
                Mutex::new(ShardWriter {
                    shard: meta.shard_id,
                    dir: shard_dir(root, meta.shard_id),
                    buffer: ShardBuffer::default(),
                    runs: Vec::new(),
                    next_run: 0,
                    committed_docs: meta.doc_count,
                    session_docs: 0,
                })
            })
            .collect();
        let budget_per_shard = (options.memory_budget_bytes / manifest.n_shards).max(64 * 1024);
        Ok(IndexWriter {
            root: root.to_path_buf(),
            analyzer,
            shards,
            budget_per_shard,
            max_doc_id: AtomicU64::new(0),
            any_docs: AtomicBool::new(false),
            closed: AtomicBool::new(false),
            manifest: Mutex::new(manifest),
        })
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn n_shards(&self) -> usize {
        self.shards.len()
    }

    /// One past the largest id committed before this writer opened.
    pub fn next_doc_id(&self) -> u64 {
        self.manifest.lock().unwrap().next_doc_id
    }

    /// Analyzes and buffers one record. The caller owns id uniqueness.
    pub fn add_document(&self, record: DocumentRecord) -> Result<()> {
        self.ensure_open()?;
        let doc = AnalyzedDocument::new(&self.analyzer, record);
        self.add_analyzed(doc)
    }

    pub fn add_analyzed(&self, doc: AnalyzedDocument) -> Result<()> {
        self.ensure_open()?;
        let id = doc.record.doc_id;
        let shard = route(id, self.shards.len());
        let mut w = self.shards[shard].lock().unwrap();
        if w.committed_docs + w.session_docs >= MAX_DOCS_PER_SHARD {
            return Err(Error::ShardFull { shard, docs: w.committed_docs + w.session_docs });
        }
        w.buffer.insert(doc);
        w.session_docs += 1;
        self.max_doc_id.fetch_max(id, Ordering::Relaxed);
        self.any_docs.store(true, Ordering::Relaxed);
        if w.buffer.bytes >= self.budget_per_shard {
            if let Err(e) = w.spill() {
                self.fail(&e);
                return Err(e);
            }
        }
        Ok(())
    }

    /// Flushes every shard to a new immutable segment and publishes the new
    /// manifest atomically.
    pub fn commit(&self) -> Result<Vec<ShardMetadata>> {
        self.ensure_open()?;
        let mut manifest = self.manifest.lock().unwrap();
        let mut staged = Vec::new();
        for (k, shard) in self.shards.iter().enumerate() {
            let mut w = shard.lock().unwrap();
            let id = manifest.shards[k].next_segment;
            match w.flush(id) {
                Ok(Some(info)) => staged.push((k, info)),
                Ok(None) => {}
                Err(e) => {
                    drop(w);
                    self.fail(&e);
                    return Err(e);
                }
            }
        }
        let mut next = manifest.clone();
        for (k, info) in staged {
            let meta = &mut next.shards[k];
            meta.next_segment = info.id + 1;
            meta.segments.push(info);
            meta.refresh();
        }
        if self.any_docs.load(Ordering::Relaxed) {
            next.next_doc_id = next.next_doc_id.max(self.max_doc_id.load(Ordering::Relaxed) + 1);
        }
        if let Err(e) = next.store(&self.root) {
            self.fail(&e);
            return Err(e);
        }
        *manifest = next;
        Ok(manifest.shards.clone())
    }

    /// Drops uncommitted data. Later calls fail with `WriterClosed`.
    pub fn close(&self) {
        if !self.closed.swap(true, Ordering::SeqCst) {
            for s in &self.shards {
                s.lock().unwrap().discard();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed.load(Ordering::SeqCst)
    }

    fn ensure_open(&self) -> Result<()> {
        if self.is_closed() {
            Err(Error::WriterClosed)
        } else {
            Ok(())
        }
    }

    fn fail(&self, e: &Error) {
        warn!("index writer aborted: {e}");
        self.closed.store(true, Ordering::SeqCst);
        for s in &self.shards {
            if let Ok(mut w) = s.try_lock() {
                w.discard();
            }
        }
    }
}

/// Removes spill directories and segment files the manifest does not list.
fn remove_orphans(root: &Path, manifest: &IndexManifest) -> Result<()> {
    for meta in &manifest.shards {
        let dir = shard_dir(root, meta.shard_id);
        let pending = dir.join(PENDING_DIR);
        if pending.exists() {
            fs::remove_dir_all(&pending).at(&pending)?;
        }
        let Ok(entries) = fs::read_dir(&dir) else { continue };
        for entry in entries {
            let entry = entry.at(&dir)?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            let Some(id) = name
                .strip_prefix("segment-")
                .and_then(|rest| rest.split('.').next())
                .and_then(|n| n.parse::<u32>().ok())
            else {
                continue;
            };
            if !meta.segments.iter().any(|s| s.id == id) {
                debug!("removing orphan {}", entry.path().display());
                fs::remove_file(entry.path()).at(entry.path())?;
            }
        }
    }
    Ok(())
}

/// Merges every shard's segments into one. Must not run alongside a writer.
pub fn compact(root: &Path) -> Result<IndexManifest> {
    let mut manifest = IndexManifest::load(root)?;
    let mut retired = Vec::new();
    for k in 0..manifest.n_shards {
        let meta = &mut manifest.shards[k];
        if meta.segments.len() < 2 {
            continue;
        }
        let dir = shard_dir(root, k);
        let sources: Vec<_> = meta
            .segments
            .iter()
            .map(|s| MergeSource {
                paths: SegmentPaths::new(&dir, &format!("segment-{}", s.id)),
                map: DocIdMap::Identity,
            })
            .collect();
        let id = meta.next_segment;
        let mut out = [SegmentWriter::create(SegmentPaths::new(&dir, &format!("segment-{id}")))?];
        merge_segments(&sources, &mut out, |_| 0, |_| {})?;
        let [w] = out;
        let info = w.finish(id)?;
        retired.extend(sources.into_iter().map(|s| s.paths));
        meta.segments = vec![info];
        meta.next_segment = id + 1;
        meta.refresh();
    }
    manifest.store(root)?;
    for p in retired {
        p.remove()?;
    }
    Ok(manifest)
}
