//! Columnar-file ingestion through a bounded producer/consumer pipeline.
//!
//! One producer streams parquet rows, assigns doc ids and cuts chunks; a
//! bounded channel of `queue_size` chunks feeds `thread_count` workers that
//! analyze documents and hand them to the shard writers. The producer blocks
//! when the queue is full, which is what bounds memory.

mod memory;
mod parquet;

use std::fs;
use std::ops::Range;
use std::path::PathBuf;
use std::thread;
use std::time::Instant;

use crossbeam_channel::bounded;
use log::{info, warn};
use serde::{Deserialize, Serialize};

pub use self::memory::{current_rss, peak_rss, MemorySampler, SAMPLE_INTERVAL};
pub use self::parquet::{stream_parquet, write_parquet, write_parquet_text_only, ParquetDocs};

use crate::error::{Error, IoContext, Result};
use crate::index::{AnalyzedDocument, DocumentRecord, IndexWriter};

/// Documents sampled before the chunk size is clamped to the byte budget.
pub const AVG_SAMPLE_DOCS: u64 = 10_000;
/// Worker `k` numbers its documents from `k << WORKER_ID_SHIFT`.
pub const WORKER_ID_SHIFT: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BulkParams {
    pub thread_count: usize,
    pub chunk_size: u64,
    pub max_chunk_bytes: u64,
    pub queue_size: usize,
}

impl Default for BulkParams {
    fn default() -> Self {
        BulkParams { thread_count: 4, chunk_size: 500, max_chunk_bytes: 50_000_000, queue_size: 4 }
    }
}

impl BulkParams {
    pub fn validate(&self) -> Result<()> {
        if self.thread_count == 0 || self.chunk_size == 0 || self.queue_size == 0 || self.max_chunk_bytes == 0 {
            return Err(Error::InvalidConfig(
                "thread_count, chunk_size, max_chunk_bytes and queue_size must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub files_processed: u64,
    pub files_failed: u64,
    pub docs_indexed: u64,
    pub elapsed_seconds: f64,
    pub peak_memory_bytes: u64,
    pub docs_per_second: f64,
    pub bytes_indexed: u64,
    pub chunks: u64,
    pub oversized_chunks: u64,
    pub avg_doc_size: f64,
    pub effective_chunk_size: u64,
    pub first_doc_id: u64,
    pub next_doc_id: u64,
    pub failures: Vec<String>,
}

/// `floor(max_chunk_bytes / avg_doc_size)`, at least 1.
pub fn compute_chunk_size(max_chunk_bytes: u64, avg_doc_size: u64) -> Result<u64> {
    if avg_doc_size == 0 {
        return Err(Error::ZeroAvgDocSize);
    }
    Ok((max_chunk_bytes / avg_doc_size).max(1))
}

/// Splits `0..n_files` into `n_workers` contiguous ranges whose sizes differ
/// by at most one; earlier ranges take the remainder.
pub fn partition_file_range(n_files: usize, n_workers: usize) -> Vec<Range<usize>> {
    let n_workers = n_workers.max(1);
    let (base, extra) = (n_files / n_workers, n_files % n_workers);
    let mut start = 0;
    (0..n_workers)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Expands directories into their `.parquet` files (sorted by name); plain
/// file arguments are kept in the given order.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .at(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "parquet"))
                .collect();
            files.sort();
            out.extend(files);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(Error::io(p, std::io::ErrorKind::NotFound.into()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// File-range worker number; ids start at `worker << 40`.
    pub worker: u32,
}

fn first_doc_id(writer: &IndexWriter, worker: u32) -> u64 {
    let base = u64::from(worker) << WORKER_ID_SHIFT;
    base.max(writer.next_doc_id())
}

/// Indexes every row of `files` and commits once at the end.
pub fn bulk_index(files: &[PathBuf], writer: &IndexWriter, params: BulkParams, opts: IngestOptions) -> Result<IngestReport> {
    params.validate()?;
    let started = Instant::now();
    let sampler = MemorySampler::start(SAMPLE_INTERVAL);
    let first_id = first_doc_id(writer, opts.worker);

    let (tx, rx) = bounded::<Vec<DocumentRecord>>(params.queue_size);
    let (produced, worker_results) = thread::scope(|scope| {
        let workers: Vec<_> = (0..params.thread_count)
            .map(|_| {
                let rx = rx.clone();
                scope.spawn(move || -> Result<u64> {
                    let mut n = 0;
                    for chunk in rx {
                        for record in chunk {
                            writer.add_analyzed(AnalyzedDocument::new(writer.analyzer(), record))?;
                            n += 1;
                        }
                    }
                    Ok(n)
                })
            })
            .collect();
        drop(rx);
        let produced = produce(files, params, first_id, |chunk| tx.send(chunk).is_ok());
        drop(tx);
        let results: Vec<Result<u64>> = workers.into_iter().map(|w| w.join().expect("ingest worker panicked")).collect();
        (produced, results)
    });

    let mut docs_indexed = 0;
    for r in worker_results {
        docs_indexed += r?;
    }
    let stats = produced?;
    if docs_indexed != stats.docs {
        return Err(Error::DocCountMismatch { expected: stats.docs, actual: docs_indexed });
    }
    writer.commit()?;

    let elapsed = started.elapsed().as_secs_f64();
    let report = IngestReport {
        files_processed: stats.files_ok,
        files_failed: stats.failures.len() as u64,
        docs_indexed,
        elapsed_seconds: elapsed,
        peak_memory_bytes: sampler.finish(),
        docs_per_second: if elapsed > 0.0 { docs_indexed as f64 / elapsed } else { 0.0 },
        bytes_indexed: stats.bytes,
        chunks: stats.chunks,
        oversized_chunks: stats.oversized,
        avg_doc_size: stats.avg_doc_size,
        effective_chunk_size: stats.effective_chunk_size,
        first_doc_id: first_id,
        next_doc_id: first_id + docs_indexed,
        failures: stats.failures,
    };
    info!(
        "indexed {} docs from {} files in {:.1}s",
        report.docs_indexed, report.files_processed, report.elapsed_seconds
    );
    Ok(report)
}

#[derive(Debug, Default)]
struct ProducerStats {
    files_ok: u64,
    failures: Vec<String>,
    docs: u64,
    bytes: u64,
    chunks: u64,
    oversized: u64,
    avg_doc_size: f64,
    effective_chunk_size: u64,
}

/// Streams all files into chunks. `send` returns false once the workers are
/// gone, which stops production early.
fn produce(
    files: &[PathBuf],
    params: BulkParams,
    first_id: u64,
    mut send: impl FnMut(Vec<DocumentRecord>) -> bool,
) -> Result<ProducerStats> {
    let mut st = ProducerStats { effective_chunk_size: params.chunk_size, ..Default::default() };
    let mut chunk: Vec<DocumentRecord> = Vec::new();
    let mut chunk_bytes = 0u64;
    let mut sample_bytes = 0u64;
    let mut next_id = first_id;
    let mut closed = false;

    let mut ship = |chunk: &mut Vec<DocumentRecord>, bytes: &mut u64, st: &mut ProducerStats| -> bool {
        if chunk.is_empty() {
            return true;
        }
        st.chunks += 1;
        *bytes = 0;
        send(std::mem::take(chunk))
    };

    'files: for path in files {
        let docs = match stream_parquet(path) {
            Ok(d) => d,
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                st.failures.push(e.to_string());
                continue;
            }
        };
        for item in docs {
            let mut record = match item {
                Ok(r) => r,
                Err(e) => {
                    // Rows already shipped from this file stay indexed.
                    warn!("stopping {} early: {e}", path.display());
                    st.failures.push(e.to_string());
                    continue 'files;
                }
            };
            record.doc_id = next_id;
            next_id += 1;
            let size = record.text.len() as u64;
            st.docs += 1;
            st.bytes += size;
            if st.docs <= AVG_SAMPLE_DOCS {
                sample_bytes += size;
                if st.docs == AVG_SAMPLE_DOCS {
                    fix_chunk_size(&mut st, params, sample_bytes);
                }
            }

            if size > params.max_chunk_bytes {
                warn!(
                    "document {} ({} bytes) exceeds max_chunk_bytes ({}); sending it alone",
                    record.doc_id, size, params.max_chunk_bytes
                );
                if !ship(&mut chunk, &mut chunk_bytes, &mut st) {
                    closed = true;
                    break 'files;
                }
                st.oversized += 1;
                chunk.push(record);
                if !ship(&mut chunk, &mut chunk_bytes, &mut st) {
                    closed = true;
                    break 'files;
                }
                continue;
            }
            if chunk_bytes + size > params.max_chunk_bytes && !ship(&mut chunk, &mut chunk_bytes, &mut st) {
                closed = true;
                break 'files;
            }
            chunk.push(record);
            chunk_bytes += size;
            if chunk.len() as u64 >= st.effective_chunk_size && !ship(&mut chunk, &mut chunk_bytes, &mut st) {
                closed = true;
                break 'files;
            }
        }
        st.files_ok += 1;
    }
    if !closed {
        ship(&mut chunk, &mut chunk_bytes, &mut st);
    }
    if st.docs > 0 && st.docs < AVG_SAMPLE_DOCS {
        fix_chunk_size(&mut st, params, sample_bytes);
    }
    Ok(st)
}

fn fix_chunk_size(st: &mut ProducerStats, params: BulkParams, sample_bytes: u64) {
    let n = st.docs.min(AVG_SAMPLE_DOCS);
    st.avg_doc_size = sample_bytes as f64 / n as f64;
    let avg = (sample_bytes / n).max(1);
    let bound = compute_chunk_size(params.max_chunk_bytes, avg).unwrap_or(1);
    st.effective_chunk_size = params.chunk_size.min(bound);
}
