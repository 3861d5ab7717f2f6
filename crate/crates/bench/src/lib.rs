//! Shared fixtures for the benchmarks.

use std::path::Path;

use corpus_audit::index::WriterOptions;
use corpus_audit::ingest::IngestOptions;
use corpus_audit::synth::{write_corpus, SynthConfig, SynthCorpus};
use corpus_audit::{bulk_index, create_index, AnalyzerConfig, BulkParams, IndexReader, IndexWriter};

/// Synthetic documents with the default generator settings.
pub fn documents(n: usize) -> Vec<String> {
    SynthCorpus::new(SynthConfig::default()).take(n).map(|(text, _)| text).collect()
}

/// Writes roughly `bytes` of synthetic parquet under `dir/data` and indexes
/// it into `dir/index`.
pub fn build_fixture(dir: &Path, bytes: u64, shards: usize) -> IndexReader {
    let data = dir.join("data");
    let summary = write_corpus(&data, bytes, 4, SynthConfig::default()).expect("corpus");
    let index = dir.join("index");
    create_index(&index, shards, AnalyzerConfig::default()).expect("create");
    let w = IndexWriter::open_with(&index, WriterOptions::default()).expect("writer");
    bulk_index(&summary.files, &w, BulkParams::default(), IngestOptions::default()).expect("ingest");
    w.close();
    IndexReader::open(&index).expect("reader")
}

/// Words at a few frequency ranks, most frequent first.
pub fn probe_words() -> Vec<String> {
    let synth = SynthCorpus::new(SynthConfig::default());
    [0, 10, 100, 1000, 10000].iter().map(|&r| synth.vocabulary()[r].clone()).collect()
}
