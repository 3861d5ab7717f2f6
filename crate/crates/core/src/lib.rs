//! Sharded positional full-text indexing, BM25 search and corpus audits.
//!
//! ```no_run
//! use corpus_audit::{IndexReader, QuerySpec, QueryType};
//!
//! let reader = IndexReader::open("idx".as_ref())?;
//! let result = corpus_audit::execute(&reader, &QuerySpec::new(QueryType::Match, "climate change"))?;
//! for hit in &result.hits {
//!     println!("{:.3} {}", hit.score, hit.url);
//! }
//! # Ok::<(), corpus_audit::Error>(())
//! ```

pub mod analysis;
pub mod audit;
pub mod bloom;
pub mod error;
pub mod index;
pub mod ingest;
pub mod merge;
pub mod query;
pub mod synth;

pub use analysis::{Analyzer, AnalyzerConfig, ChainKind, Token};
pub use bloom::BloomFilter;
pub use error::{Error, Result};
pub use index::{create_index, DocumentRecord, Field, IndexReader, IndexWriter};
pub use ingest::{bulk_index, compute_chunk_size, BulkParams, IngestReport};
pub use merge::merge_indexes;
pub use query::{execute, QuerySpec, QueryType, SearchHit, SearchResult};
