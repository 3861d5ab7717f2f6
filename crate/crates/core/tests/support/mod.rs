#![allow(dead_code)]

pub mod brute;

use std::path::Path;

use corpus_audit::index::WriterOptions;
use corpus_audit::query::{Fuzziness, MinimumShouldMatch, Operator, QuerySpec, QueryType};
use corpus_audit::{create_index, AnalyzerConfig, DocumentRecord, IndexWriter};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const VOCAB: &[&str] = &[
    "climate", "climates", "change", "changing", "rapid", "action", "policy", "policies", "energy", "carbon",
    "ocean", "oceans", "warming", "warm", "storm", "storms", "flood", "report", "data", "model", "models",
    "river", "ice", "heat", "hot", "cold", "café", "naïve", "the", "and", "of", "a", "is", "to", "in",
];

pub fn record(doc_id: u64, text: impl Into<String>) -> DocumentRecord {
    DocumentRecord {
        doc_id,
        text: text.into(),
        url: format!("https://example.org/{doc_id}"),
        source_file: "test".into(),
        row_index: doc_id,
    }
}

fn word(rng: &mut impl Rng) -> String {
    let w = *VOCAB.choose(rng).unwrap();
    match rng.random_range(0..10) {
        0 => {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        }
        1 => format!("{w},"),
        2 => misspell(rng, w),
        _ => w.to_owned(),
    }
}

pub fn random_text(rng: &mut impl Rng, max_words: usize) -> String {
    let n = rng.random_range(0..=max_words);
    (0..n).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
}

pub fn random_corpus(rng: &mut impl Rng, n_docs: usize, max_words: usize) -> Vec<(u64, String)> {
    (0..n_docs as u64).map(|id| (id, random_text(rng, max_words))).collect()
}

/// One random character edit of `w`.
pub fn misspell(rng: &mut impl Rng, w: &str) -> String {
    let mut c: Vec<char> = w.chars().collect();
    if c.is_empty() {
        return "x".into();
    }
    let i = rng.random_range(0..c.len());
    match rng.random_range(0..3) {
        0 => {
            c.remove(i);
        }
        1 => c.insert(i, 'e'),
        _ => c[i] = 'o',
    }
    c.into_iter().collect()
}

pub fn random_query_text(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..=4);
    (0..n)
        .map(|_| {
            let w = *VOCAB.choose(rng).unwrap();
            if rng.random_bool(0.25) {
                misspell(rng, w)
            } else {
                w.to_owned()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A spec of the given type with randomised parameters.
pub fn random_spec(rng: &mut impl Rng, query_type: QueryType) -> QuerySpec {
    let mut spec = QuerySpec::new(query_type, random_query_text(rng)).top_k(usize::MAX);
    spec.operator = if rng.random_bool(0.5) { Operator::Or } else { Operator::And };
    match query_type {
        QueryType::MatchPhrase => spec.slop = rng.random_range(0..=3),
        QueryType::TermExact => {
            if rng.random_bool(0.8) {
                spec.text = spec.text.split_whitespace().next().unwrap_or_default().to_owned();
            }
        }
        QueryType::Fuzzy => {
            spec.fuzziness = *[Fuzziness::Auto, Fuzziness::Fixed(0), Fuzziness::Fixed(1), Fuzziness::Fixed(2)].choose(rng).unwrap();
            spec.max_expansions = *[None, Some(1), Some(3), Some(50)].choose(rng).unwrap();
        }
        QueryType::BoolMust => {
            spec.bool_must_max_words = rng.random_range(1..=4);
            spec.minimum_should_match = *[
                MinimumShouldMatch::Percent(50.0),
                MinimumShouldMatch::Percent(75.0),
                MinimumShouldMatch::Percent(100.0),
                MinimumShouldMatch::Count(2),
            ]
            .choose(rng)
            .unwrap();
        }
        QueryType::Match => {}
    }
    spec
}

/// Builds an index over `corpus`, committing `commits` times so several
/// segments per shard exist.
pub fn build_index(dir: &Path, corpus: &[(u64, String)], shards: usize, budget: usize, commits: usize) {
    create_index(dir, shards, AnalyzerConfig::default()).unwrap();
    let w = IndexWriter::open_with(dir, WriterOptions { memory_budget_bytes: budget }).unwrap();
    let per = corpus.len().div_ceil(commits.max(1)).max(1);
    for part in corpus.chunks(per) {
        for (id, text) in part {
            w.add_document(record(*id, text.clone())).unwrap();
        }
        w.commit().unwrap();
    }
    w.close();
}
