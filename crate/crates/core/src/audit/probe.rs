//! Verbatim self-retrieval: random raw windows of indexed documents are sent
//! back as slop-0 phrase queries.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::summarize;
use crate::analysis::{Analyzer, ChainKind};
use crate::error::{Error, Result};
use crate::index::IndexReader;
use crate::query::{execute, matching_documents, QuerySpec, QueryType};

/// Redraws allowed per segment before a length is declared unsatisfiable.
pub const DEFAULT_RETRY_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSample {
    pub length: usize,
    pub doc_id: u64,
    pub start_word: usize,
    /// Byte range of the window in the stored text.
    pub byte_start: usize,
    pub byte_end: usize,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub segments: Vec<SegmentSample>,
    /// Lengths for which no long-enough document was found within the retry cap.
    pub unsatisfiable: Vec<usize>,
}

fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let base = text.as_ptr() as usize;
    text.split_whitespace()
        .map(|w| {
            let s = w.as_ptr() as usize - base;
            (s, s + w.len())
        })
        .collect()
}

/// Draws `n_per_length` windows of each length, documents chosen uniformly
/// with replacement. Deterministic for a given index and seed.
pub fn sample_segments(reader: &IndexReader, lengths: &[usize], n_per_length: usize, seed: u64) -> Result<Sampling> {
    sample_segments_with_cap(reader, lengths, n_per_length, seed, DEFAULT_RETRY_CAP)
}

pub fn sample_segments_with_cap(
    reader: &IndexReader,
    lengths: &[usize],
    n_per_length: usize,
    seed: u64,
    retry_cap: usize,
) -> Result<Sampling> {
    let ids = reader.doc_ids();
    if ids.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: HashMap<u64, (String, Vec<(usize, usize)>)> = HashMap::new();
    let mut out = Sampling::default();
    'lengths: for &len in lengths {
        if len == 0 {
            return Err(Error::InvalidConfig("segment length must be at least one word".into()));
        }
        for _ in 0..n_per_length {
            let mut tries = 0;
            loop {
                let doc_id = ids[rng.random_range(0..ids.len())];
                if !cache.contains_key(&doc_id) {
                    let text = reader.fetch_document(doc_id)?.text;
                    let spans = word_spans(&text);
                    cache.insert(doc_id, (text, spans));
                }
                let (text, spans) = &cache[&doc_id];
                if spans.len() >= len {
                    let start_word = rng.random_range(0..=spans.len() - len);
                    let byte_start = spans[start_word].0;
                    let byte_end = spans[start_word + len - 1].1;
                    out.segments.push(SegmentSample {
                        length: len,
                        doc_id,
                        start_word,
                        byte_start,
                        byte_end,
                        text: text[byte_start..byte_end].to_owned(),
                    });
                    break;
                }
                tries += 1;
                if tries >= retry_cap {
                    out.unsatisfiable.push(len);
                    continue 'lengths;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissCategory {
    /// Analysis leaves no token (stopwords, punctuation only).
    AllTokensRemoved,
    /// The window cuts through a unit the analyzer treats as one (markup,
    /// an entity), so it analyzes differently on its own than in place.
    TruncationBoundary,
    Other,
}

/// Explains why `segment` did not retrieve anything.
pub fn classify_miss(analyzer: &Analyzer, doc_text: &str, segment: &SegmentSample) -> MissCategory {
    let alone = analyzer.analyze(&segment.text, ChainKind::WebContent);
    if alone.is_empty() {
        return MissCategory::AllTokensRemoved;
    }
    let in_place: Vec<_> = analyzer
        .analyze(doc_text, ChainKind::WebContent)
        .into_iter()
        .filter(|t| t.start_offset >= segment.byte_start && t.end_offset <= segment.byte_end)
        .collect();
    let shape = |ts: &[crate::analysis::Token]| -> Vec<(String, u32)> {
        let p0 = ts.first().map_or(0, |t| t.position);
        ts.iter().map(|t| (t.term.clone(), t.position - p0)).collect()
    };
    if shape(&alone) != shape(&in_place) {
        return MissCategory::TruncationBoundary;
    }
    MissCategory::Other
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub length: usize,
    pub doc_id: u64,
    pub took_ms: f64,
    pub total_hits: u64,
    pub timed_out: bool,
    /// The sampled document itself is among the matches.
    pub source_found: bool,
}

impl ProbeRecord {
    pub fn hit(&self) -> bool {
        self.total_hits >= 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeMiss {
    pub length: usize,
    pub doc_id: u64,
    pub segment: String,
    pub category: MissCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub segment_length: usize,
    pub queries: usize,
    pub avg_ms: f64,
    pub median_ms: f64,
    pub std_ms: f64,
    pub hit_rate_percent: f64,
    pub source_found_percent: f64,
    pub misses: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    /// One row per length, in first-seen order.
    pub reports: Vec<ProbeReport>,
    pub records: Vec<ProbeRecord>,
    pub misses: Vec<ProbeMiss>,
}

impl ProbeOutcome {
    pub fn misses_in(&self, category: MissCategory) -> usize {
        self.misses.iter().filter(|m| m.category == category).count()
    }
}

/// Issues every segment as a phrase query with the given slop.
pub fn verbatim_probe(reader: &IndexReader, segments: &[SegmentSample], slop: u32) -> Result<ProbeOutcome> {
    let mut out = ProbeOutcome::default();
    for seg in segments {
        let spec = QuerySpec::new(QueryType::MatchPhrase, seg.text.clone()).slop(slop);
        let (result, timed_out) = match execute(reader, &spec) {
            Ok(r) => (r, false),
            Err(Error::QueryTimeout { partial, .. }) => (*partial, true),
            Err(e) => return Err(e),
        };
        let source_found = result.hits.iter().any(|h| h.doc_id == seg.doc_id)
            || (result.total_hits > result.hits.len() as u64
                && matching_documents(reader, &spec)?.iter().any(|&(d, _)| d == seg.doc_id));
        let record = ProbeRecord {
            length: seg.length,
            doc_id: seg.doc_id,
            took_ms: result.took_ms,
            total_hits: result.total_hits,
            timed_out,
            source_found,
        };
        if !record.hit() {
            let doc = reader.fetch_document(seg.doc_id)?;
            let category = classify_miss(reader.analyzer(), &doc.text, seg);
            log::warn!("probe miss ({category:?}) in doc {} for {}-word segment {:?}", seg.doc_id, seg.length, seg.text);
            out.misses.push(ProbeMiss { length: seg.length, doc_id: seg.doc_id, segment: seg.text.clone(), category });
        }
        out.records.push(record);
    }

    let mut lengths: Vec<usize> = Vec::new();
    for r in &out.records {
        if !lengths.contains(&r.length) {
            lengths.push(r.length);
        }
    }
    for len in lengths {
        let rs: Vec<&ProbeRecord> = out.records.iter().filter(|r| r.length == len).collect();
        let times: Vec<f64> = rs.iter().map(|r| r.took_ms).collect();
        let s = summarize(&times);
        let n = rs.len() as f64;
        out.reports.push(ProbeReport {
            segment_length: len,
            queries: rs.len(),
            avg_ms: s.mean,
            median_ms: s.median,
            std_ms: s.std,
            hit_rate_percent: 100.0 * rs.iter().filter(|r| r.hit()).count() as f64 / n,
            source_found_percent: 100.0 * rs.iter().filter(|r| r.source_found).count() as f64 / n,
            misses: rs.iter().filter(|r| !r.hit()).count(),
        });
    }
    Ok(out)
}
