//! Streaming k-way merge of segments.
//!
//! Every input is read front to back exactly once, so memory stays at a few
//! buffers per input no matter how large the segments are. Inputs may remap
//! their doc ids (monotonically) and postings may be routed to several output
//! segments; this one routine backs writer commits, compaction and
//! whole-index merges.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use super::segment::{DocCursor, PostingsCursor, RawPosting, SegmentPaths, SegmentWriter, TermCursor, TermEntry};
use super::Field;
use crate::error::{Error, Result};

/// Doc id translation for one merge input. Must preserve order.
#[derive(Debug, Clone)]
pub(crate) enum DocIdMap {
    Identity,
    /// `new = base + rank(old)` within the sorted id list of the source.
    Ranked { base: u64, sorted_old: Arc<Vec<u64>> },
}

impl DocIdMap {
    fn map(&self, old: u64) -> Result<u64> {
        match self {
            DocIdMap::Identity => Ok(old),
            DocIdMap::Ranked { base, sorted_old } => sorted_old
                .binary_search(&old)
                .map(|rank| base + rank as u64)
                .map_err(|_| Error::UnknownDocId(old)),
        }
    }
}

pub(crate) struct MergeSource {
    pub paths: SegmentPaths,
    pub map: DocIdMap,
}

struct TermInput {
    terms: TermCursor,
    postings: PostingsCursor,
    current: Option<TermEntry>,
}

/// Merges `sources` into `outputs`, sending each document (and its
/// postings) to `outputs[route(new_id)]`. Returns the number of documents
/// written. `progress` sees the running document count.
pub(crate) fn merge_segments(
    sources: &[MergeSource],
    outputs: &mut [SegmentWriter],
    route: impl Fn(u64) -> usize,
    mut progress: impl FnMut(u64),
) -> Result<u64> {
    merge_terms(sources, outputs, &route)?;

    let mut cursors = sources
        .iter()
        .map(|s| DocCursor::open(&s.paths.docs))
        .collect::<Result<Vec<_>>>()?;
    let mut heap = BinaryHeap::new();
    for (i, c) in cursors.iter().enumerate() {
        if let Some(id) = c.peek_id() {
            heap.push(Reverse((sources[i].map.map(id)?, i)));
        }
    }
    let mut written = 0u64;
    while let Some(Reverse((new_id, i))) = heap.pop() {
        let mut doc = cursors[i].next_doc()?.expect("peeked document exists");
        doc.doc_id = new_id;
        outputs[route(new_id)].add_doc(&doc)?;
        written += 1;
        progress(written);
        if let Some(id) = cursors[i].peek_id() {
            heap.push(Reverse((sources[i].map.map(id)?, i)));
        }
    }
    Ok(written)
}

fn merge_terms(sources: &[MergeSource], outputs: &mut [SegmentWriter], route: &impl Fn(u64) -> usize) -> Result<()> {
    let mut inputs = Vec::with_capacity(sources.len());
    for s in sources {
        let mut terms = TermCursor::open(&s.paths.terms)?;
        let current = terms.next_entry()?;
        inputs.push(TermInput { terms, postings: PostingsCursor::open(&s.paths.postings)?, current });
    }

    let mut heap: BinaryHeap<Reverse<((u8, Vec<u8>), usize)>> = inputs
        .iter()
        .enumerate()
        .filter_map(|(i, inp)| inp.current.as_ref().map(|e| Reverse(((e.field, e.term.clone()), i))))
        .collect();

    let mut group = Vec::new();
    let mut touched = vec![false; outputs.len()];
    let mut postings_heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut pending: Vec<Option<RawPosting>> = (0..inputs.len()).map(|_| None).collect();

    while let Some(Reverse((key, first))) = heap.pop() {
        group.clear();
        group.push(first);
        while heap.peek().is_some_and(|Reverse((k, _))| *k == key) {
            let Reverse((_, i)) = heap.pop().unwrap();
            group.push(i);
        }
        let field = Field::from_u8(key.0)
            .ok_or_else(|| Error::corrupt(&sources[first].paths.terms, "unknown field tag"))?;

        for &i in &group {
            let inp = &mut inputs[i];
            inp.postings.begin(inp.current.as_ref().unwrap())?;
            if let Some(p) = inputs[i].postings.next_posting()? {
                postings_heap.push(Reverse((sources[i].map.map(p.doc_id)?, i)));
                pending[i] = Some(p);
            }
        }

        while let Some(Reverse((new_id, i))) = postings_heap.pop() {
            let raw = pending[i].take().unwrap();
            let out = route(new_id);
            if !touched[out] {
                outputs[out].start_term(field, &key.1)?;
                touched[out] = true;
            }
            outputs[out].push_encoded(new_id, &raw.encoded)?;
            if let Some(p) = inputs[i].postings.next_posting()? {
                postings_heap.push(Reverse((sources[i].map.map(p.doc_id)?, i)));
                pending[i] = Some(p);
            }
        }

        for (out, t) in touched.iter_mut().enumerate() {
            if *t {
                outputs[out].finish_term()?;
                *t = false;
            }
        }

        for &i in &group {
            let next = inputs[i].terms.next_entry()?;
            if let Some(e) = &next {
                heap.push(Reverse(((e.field, e.term.clone()), i)));
            }
            inputs[i].current = next;
        }
    }
    Ok(())
}
