use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{Analyzer, ChainKind};

/// Longest stretch a window edge may move to avoid cutting a word.
const MAX_WORD_EXTEND: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HighlightOptions {
    /// Context in characters around a match, split evenly left and right.
    pub fragment_size: usize,
    pub max_fragments: usize,
    pub pre_tag: String,
    pub post_tag: String,
}

impl Default for HighlightOptions {
    fn default() -> Self {
        HighlightOptions {
            fragment_size: 100,
            max_fragments: 5,
            pre_tag: "<em>".into(),
            post_tag: "</em>".into(),
        }
    }
}

/// Fragments of `text` around tokens whose analyzed term is in `terms`.
pub fn highlight(
    analyzer: &Analyzer,
    text: &str,
    kind: ChainKind,
    terms: &HashSet<String>,
    opts: &HighlightOptions,
) -> Vec<String> {
    if terms.is_empty() {
        return Vec::new();
    }
    let spans: Vec<(usize, usize)> = analyzer
        .analyze(text, kind)
        .into_iter()
        .filter(|t| terms.contains(&t.term))
        .map(|t| (t.start_offset, t.end_offset))
        .collect();
    highlight_spans(text, &spans, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Window {
    start: usize,
    end: usize,
    hits: usize,
}

/// Builds up to `max_fragments` snippets from sorted, disjoint byte spans.
/// Densest windows come first; equal density goes to the earlier window.
pub fn highlight_spans(text: &str, spans: &[(usize, usize)], opts: &HighlightOptions) -> Vec<String> {
    if spans.is_empty() || opts.max_fragments == 0 {
        return Vec::new();
    }
    let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    bounds.push(text.len());
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let to_char = |b: usize| bounds.partition_point(|&x| x < b);
    let cspans: Vec<(usize, usize)> = spans.iter().map(|&(s, e)| (to_char(s), to_char(e))).collect();

    let half = opts.fragment_size / 2;
    let mut windows: Vec<Window> = cspans
        .iter()
        .map(|&(s, e)| {
            let mut start = s.saturating_sub(half);
            let mut end = (e + half).min(n);
            let floor = start.saturating_sub(MAX_WORD_EXTEND);
            while start > floor && !chars[start - 1].is_whitespace() && !chars[start].is_whitespace() {
                start -= 1;
            }
            let ceil = (end + MAX_WORD_EXTEND).min(n);
            while end < ceil && !chars[end - 1].is_whitespace() && !chars[end].is_whitespace() {
                end += 1;
            }
            let hits = cspans.iter().filter(|&&(a, b)| a >= start && b <= end).count();
            Window { start, end, hits }
        })
        .collect();
    windows.sort_by(|a, b| b.hits.cmp(&a.hits).then(a.start.cmp(&b.start)));

    let mut chosen: Vec<Window> = Vec::new();
    for w in windows {
        if chosen.len() == opts.max_fragments {
            break;
        }
        if chosen.iter().all(|c| w.end <= c.start || c.end <= w.start) {
            chosen.push(w);
        }
    }

    chosen
        .iter()
        .map(|w| {
            let mut out = String::new();
            let mut at = bounds[w.start];
            for &(s, e) in spans {
                if s >= bounds[w.start] && e <= bounds[w.end] {
                    out.push_str(&text[at..s]);
                    out.push_str(&opts.pre_tag);
                    out.push_str(&text[s..e]);
                    out.push_str(&opts.post_tag);
                    at = e;
                }
            }
            out.push_str(&text[at..bounds[w.end]]);
            out.trim().to_owned()
        })
        .collect()
}
