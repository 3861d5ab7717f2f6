use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use super::bm25::bm25_score;
use super::fuzzy::expand;
use super::highlight::highlight;
use super::phrase::{phrase_matches, PhraseTerm};
use super::{Operator, QuerySpec, QueryType, SearchHit, SearchResult};
use crate::analysis::{ChainKind, Token};
use crate::error::{Error, Result};
use crate::index::{Field, IndexReader, PostingList};

/// Runs `spec` against `reader` with the spec's own timeout.
pub fn execute(reader: &IndexReader, spec: &QuerySpec) -> Result<SearchResult> {
    let start = Instant::now();
    execute_with_deadline(reader, spec, start, start + Duration::from_millis(spec.timeout_ms))
}

pub fn execute_with_deadline(
    reader: &IndexReader,
    spec: &QuerySpec,
    start: Instant,
    deadline: Instant,
) -> Result<SearchResult> {
    let (q, threshold) = run(reader, spec, start, deadline)?;
    let kind = match spec.query_type {
        QueryType::TermExact => ChainKind::ExactMatch,
        _ => ChainKind::WebContent,
    };
    q.finish(threshold, kind)
}

/// Every matching document with its score, ordered by (score desc, doc id
/// asc), without fetching stored records. Not subject to the timeout.
pub fn matching_documents(reader: &IndexReader, spec: &QuerySpec) -> Result<Vec<(u64, f64)>> {
    let start = Instant::now();
    let far = start + Duration::from_secs(365 * 24 * 3600);
    let (q, threshold) = run(reader, spec, start, far)?;
    Ok(q.ranked(threshold))
}

fn run<'a>(reader: &'a IndexReader, spec: &'a QuerySpec, start: Instant, deadline: Instant) -> Result<(Query<'a>, usize)> {
    spec.validate()?;
    let mut q = Query { reader, spec, start, deadline, acc: HashMap::new(), highlight_terms: HashSet::new() };
    let threshold = match spec.query_type {
        QueryType::Match => q.run_match()?,
        QueryType::MatchPhrase => q.run_phrase()?,
        QueryType::TermExact => q.run_term_exact()?,
        QueryType::Fuzzy => q.run_fuzzy()?,
        QueryType::BoolMust => q.run_bool_must()?,
    };
    Ok((q, threshold))
}

/// Per-document contributions. They are summed in ascending order so that
/// equal multisets of contributions give bit-identical scores.
#[derive(Default, Clone)]
struct Acc {
    parts: Vec<f64>,
    matched: usize,
}

impl Acc {
    fn score(&self) -> f64 {
        let mut parts = self.parts.clone();
        parts.sort_unstable_by(f64::total_cmp);
        parts.iter().sum()
    }
}

struct Query<'a> {
    reader: &'a IndexReader,
    spec: &'a QuerySpec,
    start: Instant,
    deadline: Instant,
    acc: HashMap<u64, Acc>,
    highlight_terms: HashSet<String>,
}

impl Query<'_> {
    fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1000.0
    }

    fn check_deadline(&self, threshold: usize) -> Result<()> {
        if Instant::now() < self.deadline {
            return Ok(());
        }
        let mut partial = self.ranked(threshold);
        let total_hits = partial.len() as u64;
        partial.truncate(self.spec.top_k);
        let hits = partial
            .into_iter()
            .map(|(doc_id, score)| SearchHit { doc_id, score, url: String::new(), snippets: Vec::new() })
            .collect();
        let elapsed_ms = self.elapsed_ms();
        Err(Error::QueryTimeout {
            elapsed_ms,
            partial: Box::new(SearchResult { total_hits, hits, took_ms: elapsed_ms }),
        })
    }

    fn tokens(&self) -> Vec<Token> {
        self.reader.analyzer().analyze(&self.spec.text, ChainKind::WebContent)
    }

    fn score(&self, field: Field, tf: u32, df: u64, doc_id: u64) -> f64 {
        let stats = self.reader.stats();
        let len = self.reader.doc_len(doc_id, field).unwrap_or(0);
        bm25_score(tf, df, stats.doc_count, len, stats.avg_len(field), self.spec.bm25)
    }

    /// Adds `weight` copies of the term's BM25 contribution to every doc in `list`.
    fn accumulate(&mut self, field: Field, list: &PostingList, weight: usize) {
        for p in &list.postings {
            let s = self.score(field, p.term_frequency, list.df, p.doc_id);
            let a = self.acc.entry(p.doc_id).or_default();
            a.parts.push(s * weight as f64);
            a.matched += weight;
        }
    }

    /// Distinct terms with their multiplicity, in first-occurrence order.
    fn counted(tokens: &[Token]) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for t in tokens {
            match out.iter_mut().find(|(term, _)| *term == t.term) {
                Some((_, n)) => *n += 1,
                None => out.push((t.term.clone(), 1)),
            }
        }
        out
    }

    fn run_match(&mut self) -> Result<usize> {
        let tokens = self.tokens();
        if tokens.is_empty() {
            return Ok(usize::MAX);
        }
        let terms = Self::counted(&tokens);
        for (term, n) in &terms {
            self.check_deadline(usize::MAX)?;
            let list = self.reader.term_postings(Field::Main, term)?;
            self.accumulate(Field::Main, &list, *n);
            self.highlight_terms.insert(term.clone());
        }
        Ok(match self.spec.operator {
            Operator::Or => 1,
            Operator::And => tokens.len(),
        })
    }

    fn run_phrase(&mut self) -> Result<usize> {
        let tokens = self.tokens();
        if tokens.len() <= 1 {
            return self.run_match();
        }
        let terms = Self::counted(&tokens);
        let mut lists = Vec::with_capacity(terms.len());
        for (term, _) in &terms {
            self.check_deadline(usize::MAX)?;
            let list = self.reader.term_postings(Field::Main, term)?;
            if list.postings.is_empty() {
                return Ok(usize::MAX);
            }
            lists.push(list);
            self.highlight_terms.insert(term.clone());
        }
        let group_of = |term: &str| terms.iter().position(|(t, _)| t == term).unwrap();
        let groups: Vec<usize> = tokens.iter().map(|t| group_of(&t.term)).collect();
        let rarest = (0..lists.len()).min_by_key(|&i| lists[i].postings.len()).unwrap();

        let mut positions: Vec<usize> = vec![0; lists.len()];
        for (n, anchor) in lists[rarest].postings.iter().enumerate() {
            if n % 1024 == 0 {
                self.check_deadline(1)?;
            }
            let doc = anchor.doc_id;
            let found = lists.iter().enumerate().all(|(i, l)| {
                match l.postings.binary_search_by_key(&doc, |p| p.doc_id) {
                    Ok(k) => {
                        positions[i] = k;
                        true
                    }
                    Err(_) => false,
                }
            });
            if !found {
                continue;
            }
            let phrase: Vec<PhraseTerm<'_>> = tokens
                .iter()
                .zip(&groups)
                .map(|(t, &g)| PhraseTerm {
                    query_pos: t.position - tokens[0].position,
                    group: g,
                    positions: &lists[g].postings[positions[g]].positions,
                })
                .collect();
            if !phrase_matches(&phrase, self.spec.slop) {
                continue;
            }
            let parts = terms
                .iter()
                .enumerate()
                .map(|(g, (_, mult))| {
                    let p = &lists[g].postings[positions[g]];
                    self.score(Field::Main, p.term_frequency, lists[g].df, doc) * *mult as f64
                })
                .collect();
            self.acc.insert(doc, Acc { parts, matched: 1 });
        }
        Ok(1)
    }

    fn run_term_exact(&mut self) -> Result<usize> {
        let lowered = self.spec.text.to_lowercase();
        let mut words = lowered.split_whitespace();
        let (Some(term), None) = (words.next(), words.next()) else {
            return Ok(usize::MAX);
        };
        let list = self.reader.term_postings(Field::Exact, term)?;
        self.accumulate(Field::Exact, &list, 1);
        self.highlight_terms.insert(term.to_owned());
        Ok(1)
    }

    fn run_fuzzy(&mut self) -> Result<usize> {
        let tokens = self.tokens();
        if tokens.is_empty() {
            return Ok(usize::MAX);
        }
        let dict = self.reader.main_dictionary();
        for token in &tokens {
            self.check_deadline(usize::MAX)?;
            let edits = self.spec.fuzziness.distance(token.term.chars().count());
            let mut best: HashMap<u64, f64> = HashMap::new();
            for variant in expand(dict, &token.term, edits, self.spec.max_expansions) {
                let list = self.reader.term_postings(Field::Main, &variant.term)?;
                for p in &list.postings {
                    let s = self.score(Field::Main, p.term_frequency, list.df, p.doc_id);
                    let b = best.entry(p.doc_id).or_insert(0.0);
                    *b = b.max(s);
                }
                if !list.postings.is_empty() {
                    self.highlight_terms.insert(variant.term.clone());
                }
            }
            for (doc, s) in best {
                let a = self.acc.entry(doc).or_default();
                a.parts.push(s);
                a.matched += 1;
            }
        }
        Ok(match self.spec.operator {
            Operator::Or => 1,
            Operator::And => tokens.len(),
        })
    }

    fn run_bool_must(&mut self) -> Result<usize> {
        let mut tokens = self.tokens();
        tokens.truncate(self.spec.bool_must_max_words);
        if tokens.is_empty() {
            return Ok(usize::MAX);
        }
        for (term, n) in Self::counted(&tokens) {
            self.check_deadline(usize::MAX)?;
            let list = self.reader.term_postings(Field::Main, &term)?;
            self.accumulate(Field::Main, &list, n);
            self.highlight_terms.insert(term);
        }
        Ok(match self.spec.operator {
            Operator::And => tokens.len(),
            Operator::Or => self.spec.minimum_should_match.threshold(tokens.len()),
        })
    }

    /// Matching documents ordered by (score desc, doc id asc).
    fn ranked(&self, threshold: usize) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = self
            .acc
            .iter()
            .filter(|(_, a)| a.matched >= threshold)
            .map(|(&d, a)| (d, a.score()))
            .collect();
        out.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }

    fn finish(self, threshold: usize, kind: ChainKind) -> Result<SearchResult> {
        let ranked = self.ranked(threshold);
        let total_hits = ranked.len() as u64;
        let mut hits = Vec::with_capacity(self.spec.top_k.min(ranked.len()));
        for &(doc_id, score) in ranked.iter().take(self.spec.top_k) {
            self.check_deadline(threshold)?;
            let doc = self.reader.fetch_document(doc_id)?;
            let snippets =
                highlight(self.reader.analyzer(), &doc.text, kind, &self.highlight_terms, &self.spec.highlight);
            hits.push(SearchHit { doc_id, score, url: doc.url, snippets });
        }
        Ok(SearchResult { total_hits, hits, took_ms: self.elapsed_ms() })
    }
}
