//! Linear-scan reference engine. It shares only the analyzer with the real
//! engine; statistics, scoring, phrase matching and fuzzy expansion are all
//! recomputed here from scratch, one document at a time.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use corpus_audit::query::{Fuzziness, MinimumShouldMatch, Operator, QuerySpec, QueryType};
use corpus_audit::{Analyzer, ChainKind};

const K1: f64 = 1.2;
const B: f64 = 0.75;

struct Doc {
    id: u64,
    main: Vec<(String, u32)>,
    exact: Vec<(String, u32)>,
}

pub struct Brute<'a> {
    analyzer: &'a Analyzer,
    docs: Vec<Doc>,
    avg_main: f64,
    avg_exact: f64,
    df_main: HashMap<String, usize>,
    df_exact: HashMap<String, usize>,
}

fn doc_freqs<'d>(fields: impl Iterator<Item = &'d Vec<(String, u32)>>) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    for tokens in fields {
        let distinct: BTreeSet<&str> = tokens.iter().map(|(t, _)| t.as_str()).collect();
        for t in distinct {
            *out.entry(t.to_owned()).or_insert(0) += 1;
        }
    }
    out
}

fn textbook_bm25(tf: usize, df: usize, n: usize, len: usize, avg: f64) -> f64 {
    let idf = (1.0 + (n as f64 - df as f64 + 0.5) / (df as f64 + 0.5)).ln();
    let norm = if avg > 0.0 { len as f64 / avg } else { 1.0 };
    idf * (tf as f64 * (K1 + 1.0)) / (tf as f64 + K1 * (1.0 - B + B * norm))
}

/// Adds contributions smallest first, so a score depends only on which
/// contributions a document has, not on the order they were produced in.
fn total(mut parts: Vec<f64>) -> f64 {
    parts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sum = 0.0;
    for p in parts {
        sum += p;
    }
    sum
}

/// Full dynamic-programming edit distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
        }
    }
    d[a.len()][b.len()]
}

/// Can every query token `i` (query position `q[i]`, candidate doc
/// positions `cands[i]`) take a distinct doc position `p` with
/// `lo <= p - q[i] <= lo + slop`? Decided by augmenting-path matching.
fn assignable(q: &[i64], cands: &[Vec<i64>], lo: i64, slop: i64) -> bool {
    let mut owner: HashMap<i64, usize> = HashMap::new();
    fn augment(i: usize, q: &[i64], cands: &[Vec<i64>], lo: i64, slop: i64, seen: &mut BTreeSet<i64>, owner: &mut HashMap<i64, usize>) -> bool {
        for &p in &cands[i] {
            let off = p - q[i];
            if off < lo || off > lo + slop || !seen.insert(p) {
                continue;
            }
            let prev = owner.get(&p).copied();
            if prev.is_none() || augment(prev.unwrap(), q, cands, lo, slop, seen, owner) {
                owner.insert(p, i);
                return true;
            }
        }
        false
    }
    (0..q.len()).all(|i| augment(i, q, cands, lo, slop, &mut BTreeSet::new(), &mut owner))
}

impl<'a> Brute<'a> {
    pub fn new(analyzer: &'a Analyzer, corpus: &[(u64, String)]) -> Self {
        let docs: Vec<Doc> = corpus
            .iter()
            .map(|(id, text)| Doc {
                id: *id,
                main: analyzer.analyze(text, ChainKind::WebContent).into_iter().map(|t| (t.term, t.position)).collect(),
                exact: analyzer.analyze(text, ChainKind::ExactMatch).into_iter().map(|t| (t.term, t.position)).collect(),
            })
            .collect();
        let n = docs.len().max(1) as f64;
        let avg_main = docs.iter().map(|d| d.main.len()).sum::<usize>() as f64 / n;
        let avg_exact = docs.iter().map(|d| d.exact.len()).sum::<usize>() as f64 / n;
        let df_main = doc_freqs(docs.iter().map(|d| &d.main));
        let df_exact = doc_freqs(docs.iter().map(|d| &d.exact));
        Brute { analyzer, docs, avg_main, avg_exact, df_main, df_exact }
    }

    fn tf(tokens: &[(String, u32)], term: &str) -> usize {
        tokens.iter().filter(|(t, _)| t == term).count()
    }

    fn df_main(&self, term: &str) -> usize {
        self.df_main.get(term).copied().unwrap_or(0)
    }

    fn df_exact(&self, term: &str) -> usize {
        self.df_exact.get(term).copied().unwrap_or(0)
    }

    fn main_score(&self, d: &Doc, term: &str) -> f64 {
        textbook_bm25(Self::tf(&d.main, term), self.df_main(term), self.docs.len(), d.main.len(), self.avg_main)
    }

    /// Distinct terms with multiplicity, first occurrence first.
    fn counted(tokens: &[String]) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for t in tokens {
            match out.iter_mut().find(|(x, _)| x == t) {
                Some((_, n)) => *n += 1,
                None => out.push((t.clone(), 1)),
            }
        }
        out
    }

    fn query_tokens(&self, text: &str) -> Vec<(String, u32)> {
        self.analyzer.analyze(text, ChainKind::WebContent).into_iter().map(|t| (t.term, t.position)).collect()
    }

    /// Every matching document ordered by (score desc, doc id asc).
    pub fn run(&self, spec: &QuerySpec) -> Vec<(u64, f64)> {
        let mut out = match spec.query_type {
            QueryType::Match => self.bag(spec, usize::MAX),
            QueryType::BoolMust => self.bag(spec, spec.bool_must_max_words),
            QueryType::MatchPhrase => self.phrase(spec),
            QueryType::TermExact => self.term_exact(spec),
            QueryType::Fuzzy => self.fuzzy(spec),
        };
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }

    fn bag(&self, spec: &QuerySpec, max_words: usize) -> Vec<(u64, f64)> {
        let tokens: Vec<String> = self.query_tokens(&spec.text).into_iter().map(|t| t.0).take(max_words).collect();
        if tokens.is_empty() {
            return Vec::new();
        }
        let n = tokens.len();
        let need = match (spec.query_type, spec.operator) {
            (_, Operator::And) => n,
            (QueryType::BoolMust, Operator::Or) => {
                let raw = match spec.minimum_should_match {
                    MinimumShouldMatch::Percent(p) => (p * n as f64 / 100.0 + 1e-9).floor() as usize,
                    MinimumShouldMatch::Count(c) => c,
                };
                raw.max(1).min(n)
            }
            (_, Operator::Or) => 1,
        };
        let mut out = Vec::new();
        for d in &self.docs {
            let present = tokens.iter().filter(|t| Self::tf(&d.main, t) > 0).count();
            if present >= need {
                let score = total(Self::counted(&tokens).iter().map(|(t, m)| self.main_score(d, t) * *m as f64).collect());
                out.push((d.id, score));
            }
        }
        out
    }

    fn phrase(&self, spec: &QuerySpec) -> Vec<(u64, f64)> {
        let tokens = self.query_tokens(&spec.text);
        if tokens.len() <= 1 {
            let mut as_match = spec.clone();
            as_match.query_type = QueryType::Match;
            as_match.operator = Operator::Or;
            return self.bag(&as_match, usize::MAX);
        }
        let q: Vec<i64> = tokens.iter().map(|t| i64::from(t.1)).collect();
        let terms: Vec<String> = tokens.iter().map(|t| t.0.clone()).collect();
        let slop = i64::from(spec.slop);
        let mut out = Vec::new();
        for d in &self.docs {
            let cands: Vec<Vec<i64>> = terms
                .iter()
                .map(|t| d.main.iter().filter(|(x, _)| x == t).map(|(_, p)| i64::from(*p)).collect())
                .collect();
            if cands.iter().any(Vec::is_empty) {
                continue;
            }
            let lows: BTreeSet<i64> =
                cands.iter().zip(&q).flat_map(|(c, qi)| c.iter().map(move |p| p - qi)).collect();
            if lows.into_iter().any(|lo| assignable(&q, &cands, lo, slop)) {
                let score = total(Self::counted(&terms).iter().map(|(t, m)| self.main_score(d, t) * *m as f64).collect());
                out.push((d.id, score));
            }
        }
        out
    }

    fn term_exact(&self, spec: &QuerySpec) -> Vec<(u64, f64)> {
        let lowered = spec.text.to_lowercase();
        let words: Vec<&str> = lowered.split_whitespace().collect();
        if words.len() != 1 {
            return Vec::new();
        }
        let term = words[0];
        let df = self.df_exact(term);
        self.docs
            .iter()
            .filter_map(|d| {
                let tf = Self::tf(&d.exact, term);
                (tf > 0).then(|| (d.id, textbook_bm25(tf, df, self.docs.len(), d.exact.len(), self.avg_exact)))
            })
            .collect()
    }

    /// Main-field terms within the edit budget, capped by lowest df first.
    pub fn variants(&self, word: &str, fuzziness: Fuzziness, cap: Option<usize>) -> Vec<String> {
        let n_chars = word.chars().count();
        let budget = match fuzziness {
            Fuzziness::Fixed(k) => k as usize,
            Fuzziness::Auto if n_chars <= 2 => 0,
            Fuzziness::Auto if n_chars <= 5 => 1,
            Fuzziness::Auto => 2,
        };
        let mut found: Vec<(usize, String)> = self
            .df_main
            .iter()
            .filter(|(t, _)| edit_distance(word, t) <= budget)
            .map(|(t, &df)| (df, t.clone()))
            .collect();
        if let Some(c) = cap {
            found.sort();
            found.truncate(c);
        }
        found.into_iter().map(|(_, t)| t).collect()
    }

    fn fuzzy(&self, spec: &QuerySpec) -> Vec<(u64, f64)> {
        let tokens: Vec<String> = self.query_tokens(&spec.text).into_iter().map(|t| t.0).collect();
        if tokens.is_empty() {
            return Vec::new();
        }
        let expansions: Vec<Vec<String>> =
            tokens.iter().map(|t| self.variants(t, spec.fuzziness, spec.max_expansions)).collect();
        let need = match spec.operator {
            Operator::Or => 1,
            Operator::And => tokens.len(),
        };
        let mut out = Vec::new();
        for d in &self.docs {
            let mut matched = 0;
            let mut parts = Vec::new();
            for vars in &expansions {
                let best = vars
                    .iter()
                    .filter(|v| Self::tf(&d.main, v) > 0)
                    .map(|v| self.main_score(d, v))
                    .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))));
                if let Some(s) = best {
                    matched += 1;
                    parts.push(s);
                }
            }
            if matched >= need {
                out.push((d.id, total(parts)));
            }
        }
        out
    }

    /// Main-field document frequencies, for dictionary checks.
    pub fn main_dictionary(&self) -> BTreeMap<String, usize> {
        self.df_main.iter().map(|(t, &n)| (t.clone(), n)).collect()
    }
}

/// Compares an engine ranking with the reference one: same documents, same
/// order, scores within `tol`.
pub fn compare(engine: &[(u64, f64)], oracle: &[(u64, f64)], tol: f64) -> Result<(), String> {
    if engine.len() != oracle.len() {
        return Err(format!("engine matched {} documents, oracle {}", engine.len(), oracle.len()));
    }
    for (rank, (e, o)) in engine.iter().zip(oracle).enumerate() {
        if e.0 != o.0 {
            return Err(format!("rank {rank}: engine doc {} ({}), oracle doc {} ({})", e.0, e.1, o.0, o.1));
        }
        if (e.1 - o.1).abs() > tol {
            return Err(format!("doc {}: engine score {} vs oracle {}", e.0, e.1, o.1));
        }
    }
    Ok(())
}
