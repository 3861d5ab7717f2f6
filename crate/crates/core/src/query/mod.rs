//! The five query types, BM25 ranking and snippet highlighting.
//!
//! Every query is evaluated exhaustively: `total_hits` is the exact number
//! of matching documents and hits are ordered by score descending, then
//! doc id ascending.

mod bm25;
mod exec;
mod fuzzy;
mod highlight;
mod phrase;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bm25::{bm25_score, idf, Bm25Params};
pub use exec::{execute, execute_with_deadline, matching_documents};
pub use fuzzy::{auto_distance, bounded_levenshtein, expand, levenshtein, Fuzziness, DEFAULT_MAX_EXPANSIONS};
pub use highlight::{highlight, highlight_spans, HighlightOptions};
pub use phrase::{phrase_matches, PhraseTerm};

use crate::analysis::{Analyzer, ChainKind};
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryType {
    Match,
    MatchPhrase,
    TermExact,
    Fuzzy,
    BoolMust,
}

impl QueryType {
    pub const ALL: [QueryType; 5] = [
        QueryType::Match,
        QueryType::MatchPhrase,
        QueryType::TermExact,
        QueryType::Fuzzy,
        QueryType::BoolMust,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::Match => "match",
            QueryType::MatchPhrase => "match_phrase",
            QueryType::TermExact => "term_exact",
            QueryType::Fuzzy => "fuzzy",
            QueryType::BoolMust => "bool_must",
        }
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let s = s.strip_suffix("_query").unwrap_or(&s);
        match s {
            "match" => Ok(QueryType::Match),
            "match_phrase" | "phrase" => Ok(QueryType::MatchPhrase),
            "term_exact" | "term" => Ok(QueryType::TermExact),
            "fuzzy" => Ok(QueryType::Fuzzy),
            "bool_must" => Ok(QueryType::BoolMust),
            _ => Err(Error::UnknownQueryType(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    #[default]
    Or,
    And,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::Or => "or",
            Operator::And => "and",
        })
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "or" => Ok(Operator::Or),
            "and" => Ok(Operator::And),
            other => Err(Error::InvalidConfig(format!("operator must be `or` or `and`, got `{other}`"))),
        }
    }
}

/// How many optional clauses must match: `"50%"` or an absolute `"2"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinimumShouldMatch {
    Percent(f64),
    Count(usize),
}

impl Default for MinimumShouldMatch {
    fn default() -> Self {
        MinimumShouldMatch::Percent(50.0)
    }
}

impl MinimumShouldMatch {
    /// Clause threshold for `n` clauses, never below 1 nor above `n`.
    pub fn threshold(self, n: usize) -> usize {
        let raw = match self {
            MinimumShouldMatch::Percent(p) => (p / 100.0 * n as f64 + 1e-9).floor() as usize,
            MinimumShouldMatch::Count(c) => c,
        };
        raw.clamp(1, n.max(1))
    }
}

impl fmt::Display for MinimumShouldMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinimumShouldMatch::Percent(p) => write!(f, "{p}%"),
            MinimumShouldMatch::Count(c) => write!(f, "{c}"),
        }
    }
}

impl FromStr for MinimumShouldMatch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidConfig(format!("minimum_should_match must look like `50%` or `2`, got `{s}`"));
        if let Some(p) = s.strip_suffix('%') {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            if !(0.0..=100.0).contains(&p) {
                return Err(bad());
            }
            Ok(MinimumShouldMatch::Percent(p))
        } else {
            s.parse().map(MinimumShouldMatch::Count).map_err(|_| bad())
        }
    }
}

impl Serialize for MinimumShouldMatch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MinimumShouldMatch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub query_type: QueryType,
    pub text: String,
    pub operator: Operator,
    pub slop: u32,
    pub fuzziness: Fuzziness,
    /// `None` disables the cap.
    pub max_expansions: Option<usize>,
    pub bool_must_max_words: usize,
    pub minimum_should_match: MinimumShouldMatch,
    pub top_k: usize,
    pub bm25: Bm25Params,
    pub highlight: HighlightOptions,
    pub timeout_ms: u64,
}

impl QuerySpec {
    pub fn new(query_type: QueryType, text: impl Into<String>) -> Self {
        QuerySpec {
            query_type,
            text: text.into(),
            operator: Operator::Or,
            slop: 0,
            fuzziness: Fuzziness::Auto,
            max_expansions: Some(DEFAULT_MAX_EXPANSIONS),
            bool_must_max_words: 3,
            minimum_should_match: MinimumShouldMatch::default(),
            top_k: 10,
            bm25: Bm25Params::default(),
            highlight: HighlightOptions::default(),
            timeout_ms: DEFAULT_TIMEOUT.as_millis() as u64,
        }
    }

    pub fn operator(mut self, op: Operator) -> Self {
        self.operator = op;
        self
    }

    pub fn slop(mut self, slop: u32) -> Self {
        self.slop = slop;
        self
    }

    pub fn fuzziness(mut self, f: Fuzziness) -> Self {
        self.fuzziness = f;
        self
    }

    pub fn max_expansions(mut self, cap: Option<usize>) -> Self {
        self.max_expansions = cap;
        self
    }

    pub fn top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.bm25.validate()?;
        if self.bool_must_max_words == 0 {
            return Err(Error::InvalidConfig("bool_must_max_words must be at least 1".into()));
        }
        Ok(())
    }

    /// False when the query's analysis leaves nothing to search for and the
    /// query type treats that as unanswerable rather than as an empty match.
    pub fn is_analyzable(&self, analyzer: &Analyzer) -> bool {
        match self.query_type {
            QueryType::Fuzzy => !analyzer.analyze(&self.text, ChainKind::WebContent).is_empty(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: u64,
    pub score: f64,
    pub url: String,
    pub snippets: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub total_hits: u64,
    pub hits: Vec<SearchHit>,
    pub took_ms: f64,
}
