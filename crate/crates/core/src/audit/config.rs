use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::query::{Fuzziness, MinimumShouldMatch, Operator, QuerySpec, QueryType, DEFAULT_MAX_EXPANSIONS};

/// Query configuration in the audit JSON format. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryConfig {
    pub execute_match_query: bool,
    pub execute_match_phrase_query: bool,
    pub execute_term_query_exact: bool,
    pub execute_wildcard_query: bool,
    pub execute_fuzzy_query: bool,
    pub execute_bool_must_query: bool,
    #[serde(deserialize_with = "one_or_many")]
    pub match_query_operator: Vec<Operator>,
    #[serde(deserialize_with = "one_or_many")]
    pub match_phrase_slop: Vec<u32>,
    pub bool_must_operator: Operator,
    pub bool_must_max_words: usize,
    pub bool_must_minimum_should_match: MinimumShouldMatch,
    pub fuzziness: Fuzziness,
    pub fuzzy_operator: Operator,
    pub fuzzy_max_expansions: Option<usize>,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            execute_match_query: true,
            execute_match_phrase_query: true,
            execute_term_query_exact: true,
            execute_wildcard_query: false,
            execute_fuzzy_query: true,
            execute_bool_must_query: true,
            match_query_operator: vec![Operator::Or],
            match_phrase_slop: vec![0],
            bool_must_operator: Operator::Or,
            bool_must_max_words: 3,
            bool_must_minimum_should_match: MinimumShouldMatch::Percent(50.0),
            fuzziness: Fuzziness::Auto,
            fuzzy_operator: Operator::Or,
            fuzzy_max_expansions: Some(DEFAULT_MAX_EXPANSIONS),
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// One concrete query setup run for every keyword.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryVariant {
    /// Report label, e.g. `match_query` or `match_phrase_query[slop=1]`.
    pub label: String,
    pub template: QuerySpec,
}

impl QueryConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        let cfg: QueryConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.execute_wildcard_query {
            return Err(Error::InvalidConfig("wildcard queries are not supported; set execute_wildcard_query to false".into()));
        }
        if self.variants().is_empty() {
            return Err(Error::InvalidConfig("no query type is enabled".into()));
        }
        if self.bool_must_max_words == 0 {
            return Err(Error::InvalidConfig("bool_must_max_words must be at least 1".into()));
        }
        Ok(())
    }

    /// Enabled query setups in a fixed order. List-valued settings expand
    /// into one variant per value.
    pub fn variants(&self) -> Vec<QueryVariant> {
        let mut out = Vec::new();
        let label = |base: &str, n: usize, suffix: String| if n > 1 { format!("{base}[{suffix}]") } else { base.to_owned() };
        if self.execute_match_query {
            for &op in &self.match_query_operator {
                out.push(QueryVariant {
                    label: label("match_query", self.match_query_operator.len(), format!("operator={op}")),
                    template: QuerySpec::new(QueryType::Match, "").operator(op),
                });
            }
        }
        if self.execute_match_phrase_query {
            for &slop in &self.match_phrase_slop {
                out.push(QueryVariant {
                    label: label("match_phrase_query", self.match_phrase_slop.len(), format!("slop={slop}")),
                    template: QuerySpec::new(QueryType::MatchPhrase, "").slop(slop),
                });
            }
        }
        if self.execute_term_query_exact {
            out.push(QueryVariant { label: "term_query_exact".into(), template: QuerySpec::new(QueryType::TermExact, "") });
        }
        if self.execute_fuzzy_query {
            out.push(QueryVariant {
                label: "fuzzy_query".into(),
                template: QuerySpec::new(QueryType::Fuzzy, "")
                    .fuzziness(self.fuzziness)
                    .operator(self.fuzzy_operator)
                    .max_expansions(self.fuzzy_max_expansions),
            });
        }
        if self.execute_bool_must_query {
            let mut t = QuerySpec::new(QueryType::BoolMust, "").operator(self.bool_must_operator);
            t.bool_must_max_words = self.bool_must_max_words;
            t.minimum_should_match = self.bool_must_minimum_should_match;
            out.push(QueryVariant { label: "bool_must_query".into(), template: t });
        }
        out
    }
}
