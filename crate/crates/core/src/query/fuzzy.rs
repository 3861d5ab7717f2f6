use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::index::DictEntry;

pub const DEFAULT_MAX_EXPANSIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fuzziness {
    #[default]
    Auto,
    Fixed(u8),
}

impl Fuzziness {
    /// Edit budget for a term of `len` characters.
    pub fn distance(self, len: usize) -> usize {
        match self {
            Fuzziness::Fixed(d) => d as usize,
            Fuzziness::Auto => auto_distance(len),
        }
    }
}

pub fn auto_distance(len: usize) -> usize {
    match len {
        0..=2 => 0,
        3..=5 => 1,
        _ => 2,
    }
}

impl fmt::Display for Fuzziness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fuzziness::Auto => f.write_str("auto"),
            Fuzziness::Fixed(d) => write!(f, "{d}"),
        }
    }
}

impl FromStr for Fuzziness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Fuzziness::Auto),
            "0" => Ok(Fuzziness::Fixed(0)),
            "1" => Ok(Fuzziness::Fixed(1)),
            "2" => Ok(Fuzziness::Fixed(2)),
            other => Err(Error::InvalidConfig(format!("fuzziness must be auto, 0, 1 or 2, got `{other}`"))),
        }
    }
}

impl Serialize for Fuzziness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fuzziness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        let s = match Raw::deserialize(d)? {
            Raw::Num(n) => n.to_string(),
            Raw::Str(s) => s,
        };
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Levenshtein distance between `a` and `b` if it is at most `max`.
pub fn bounded_levenshtein(a: &[char], b: &[char], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= max).then_some(d)
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    bounded_levenshtein(&a, &b, usize::MAX).unwrap()
}

/// Dictionary terms within `max_edits` of `word`. With a cap, the rarest
/// (highest idf) candidates are kept, ties broken by term.
pub fn expand<'d>(dict: &'d [DictEntry], word: &str, max_edits: usize, cap: Option<usize>) -> Vec<&'d DictEntry> {
    let w: Vec<char> = word.chars().collect();
    let mut buf = Vec::new();
    let mut out: Vec<&DictEntry> = Vec::new();
    for e in dict {
        if max_edits == 0 {
            if e.term == word {
                out.push(e);
            }
            continue;
        }
        if e.term.len().abs_diff(word.len()) > 4 * max_edits {
            continue;
        }
        buf.clear();
        buf.extend(e.term.chars());
        if bounded_levenshtein(&w, &buf, max_edits).is_some() {
            out.push(e);
        }
    }
    if let Some(cap) = cap {
        if out.len() > cap {
            out.sort_by(|a, b| a.df.cmp(&b.df).then_with(|| a.term.cmp(&b.term)));
            out.truncate(cap);
            out.sort_by(|a, b| a.term.cmp(&b.term));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_ladder() {
        assert_eq!(auto_distance(2), 0);
        assert_eq!(auto_distance(3), 1);
        assert_eq!(auto_distance(5), 1);
        assert_eq!(auto_distance(6), 2);
    }

    #[test]
    fn distances() {
        assert_eq!(levenshtein("cliamte", "climate"), 2);
        assert_eq!(levenshtein("changge", "change"), 1);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("über", "uber"), 1);
        let a: Vec<char> = "kitten".chars().collect();
        let b: Vec<char> = "sitting".chars().collect();
        assert_eq!(bounded_levenshtein(&a, &b, 2), None);
        assert_eq!(bounded_levenshtein(&a, &b, 3), Some(3));
    }

    #[test]
    fn expansion_cap_prefers_rare_terms() {
        let dict: Vec<DictEntry> = [("cat", 9), ("bat", 1), ("hat", 1), ("car", 5)]
            .iter()
            .map(|&(t, df)| DictEntry { term: t.into(), df })
            .collect();
        let all: Vec<_> = expand(&dict, "cat", 1, None).iter().map(|e| e.term.as_str()).collect();
        assert_eq!(all, ["cat", "bat", "hat", "car"]);
        let capped: Vec<_> = expand(&dict, "cat", 1, Some(2)).iter().map(|e| e.term.as_str()).collect();
        assert_eq!(capped, ["bat", "hat"]);
    }

    #[test]
    fn parses_fuzziness() {
        assert_eq!("AUTO".parse::<Fuzziness>().unwrap(), Fuzziness::Auto);
        assert_eq!("2".parse::<Fuzziness>().unwrap(), Fuzziness::Fixed(2));
        assert!("3".parse::<Fuzziness>().is_err());
        let f: Fuzziness = serde_json::from_str("1").unwrap();
        assert_eq!(f, Fuzziness::Fixed(1));
    }
}
