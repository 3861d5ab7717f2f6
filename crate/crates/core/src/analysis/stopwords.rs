use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const ENGLISH: &str = include_str!("../../data/stopwords/en.txt");

/// Built-in list for `language`; empty for anything but English.
pub fn builtin(language: &str) -> Vec<String> {
    match language {
        "en" => parse(ENGLISH),
        _ => Vec::new(),
    }
}

/// Reads `<dir>/<language>.txt`, one word per line.
pub fn load(dir: &Path, language: &str) -> Result<Vec<String>> {
    let path = dir.join(format!("{language}.txt"));
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(parse(&text))
}

fn parse(text: &str) -> Vec<String> {
    let mut words: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect();
    words.sort();
    words.dedup();
    words
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_list_has_33_words() {
        let words = builtin("en");
        assert_eq!(words.len(), 33);
        for w in ["the", "and", "of", "a", "with"] {
            assert!(words.iter().any(|x| x == w), "{w}");
        }
    }

    #[test]
    fn other_languages_are_empty() {
        assert!(builtin("de").is_empty());
    }

    #[test]
    fn loads_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("de.txt"), "der\nDie\n\n# comment\ndas\n").unwrap();
        assert_eq!(load(dir.path(), "de").unwrap(), vec!["das", "der", "die"]);
        assert!(load(dir.path(), "fr").is_err());
    }
}
