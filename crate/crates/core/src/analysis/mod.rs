//! Text analysis chains.
//!
//! Two chains share one tokenizer so that their token positions and offsets
//! line up:
//!
//! ```text
//! raw text -> strip_html -> UAX-29 words -> lowercase -> ascii fold -> stopwords -> stem
//!             \______________ exact_match ____________/
//!             \_________________________ web_content _______________________________/
//! ```
//!
//! Removed stopwords leave holes in the position sequence so phrase slop
//! counts them.

mod fold;
mod fold_table;
mod html;
mod stem;
pub mod stopwords;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_segmentation::UnicodeSegmentation;

pub use fold::fold_ascii;
pub use html::{strip_html, strip_html_mapped, StrippedText};
pub use stem::{has_stemmer, stem};

use crate::error::{Error, Result};

/// Default byte cap for the whole-text keyword field.
pub const KEYWORD_MAX_BYTES: usize = 8192;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub term: String,
    /// Ordinal position among all tokenizer outputs, stopwords included.
    pub position: u32,
    pub start_offset: usize,
    pub end_offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    WebContent,
    ExactMatch,
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainKind::WebContent => "web_content",
            ChainKind::ExactMatch => "exact_match",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerChain {
    pub name: ChainKind,
    pub strip_html: bool,
    pub lowercase: bool,
    pub ascii_fold: bool,
    pub stopword_removal: bool,
    pub stemming: bool,
    pub language: String,
}

impl AnalyzerChain {
    pub fn web_content(language: &str) -> Self {
        AnalyzerChain {
            name: ChainKind::WebContent,
            strip_html: true,
            lowercase: true,
            ascii_fold: true,
            stopword_removal: true,
            stemming: true,
            language: language.to_owned(),
        }
    }

    pub fn exact_match(language: &str) -> Self {
        AnalyzerChain {
            name: ChainKind::ExactMatch,
            strip_html: true,
            lowercase: true,
            ascii_fold: false,
            stopword_removal: false,
            stemming: false,
            language: language.to_owned(),
        }
    }

    fn validate(&self) -> Result<()> {
        let expected = match self.name {
            ChainKind::WebContent => Self::web_content(&self.language),
            ChainKind::ExactMatch => Self::exact_match(&self.language),
        };
        if *self != expected {
            return Err(Error::InvalidConfig(format!(
                "analyzer chain {} has non-standard stage flags",
                self.name
            )));
        }
        Ok(())
    }
}

/// The analyzer pair an index is built with. Its digest guards merges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    pub language: String,
    pub web_content: AnalyzerChain,
    pub exact_match: AnalyzerChain,
    pub stopwords: Vec<String>,
    pub keyword_max_bytes: usize,
}

impl AnalyzerConfig {
    pub fn for_language(language: &str) -> Self {
        AnalyzerConfig {
            language: language.to_owned(),
            web_content: AnalyzerChain::web_content(language),
            exact_match: AnalyzerChain::exact_match(language),
            stopwords: stopwords::builtin(language),
            keyword_max_bytes: KEYWORD_MAX_BYTES,
        }
    }

    pub fn with_stopwords(mut self, words: Vec<String>) -> Self {
        self.stopwords = words;
        self
    }

    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("analyzer config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self::for_language("en")
    }
}

/// Tokens of one document under both chains. Positions agree between the two.
#[derive(Debug, Clone, Default)]
pub struct FieldTokens {
    pub main: Vec<Token>,
    pub exact: Vec<Token>,
    /// Number of tokenizer outputs, i.e. the exact-field length.
    pub token_count: u32,
}

#[derive(Debug, Clone)]
pub struct Analyzer {
    config: AnalyzerConfig,
    stopwords: HashSet<String>,
}

impl Analyzer {
    pub fn new(config: AnalyzerConfig) -> Result<Self> {
        config.web_content.validate()?;
        config.exact_match.validate()?;
        if config.web_content.language != config.language
            || config.exact_match.language != config.language
        {
            return Err(Error::InvalidConfig("analyzer chains disagree on language".into()));
        }
        let stopwords = config.stopwords.iter().cloned().collect();
        Ok(Analyzer { config, stopwords })
    }

    pub fn config(&self) -> &AnalyzerConfig {
        &self.config
    }

    pub fn chain(&self, kind: ChainKind) -> &AnalyzerChain {
        match kind {
            ChainKind::WebContent => &self.config.web_content,
            ChainKind::ExactMatch => &self.config.exact_match,
        }
    }

    pub fn analyze(&self, text: &str, kind: ChainKind) -> Vec<Token> {
        let chain = self.chain(kind);
        let mut out = Vec::new();
        for_each_word(text, chain.strip_html, |position, start, end, surface| {
            if let Some(term) = normalize(surface, chain, &self.stopwords) {
                out.push(Token { term, position, start_offset: start, end_offset: end });
            }
        });
        out
    }

    /// Runs both chains over one tokenization pass.
    pub fn analyze_fields(&self, text: &str) -> FieldTokens {
        let main_chain = &self.config.web_content;
        let exact_chain = &self.config.exact_match;
        let mut fields = FieldTokens::default();
        for_each_word(text, true, |position, start, end, surface| {
            fields.token_count = position + 1;
            let lowered = lowercase(surface);
            if let Some(term) = normalize_lowered(&lowered, main_chain, &self.stopwords) {
                fields.main.push(Token { term, position, start_offset: start, end_offset: end });
            }
            if !lowered.is_empty() {
                let term = if exact_chain.lowercase { lowered } else { surface.to_owned() };
                fields.exact.push(Token { term, position, start_offset: start, end_offset: end });
            }
        });
        fields
    }

    /// Normalizes one surface word through a chain without tokenizing it.
    pub fn normalize_word(&self, surface: &str, kind: ChainKind) -> Option<String> {
        normalize(surface, self.chain(kind), &self.stopwords)
    }

    /// The keyword-field term: the whole lowercased text, byte-capped.
    pub fn keyword_term(&self, text: &str) -> Option<String> {
        if text.is_empty() {
            return None;
        }
        let lowered = text.to_lowercase();
        let mut cut = lowered.len().min(self.config.keyword_max_bytes);
        while !lowered.is_char_boundary(cut) {
            cut -= 1;
        }
        let mut term = lowered;
        term.truncate(cut);
        (!term.is_empty()).then_some(term)
    }
}

/// Analyzes with the built-in stopword list of the chain's language.
pub fn analyze(text: &str, chain: &AnalyzerChain) -> Vec<Token> {
    let stopwords: HashSet<String> = stopwords::builtin(&chain.language).into_iter().collect();
    let mut out = Vec::new();
    for_each_word(text, chain.strip_html, |position, start, end, surface| {
        if let Some(term) = normalize(surface, chain, &stopwords) {
            out.push(Token { term, position, start_offset: start, end_offset: end });
        }
    });
    out
}

fn lowercase(s: &str) -> String {
    if s.is_ascii() {
        s.to_ascii_lowercase()
    } else {
        s.to_lowercase()
    }
}

fn normalize(surface: &str, chain: &AnalyzerChain, stopwords: &HashSet<String>) -> Option<String> {
    if chain.lowercase {
        normalize_lowered(&lowercase(surface), chain, stopwords)
    } else {
        normalize_lowered(surface, chain, stopwords)
    }
}

fn normalize_lowered(word: &str, chain: &AnalyzerChain, stopwords: &HashSet<String>) -> Option<String> {
    let folded = if chain.ascii_fold { fold_ascii(word) } else { word.into() };
    if chain.stopword_removal && stopwords.contains(folded.as_ref()) {
        return None;
    }
    let term = if chain.stemming { stem(&folded, &chain.language).into_owned() } else { folded.into_owned() };
    (!term.is_empty()).then_some(term)
}

/// Calls `f(position, raw_start, raw_end, surface)` for every UAX-29 word
/// that contains a letter or digit.
fn for_each_word(text: &str, strip: bool, mut f: impl FnMut(u32, usize, usize, &str)) {
    let stripped;
    let (clean, mapping) = if strip {
        stripped = strip_html_mapped(text);
        (stripped.as_str(), Some(&stripped))
    } else {
        (text, None)
    };
    let mut position = 0u32;
    for (start, word) in clean.split_word_bound_indices() {
        if !word.chars().any(char::is_alphanumeric) {
            continue;
        }
        let end = start + word.len();
        let (raw_start, raw_end) = match mapping {
            Some(m) => (m.raw_start(start), m.raw_end(end)),
            None => (start, end),
        };
        f(position, raw_start, raw_end, word);
        position += 1;
    }
}
