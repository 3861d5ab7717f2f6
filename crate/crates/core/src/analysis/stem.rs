use std::borrow::Cow;
use std::cell::RefCell;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use rustc_hash::FxHashMap;

/// Entries kept per thread before the stem cache is reset.
const CACHE_LIMIT: usize = 1 << 17;

thread_local! {
    static CACHE: RefCell<FxHashMap<Box<str>, Box<str>>> = RefCell::new(FxHashMap::default());
}

fn english() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Whether a suffix stemmer is configured for `language`.
pub fn has_stemmer(language: &str) -> bool {
    language == "en"
}

/// Porter2 stemming for English; every other language passes through.
pub fn stem<'a>(term: &'a str, language: &str) -> Cow<'a, str> {
    if !has_stemmer(language) {
        return Cow::Borrowed(term);
    }
    CACHE.with_borrow_mut(|cache| {
        if let Some(s) = cache.get(term) {
            return Cow::Owned(s.to_string());
        }
        let stemmed = english().stem(term).into_owned();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(term.into(), stemmed.as_str().into());
        Cow::Owned(stemmed)
    })
}
