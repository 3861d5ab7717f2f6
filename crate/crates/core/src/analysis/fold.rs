use std::borrow::Cow;

use super::fold_table::FOLD_TABLE;

/// Maps Latin letters with diacritics (and a few ligatures) to their ASCII
/// base. Characters outside the table pass through unchanged.
pub fn fold_ascii(term: &str) -> Cow<'_, str> {
    if term.is_ascii() {
        return Cow::Borrowed(term);
    }
    let mut out = String::with_capacity(term.len());
    for ch in term.chars() {
        match fold_char(ch) {
            Some(base) => out.push_str(base),
            None => out.push(ch),
        }
    }
    Cow::Owned(out)
}

fn fold_char(ch: char) -> Option<&'static str> {
    if ch.is_ascii() {
        return None;
    }
    FOLD_TABLE
        .binary_search_by_key(&ch, |&(c, _)| c)
        .ok()
        .map(|i| FOLD_TABLE[i].1)
}
