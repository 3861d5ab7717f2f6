//! Single-pass HTML tag stripper that remembers where every output byte came
//! from in the raw input, so token offsets can point back into the original
//! document.

/// Elements that separate words when rendered. Removing them without a
/// replacement would glue neighbouring words together (`a<br>b`).
const BLOCK_TAGS: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "footer",
    "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "li", "main", "nav", "ol", "p", "pre",
    "section", "table", "td", "th", "tr", "ul",
];

/// Text with markup removed plus, when anything was rewritten, the raw byte
/// span behind each output byte.
#[derive(Debug, Clone)]
pub struct StrippedText {
    text: String,
    spans: Option<Vec<(usize, usize)>>,
}

impl StrippedText {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }

    /// Raw offset where the output byte at `idx` begins.
    pub fn raw_start(&self, idx: usize) -> usize {
        match &self.spans {
            Some(spans) => spans[idx].0,
            None => idx,
        }
    }

    /// Raw offset (exclusive) where the output range ending at `end` stops.
    pub fn raw_end(&self, end: usize) -> usize {
        match &self.spans {
            Some(spans) => spans[end - 1].1,
            None => end,
        }
    }
}

/// Removes well-formed tags and decodes the common character entities.
/// Unmatched `<` and unknown entities are kept literally.
pub fn strip_html(text: &str) -> String {
    strip_html_mapped(text).into_string()
}

pub fn strip_html_mapped(text: &str) -> StrippedText {
    if !text.contains(['<', '&']) {
        return StrippedText { text: text.to_owned(), spans: None };
    }

    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut spans: Vec<(usize, usize)> = Vec::with_capacity(text.len());
    // A removed block tag leaves a pending word separator.
    let mut pending_sep: Option<(usize, usize)> = None;
    let mut i = 0;

    let push = |out: &mut String,
                spans: &mut Vec<(usize, usize)>,
                pending: &mut Option<(usize, usize)>,
                s: &str,
                span: (usize, usize)| {
        flush_separator(out, spans, pending, s);
        out.push_str(s);
        spans.extend(std::iter::repeat_n(span, s.len()));
    };

    while i < bytes.len() {
        match bytes[i] {
            b'<' => {
                if let Some((end, block)) = scan_tag(text, i) {
                    if block {
                        pending_sep = Some((i, end));
                    }
                    i = end;
                } else {
                    push(&mut out, &mut spans, &mut pending_sep, "<", (i, i + 1));
                    i += 1;
                }
            }
            b'&' => {
                if let Some((decoded, end)) = decode_entity(text, i) {
                    let mut buf = [0u8; 4];
                    push(&mut out, &mut spans, &mut pending_sep, decoded.encode_utf8(&mut buf), (i, end));
                    i = end;
                } else {
                    push(&mut out, &mut spans, &mut pending_sep, "&", (i, i + 1));
                    i += 1;
                }
            }
            _ => {
                // Copy the run up to the next special byte in one go.
                let run_end = bytes[i..]
                    .iter()
                    .position(|&b| b == b'<' || b == b'&')
                    .map_or(bytes.len(), |p| i + p);
                let run = &text[i..run_end];
                flush_separator(&mut out, &mut spans, &mut pending_sep, run);
                // Each byte maps to the raw span of its whole character so a
                // token end never lands inside a multi-byte sequence.
                for (off, ch) in run.char_indices() {
                    let start = i + off;
                    let end = start + ch.len_utf8();
                    spans.extend(std::iter::repeat_n((start, end), ch.len_utf8()));
                }
                out.push_str(run);
                i = run_end;
            }
        }
    }

    StrippedText { text: out, spans: Some(spans) }
}

fn flush_separator(
    out: &mut String,
    spans: &mut Vec<(usize, usize)>,
    pending: &mut Option<(usize, usize)>,
    next: &str,
) {
    if let Some(sep) = pending.take() {
        let starts_ws = next.chars().next().is_some_and(char::is_whitespace);
        let ends_ws = out.chars().next_back().is_none_or(char::is_whitespace);
        if !starts_ws && !ends_ws {
            out.push(' ');
            spans.push(sep);
        }
    }
}

/// Returns the end of a well-formed tag starting at `start` and whether it
/// is a block-level element.
fn scan_tag(text: &str, start: usize) -> Option<(usize, bool)> {
    let rest = &text[start..];
    if let Some(body) = rest.strip_prefix("<!--") {
        return body.find("-->").map(|p| (start + 4 + p + 3, false));
    }
    let bytes = rest.as_bytes();
    let first = *bytes.get(1)?;
    let name_start = match first {
        b'/' => 2,
        b'!' | b'?' => 1,
        c if c.is_ascii_alphabetic() => 1,
        _ => return None,
    };
    // Tag must close before another tag opens.
    let close = rest[1..].find(['>', '<'])? + 1;
    if bytes[close] != b'>' {
        return None;
    }
    let name: String = rest[name_start..close]
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    if name.is_empty() && first != b'!' && first != b'?' {
        return None;
    }
    let block = BLOCK_TAGS.contains(&name.as_str());
    Some((start + close + 1, block))
}

fn decode_entity(text: &str, start: usize) -> Option<(char, usize)> {
    let rest = &text[start + 1..];
    let semi = rest.get(..12).unwrap_or(rest).find(';')?;
    let name = &rest[..semi];
    let ch = match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        _ => {
            let num = name.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse::<u32>().ok()?,
            };
            char::from_u32(code)?
        }
    };
    Some((ch, start + 1 + semi + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_tags() {
        assert_eq!(strip_html("<p>hello <b>world</b></p>"), "hello world");
    }

    #[test]
    fn decodes_entities() {
        assert_eq!(strip_html("a &lt; b"), "a < b");
        assert_eq!(strip_html("&amp;&gt;&quot;&#65;&#x42;"), "&>\"AB");
        assert_eq!(strip_html("fish &chips; & more"), "fish &chips; & more");
    }

    #[test]
    fn lone_angle_bracket_is_literal() {
        assert_eq!(strip_html("5 < 6 and <em>ok</em>"), "5 < 6 and ok");
        assert_eq!(strip_html("a <b"), "a <b");
        assert_eq!(strip_html("x << y"), "x << y");
    }

    #[test]
    fn block_tags_separate_words() {
        assert_eq!(strip_html("one<br>two"), "one two");
        assert_eq!(strip_html("<div>a</div><div>b</div>"), "a b");
        assert_eq!(strip_html("in<b>line</b>"), "inline");
    }

    #[test]
    fn comments_are_dropped() {
        assert_eq!(strip_html("a<!-- <p> hidden -->b"), "ab");
    }

    #[test]
    fn spans_point_into_raw_text() {
        let raw = "<i>caf&eacute;</i> x &amp; y";
        let s = strip_html_mapped(raw);
        assert_eq!(s.as_str(), "caf&eacute; x & y");
        let amp = s.as_str().find(" & ").unwrap() + 1;
        assert_eq!(&raw[s.raw_start(amp)..s.raw_end(amp + 1)], "&amp;");
        assert_eq!(&raw[s.raw_start(0)..s.raw_end(3)], "caf");
    }
}
