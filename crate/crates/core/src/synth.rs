//! Seeded generator for web-like test corpora.
//!
//! Words are built from syllables and drawn from a Zipf distribution, so the
//! vocabulary has a realistic long tail. Sentences carry capitalisation,
//! punctuation, numbers, hyphenated compounds and a few accented words.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{IoContext, Result};
use crate::ingest::write_parquet;

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "br", "cl", "dr",
    "fl", "gr", "pl", "pr", "sh", "st", "th", "tr", "ch",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "io", "ou", "y"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "l", "m", "t", "nd", "st", "rk"];
const SUFFIXES: &[&str] = &["ing", "ed", "s", "ation", "ly", "ness", "er"];
const ACCENTED: &[&str] = &["é", "ü", "ñ", "ø", "à"];
const STOPWORDS: &[&str] = &["the", "and", "of", "to", "in", "is", "for", "with"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    pub min_words: usize,
    pub max_words: usize,
    /// Probability that a word slot is an English stopword.
    pub stopword_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            vocab_size: 50_000,
            zipf_exponent: 1.07,
            min_words: 200,
            max_words: 1200,
            stopword_rate: 0.005,
        }
    }
}

pub struct SynthCorpus {
    config: SynthConfig,
    rng: ChaCha8Rng,
    vocab: Vec<String>,
    cdf: Vec<f64>,
    produced: u64,
}

impl SynthCorpus {
    pub fn new(config: SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let vocab = build_vocab(&mut rng, config.vocab_size.max(1));
        let mut cdf = Vec::with_capacity(vocab.len());
        let mut acc = 0.0;
        for rank in 1..=vocab.len() {
            acc += 1.0 / (rank as f64).powf(config.zipf_exponent);
            cdf.push(acc);
        }
        SynthCorpus { config, rng, vocab, cdf, produced: 0 }
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    fn word(&mut self) -> &str {
        if self.rng.random_bool(self.config.stopword_rate) {
            return STOPWORDS[self.rng.random_range(0..STOPWORDS.len())];
        }
        let total = *self.cdf.last().unwrap();
        let x = self.rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c < x).min(self.vocab.len() - 1);
        &self.vocab[i]
    }

    /// Next `(text, url)` pair.
    pub fn document(&mut self) -> (String, String) {
        let n_words = self.rng.random_range(self.config.min_words..=self.config.max_words.max(self.config.min_words));
        let mut text = String::with_capacity(n_words * 8);
        let mut in_sentence = 0usize;
        let mut sentence_len = self.rng.random_range(6..20);
        for i in 0..n_words {
            if i > 0 {
                text.push(' ');
            }
            let roll = self.rng.random_range(0..100);
            if roll < 2 {
                let n: u32 = self.rng.random_range(0..10_000);
                text.push_str(&n.to_string());
            } else if roll < 4 {
                let a = self.word().to_owned();
                let b = self.word().to_owned();
                text.push_str(&a);
                text.push('-');
                text.push_str(&b);
            } else {
                let w = self.word().to_owned();
                if in_sentence == 0 {
                    let mut cs = w.chars();
                    if let Some(c) = cs.next() {
                        text.extend(c.to_uppercase());
                        text.push_str(cs.as_str());
                    }
                } else {
                    text.push_str(&w);
                }
            }
            in_sentence += 1;
            if in_sentence == sentence_len || i + 1 == n_words {
                text.push(if self.rng.random_bool(0.1) { '?' } else { '.' });
                in_sentence = 0;
                sentence_len = self.rng.random_range(6..20);
            } else if self.rng.random_bool(0.06) {
                text.push(',');
            }
        }
        self.produced += 1;
        let url = format!("https://site{}.example.org/page/{}", self.rng.random_range(0..500), self.produced);
        (text, url)
    }
}

impl Iterator for SynthCorpus {
    type Item = (String, String);

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.document())
    }
}

fn build_vocab(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let syllables = 1 + rng.random_range(0..3) + usize::from(out.len() > 2000);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
            w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
        }
        if rng.random_bool(0.03) {
            let at = w.len() / 2;
            if w.is_char_boundary(at) {
                w.replace_range(at..at, ACCENTED[rng.random_range(0..ACCENTED.len())]);
            }
        }
        if rng.random_bool(0.2) {
            w.push_str(SUFFIXES[rng.random_range(0..SUFFIXES.len())]);
        }
        if w.len() >= 3 && !STOPWORDS.contains(&w.as_str()) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusSummary {
    pub files: Vec<PathBuf>,
    pub docs: u64,
    pub text_bytes: u64,
}

/// Writes about `target_bytes` of document text into `n_files` parquet files
/// under `dir`, named `part-00000.parquet` and so on.
pub fn write_corpus(dir: &Path, target_bytes: u64, n_files: usize, config: SynthConfig) -> Result<CorpusSummary> {
    fs::create_dir_all(dir).at(dir)?;
    let n_files = n_files.max(1);
    let per_file = target_bytes.div_ceil(n_files as u64);
    let mut gen = SynthCorpus::new(config);
    let mut summary = CorpusSummary { files: Vec::new(), docs: 0, text_bytes: 0 };
    for f in 0..n_files {
        let path = dir.join(format!("part-{f:05}.parquet"));
        let mut bytes = 0u64;
        let rows = std::iter::from_fn(|| {
            if bytes >= per_file {
                return None;
            }
            let (text, url) = gen.document();
            bytes += text.len() as u64;
            Some((text, Some(url)))
        });
        summary.docs += write_parquet(&path, rows, 2048)?;
        summary.text_bytes += bytes;
        summary.files.push(path);
    }
    Ok(summary)
}
