//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Pass criterion numbers as arguments to run a subset.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use corpus_audit::audit::{
    read_jsonl, run_audit, sample_segments, verbatim_probe, AuditConfig, AuditReport, MissCategory, QueryConfig,
    QueryRecord,
};
use corpus_audit::bloom::build_filter;
use corpus_audit::index::{IndexManifest, WriterOptions};
use corpus_audit::ingest::{partition_file_range, IngestOptions};
use corpus_audit::query::{matching_documents, Fuzziness, Operator};
use corpus_audit::synth::{write_corpus, SynthConfig, SynthCorpus};
use corpus_audit::{
    bulk_index, compute_chunk_size, create_index, execute, merge_indexes, Analyzer, AnalyzerConfig, BulkParams,
    IndexReader, IndexWriter, QuerySpec, QueryType,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::brute::{compare, Brute};

const DESK_BYTES: u64 = 52_000_000;
const PROBE_LENGTHS: [usize; 4] = [1, 10, 100, 300];
const PROBE_SAMPLES: usize = 200;
const PROBE_SEED: u64 = 7;
const MIN_HIT_RATE: f64 = 98.5;
const MAX_QUERY_MS: f64 = 2_000.0;
const MAX_MEDIAN_MATCH_MS: f64 = 100.0;
const SCORE_TOL: f64 = 1e-6;
const MAX_PEAK_SPREAD: f64 = 0.25;
const BLOOM_TERMS: usize = 100_000;
const BLOOM_RATE: f64 = 0.01;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

static SCRATCH: OnceLock<PathBuf> = OnceLock::new();

fn scratch() -> &'static Path {
    SCRATCH.get_or_init(|| tempfile::Builder::new().prefix("acceptance-").tempdir().unwrap().keep())
}

fn parquet_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

fn ingest(files: &[PathBuf], dir: &Path, shards: usize, params: BulkParams, worker: u32, budget: usize) -> corpus_audit::IngestReport {
    if !dir.join("manifest.json").exists() {
        create_index(dir, shards, AnalyzerConfig::default()).unwrap();
    }
    let w = IndexWriter::open_with(dir, WriterOptions { memory_budget_bytes: budget }).unwrap();
    let report = bulk_index(files, &w, params, IngestOptions { worker }).unwrap();
    w.close();
    report
}

struct Desk {
    reader: IndexReader,
    text_bytes: u64,
}

/// The shared desk-scale index: a seeded synthetic web-text corpus.
fn desk() -> &'static Desk {
    static DESK: OnceLock<Desk> = OnceLock::new();
    DESK.get_or_init(|| {
        let data = scratch().join("desk-data");
        let summary = write_corpus(&data, DESK_BYTES, 8, SynthConfig::default()).unwrap();
        let dir = scratch().join("desk-index");
        ingest(&summary.files, &dir, 8, BulkParams::default(), 0, 256 << 20);
        Desk { reader: IndexReader::open(&dir).unwrap(), text_bytes: summary.text_bytes }
    })
}

/// 53 audit terms: common to rare vocabulary, misspellings, phrases lifted
/// from documents, and one stopword that leaves nothing for fuzzy matching.
fn audit_keywords() -> Vec<String> {
    let mut synth = SynthCorpus::new(SynthConfig::default());
    let vocab = synth.vocabulary().to_vec();
    let mut out: Vec<String> = [0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765, 10946, 17711, 28657, 46367]
        .iter()
        .map(|&r| vocab[r].clone())
        .collect();
    for w in vocab.iter().filter(|w| w.chars().count() >= 5 && w.is_ascii()).take(8) {
        let mut c: Vec<char> = w.chars().collect();
        c.swap(1, 2);
        out.push(c.into_iter().collect());
    }
    let (text, _) = synth.document();
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_owned())
        .filter(|w| !w.is_empty())
        .collect();
    for i in 0..20 {
        let n = 2 + i % 2;
        out.push(words[i * 3..i * 3 + n].join(" "));
    }
    out.push("the".into());
    out
}

fn desk_audit() -> &'static (AuditReport, PathBuf) {
    static AUDIT: OnceLock<(AuditReport, PathBuf)> = OnceLock::new();
    AUDIT.get_or_init(|| {
        let kw = scratch().join("keywords.txt");
        std::fs::write(&kw, audit_keywords().join("\n")).unwrap();
        let mut cfg = AuditConfig::new(QueryConfig::default(), &kw);
        let path = scratch().join("audit.jsonl");
        cfg.report_path = Some(path.clone());
        (run_audit(&desk().reader, &cfg).unwrap(), path)
    })
}

fn c1_chunk_size() -> Outcome {
    let got = compute_chunk_size(50_000_000, 4_000).map_err(|e| e.to_string())?;
    ensure(got == 12_500, || format!("got {got}"))?;
    Ok("compute_chunk_size(50000000, 4000) = 12500".into())
}

fn c2_verbatim_probe() -> Outcome {
    let d = desk();
    ensure(d.text_bytes >= 50_000_000, || format!("desk corpus only {} bytes", d.text_bytes))?;
    let sampling = sample_segments(&d.reader, &PROBE_LENGTHS, PROBE_SAMPLES, PROBE_SEED).map_err(|e| e.to_string())?;
    ensure(sampling.unsatisfiable.is_empty(), || format!("unsatisfiable lengths {:?}", sampling.unsatisfiable))?;
    let outcome = verbatim_probe(&d.reader, &sampling.segments, 0).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for r in &outcome.reports {
        ensure(r.queries == PROBE_SAMPLES, || format!("length {}: {} queries", r.segment_length, r.queries))?;
        ensure(r.hit_rate_percent >= MIN_HIT_RATE, || format!("length {}: hit rate {:.2}%", r.segment_length, r.hit_rate_percent))?;
        parts.push(format!("{}w {:.1}%", r.segment_length, r.hit_rate_percent));
    }
    let missed = outcome.records.iter().filter(|r| !r.hit()).count();
    ensure(outcome.misses.len() == missed, || format!("{missed} misses but {} logged", outcome.misses.len()))?;
    let other = outcome.misses_in(MissCategory::Other);
    ensure(other == 0, || format!("{other} unexplained misses"))?;
    Ok(format!(
        "{:.1} MB, {} docs; hit rates {}; {} misses ({} all-tokens-removed, {} truncation)",
        d.text_bytes as f64 / 1e6,
        d.reader.doc_count(),
        parts.join(", "),
        outcome.misses.len(),
        outcome.misses_in(MissCategory::AllTokensRemoved),
        outcome.misses_in(MissCategory::TruncationBoundary)
    ))
}

fn c3_latency() -> Outcome {
    let (report, _) = desk_audit();
    let records: Vec<&QueryRecord> = report.records().collect();
    let types: BTreeSet<&str> = records.iter().map(|r| r.query_type.as_str()).collect();
    ensure(types.len() == 5, || format!("query types seen: {types:?}"))?;
    ensure(report.header.keyword_count == 53, || format!("{} keywords", report.header.keyword_count))?;
    let slowest = records.iter().max_by(|a, b| a.took_ms.total_cmp(&b.took_ms)).unwrap();
    ensure(records.iter().all(|r| !r.timed_out), || "a query timed out".into())?;
    ensure(slowest.took_ms < MAX_QUERY_MS, || format!("{} {:?} took {:.1} ms", slowest.query_type, slowest.keyword, slowest.took_ms))?;
    let m = report.stats_for("match_query").unwrap().median_time_ms;
    ensure(m < MAX_MEDIAN_MATCH_MS, || format!("median match {m:.2} ms"))?;
    Ok(format!(
        "{} queries; slowest {:.1} ms ({} {:?}); median match {:.3} ms",
        records.len(),
        slowest.took_ms,
        slowest.query_type,
        slowest.keyword,
        m
    ))
}

fn c4_oracle() -> Outcome {
    let analyzer = Analyzer::new(AnalyzerConfig::default()).unwrap();
    let (mut queries, mut matched) = (0, 0);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n_docs = rng.random_range(50..=1000);
        let corpus = support::random_corpus(&mut rng, n_docs, 40);
        let dir = scratch().join(format!("oracle-{seed}"));
        support::build_index(&dir, &corpus, rng.random_range(1..=5), rng.random_range(8usize << 10..=4 << 20), rng.random_range(1..=3));
        let reader = IndexReader::open(&dir).unwrap();
        let brute = Brute::new(&analyzer, &corpus);
        for t in QueryType::ALL {
            for _ in 0..20 {
                let spec = support::random_spec(&mut rng, t);
                let got = matching_documents(&reader, &spec).map_err(|e| e.to_string())?;
                let want = brute.run(&spec);
                compare(&got, &want, SCORE_TOL)
                    .map_err(|e| format!("corpus {seed}, {t} {:?}: {e}", spec.text))?;
                queries += 1;
                matched += want.len();
            }
        }
        std::fs::remove_dir_all(&dir).ok();
    }
    Ok(format!("{queries} queries over 20 corpora agree ({matched} matched documents)"))
}

fn one_doc_hits(text: &str, query: &str, slop: u32) -> u64 {
    let dir = tempfile::tempdir().unwrap();
    create_index(dir.path(), 1, AnalyzerConfig::default()).unwrap();
    let w = IndexWriter::open(dir.path()).unwrap();
    w.add_document(support::record(0, text)).unwrap();
    w.commit().unwrap();
    let r = IndexReader::open(dir.path()).unwrap();
    execute(&r, &QuerySpec::new(QueryType::MatchPhrase, query).slop(slop)).unwrap().total_hits
}

fn c5_slop() -> Outcome {
    let cases = [("climate rapid change", 0, 0), ("climate and change", 1, 1), ("climate action and change", 2, 1)];
    for (doc, slop, want) in cases {
        let got = one_doc_hits(doc, "climate change", slop);
        ensure(got == want, || format!("{doc:?} at slop {slop}: {got} hits"))?;
    }
    Ok("slop 0 rejects \"climate rapid change\"; slop 1 and 2 accept their examples".into())
}

fn c6_fuzzy() -> Outcome {
    let dir = scratch().join("fuzzy");
    create_index(&dir, 2, AnalyzerConfig::default()).unwrap();
    let w = IndexWriter::open(&dir).unwrap();
    w.add_document(support::record(0, "climate")).unwrap();
    w.add_document(support::record(1, "change")).unwrap();
    w.commit().unwrap();
    let r = IndexReader::open(&dir).unwrap();
    for (q, id) in [("cliamte", 0u64), ("changge", 1)] {
        let res = execute(&r, &QuerySpec::new(QueryType::Fuzzy, q)).unwrap();
        let ids: Vec<u64> = res.hits.iter().map(|h| h.doc_id).collect();
        ensure(ids == [id], || format!("{q} matched {ids:?}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let corpus = support::random_corpus(&mut rng, 500, 30);
    let dir = scratch().join("fuzzy-mono");
    support::build_index(&dir, &corpus, 3, 64 << 20, 1);
    let r = IndexReader::open(&dir).unwrap();
    let mut checked = 0;
    for _ in 0..100 {
        let text = support::random_query_text(&mut rng);
        for op in [Operator::Or, Operator::And] {
            let mut prev = BTreeSet::new();
            for k in 0..=3 {
                let spec = QuerySpec::new(QueryType::Fuzzy, text.clone()).fuzziness(Fuzziness::Fixed(k)).operator(op).max_expansions(None);
                let now: BTreeSet<u64> = matching_documents(&r, &spec).unwrap().into_iter().map(|(d, _)| d).collect();
                ensure(prev.is_subset(&now), || format!("{text:?} ({op}) loses documents at distance {k}"))?;
                prev = now;
                checked += 1;
            }
        }
    }
    Ok(format!("both examples match; {checked} uncapped fuzzy sets monotone in distance"))
}

/// Ten queries per type drawn from vocabulary, document phrases and misspellings.
fn merge_suite(config: SynthConfig, rng: &mut ChaCha8Rng) -> Vec<QuerySpec> {
    let mut synth = SynthCorpus::new(config);
    let vocab = synth.vocabulary()[..2000].to_vec();
    let (text, _) = synth.document();
    let words: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    for t in QueryType::ALL {
        for i in 0..10 {
            let q = match i % 3 {
                0 => vocab.choose(rng).unwrap().clone(),
                1 => {
                    let s = rng.random_range(0..words.len() - 3);
                    words[s..s + 2 + i % 2].join(" ")
                }
                _ => {
                    let w = vocab.choose(rng).unwrap().clone();
                    support::misspell(rng, &w)
                }
            };
            let mut spec = QuerySpec::new(t, q).top_k(10);
            if t == QueryType::MatchPhrase {
                spec.slop = (i % 3) as u32;
            }
            out.push(spec);
        }
    }
    out
}

fn c7_merge() -> Outcome {
    let data = scratch().join("merge-data");
    let cfg = SynthConfig { seed: 70, min_words: 50, max_words: 600, ..SynthConfig::default() };
    let summary = write_corpus(&data, 12_000_000, 16, cfg).unwrap();
    let files = parquet_files(&data);
    let params = BulkParams::default();
    let mut parts = Vec::new();
    for (k, range) in partition_file_range(files.len(), 8).into_iter().enumerate() {
        let dir = scratch().join(format!("merge-part-{k}"));
        ingest(&files[range], &dir, 4, params, k as u32, 64 << 20);
        parts.push(dir);
    }
    let merged_dir = scratch().join("merge-merged");
    merge_indexes(&parts, &merged_dir, 8, |_| {}).map_err(|e| e.to_string())?;
    let single_dir = scratch().join("merge-single");
    ingest(&files, &single_dir, 8, params, 0, 64 << 20);

    let merged = IndexReader::open(&merged_dir).unwrap();
    let single = IndexReader::open(&single_dir).unwrap();
    ensure(merged.doc_count() == summary.docs && single.doc_count() == summary.docs, || {
        format!("doc counts {} / {} of {}", merged.doc_count(), single.doc_count(), summary.docs)
    })?;
    let urls = |r: &IndexReader, ranked: &[(u64, f64)]| -> Vec<String> {
        ranked.iter().map(|&(id, _)| r.fetch_document(id).unwrap().url).collect()
    };
    let suite = merge_suite(cfg, &mut ChaCha8Rng::seed_from_u64(71));
    let mut nonempty = 0;
    for spec in &suite {
        let (a, b) = (execute(&merged, spec).unwrap(), execute(&single, spec).unwrap());
        ensure(a.total_hits == b.total_hits, || format!("{} {:?}: total_hits {} vs {}", spec.query_type, spec.text, a.total_hits, b.total_hits))?;
        let (ra, rb) = (matching_documents(&merged, spec).unwrap(), matching_documents(&single, spec).unwrap());
        ensure(urls(&merged, &ra) == urls(&single, &rb), || format!("{} {:?}: ranked URLs differ", spec.query_type, spec.text))?;
        nonempty += usize::from(a.total_hits > 0);
    }
    Ok(format!("{} docs in 8 partitions; {} queries ({} with hits) rank identically", summary.docs, suite.len(), nonempty))
}

fn peak_for(corpus: &Path, out: &Path) -> Result<(u64, f64), String> {
    let res = Command::new(env!("CARGO_BIN_EXE_corpus-audit"))
        .args(["index", "-i"])
        .arg(corpus)
        .arg("-o")
        .arg(out)
        .args(["--shards", "4", "--memory-budget", "32MB", "--thread-count", "4", "--queue-size", "4", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    if !res.status.success() {
        return Err(String::from_utf8_lossy(&res.stderr).into_owned());
    }
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).map_err(|e| e.to_string())?;
    Ok((v["peak_memory_bytes"].as_u64().unwrap(), v["elapsed_seconds"].as_f64().unwrap()))
}

fn c8_memory() -> Outcome {
    let mut peaks = Vec::new();
    for (name, bytes, files, seed) in [("100MB", 100_000_000u64, 16, 11u64), ("1GB", 1_000_000_000, 64, 12)] {
        let data = scratch().join(format!("mem-{name}"));
        write_corpus(&data, bytes, files, SynthConfig { seed, ..SynthConfig::default() }).unwrap();
        let out = scratch().join(format!("mem-{name}-index"));
        let (peak, secs) = peak_for(&data, &out)?;
        peaks.push((name, peak, secs));
        std::fs::remove_dir_all(&data).ok();
        std::fs::remove_dir_all(&out).ok();
    }
    let (lo, hi) = (peaks[0].1.min(peaks[1].1) as f64, peaks[0].1.max(peaks[1].1) as f64);
    let spread = (hi - lo) / lo;
    let detail = peaks.iter().map(|(n, p, s)| format!("{n}: {:.1} MB peak, {s:.0} s", *p as f64 / 1e6)).collect::<Vec<_>>().join("; ");
    ensure(spread <= MAX_PEAK_SPREAD, || format!("{detail}; spread {:.1}%", spread * 100.0))?;
    Ok(format!("{detail}; spread {:.1}%", spread * 100.0))
}

fn segment_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let m = IndexManifest::load(dir).unwrap();
    let mut out = Vec::new();
    for s in &m.shards {
        for seg in &s.segments {
            for ext in ["terms", "postings", "docs"] {
                let name = format!("shard-{}/segment-{}.{ext}", s.shard_id, seg.id);
                out.push((name.clone(), std::fs::read(dir.join(name)).unwrap()));
            }
        }
    }
    out
}

fn c9_determinism() -> Outcome {
    let data = scratch().join("determinism-data");
    let cfg = SynthConfig { seed: 90, ..SynthConfig::default() };
    write_corpus(&data, 8_000_000, 8, cfg).unwrap();
    let files = parquet_files(&data);
    let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
    let mut total = 0;
    for threads in [1, 8] {
        for queue in [1, 8] {
            let dir = scratch().join(format!("determinism-{threads}-{queue}"));
            let params = BulkParams { thread_count: threads, queue_size: queue, chunk_size: 100, ..BulkParams::default() };
            ingest(&files, &dir, 4, params, 0, 4 << 20);
            let bytes = segment_bytes(&dir);
            match &reference {
                None => {
                    total = bytes.iter().map(|(_, b)| b.len()).sum::<usize>();
                    reference = Some(bytes);
                }
                Some(r) => {
                    ensure(r.len() == bytes.len(), || format!("threads={threads} queue={queue}: different file sets"))?;
                    for (a, b) in r.iter().zip(&bytes) {
                        ensure(a == b, || format!("threads={threads} queue={queue}: {} differs", a.0))?;
                    }
                }
            }
        }
    }
    Ok(format!("4 configurations, {} segment files ({:.1} MB) byte-identical", reference.unwrap().len(), total as f64 / 1e6))
}

fn c10_bloom() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut word = |prefix: char| -> String {
        let n = rng.random_range(4..14);
        std::iter::once(prefix).chain((0..n).map(|_| rng.random_range(b'a'..=b'z') as char)).collect()
    };
    let inserted: Vec<String> = (0..BLOOM_TERMS).map(|_| word('i')).collect();
    let absent: Vec<String> = (0..BLOOM_TERMS).map(|_| word('o')).collect();
    let f = build_filter(&inserted, BLOOM_TERMS as u64, BLOOM_RATE).map_err(|e| e.to_string())?;
    let false_negatives = inserted.iter().filter(|t| !f.maybe_contains(t)).count();
    ensure(false_negatives == 0, || format!("{false_negatives} false negatives"))?;
    let fp = absent.iter().filter(|t| f.maybe_contains(t)).count();
    let rate = fp as f64 / absent.len() as f64;
    ensure(rate <= 2.0 * BLOOM_RATE, || format!("false-positive rate {rate:.4}"))?;
    Ok(format!("m={} k={}; 0 false negatives; false-positive rate {:.4} ({fp}/{})", f.bit_count(), f.hash_count(), rate, absent.len()))
}

fn c11_report() -> Outcome {
    let (_, path) = desk_audit();
    let report = read_jsonl(path).map_err(|e| e.to_string())?;
    for s in &report.stats {
        let rs: Vec<&QueryRecord> = report.records().filter(|r| r.query_type == s.query_type).collect();
        let n = rs.len();
        let times: Vec<f64> = rs.iter().map(|r| r.took_ms).collect();
        let mut sum = 0.0;
        for t in &times {
            sum += t;
        }
        let avg = if n > 0 { sum / n as f64 } else { 0.0 };
        let mut sorted = times.clone();
        sorted.sort_by(f64::total_cmp);
        let median = match n {
            0 => 0.0,
            _ if n % 2 == 1 => sorted[n / 2],
            _ => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
        };
        let mut ss = 0.0;
        for t in &times {
            ss += (t - avg) * (t - avg);
        }
        let std = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        let mut hits = 0.0;
        for r in &rs {
            hits += r.total_hits as f64;
        }
        let avg_hits = if n > 0 { hits / n as f64 } else { 0.0 };
        let want = (avg, median, std, avg_hits, n);
        let got = (s.avg_time_ms, s.median_time_ms, s.std_time_ms, s.avg_hits, s.total_queries);
        ensure(got == want, || format!("{}: stored {got:?}, recomputed {want:?}", s.query_type))?;
    }
    let totals: Vec<(String, usize)> = report.stats.iter().map(|s| (s.query_type.clone(), s.total_queries)).collect();
    for (label, n) in &totals {
        let want = if label == "fuzzy_query" { 52 } else { 53 };
        ensure(*n == want, || format!("{label}: {n} queries"))?;
    }
    Ok(format!("{} stats rows recompute exactly; totals {:?}", report.stats.len(), totals))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "chunk-size formula", c1_chunk_size),
        (2, "verbatim probe", c2_verbatim_probe),
        (3, "latency envelope", c3_latency),
        (4, "BM25 oracle equivalence", c4_oracle),
        (5, "slop semantics", c5_slop),
        (6, "fuzzy examples", c6_fuzzy),
        (7, "merge invariance", c7_merge),
        (8, "ingest memory bound", c8_memory),
        (9, "ingest determinism", c9_determinism),
        (10, "bloom baseline", c10_bloom),
        (11, "audit report fidelity", c11_report),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name} ({secs:.1} s): {detail}");
            }
        }
    }
    if let Some(dir) = SCRATCH.get() {
        std::fs::remove_dir_all(dir).ok();
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
