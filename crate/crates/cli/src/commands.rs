use std::fs;
use std::path::{Path, PathBuf};

use corpus_audit::audit::{self, AuditConfig, QueryConfig};
use corpus_audit::bloom::{build_filter, BloomFilter};
use corpus_audit::index::{compact as compact_index, IndexManifest, WriterOptions, MANIFEST_FILE};
use corpus_audit::ingest::{collect_inputs, IngestOptions};
use corpus_audit::merge::merge_indexes;
use corpus_audit::query::{MinimumShouldMatch, Operator};
use corpus_audit::synth::{write_corpus, SynthConfig};
use corpus_audit::{
    bulk_index, create_index, execute, AnalyzerConfig, BulkParams, Error, IndexReader, IndexWriter, QuerySpec,
    QueryType, Result,
};
use log::info;
use serde::Serialize;

use crate::{AuditArgs, BloomBuildArgs, BloomProbeArgs, GenerateArgs, IndexArgs, MergeArgs, ProbeArgs, SearchArgs,
    StatsArgs, HOME_ENV};

const DEFAULT_SHARDS: usize = 16;

fn default_index(explicit: Option<PathBuf>) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p);
    }
    match std::env::var_os(HOME_ENV) {
        Some(home) => Ok(PathBuf::from(home).join("index")),
        None => Err(Error::InvalidConfig(format!("no index path given and {HOME_ENV} is not set"))),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn bulk_params(a: &IndexArgs) -> Result<BulkParams> {
    let mut p = match &a.params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)?
        }
        None => BulkParams::default(),
    };
    if let Some(v) = a.thread_count {
        p.thread_count = v;
    }
    if let Some(v) = a.chunk_size {
        p.chunk_size = v;
    }
    if let Some(v) = a.max_chunk_bytes {
        p.max_chunk_bytes = v;
    }
    if let Some(v) = a.queue_size {
        p.queue_size = v;
    }
    p.validate()?;
    Ok(p)
}

pub fn index(a: IndexArgs) -> Result<()> {
    let output = default_index(a.output.clone())?;
    let params = bulk_params(&a)?;
    if a.shards == Some(0) {
        return Err(Error::InvalidShardCount);
    }
    let mut files = collect_inputs(&a.input)?;
    if let Some(r) = &a.file_range {
        if r.end > files.len() {
            return Err(Error::InvalidConfig(format!("file range {}:{} exceeds {} input files", r.start, r.end, files.len())));
        }
        files = files[r.clone()].to_vec();
    }

    if output.join(MANIFEST_FILE).exists() {
        let m = IndexManifest::load(&output)?;
        if a.shards.is_some_and(|s| s != m.n_shards) {
            return Err(Error::InvalidConfig(format!("existing index has {} shards", m.n_shards)));
        }
        if m.analyzer.language != a.language {
            return Err(Error::AnalyzerMismatch(format!(
                "existing index uses language {}, not {}",
                m.analyzer.language, a.language
            )));
        }
    } else {
        let shards = a.shards.unwrap_or(DEFAULT_SHARDS);
        create_index(&output, shards, AnalyzerConfig::for_language(&a.language))?;
        info!("created {} with {shards} shards", output.display());
    }

    let mut opts = WriterOptions::default();
    if let Some(b) = a.memory_budget {
        opts.memory_budget_bytes = b as usize;
    }
    let writer = IndexWriter::open_with(&output, opts)?;
    let report = bulk_index(&files, &writer, params, IngestOptions { worker: a.worker })?;
    writer.close();

    if a.out.json {
        print_json(&report)?;
    } else {
        println!("indexed {} documents from {} files into {}", report.docs_indexed, report.files_processed, output.display());
        println!("  elapsed        {:.2} s ({:.0} docs/s)", report.elapsed_seconds, report.docs_per_second);
        println!("  text bytes     {}", report.bytes_indexed);
        println!("  peak memory    {:.1} MB", report.peak_memory_bytes as f64 / 1e6);
        println!("  chunk size     {} ({} chunks)", report.effective_chunk_size, report.chunks);
        println!("  doc ids        {}..{}", report.first_doc_id, report.next_doc_id);
        for f in &report.failures {
            println!("  failed: {f}");
        }
    }
    if report.files_failed > 0 {
        return Err(Error::PartialIngest { failed: report.files_failed });
    }
    Ok(())
}

pub fn merge(a: MergeArgs) -> Result<()> {
    let report = merge_indexes(&a.sources, &a.output, a.shards, |p| {
        info!("merged {}/{} documents", p.docs_written, p.docs_total)
    })?;
    if a.out.json {
        #[derive(Serialize)]
        struct Out<'a> {
            output: &'a Path,
            docs_merged: u64,
            n_shards: usize,
            mapping_file: &'a Path,
        }
        print_json(&Out {
            output: &a.output,
            docs_merged: report.docs_merged,
            n_shards: report.manifest.n_shards,
            mapping_file: &report.mapping_file,
        })
    } else {
        println!(
            "merged {} sources ({} documents) into {} with {} shards",
            a.sources.len(),
            report.docs_merged,
            a.output.display(),
            report.manifest.n_shards
        );
        println!("  id mapping: {}", report.mapping_file.display());
        Ok(())
    }
}

pub fn search(a: SearchArgs) -> Result<()> {
    let query_type: QueryType = a.query_type.parse()?;
    let mut spec = QuerySpec::new(query_type, a.query.clone()).top_k(a.top_k);
    if let Some(s) = a.slop {
        spec.slop = s;
    }
    if let Some(f) = &a.fuzziness {
        spec.fuzziness = f.parse()?;
    }
    if let Some(op) = &a.operator {
        spec.operator = op.parse::<Operator>()?;
    }
    if let Some(m) = a.max_expansions {
        spec.max_expansions = (m > 0).then_some(m);
    }
    if let Some(m) = &a.minimum_should_match {
        spec.minimum_should_match = m.parse::<MinimumShouldMatch>()?;
    }
    if let Some(t) = a.timeout_ms {
        spec.timeout_ms = t;
    }
    let reader = IndexReader::open(&default_index(a.index)?)?;
    let result = execute(&reader, &spec)?;
    if a.out.json {
        return print_json(&result);
    }
    println!("{} hits in {:.2} ms", result.total_hits, result.took_ms);
    for (rank, h) in result.hits.iter().enumerate() {
        println!("{:>3}. {:>9.4}  doc {}  {}", rank + 1, h.score, h.doc_id, h.url);
        for s in &h.snippets {
            println!("       {s}");
        }
    }
    Ok(())
}

pub fn audit(a: AuditArgs) -> Result<()> {
    let queries = match &a.config {
        Some(p) => QueryConfig::load(p)?,
        None => QueryConfig::default(),
    };
    let mut config = AuditConfig::new(queries, &a.keywords);
    config.top_k_snippets = a.top_k;
    config.threads = a.threads.max(1);
    config.report_path = a.report.clone();
    config.csv_path = a.csv.clone();
    let reader = IndexReader::open(&default_index(a.index)?)?;
    let report = audit::run_audit(&reader, &config)?;
    if a.out.json {
        return print_json(&report.stats);
    }
    println!("{:<32} {:>12} {:>12} {:>12} {:>12} {:>8}", "query type", "avg ms", "median ms", "std ms", "avg hits", "queries");
    for s in &report.stats {
        println!(
            "{:<32} {:>12.2} {:>12.2} {:>12.2} {:>12.1} {:>8}",
            s.query_type, s.avg_time_ms, s.median_time_ms, s.std_time_ms, s.avg_hits, s.total_queries
        );
    }
    if let Some(p) = &a.report {
        println!("report written to {}", p.display());
    }
    Ok(())
}

pub fn probe(a: ProbeArgs) -> Result<()> {
    let reader = IndexReader::open(&default_index(a.index)?)?;
    let sampling = audit::sample_segments(&reader, &a.lengths, a.samples, a.seed)?;
    let outcome = audit::verbatim_probe(&reader, &sampling.segments, a.slop)?;

    #[derive(Serialize)]
    struct Out<'a> {
        reports: &'a [audit::ProbeReport],
        unsatisfiable_lengths: &'a [usize],
        misses: &'a [audit::ProbeMiss],
    }
    let out = Out { reports: &outcome.reports, unsatisfiable_lengths: &sampling.unsatisfiable, misses: &outcome.misses };
    if let Some(p) = &a.report {
        #[derive(Serialize)]
        struct Full<'a> {
            seed: u64,
            slop: u32,
            segments: &'a [audit::SegmentSample],
            outcome: &'a audit::ProbeOutcome,
            unsatisfiable_lengths: &'a [usize],
        }
        let full = Full {
            seed: a.seed,
            slop: a.slop,
            segments: &sampling.segments,
            outcome: &outcome,
            unsatisfiable_lengths: &sampling.unsatisfiable,
        };
        fs::write(p, serde_json::to_vec_pretty(&full)?).map_err(|e| Error::io(p, e))?;
    }
    if a.out.json {
        return print_json(&out);
    }
    println!("{:>8} {:>8} {:>10} {:>10} {:>10} {:>9} {:>9}", "length", "queries", "avg ms", "median ms", "std ms", "hit %", "source %");
    for r in &outcome.reports {
        println!(
            "{:>8} {:>8} {:>10.2} {:>10.2} {:>10.2} {:>9.1} {:>9.1}",
            r.segment_length, r.queries, r.avg_ms, r.median_ms, r.std_ms, r.hit_rate_percent, r.source_found_percent
        );
    }
    for len in &sampling.unsatisfiable {
        println!("length {len}: no document long enough");
    }
    for m in &outcome.misses {
        println!("miss [{:?}] doc {} ({} words): {:?}", m.category, m.doc_id, m.length, m.segment);
    }
    Ok(())
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let reader = IndexReader::open(&default_index(a.index)?)?;
    let s = reader.index_stats();
    if a.out.json {
        return print_json(&s);
    }
    println!("index {} ({} shards, {} documents, {} bytes)", s.index_name, s.n_shards, s.doc_count, s.on_disk_bytes);
    println!("  analyzer digest  {}", s.analyzer_digest);
    println!("  manifest sha256  {}", s.manifest_sha256);
    println!("  avg main length  {:.2}", s.corpus.avg_main_len);
    println!("{:>6} {:>10} {:>14} {:>12} {:>9}", "shard", "docs", "main tokens", "bytes", "segments");
    for sh in &s.shards {
        println!(
            "{:>6} {:>10} {:>14} {:>12} {:>9}",
            sh.shard_id,
            sh.doc_count,
            sh.total_token_count_main,
            sh.on_disk_bytes,
            sh.segments.len()
        );
    }
    Ok(())
}

pub fn compact(a: StatsArgs) -> Result<()> {
    let path = default_index(a.index)?;
    let m = compact_index(&path)?;
    if a.out.json {
        return print_json(&m);
    }
    println!("compacted {} ({} documents)", path.display(), m.doc_count());
    Ok(())
}

pub fn bloom_build(a: BloomBuildArgs) -> Result<()> {
    let reader = IndexReader::open(&a.from_index)?;
    let dict = reader.main_dictionary();
    let capacity = a.capacity.unwrap_or(dict.len() as u64);
    let filter = build_filter(dict.iter().map(|e| e.term.as_str()), capacity, a.fp_rate)?;
    filter.save(&a.out_file)?;

    #[derive(Serialize)]
    struct Out {
        terms: u64,
        capacity: u64,
        bits: u64,
        hashes: u32,
        bytes: usize,
        estimated_fp_rate: f64,
    }
    let out = Out {
        terms: filter.len(),
        capacity,
        bits: filter.bit_count(),
        hashes: filter.hash_count(),
        bytes: filter.to_bytes().len(),
        estimated_fp_rate: filter.estimated_fp_rate(),
    };
    if a.out.json {
        return print_json(&out);
    }
    println!(
        "{} terms into {} bits, {} hashes ({} bytes), estimated false-positive rate {:.4}",
        out.terms, out.bits, out.hashes, out.bytes, out.estimated_fp_rate
    );
    Ok(())
}

pub fn bloom_probe(a: BloomProbeArgs) -> Result<()> {
    let filter = BloomFilter::load(&a.filter)?;
    let present = filter.maybe_contains(&a.term);
    if a.out.json {
        return print_json(&serde_json::json!({ "term": a.term, "maybe_present": present }));
    }
    println!("{}", if present { "possibly present" } else { "definitely absent" });
    Ok(())
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg = SynthConfig { seed: a.seed, ..SynthConfig::default() };
    if let Some(r) = a.stopword_rate {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidConfig("stopword rate must lie in [0, 1]".into()));
        }
        cfg.stopword_rate = r;
    }
    let summary = write_corpus(&a.output, a.size, a.files, cfg)?;
    if a.out.json {
        return print_json(&summary);
    }
    println!("wrote {} documents ({} text bytes) in {} files under {}", summary.docs, summary.text_bytes, summary.files.len(), a.output.display());
    Ok(())
}
