//! Keyword-list audits and verbatim self-retrieval probes.
//!
//! An audit runs every keyword through every enabled query setup and keeps
//! each raw record next to the per-setup statistics, so the statistics can
//! be recomputed from the report alone.

mod config;
mod probe;
mod stats;

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{QueryConfig, QueryVariant};
pub use probe::{
    classify_miss, sample_segments, verbatim_probe, MissCategory, ProbeMiss, ProbeOutcome, ProbeRecord, ProbeReport,
    SegmentSample, Sampling, sample_segments_with_cap, DEFAULT_RETRY_CAP,
};
pub use stats::{mean, median, sample_std, summarize, Summary};

use crate::error::{Error, IoContext, Result};
use crate::index::IndexReader;
use crate::query::{execute, SearchHit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub queries: QueryConfig,
    pub keyword_file: PathBuf,
    pub top_k_snippets: usize,
    pub report_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
    /// Worker threads for executing keywords; 1 runs sequentially.
    pub threads: usize,
}

impl AuditConfig {
    pub fn new(queries: QueryConfig, keyword_file: impl Into<PathBuf>) -> Self {
        AuditConfig {
            queries,
            keyword_file: keyword_file.into(),
            top_k_snippets: 5,
            report_path: None,
            csv_path: None,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditHeader {
    pub index_name: String,
    pub index_manifest_sha256: String,
    pub doc_count: u64,
    pub keyword_count: usize,
    pub config: AuditConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub keyword: String,
    pub query_type: String,
    pub took_ms: f64,
    pub total_hits: u64,
    pub timed_out: bool,
    pub hits: Vec<SearchHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub keyword: String,
    pub query_type: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTypeStats {
    pub query_type: String,
    pub avg_time_ms: f64,
    pub median_time_ms: f64,
    pub std_time_ms: f64,
    pub avg_hits: f64,
    pub total_queries: usize,
    pub skipped: usize,
}

impl QueryTypeStats {
    pub fn from_records<'a>(query_type: &str, records: impl IntoIterator<Item = &'a QueryRecord>, skipped: usize) -> Self {
        let (times, hits): (Vec<f64>, Vec<f64>) =
            records.into_iter().map(|r| (r.took_ms, r.total_hits as f64)).unzip();
        let s = summarize(&times);
        QueryTypeStats {
            query_type: query_type.to_owned(),
            avg_time_ms: s.mean,
            median_time_ms: s.median,
            std_time_ms: s.std,
            avg_hits: mean(&hits),
            total_queries: times.len(),
            skipped,
        }
    }
}

/// One line of the JSONL report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportLine {
    Header(AuditHeader),
    Query(QueryRecord),
    Skipped(SkippedQuery),
    Stats(QueryTypeStats),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuditEntry {
    Query(QueryRecord),
    Skipped(SkippedQuery),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub header: AuditHeader,
    /// In keyword-file order, setups in configuration order.
    pub entries: Vec<AuditEntry>,
    pub stats: Vec<QueryTypeStats>,
}

impl AuditReport {
    pub fn records(&self) -> impl Iterator<Item = &QueryRecord> {
        self.entries.iter().filter_map(|e| match e {
            AuditEntry::Query(r) => Some(r),
            AuditEntry::Skipped(_) => None,
        })
    }

    pub fn skipped(&self) -> impl Iterator<Item = &SkippedQuery> {
        self.entries.iter().filter_map(|e| match e {
            AuditEntry::Skipped(s) => Some(s),
            AuditEntry::Query(_) => None,
        })
    }

    pub fn stats_for(&self, query_type: &str) -> Option<&QueryTypeStats> {
        self.stats.iter().find(|s| s.query_type == query_type)
    }
}

/// Non-blank lines not starting with `#`, trimmed.
pub fn read_keywords(path: &Path) -> Result<Vec<String>> {
    let f = File::open(path).at(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.at(path)?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push(t.to_owned());
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyKeywords(path.to_path_buf()));
    }
    Ok(out)
}

fn run_keyword(reader: &IndexReader, variants: &[QueryVariant], keyword: &str, top_k: usize) -> Result<Vec<AuditEntry>> {
    let mut out = Vec::with_capacity(variants.len());
    for v in variants {
        let mut spec = v.template.clone();
        spec.text = keyword.to_owned();
        spec.top_k = top_k;
        if !spec.is_analyzable(reader.analyzer()) {
            out.push(AuditEntry::Skipped(SkippedQuery {
                keyword: keyword.to_owned(),
                query_type: v.label.clone(),
                reason: "analysis produced no tokens".into(),
            }));
            continue;
        }
        let (result, timed_out) = match execute(reader, &spec) {
            Ok(r) => (r, false),
            Err(Error::QueryTimeout { partial, .. }) => (*partial, true),
            Err(e) => return Err(e),
        };
        out.push(AuditEntry::Query(QueryRecord {
            keyword: keyword.to_owned(),
            query_type: v.label.clone(),
            took_ms: result.took_ms,
            total_hits: result.total_hits,
            timed_out,
            hits: result.hits,
        }));
    }
    Ok(out)
}

/// Runs the audit and, when configured, writes the JSONL and CSV reports.
pub fn run_audit(reader: &IndexReader, config: &AuditConfig) -> Result<AuditReport> {
    config.queries.validate()?;
    let keywords = read_keywords(&config.keyword_file)?;
    let variants = config.queries.variants();
    if config.queries.execute_fuzzy_query {
        // Build the dictionary up front so no single query pays for it.
        reader.main_dictionary();
    }

    let per_keyword: Vec<Result<Vec<AuditEntry>>> = if config.threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        pool.install(|| {
            keywords.par_iter().map(|k| run_keyword(reader, &variants, k, config.top_k_snippets)).collect()
        })
    } else {
        keywords.iter().map(|k| run_keyword(reader, &variants, k, config.top_k_snippets)).collect()
    };

    let mut entries = Vec::new();
    for e in per_keyword {
        entries.extend(e?);
    }
    let mut report = AuditReport {
        header: AuditHeader {
            index_name: reader.manifest().index_name.clone(),
            index_manifest_sha256: reader.manifest_sha256().to_owned(),
            doc_count: reader.doc_count(),
            keyword_count: keywords.len(),
            config: config.clone(),
        },
        entries,
        stats: Vec::new(),
    };
    report.stats = variants
        .iter()
        .map(|v| {
            let n_skipped = report.skipped().filter(|s| s.query_type == v.label).count();
            QueryTypeStats::from_records(&v.label, report.records().filter(|r| r.query_type == v.label), n_skipped)
        })
        .collect();
    if let Some(p) = &config.report_path {
        write_jsonl(&report, p)?;
    }
    if let Some(p) = &config.csv_path {
        write_stats_csv(&report.stats, p)?;
    }
    Ok(report)
}

/// Header, then one line per (keyword, setup) in order, then stats rows.
pub fn write_jsonl(report: &AuditReport, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).at(path)?);
    let mut line = |l: ReportLine| -> Result<()> {
        serde_json::to_writer(&mut w, &l)?;
        w.write_all(b"\n").at(path)
    };
    line(ReportLine::Header(report.header.clone()))?;
    for e in &report.entries {
        line(match e {
            AuditEntry::Query(r) => ReportLine::Query(r.clone()),
            AuditEntry::Skipped(s) => ReportLine::Skipped(s.clone()),
        })?;
    }
    for s in &report.stats {
        line(ReportLine::Stats(s.clone()))?;
    }
    w.flush().at(path)
}

pub fn read_jsonl(path: &Path) -> Result<AuditReport> {
    let f = File::open(path).at(path)?;
    let mut header = None;
    let (mut entries, mut stats) = (Vec::new(), Vec::new());
    for line in BufReader::new(f).lines() {
        let line = line.at(path)?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ReportLine>(&line)? {
            ReportLine::Header(h) => header = Some(h),
            ReportLine::Query(r) => entries.push(AuditEntry::Query(r)),
            ReportLine::Skipped(s) => entries.push(AuditEntry::Skipped(s)),
            ReportLine::Stats(s) => stats.push(s),
        }
    }
    let header = header.ok_or_else(|| Error::corrupt(path, "report has no header line"))?;
    Ok(AuditReport { header, entries, stats })
}

pub fn write_stats_csv(stats: &[QueryTypeStats], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).at(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for s in stats {
        w.serialize(s)?;
    }
    w.flush().at(path)?;
    Ok(())
}
