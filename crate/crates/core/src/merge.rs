//! Consolidation of independently built indexes into one.
//!
//! Sources are merged in the order given. A source's documents receive
//! contiguous new ids in their original order, starting after all documents
//! of earlier sources, so relative order (and with it score tie-breaking) is
//! preserved. Statistics are recomputed over the merged corpus.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use serde::Serialize;

use crate::error::{Error, IoContext, Result};
use crate::index::merger::{merge_segments, DocIdMap, MergeSource};
use crate::index::segment::{read_doc_table, SegmentPaths, SegmentWriter};
use crate::index::{create_named, route, shard_dir, IndexManifest};

pub const MAPPING_FILE: &str = "doc_id_map.bin";
pub const PROGRESS_EVERY: u64 = 10_000;
/// Bytes per mapping row: source index u32, old id u64, new id u64.
pub const MAPPING_ROW_BYTES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MergeProgress {
    pub docs_written: u64,
    pub docs_total: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MergeReport {
    pub manifest: IndexManifest,
    pub docs_merged: u64,
    pub mapping_file: PathBuf,
}

/// One row of the id mapping file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdMapping {
    pub source: u32,
    pub old_id: u64,
    pub new_id: u64,
}

pub fn read_mapping(path: &Path) -> Result<Vec<IdMapping>> {
    let bytes = fs::read(path).at(path)?;
    if bytes.len() % MAPPING_ROW_BYTES != 0 {
        return Err(Error::corrupt(path, "mapping file length is not a whole number of rows"));
    }
    Ok(bytes
        .chunks_exact(MAPPING_ROW_BYTES)
        .map(|r| IdMapping {
            source: u32::from_le_bytes(r[0..4].try_into().unwrap()),
            old_id: u64::from_le_bytes(r[4..12].try_into().unwrap()),
            new_id: u64::from_le_bytes(r[12..20].try_into().unwrap()),
        })
        .collect())
}

/// Merges `sources` into a new index at `dest` with `n_shards` shards.
/// On a document-count mismatch the partial destination is removed.
pub fn merge_indexes(
    sources: &[PathBuf],
    dest: &Path,
    n_shards: usize,
    mut progress: impl FnMut(MergeProgress),
) -> Result<MergeReport> {
    if sources.is_empty() {
        return Err(Error::InvalidConfig("merge needs at least one source index".into()));
    }
    let manifests = sources.iter().map(|s| IndexManifest::load(s)).collect::<Result<Vec<_>>>()?;
    let first = &manifests[0];
    for (path, m) in sources.iter().zip(&manifests).skip(1) {
        if m.analyzer_digest != first.analyzer_digest {
            return Err(Error::AnalyzerMismatch(format!(
                "{} uses analyzer {} but {} uses {}",
                path.display(),
                m.analyzer_digest,
                sources[0].display(),
                first.analyzer_digest
            )));
        }
    }
    let expected: u64 = manifests.iter().map(|m| m.doc_count()).sum();
    let name = dest.file_name().map(|n| n.to_string_lossy().into_owned());
    let mut manifest = create_named(dest, n_shards, first.analyzer.clone(), name)?;

    match write_merged(sources, &manifests, dest, &mut manifest, expected, &mut progress) {
        Ok(written) if written == expected => {
            manifest.store(dest)?;
            info!("merged {} sources, {written} documents, into {}", sources.len(), dest.display());
            Ok(MergeReport { manifest, docs_merged: written, mapping_file: dest.join(MAPPING_FILE) })
        }
        Ok(written) => {
            let _ = fs::remove_dir_all(dest);
            Err(Error::DocCountMismatch { expected, actual: written })
        }
        Err(e) => {
            let _ = fs::remove_dir_all(dest);
            Err(e)
        }
    }
}

fn write_merged(
    sources: &[PathBuf],
    manifests: &[IndexManifest],
    dest: &Path,
    manifest: &mut IndexManifest,
    expected: u64,
    progress: &mut impl FnMut(MergeProgress),
) -> Result<u64> {
    let map_path = dest.join(MAPPING_FILE);
    let mut map_out = BufWriter::new(File::create(&map_path).at(&map_path)?);
    let mut inputs = Vec::new();
    let mut base = 0u64;
    for (s, (root, m)) in sources.iter().zip(manifests).enumerate() {
        let mut segs = Vec::new();
        let mut ids = Vec::new();
        for meta in &m.shards {
            let dir = shard_dir(root, meta.shard_id);
            for seg in &meta.segments {
                let paths = SegmentPaths::new(&dir, &format!("segment-{}", seg.id));
                ids.extend(read_doc_table(&paths.docs)?.into_iter().map(|e| e.doc_id));
                segs.push(paths);
            }
        }
        ids.sort_unstable();
        for (rank, &old) in ids.iter().enumerate() {
            let mut row = [0u8; MAPPING_ROW_BYTES];
            row[0..4].copy_from_slice(&(s as u32).to_le_bytes());
            row[4..12].copy_from_slice(&old.to_le_bytes());
            row[12..20].copy_from_slice(&(base + rank as u64).to_le_bytes());
            map_out.write_all(&row).at(&map_path)?;
        }
        let n = ids.len() as u64;
        let map = DocIdMap::Ranked { base, sorted_old: Arc::new(ids) };
        inputs.extend(segs.into_iter().map(|paths| MergeSource { paths, map: map.clone() }));
        base += n;
    }
    map_out.into_inner().map_err(|e| Error::io(&map_path, e.into_error()))?.sync_all().at(&map_path)?;

    let n_shards = manifest.n_shards;
    let mut outputs = (0..n_shards)
        .map(|k| SegmentWriter::create(SegmentPaths::new(&shard_dir(dest, k), "segment-0")))
        .collect::<Result<Vec<_>>>()?;
    let written = merge_segments(
        &inputs,
        &mut outputs,
        |id| route(id, n_shards),
        |n| {
            if n % PROGRESS_EVERY == 0 {
                progress(MergeProgress { docs_written: n, docs_total: expected });
            }
        },
    )?;
    for (k, w) in outputs.into_iter().enumerate() {
        let info = w.finish(0)?;
        let meta = &mut manifest.shards[k];
        meta.segments = vec![info];
        meta.next_segment = 1;
        meta.refresh();
    }
    manifest.next_doc_id = base;
    progress(MergeProgress { docs_written: written, docs_total: expected });
    Ok(written)
}
