mod support;

use std::collections::BTreeMap;

use corpus_audit::index::{compact, route, IndexManifest, WriterOptions};
use corpus_audit::query::matching_documents;
use corpus_audit::{create_index, AnalyzerConfig, Error, Field, IndexReader, IndexWriter, QuerySpec, QueryType};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{build_index, random_corpus, random_spec, record};

#[test]
fn stored_documents_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    create_index(dir.path(), 3, AnalyzerConfig::default()).unwrap();
    let w = IndexWriter::open(dir.path()).unwrap();
    let texts = ["Climate <b>change</b> & policy", "", "日本語のテキスト", "naïve café\nsecond line"];
    for (i, t) in texts.iter().enumerate() {
        w.add_document(record(i as u64 * 7, *t)).unwrap();
    }
    w.commit().unwrap();
    let r = IndexReader::open(dir.path()).unwrap();
    assert_eq!(r.doc_count(), 4);
    assert_eq!(r.doc_ids(), vec![0, 7, 14, 21]);
    for (i, t) in texts.iter().enumerate() {
        assert_eq!(r.fetch_document(i as u64 * 7).unwrap(), record(i as u64 * 7, *t));
    }
    assert!(matches!(r.fetch_document(1), Err(Error::UnknownDocId(1))));
    assert_eq!(r.manifest().next_doc_id, 22);
}

#[test]
fn readers_see_only_their_commit_point() {
    let dir = tempfile::tempdir().unwrap();
    create_index(dir.path(), 2, AnalyzerConfig::default()).unwrap();
    let w = IndexWriter::open(dir.path()).unwrap();
    w.add_document(record(0, "climate change")).unwrap();
    w.commit().unwrap();
    let old = IndexReader::open(dir.path()).unwrap();

    w.add_document(record(1, "climate policy")).unwrap();
    let spec = QuerySpec::new(QueryType::Match, "climate");
    assert_eq!(matching_documents(&IndexReader::open(dir.path()).unwrap(), &spec).unwrap().len(), 1);
    w.commit().unwrap();

    assert_eq!(old.doc_count(), 1);
    assert_eq!(matching_documents(&old, &spec).unwrap().len(), 1);
    let new = IndexReader::open(dir.path()).unwrap();
    assert_eq!(new.doc_count(), 2);
    assert_eq!(matching_documents(&new, &spec).unwrap().len(), 2);
}

#[test]
fn closing_discards_uncommitted_documents() {
    let dir = tempfile::tempdir().unwrap();
    create_index(dir.path(), 2, AnalyzerConfig::default()).unwrap();
    let w = IndexWriter::open_with(dir.path(), WriterOptions { memory_budget_bytes: 1 }).unwrap();
    w.add_document(record(0, "kept")).unwrap();
    w.commit().unwrap();
    for i in 1..20 {
        w.add_document(record(i, "spilled but never committed")).unwrap();
    }
    w.close();
    assert!(matches!(w.add_document(record(99, "late")), Err(Error::WriterClosed)));
    assert!(matches!(w.commit(), Err(Error::WriterClosed)));
    let r = IndexReader::open(dir.path()).unwrap();
    assert_eq!(r.doc_count(), 1);
    assert_eq!(r.doc_freq(Field::Main, "spill"), 0);

    let w = IndexWriter::open(dir.path()).unwrap();
    assert_eq!(w.next_doc_id(), 1);
}

#[test]
fn routing_balances_shards() {
    let n_docs = 64_000u64;
    for n_shards in [2usize, 5, 16] {
        let mut counts = vec![0u64; n_shards];
        for id in 0..n_docs {
            counts[route(id, n_shards)] += 1;
        }
        let mean = n_docs as f64 / n_shards as f64;
        for c in counts {
            assert!((c as f64 - mean).abs() / mean < 0.05, "{n_shards} shards: {c} vs mean {mean}");
        }
    }
}

#[test]
fn shard_statistics_match_contents() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let corpus = random_corpus(&mut rng, 300, 25);
    let dir = tempfile::tempdir().unwrap();
    build_index(dir.path(), &corpus, 4, 8 << 10, 3);
    let r = IndexReader::open(dir.path()).unwrap();
    let m = IndexManifest::load(dir.path()).unwrap();

    let mut per_shard = vec![0u64; 4];
    for (id, _) in &corpus {
        per_shard[route(*id, 4)] += 1;
    }
    for (meta, want) in m.shards.iter().zip(&per_shard) {
        assert_eq!(meta.doc_count, *want);
        assert!(meta.segments.len() > 1, "expected several segments per shard");
    }
    let total_main: u64 = r.doc_ids().iter().map(|&id| u64::from(r.doc_len(id, Field::Main).unwrap())).sum();
    assert_eq!(total_main, r.stats().main_tokens);
    assert_eq!(m.shards.iter().map(|s| s.total_token_count_main).sum::<u64>(), total_main);

    for e in r.main_dictionary() {
        let list = r.term_postings(Field::Main, &e.term).unwrap();
        assert_eq!(list.df, e.df);
        assert_eq!(list.postings.len() as u64, e.df);
        assert!(list.postings.windows(2).all(|w| w[0].doc_id < w[1].doc_id));
    }
}

fn snapshot(r: &IndexReader, seed: u64) -> Vec<Vec<(u64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for t in QueryType::ALL {
        for _ in 0..10 {
            out.push(matching_documents(r, &random_spec(&mut rng, t)).unwrap());
        }
    }
    out
}

#[test]
fn compaction_preserves_every_result() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let corpus = random_corpus(&mut rng, 250, 25);
    let dir = tempfile::tempdir().unwrap();
    build_index(dir.path(), &corpus, 3, 4 << 10, 4);
    let before = snapshot(&IndexReader::open(dir.path()).unwrap(), 5);
    let m = compact(dir.path()).unwrap();
    assert!(m.shards.iter().all(|s| s.segments.len() == 1));
    let r = IndexReader::open(dir.path()).unwrap();
    assert_eq!(snapshot(&r, 5), before);
    assert_eq!(r.doc_count(), 250);

    let files: BTreeMap<String, u64> = std::fs::read_dir(dir.path().join("shard-0"))
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), e.metadata().unwrap().len()))
        .collect();
    assert_eq!(files.len(), 3, "stale segment files left behind: {files:?}");
}

#[test]
fn spilling_does_not_change_the_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let corpus = random_corpus(&mut rng, 200, 30);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    build_index(a.path(), &corpus, 2, 1 << 30, 1);
    build_index(b.path(), &corpus, 2, 2 << 10, 1);
    for shard in ["shard-0", "shard-1"] {
        for ext in ["terms", "postings", "docs"] {
            let name = format!("{shard}/segment-0.{ext}");
            assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap(), "{name}");
        }
    }
}
