//! Immutable segment files.
//!
//! A segment is three files sharing a stem, e.g. `segment-3`:
//!
//! ```text
//! .terms     "CAT1" version:u32
//!            entry* sorted by (field, term bytes):
//!              field:u8 term_len:varint term df:varint postings_off:varint postings_len:varint
//!            entry_count:u64 "CAT1"
//! .postings  "CAP1" version:u32
//!            per term, df postings in doc order:
//!              doc_delta:varint tf:varint pos_delta:varint{tf}
//! .docs      "CAD1" version:u32
//!            per doc in id order:
//!              url_len:varint url src_len:varint src row:varint text_len:varint text
//!            table: (doc_id:u64 offset:u64 main_len:u32 exact_len:u32)*
//!            doc_count:u64 table_off:u64 "CAD1"
//! ```
//!
//! Fixed-width integers are little-endian. The first doc delta and the
//! first position delta of each posting are absolute.

use std::borrow::Cow;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::ops::Deref;
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use memmap2::Mmap;

use super::codec::{get_varint, put_varint, read_u32_le, read_u64_le, read_varint, write_varint, Counting};
use super::manifest::{SegmentInfo, FORMAT_VERSION};
use super::{DocumentRecord, Field, Posting};
use crate::error::{Error, IoContext, Result};

const TERMS_MAGIC: &[u8; 4] = b"CAT1";
const POSTINGS_MAGIC: &[u8; 4] = b"CAP1";
const DOCS_MAGIC: &[u8; 4] = b"CAD1";
const HEADER_LEN: u64 = 8;
const DOC_TABLE_ENTRY: usize = 24;
const IO_BUF: usize = 64 * 1024;

/// How segment files are accessed by readers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FileAccess {
    #[default]
    Buffered,
    Mmap,
}

#[derive(Debug, Clone)]
pub struct SegmentPaths {
    pub terms: PathBuf,
    pub postings: PathBuf,
    pub docs: PathBuf,
}

impl SegmentPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        SegmentPaths {
            terms: dir.join(format!("{stem}.terms")),
            postings: dir.join(format!("{stem}.postings")),
            docs: dir.join(format!("{stem}.docs")),
        }
    }

    pub fn all(&self) -> [&Path; 3] {
        [&self.terms, &self.postings, &self.docs]
    }

    pub fn remove(&self) -> Result<()> {
        for p in self.all() {
            match fs::remove_file(p) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(Error::io(p, e)),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocEntry {
    pub doc_id: u64,
    pub offset: u64,
    pub main_len: u32,
    pub exact_len: u32,
}

/// One stored document as it moves between segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredDoc {
    pub doc_id: u64,
    pub url: String,
    pub source_file: String,
    pub row_index: u64,
    pub text: String,
    pub main_len: u32,
    pub exact_len: u32,
}

impl StoredDoc {
    pub fn into_record(self) -> DocumentRecord {
        DocumentRecord {
            doc_id: self.doc_id,
            text: self.text,
            url: self.url,
            source_file: self.source_file,
            row_index: self.row_index,
        }
    }
}

// ---------------------------------------------------------------------------
// Writing

/// Streams a segment to disk. Terms must arrive in (field, term) order and
/// postings of a term in increasing doc order.
pub struct SegmentWriter {
    paths: SegmentPaths,
    terms: Counting<BufWriter<File>>,
    postings: Counting<BufWriter<File>>,
    docs: Counting<BufWriter<File>>,
    doc_table: Vec<DocEntry>,
    term_count: u64,
    last_key: Option<(u8, Vec<u8>)>,
    open_term: Option<OpenTerm>,
    main_tokens: u64,
    exact_tokens: u64,
    last_doc: Option<u64>,
}

struct OpenTerm {
    field: u8,
    term: Vec<u8>,
    start: u64,
    df: u64,
    last_doc: u64,
}

fn create(path: &Path, magic: &[u8; 4]) -> Result<Counting<BufWriter<File>>> {
    let f = File::create(path).at(path)?;
    let mut w = Counting::new(BufWriter::with_capacity(IO_BUF, f));
    w.write_all(magic).at(path)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).at(path)?;
    Ok(w)
}

impl SegmentWriter {
    pub fn create(paths: SegmentPaths) -> Result<Self> {
        Ok(SegmentWriter {
            terms: create(&paths.terms, TERMS_MAGIC)?,
            postings: create(&paths.postings, POSTINGS_MAGIC)?,
            docs: create(&paths.docs, DOCS_MAGIC)?,
            paths,
            doc_table: Vec::new(),
            term_count: 0,
            last_key: None,
            open_term: None,
            main_tokens: 0,
            exact_tokens: 0,
            last_doc: None,
        })
    }

    pub fn start_term(&mut self, field: Field, term: &[u8]) -> Result<()> {
        debug_assert!(self.open_term.is_none(), "previous term not finished");
        let key = (field as u8, term.to_vec());
        if let Some(last) = &self.last_key {
            if *last >= key {
                return Err(Error::corrupt(&self.paths.terms, "terms written out of order"));
            }
        }
        self.open_term = Some(OpenTerm {
            field: field as u8,
            term: term.to_vec(),
            start: self.postings.position(),
            df: 0,
            last_doc: 0,
        });
        self.last_key = Some(key);
        Ok(())
    }

    /// Appends one posting whose tf and position deltas are already encoded.
    pub fn push_encoded(&mut self, doc_id: u64, tf_and_positions: &[u8]) -> Result<()> {
        let t = self.open_term.as_mut().expect("push outside of a term");
        if t.df > 0 && doc_id <= t.last_doc {
            return Err(Error::corrupt(&self.paths.postings, "postings out of doc order"));
        }
        let delta = if t.df == 0 { doc_id } else { doc_id - t.last_doc };
        write_varint(&mut self.postings, delta).at(&self.paths.postings)?;
        self.postings.write_all(tf_and_positions).at(&self.paths.postings)?;
        t.df += 1;
        t.last_doc = doc_id;
        Ok(())
    }

    pub fn finish_term(&mut self) -> Result<()> {
        let Some(t) = self.open_term.take() else { return Ok(()) };
        if t.df == 0 {
            return Ok(());
        }
        let len = self.postings.position() - t.start;
        let mut entry = Vec::with_capacity(t.term.len() + 16);
        entry.push(t.field);
        put_varint(&mut entry, t.term.len() as u64);
        entry.extend_from_slice(&t.term);
        put_varint(&mut entry, t.df);
        put_varint(&mut entry, t.start);
        put_varint(&mut entry, len);
        self.terms.write_all(&entry).at(&self.paths.terms)?;
        self.term_count += 1;
        Ok(())
    }

    pub fn add_doc(&mut self, doc: &StoredDoc) -> Result<()> {
        if self.last_doc.is_some_and(|last| doc.doc_id <= last) {
            return Err(Error::corrupt(&self.paths.docs, "documents written out of id order"));
        }
        let offset = self.docs.position();
        let mut head = Vec::with_capacity(32 + doc.url.len() + doc.source_file.len());
        put_varint(&mut head, doc.url.len() as u64);
        head.extend_from_slice(doc.url.as_bytes());
        put_varint(&mut head, doc.source_file.len() as u64);
        head.extend_from_slice(doc.source_file.as_bytes());
        put_varint(&mut head, doc.row_index);
        put_varint(&mut head, doc.text.len() as u64);
        let path = &self.paths.docs;
        self.docs.write_all(&head).at(path)?;
        self.docs.write_all(doc.text.as_bytes()).at(path)?;
        self.doc_table.push(DocEntry {
            doc_id: doc.doc_id,
            offset,
            main_len: doc.main_len,
            exact_len: doc.exact_len,
        });
        self.main_tokens += u64::from(doc.main_len);
        self.exact_tokens += u64::from(doc.exact_len);
        self.last_doc = Some(doc.doc_id);
        Ok(())
    }

    /// Writes trailers, syncs, and reports the segment's statistics.
    pub fn finish(mut self, id: u32) -> Result<SegmentInfo> {
        self.finish_term()?;
        let paths = self.paths.clone();

        self.terms.write_all(&self.term_count.to_le_bytes()).at(&paths.terms)?;
        self.terms.write_all(TERMS_MAGIC).at(&paths.terms)?;

        let table_off = self.docs.position();
        let mut table = Vec::with_capacity(self.doc_table.len() * DOC_TABLE_ENTRY + 20);
        for e in &self.doc_table {
            table.extend_from_slice(&e.doc_id.to_le_bytes());
            table.extend_from_slice(&e.offset.to_le_bytes());
            table.extend_from_slice(&e.main_len.to_le_bytes());
            table.extend_from_slice(&e.exact_len.to_le_bytes());
        }
        table.extend_from_slice(&(self.doc_table.len() as u64).to_le_bytes());
        table.extend_from_slice(&table_off.to_le_bytes());
        table.extend_from_slice(DOCS_MAGIC);
        self.docs.write_all(&table).at(&paths.docs)?;

        let mut bytes = 0;
        for (w, p) in [
            (self.terms, &paths.terms),
            (self.postings, &paths.postings),
            (self.docs, &paths.docs),
        ] {
            bytes += w.position();
            let f = w.into_inner().into_inner().map_err(|e| Error::io(p, e.into_error()))?;
            f.sync_all().at(p)?;
        }

        Ok(SegmentInfo {
            id,
            doc_count: self.doc_table.len() as u64,
            main_tokens: self.main_tokens,
            exact_tokens: self.exact_tokens,
            bytes,
        })
    }
}

/// Encodes `tf` and delta-coded positions.
pub fn encode_positions(buf: &mut Vec<u8>, positions: &[u32]) {
    put_varint(buf, positions.len() as u64);
    let mut last = 0u32;
    for (i, &p) in positions.iter().enumerate() {
        let d = if i == 0 { p } else { p - last };
        put_varint(buf, u64::from(d));
        last = p;
    }
}

// ---------------------------------------------------------------------------
// Random access

enum Blob {
    Owned(Vec<u8>),
    Mapped(Mmap),
}

impl Deref for Blob {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        match self {
            Blob::Owned(v) => v,
            Blob::Mapped(m) => m,
        }
    }
}

enum Storage {
    Buffered(File),
    Mapped(Mmap),
}

impl Storage {
    fn open(path: &Path, access: FileAccess) -> Result<Self> {
        let f = File::open(path).at(path)?;
        Ok(match access {
            FileAccess::Buffered => Storage::Buffered(f),
            // SAFETY: segment files are immutable once committed.
            FileAccess::Mmap => Storage::Mapped(unsafe { Mmap::map(&f) }.at(path)?),
        })
    }

    fn read(&self, offset: u64, len: usize) -> std::io::Result<Cow<'_, [u8]>> {
        match self {
            Storage::Buffered(f) => {
                let mut buf = vec![0u8; len];
                f.read_exact_at(&mut buf, offset)?;
                Ok(Cow::Owned(buf))
            }
            Storage::Mapped(m) => {
                let start = offset as usize;
                m.get(start..start + len)
                    .map(Cow::Borrowed)
                    .ok_or_else(|| std::io::ErrorKind::UnexpectedEof.into())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermEntry {
    pub field: u8,
    pub term: Vec<u8>,
    pub df: u64,
    pub postings_offset: u64,
    pub postings_len: u64,
}

fn parse_entry(bytes: &[u8], pos: &mut usize) -> Option<TermEntry> {
    let field = *bytes.get(*pos)?;
    *pos += 1;
    let len = get_varint(bytes, pos)? as usize;
    let term = bytes.get(*pos..*pos + len)?.to_vec();
    *pos += len;
    let df = get_varint(bytes, pos)?;
    let postings_offset = get_varint(bytes, pos)?;
    let postings_len = get_varint(bytes, pos)?;
    Some(TermEntry { field, term, df, postings_offset, postings_len })
}

fn check_header(bytes: &[u8], magic: &[u8; 4], path: &Path) -> Result<()> {
    if bytes.len() < HEADER_LEN as usize || &bytes[..4] != magic {
        return Err(Error::corrupt(path, "bad magic"));
    }
    if read_u32_le(bytes, 4) != Some(FORMAT_VERSION) {
        return Err(Error::corrupt(path, "unsupported segment version"));
    }
    Ok(())
}

/// Read-only view of a committed segment.
pub struct SegmentReader {
    paths: SegmentPaths,
    terms: Blob,
    /// Byte offset of every term entry inside `terms`.
    entries: Vec<u64>,
    postings: Storage,
    docs: Storage,
    doc_table: Vec<DocEntry>,
}

impl SegmentReader {
    pub fn open(paths: SegmentPaths, access: FileAccess) -> Result<Self> {
        let terms = match access {
            FileAccess::Buffered => Blob::Owned(fs::read(&paths.terms).at(&paths.terms)?),
            FileAccess::Mmap => {
                let f = File::open(&paths.terms).at(&paths.terms)?;
                // SAFETY: segment files are immutable once committed.
                Blob::Mapped(unsafe { Mmap::map(&f) }.at(&paths.terms)?)
            }
        };
        check_header(&terms, TERMS_MAGIC, &paths.terms)?;
        let n = terms.len();
        if n < 20 || &terms[n - 4..] != TERMS_MAGIC {
            return Err(Error::corrupt(&paths.terms, "bad trailer"));
        }
        let count = read_u64_le(&terms, n - 12).unwrap();
        let body_end = n - 12;
        let mut entries = Vec::with_capacity(count as usize);
        let mut pos = HEADER_LEN as usize;
        while pos < body_end {
            entries.push(pos as u64);
            parse_entry(&terms[..body_end], &mut pos)
                .ok_or_else(|| Error::corrupt(&paths.terms, "truncated term entry"))?;
        }
        if entries.len() as u64 != count {
            return Err(Error::corrupt(&paths.terms, "term count mismatch"));
        }

        let postings = Storage::open(&paths.postings, access)?;
        let docs = Storage::open(&paths.docs, access)?;
        let doc_table = read_doc_table(&paths.docs)?;

        Ok(SegmentReader { paths, terms, entries, postings, docs, doc_table })
    }

    pub fn doc_table(&self) -> &[DocEntry] {
        &self.doc_table
    }

    fn entry_at(&self, i: usize) -> TermEntry {
        let mut pos = self.entries[i] as usize;
        parse_entry(&self.terms, &mut pos).expect("entries validated on open")
    }

    /// Key of the i-th entry without copying the term.
    fn key_at(&self, i: usize) -> (u8, &[u8]) {
        let mut pos = self.entries[i] as usize;
        let field = self.terms[pos];
        pos += 1;
        let len = get_varint(&self.terms, &mut pos).unwrap() as usize;
        (field, &self.terms[pos..pos + len])
    }

    pub fn find(&self, field: Field, term: &str) -> Option<TermEntry> {
        let key = (field as u8, term.as_bytes());
        let idx = partition(self.entries.len(), |i| self.key_at(i) < key);
        (idx < self.entries.len() && self.key_at(idx) == key).then(|| self.entry_at(idx))
    }

    /// Every entry of one field, in term order.
    pub fn field_entries(&self, field: Field) -> impl Iterator<Item = TermEntry> + '_ {
        let f = field as u8;
        let start = partition(self.entries.len(), |i| self.key_at(i).0 < f);
        let end = partition(self.entries.len(), |i| self.key_at(i).0 <= f);
        (start..end).map(move |i| self.entry_at(i))
    }

    pub fn postings(&self, entry: &TermEntry) -> Result<Vec<Posting>> {
        let bytes = self
            .postings
            .read(entry.postings_offset, entry.postings_len as usize)
            .at(&self.paths.postings)?;
        decode_postings(&bytes, entry.df)
            .ok_or_else(|| Error::corrupt(&self.paths.postings, "truncated postings"))
    }

    pub fn doc_entry(&self, doc_id: u64) -> Option<&DocEntry> {
        self.doc_table
            .binary_search_by_key(&doc_id, |e| e.doc_id)
            .ok()
            .map(|i| &self.doc_table[i])
    }

    pub fn fetch(&self, doc_id: u64) -> Result<Option<StoredDoc>> {
        let Some(entry) = self.doc_entry(doc_id).copied() else { return Ok(None) };
        let path = &self.paths.docs;
        let mut want = 1024;
        let header = loop {
            let head = self.docs.read_prefix(entry.offset, want).at(path)?;
            match parse_doc_header(&head) {
                Some(h) => break h,
                None if head.len() < want => return Err(Error::corrupt(path, "truncated document record")),
                None => want *= 8,
            }
        };
        let text = self.docs.read(entry.offset + header.len as u64, header.text_len).at(path)?;
        let text = String::from_utf8(text.into_owned()).map_err(|_| Error::corrupt(path, "invalid utf-8"))?;
        Ok(Some(StoredDoc {
            doc_id,
            url: header.url,
            source_file: header.source_file,
            row_index: header.row_index,
            text,
            main_len: entry.main_len,
            exact_len: entry.exact_len,
        }))
    }
}

struct DocHeader {
    url: String,
    source_file: String,
    row_index: u64,
    text_len: usize,
    len: usize,
}

fn parse_doc_header(bytes: &[u8]) -> Option<DocHeader> {
    let mut pos = 0;
    let take_str = |pos: &mut usize| -> Option<String> {
        let len = get_varint(bytes, pos)? as usize;
        let s = bytes.get(*pos..*pos + len)?;
        *pos += len;
        String::from_utf8(s.to_vec()).ok()
    };
    let url = take_str(&mut pos)?;
    let source_file = take_str(&mut pos)?;
    let row_index = get_varint(bytes, &mut pos)?;
    let text_len = get_varint(bytes, &mut pos)? as usize;
    Some(DocHeader { url, source_file, row_index, text_len, len: pos })
}

impl Storage {
    /// Reads up to `len` bytes, stopping early at end of file.
    fn read_prefix(&self, offset: u64, len: usize) -> std::io::Result<Cow<'_, [u8]>> {
        match self {
            Storage::Buffered(f) => {
                let mut buf = vec![0u8; len];
                let mut got = 0;
                while got < len {
                    let n = f.read_at(&mut buf[got..], offset + got as u64)?;
                    if n == 0 {
                        break;
                    }
                    got += n;
                }
                buf.truncate(got);
                Ok(Cow::Owned(buf))
            }
            Storage::Mapped(m) => {
                let start = (offset as usize).min(m.len());
                let end = (start + len).min(m.len());
                Ok(Cow::Borrowed(&m[start..end]))
            }
        }
    }
}

/// First index in `0..n` for which `pred` is false (pred must be monotone).
fn partition(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn decode_postings(bytes: &[u8], df: u64) -> Option<Vec<Posting>> {
    let mut out = Vec::with_capacity(df as usize);
    let mut pos = 0;
    let mut doc = 0u64;
    for i in 0..df {
        let delta = get_varint(bytes, &mut pos)?;
        doc = if i == 0 { delta } else { doc + delta };
        let tf = get_varint(bytes, &mut pos)? as usize;
        let mut positions = Vec::with_capacity(tf);
        let mut p = 0u32;
        for j in 0..tf {
            let d = get_varint(bytes, &mut pos)? as u32;
            p = if j == 0 { d } else { p + d };
            positions.push(p);
        }
        out.push(Posting { doc_id: doc, term_frequency: tf as u32, positions });
    }
    Some(out)
}

pub fn read_doc_table(path: &Path) -> Result<Vec<DocEntry>> {
    let mut f = File::open(path).at(path)?;
    let len = f.metadata().at(path)?.len();
    if len < HEADER_LEN + 20 {
        return Err(Error::corrupt(path, "docs file too short"));
    }
    let mut header = [0u8; HEADER_LEN as usize];
    f.read_exact(&mut header).at(path)?;
    check_header(&header, DOCS_MAGIC, path)?;
    let mut trailer = [0u8; 20];
    f.seek(SeekFrom::Start(len - 20)).at(path)?;
    f.read_exact(&mut trailer).at(path)?;
    if &trailer[16..] != DOCS_MAGIC {
        return Err(Error::corrupt(path, "bad trailer"));
    }
    let count = read_u64_le(&trailer, 0).unwrap();
    let table_off = read_u64_le(&trailer, 8).unwrap();
    if table_off + count * DOC_TABLE_ENTRY as u64 + 20 != len {
        return Err(Error::corrupt(path, "doc table size mismatch"));
    }
    let mut raw = vec![0u8; count as usize * DOC_TABLE_ENTRY];
    f.seek(SeekFrom::Start(table_off)).at(path)?;
    f.read_exact(&mut raw).at(path)?;
    Ok(raw
        .chunks_exact(DOC_TABLE_ENTRY)
        .map(|c| DocEntry {
            doc_id: read_u64_le(c, 0).unwrap(),
            offset: read_u64_le(c, 8).unwrap(),
            main_len: read_u32_le(c, 16).unwrap(),
            exact_len: read_u32_le(c, 20).unwrap(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Sequential cursors used by merges. Each reads its file front to back.

struct CountingReader<'a, R> {
    inner: &'a mut R,
    read: usize,
}

impl<R: Read> Read for CountingReader<'_, R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.read += n;
        Ok(n)
    }
}

fn read_string<R: Read>(r: &mut R) -> std::io::Result<String> {
    let len = read_varint(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

pub struct TermCursor {
    path: PathBuf,
    reader: BufReader<File>,
    remaining: u64,
}

impl TermCursor {
    pub fn open(path: &Path) -> Result<Self> {
        let mut f = File::open(path).at(path)?;
        let len = f.metadata().at(path)?.len();
        if len < HEADER_LEN + 12 {
            return Err(Error::corrupt(path, "terms file too short"));
        }
        let mut trailer = [0u8; 12];
        f.seek(SeekFrom::Start(len - 12)).at(path)?;
        f.read_exact(&mut trailer).at(path)?;
        let count = read_u64_le(&trailer, 0).unwrap();
        f.seek(SeekFrom::Start(0)).at(path)?;
        let mut reader = BufReader::with_capacity(IO_BUF, f);
        let mut header = [0u8; HEADER_LEN as usize];
        reader.read_exact(&mut header).at(path)?;
        check_header(&header, TERMS_MAGIC, path)?;
        Ok(TermCursor { path: path.to_path_buf(), reader, remaining: count })
    }

    pub fn next_entry(&mut self) -> Result<Option<TermEntry>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.remaining -= 1;
        let r = &mut self.reader;
        let p = &self.path;
        let mut field = [0u8; 1];
        r.read_exact(&mut field).at(p)?;
        let len = read_varint(r).at(p)? as usize;
        let mut term = vec![0u8; len];
        r.read_exact(&mut term).at(p)?;
        let df = read_varint(r).at(p)?;
        let postings_offset = read_varint(r).at(p)?;
        let postings_len = read_varint(r).at(p)?;
        Ok(Some(TermEntry { field: field[0], term, df, postings_offset, postings_len }))
    }
}

/// Decodes postings one at a time from a sequentially read postings file.
pub struct PostingsCursor {
    path: PathBuf,
    reader: BufReader<File>,
    offset: u64,
    remaining: u64,
    last_doc: u64,
    first: bool,
}

/// A posting whose tf and positions stay encoded, for cheap copying.
#[derive(Debug, Clone)]
pub struct RawPosting {
    pub doc_id: u64,
    pub encoded: Vec<u8>,
}

impl PostingsCursor {
    pub fn open(path: &Path) -> Result<Self> {
        let f = File::open(path).at(path)?;
        let mut reader = BufReader::with_capacity(IO_BUF, f);
        let mut header = [0u8; HEADER_LEN as usize];
        reader.read_exact(&mut header).at(path)?;
        check_header(&header, POSTINGS_MAGIC, path)?;
        Ok(PostingsCursor {
            path: path.to_path_buf(),
            reader,
            offset: HEADER_LEN,
            remaining: 0,
            last_doc: 0,
            first: true,
        })
    }

    /// Positions the cursor on `entry`, which must follow the previous term.
    pub fn begin(&mut self, entry: &TermEntry) -> Result<()> {
        if entry.postings_offset != self.offset {
            return Err(Error::corrupt(&self.path, "postings not laid out in term order"));
        }
        self.remaining = entry.df;
        self.first = true;
        Ok(())
    }

    pub fn next_posting(&mut self) -> Result<Option<RawPosting>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.remaining -= 1;
        let p = &self.path;
        let mut counted = CountingReader { inner: &mut self.reader, read: 0 };
        let delta = read_varint(&mut counted).at(p)?;
        let tf = read_varint(&mut counted).at(p)?;
        let mut encoded = Vec::with_capacity(tf as usize + 2);
        put_varint(&mut encoded, tf);
        for _ in 0..tf {
            put_varint(&mut encoded, read_varint(&mut counted).at(p)?);
        }
        self.offset += counted.read as u64;
        self.last_doc = if self.first { delta } else { self.last_doc + delta };
        self.first = false;
        Ok(Some(RawPosting { doc_id: self.last_doc, encoded }))
    }
}

pub struct DocCursor {
    path: PathBuf,
    reader: BufReader<File>,
    table: Vec<DocEntry>,
    next: usize,
}

impl DocCursor {
    pub fn open(path: &Path) -> Result<Self> {
        let table = read_doc_table(path)?;
        let f = File::open(path).at(path)?;
        let mut reader = BufReader::with_capacity(IO_BUF, f);
        reader.seek(SeekFrom::Start(HEADER_LEN)).at(path)?;
        Ok(DocCursor { path: path.to_path_buf(), reader, table, next: 0 })
    }

    pub fn peek_id(&self) -> Option<u64> {
        self.table.get(self.next).map(|e| e.doc_id)
    }

    pub fn next_doc(&mut self) -> Result<Option<StoredDoc>> {
        let Some(entry) = self.table.get(self.next).copied() else { return Ok(None) };
        self.next += 1;
        let p = &self.path;
        let r = &mut self.reader;
        let url = read_string(r).at(p)?;
        let source_file = read_string(r).at(p)?;
        let row_index = read_varint(r).at(p)?;
        let text = read_string(r).at(p)?;
        Ok(Some(StoredDoc {
            doc_id: entry.doc_id,
            url,
            source_file,
            row_index,
            text,
            main_len: entry.main_len,
            exact_len: entry.exact_len,
        }))
    }
}
