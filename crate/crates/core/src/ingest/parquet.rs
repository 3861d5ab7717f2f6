use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use arrow_array::cast::AsArray;
use arrow_array::{Array, RecordBatch, StringArray};
use arrow_schema::{DataType, Field as ArrowField, Schema};
use parquet::arrow::arrow_reader::{ParquetRecordBatchReader, ParquetRecordBatchReaderBuilder};
use parquet::arrow::{ArrowWriter, ProjectionMask};
use parquet::basic::Compression;
use parquet::file::properties::WriterProperties;

use crate::error::{Error, IoContext, Result};
use crate::index::DocumentRecord;

const BATCH_ROWS: usize = 1024;

/// Row-order iterator over the `text`/`url` columns of one parquet file.
/// Holds at most one record batch of decoded rows at a time.
pub struct ParquetDocs {
    path: PathBuf,
    source: String,
    reader: ParquetRecordBatchReader,
    batch: Option<RecordBatch>,
    text_col: usize,
    url_col: Option<usize>,
    next_in_batch: usize,
    row_index: u64,
}

/// Opens `path` for streaming. Records carry `doc_id == 0`; the caller
/// assigns ids.
pub fn stream_parquet(path: &Path) -> Result<ParquetDocs> {
    let file = File::open(path).at(path)?;
    let builder = ParquetRecordBatchReaderBuilder::try_new(file).map_err(|e| Error::corrupt(path, e.to_string()))?;
    let schema = builder.schema().clone();
    let is_string = |dt: &DataType| matches!(dt, DataType::Utf8 | DataType::LargeUtf8 | DataType::Utf8View);
    let text_idx = schema
        .fields()
        .iter()
        .position(|f| f.name() == "text" && is_string(f.data_type()))
        .ok_or_else(|| Error::MissingTextColumn(path.to_path_buf()))?;
    let url_idx = schema.fields().iter().position(|f| f.name() == "url" && is_string(f.data_type()));

    let mut roots = vec![text_idx];
    roots.extend(url_idx);
    roots.sort_unstable();
    let mask = ProjectionMask::roots(builder.parquet_schema(), roots.iter().copied());
    let reader = builder
        .with_projection(mask)
        .with_batch_size(BATCH_ROWS)
        .build()
        .map_err(|e| Error::corrupt(path, e.to_string()))?;
    let col = |idx: usize| roots.iter().position(|&r| r == idx).unwrap();
    Ok(ParquetDocs {
        path: path.to_path_buf(),
        source: path.to_string_lossy().into_owned(),
        reader,
        batch: None,
        text_col: col(text_idx),
        url_col: url_idx.map(col),
        next_in_batch: 0,
        row_index: 0,
    })
}

fn string_at(array: &dyn Array, row: usize) -> Option<String> {
    if array.is_null(row) {
        return None;
    }
    let s = match array.data_type() {
        DataType::Utf8 => array.as_string::<i32>().value(row),
        DataType::LargeUtf8 => array.as_string::<i64>().value(row),
        DataType::Utf8View => array.as_string_view().value(row),
        _ => return None,
    };
    Some(s.to_owned())
}

impl Iterator for ParquetDocs {
    type Item = Result<DocumentRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(batch) = &self.batch {
                if self.next_in_batch < batch.num_rows() {
                    let row = self.next_in_batch;
                    self.next_in_batch += 1;
                    let text = string_at(batch.column(self.text_col).as_ref(), row).unwrap_or_default();
                    let url = self
                        .url_col
                        .and_then(|c| string_at(batch.column(c).as_ref(), row))
                        .unwrap_or_default();
                    let record = DocumentRecord {
                        doc_id: 0,
                        text,
                        url,
                        source_file: self.source.clone(),
                        row_index: self.row_index,
                    };
                    self.row_index += 1;
                    return Some(Ok(record));
                }
            }
            match self.reader.next()? {
                Ok(batch) => {
                    self.batch = Some(batch);
                    self.next_in_batch = 0;
                }
                Err(e) => return Some(Err(Error::corrupt(&self.path, e.to_string()))),
            }
        }
    }
}

/// Streams `(text, url)` rows into a snappy-compressed parquet file.
pub fn write_parquet<I, T, U>(path: &Path, rows: I, row_group_rows: usize) -> Result<u64>
where
    I: IntoIterator<Item = (T, Option<U>)>,
    T: AsRef<str>,
    U: AsRef<str>,
{
    let schema = Arc::new(Schema::new(vec![
        ArrowField::new("text", DataType::Utf8, false),
        ArrowField::new("url", DataType::Utf8, true),
    ]));
    let props = WriterProperties::builder()
        .set_compression(Compression::SNAPPY)
        .set_max_row_group_row_count(Some(row_group_rows.max(1)))
        .build();
    let file = File::create(path).at(path)?;
    let mut writer =
        ArrowWriter::try_new(file, schema.clone(), Some(props)).map_err(|e| Error::corrupt(path, e.to_string()))?;

    let mut written = 0u64;
    let mut texts: Vec<String> = Vec::new();
    let mut urls: Vec<Option<String>> = Vec::new();
    let mut flush = |texts: &mut Vec<String>, urls: &mut Vec<Option<String>>| -> Result<()> {
        if texts.is_empty() {
            return Ok(());
        }
        let batch = RecordBatch::try_new(
            schema.clone(),
            vec![
                Arc::new(StringArray::from_iter_values(texts.drain(..))),
                Arc::new(StringArray::from(std::mem::take(urls))),
            ],
        )
        .map_err(|e| Error::corrupt(path, e.to_string()))?;
        writer.write(&batch).map_err(|e| Error::corrupt(path, e.to_string()))
    };
    for (text, url) in rows {
        texts.push(text.as_ref().to_owned());
        urls.push(url.map(|u| u.as_ref().to_owned()));
        written += 1;
        if texts.len() == BATCH_ROWS {
            flush(&mut texts, &mut urls)?;
        }
    }
    flush(&mut texts, &mut urls)?;
    writer.close().map_err(|e| Error::corrupt(path, e.to_string()))?;
    Ok(written)
}

/// Writes a file with only a `text` column.
pub fn write_parquet_text_only<I, T>(path: &Path, rows: I) -> Result<u64>
where
    I: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let schema = Arc::new(Schema::new(vec![ArrowField::new("text", DataType::Utf8, false)]));
    let texts: Vec<String> = rows.into_iter().map(|t| t.as_ref().to_owned()).collect();
    let n = texts.len() as u64;
    let batch = RecordBatch::try_new(schema.clone(), vec![Arc::new(StringArray::from(texts))])
        .map_err(|e| Error::corrupt(path, e.to_string()))?;
    let file = File::create(path).at(path)?;
    let mut w = ArrowWriter::try_new(file, schema, None).map_err(|e| Error::corrupt(path, e.to_string()))?;
    w.write(&batch).map_err(|e| Error::corrupt(path, e.to_string()))?;
    w.close().map_err(|e| Error::corrupt(path, e.to_string()))?;
    Ok(n)
}
