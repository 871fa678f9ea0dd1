//! CSV ingestion and serialization.
//!
//! Files are UTF-8 CSV with a header row. The label cell format is:
//! single-label `"2"`, multi-label `"1,0,0,0,1,0,0,0,0"` (one 0/1 per
//! topic), multi-output `"2,0,1"` (one class index per topic). Rows that
//! fail validation are collected in a reject list instead of aborting the
//! whole ingest.

use std::path::Path;

use crate::corpus::{Corpus, LabeledExample, Labels, TaskKind, TaskSchema};
use crate::error::{Error, Result};

/// Maps the logical columns onto header names.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub id: String,
    pub text: String,
    pub labels: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            id: "id".into(),
            text: "text".into(),
            labels: "labels".into(),
        }
    }
}

/// A row that failed validation, with its 1-based data row number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    pub row: usize,
    pub reason: String,
}

fn parse_labels(cell: &str, schema: &TaskSchema) -> std::result::Result<Labels, String> {
    match schema.kind {
        TaskKind::SingleLabel { classes } => {
            let c: usize = cell
                .trim()
                .parse()
                .map_err(|_| format!("label '{cell}' is not an integer"))?;
            if c >= classes {
                return Err(format!("label {c} outside 0..{classes}"));
            }
            Ok(Labels::Single(c))
        }
        TaskKind::MultiLabel { topics } => {
            let bits: Vec<&str> = cell.split(',').map(str::trim).collect();
            if bits.len() != topics {
                return Err(format!("expected {topics} topic flags, got {}", bits.len()));
            }
            let mut v = Vec::with_capacity(topics);
            for b in bits {
                match b {
                    "0" => v.push(false),
                    "1" => v.push(true),
                    other => return Err(format!("topic flag '{other}' is not 0/1")),
                }
            }
            Ok(Labels::Multi(v))
        }
        TaskKind::MultiOutput { topics, classes } => {
            let parts: Vec<&str> = cell.split(',').map(str::trim).collect();
            if parts.len() != topics {
                return Err(format!(
                    "expected {topics} topic labels, got {}",
                    parts.len()
                ));
            }
            let mut v = Vec::with_capacity(topics);
            for p in parts {
                let c: usize = p
                    .parse()
                    .map_err(|_| format!("topic label '{p}' is not an integer"))?;
                if c >= classes {
                    return Err(format!("topic label {c} outside 0..{classes}"));
                }
                v.push(c);
            }
            Ok(Labels::PerTopic(v))
        }
    }
}

fn labels_cell(labels: &Labels) -> String {
    match labels {
        Labels::Single(c) => c.to_string(),
        Labels::Multi(v) => v
            .iter()
            .map(|&b| if b { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(","),
        Labels::PerTopic(v) => v
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(","),
    }
}

/// Reads a labeled CSV into a corpus plus a reject list.
///
/// Fails hard on a missing mapped column or an empty file; per-row problems
/// (bad labels, empty text) go to the reject list with their row numbers.
pub fn ingest_csv(
    path: &Path,
    schema: &TaskSchema,
    columns: &ColumnMap,
    delimiter: u8,
) -> Result<(Corpus, Vec<RejectedRow>)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_col = col(&columns.id)?;
    let text_col = col(&columns.text)?;
    let labels_col = col(&columns.labels)?;

    let mut examples = Vec::new();
    let mut rejects = Vec::new();
    let mut row = 0usize;
    for record in reader.records() {
        row += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rejects.push(RejectedRow {
                    row,
                    reason: format!("unparseable row: {e}"),
                });
                continue;
            }
        };
        let field = |i: usize| record.get(i).unwrap_or("");
        let text = field(text_col);
        if text.trim().is_empty() {
            rejects.push(RejectedRow {
                row,
                reason: "empty text".into(),
            });
            continue;
        }
        match parse_labels(field(labels_col), schema) {
            Ok(labels) => examples.push(LabeledExample {
                id: field(id_col).to_string(),
                text: text.to_string(),
                labels,
            }),
            Err(reason) => rejects.push(RejectedRow { row, reason }),
        }
    }
    if row == 0 {
        return Err(Error::EmptyFile(path.display().to_string()));
    }
    let corpus = Corpus::new(schema.clone(), examples)?;
    Ok((corpus, rejects))
}

/// Writes a corpus back to CSV in the documented cell format.
pub fn write_csv(corpus: &Corpus, path: &Path, delimiter: u8) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_path(path)?;
    writer.write_record(["id", "text", "labels"])?;
    for ex in corpus.examples() {
        writer.write_record([ex.id.as_str(), ex.text.as_str(), &labels_cell(&ex.labels)])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the reject list as a sibling `<input>.rejects.csv`; returns the
/// path when any row was rejected.
pub fn write_rejects(input: &Path, rejects: &[RejectedRow]) -> Result<Option<std::path::PathBuf>> {
    if rejects.is_empty() {
        return Ok(None);
    }
    let mut name = input.file_name().unwrap_or_default().to_os_string();
    name.push(".rejects.csv");
    let path = input.with_file_name(name);
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(["row", "reason"])?;
    for r in rejects {
        writer.write_record([r.row.to_string(), r.reason.clone()])?;
    }
    writer.flush()?;
    Ok(Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_row_single_label() {
        let f = write_tmp("id,text,labels\na,covid hoax,0\nb,vaccine works,1\nc,mask debate,2\n");
        let schema = TaskSchema::single_label(3);
        let (corpus, rejects) =
            ingest_csv(f.path(), &schema, &ColumnMap::default(), b',').unwrap();
        assert_eq!(corpus.len(), 3);
        assert!(rejects.is_empty());
        assert_eq!(corpus.examples()[2].labels, Labels::Single(2));
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let f = write_tmp("id,text,labels\na,alpha text,5\nb,beta text,1\n");
        let schema = TaskSchema::single_label(3);
        let (corpus, rejects) =
            ingest_csv(f.path(), &schema, &ColumnMap::default(), b',').unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(rejects.len(), 1);
        assert_eq!(rejects[0].row, 1);
        assert!(rejects[0].reason.contains("5"));
    }

    #[test]
    fn multi_label_bitstring_decodes() {
        let f = write_tmp("id,text,labels\na,niner topics,\"1,0,0,0,1,0,0,0,0\"\n");
        let schema = TaskSchema::multi_label(9);
        let (corpus, rejects) =
            ingest_csv(f.path(), &schema, &ColumnMap::default(), b',').unwrap();
        assert!(rejects.is_empty());
        let Labels::Multi(v) = &corpus.examples()[0].labels else {
            panic!("expected multi labels");
        };
        let active: Vec<usize> = v
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(active, vec![0, 4]);
    }

    #[test]
    fn missing_column_is_fatal() {
        let f = write_tmp("id,body,labels\na,some text,0\n");
        let schema = TaskSchema::single_label(2);
        let err = ingest_csv(f.path(), &schema, &ColumnMap::default(), b',').unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "text"));
    }

    #[test]
    fn empty_file_is_fatal() {
        let f = write_tmp("id,text,labels\n");
        let schema = TaskSchema::single_label(2);
        assert!(matches!(
            ingest_csv(f.path(), &schema, &ColumnMap::default(), b',').unwrap_err(),
            Error::EmptyFile(_)
        ));
    }

    #[test]
    fn roundtrip_is_identity_on_accepted_rows() {
        let f = write_tmp("id,text,labels\na,first text,0\nb,second text,1\nc,,1\n");
        let schema = TaskSchema::single_label(2);
        let (corpus, rejects) =
            ingest_csv(f.path(), &schema, &ColumnMap::default(), b',').unwrap();
        assert_eq!(rejects.len(), 1);
        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(&corpus, out.path(), b',').unwrap();
        let (again, r2) = ingest_csv(out.path(), &schema, &ColumnMap::default(), b',').unwrap();
        assert!(r2.is_empty());
        assert_eq!(corpus, again);
    }
}
