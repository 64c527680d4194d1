use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use super::schema::DatasetSchema;
use super::{Dataset, FlowRecord};
use crate::error::{Error, Result};

fn parse_value(raw: &[u8], line: u64, column: &str) -> Result<f64> {
    let text = String::from_utf8_lossy(raw);
    let t = text.trim();
    match t {
        "Infinity" | "+Infinity" | "inf" | "+inf" => Ok(f64::INFINITY),
        "-Infinity" | "-inf" => Ok(f64::NEG_INFINITY),
        "NaN" | "nan" => Ok(f64::NAN),
        "" => Err(Error::InvalidValue {
            line,
            column: column.to_string(),
            value: String::new(),
        }),
        _ => t.parse::<f64>().map_err(|_| Error::InvalidValue {
            line,
            column: column.to_string(),
            value: t.to_string(),
        }),
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v == f64::INFINITY {
        "Infinity".into()
    } else if v == f64::NEG_INFINITY {
        "-Infinity".into()
    } else {
        v.to_string()
    }
}

/// Trimmed header names; repeated names get `.1`, `.2`, ... suffixes.
fn read_header(raw: &csv::ByteRecord) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(raw.len());
    for field in raw {
        let base = String::from_utf8_lossy(field).trim().to_string();
        let mut name = base.clone();
        let mut k = 1;
        while names.contains(&name) {
            name = format!("{base}.{k}");
            k += 1;
        }
        names.push(name);
    }
    names
}

fn is_blank(rec: &csv::ByteRecord) -> bool {
    rec.iter().all(|f| f.iter().all(u8::is_ascii_whitespace))
}

pub fn load_csv(path: impl AsRef<Path>, schema_hint: Option<&DatasetSchema>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut d = load_csv_reader(io::BufReader::new(file), schema_hint)?;
    d.provenance.insert(0, format!("load: {}", path.display()));
    Ok(d)
}

/// Loads a labelled CSV. Without a hint every column but the last is a
/// numeric feature and the last is the label.
pub fn load_csv_reader<R: Read>(reader: R, schema_hint: Option<&DatasetSchema>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rec = csv::ByteRecord::new();
    if !rdr.read_byte_record(&mut rec)? {
        return Err(Error::Header("file is empty".into()));
    }
    let header = read_header(&rec);
    if header.len() < 2 {
        return Err(Error::Header("need at least one feature and a label column".into()));
    }

    let (schema, label_col, columns) = match schema_hint {
        Some(hint) => {
            let label_col = header
                .iter()
                .position(|h| *h == hint.label_column)
                .ok_or_else(|| Error::Header(format!("missing label column {:?}", hint.label_column)))?;
            let columns = hint
                .feature_names
                .iter()
                .map(|n| {
                    header
                        .iter()
                        .position(|h| h == n)
                        .ok_or_else(|| Error::Header(format!("missing feature column {n:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            (hint.clone(), label_col, columns)
        }
        None => {
            let label_col = header.len() - 1;
            let schema =
                DatasetSchema::numeric(header[..label_col].to_vec(), header[label_col].clone())?;
            (schema, label_col, (0..label_col).collect())
        }
    };

    let mut records = Vec::new();
    let mut blanks = 0usize;
    while rdr.read_byte_record(&mut rec)? {
        let line = rec.position().map_or(0, |p| p.line());
        if is_blank(&rec) {
            blanks += 1;
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::Arity {
                line,
                expected: header.len(),
                found: rec.len(),
            });
        }
        let raw_label = String::from_utf8_lossy(&rec[label_col]);
        let fine_label = schema
            .label_index(raw_label.trim())
            .ok_or_else(|| Error::UnknownLabel {
                line,
                value: raw_label.trim().to_string(),
            })?;
        let values = columns
            .iter()
            .zip(&schema.feature_names)
            .map(|(&c, name)| parse_value(&rec[c], line, name))
            .collect::<Result<Vec<_>>>()?;
        records.push(FlowRecord { values, fine_label });
    }
    let mut d = Dataset::new(schema, records)?;
    if blanks > 0 {
        d.note(format!("load: skipped {blanks} blank rows"));
    }
    Ok(d)
}

/// Writes the dataset with its active label view in the label column.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let mut header: Vec<&str> = d.schema.feature_names.iter().map(String::as_str).collect();
    header.push(&d.schema.label_column);
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for r in &d.records {
        row.clear();
        row.extend(r.values.iter().map(|&v| fmt_value(v)));
        row.push(d.label_name(r).to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn write_provenance<W: Write>(d: &Dataset, mut writer: W) -> Result<()> {
    for line in &d.provenance {
        writeln!(writer, "{line}").map_err(|e| Error::io("<provenance>", e))?;
    }
    Ok(())
}

/// Raw rows of a possibly unlabeled CSV with the requested features parsed.
#[derive(Debug)]
pub struct FeatureTable {
    pub header: Vec<String>,
    pub raw: Vec<Vec<String>>,
    /// Per row: the parsed feature vector, or a diagnostic.
    pub values: Vec<std::result::Result<Vec<f64>, String>>,
}

pub fn read_feature_table(path: impl AsRef<Path>, feature_names: &[String]) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(io::BufReader::new(file));
    let mut rec = csv::ByteRecord::new();
    if !rdr.read_byte_record(&mut rec)? {
        return Err(Error::Header("file is empty".into()));
    }
    let header = read_header(&rec);
    let columns = feature_names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Header(format!("missing feature column {n:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = FeatureTable {
        header,
        raw: Vec::new(),
        values: Vec::new(),
    };
    while rdr.read_byte_record(&mut rec)? {
        let line = rec.position().map_or(0, |p| p.line());
        if is_blank(&rec) {
            continue;
        }
        let raw: Vec<String> = rec.iter().map(|f| String::from_utf8_lossy(f).into_owned()).collect();
        let parsed = if rec.len() != table.header.len() {
            Err(format!(
                "line {line}: expected {} fields, found {}",
                table.header.len(),
                rec.len()
            ))
        } else {
            columns
                .iter()
                .zip(feature_names)
                .map(|(&c, name)| parse_value(&rec[c], line, name))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())
        };
        table.raw.push(raw);
        table.values.push(parsed);
    }
    Ok(table)
}
