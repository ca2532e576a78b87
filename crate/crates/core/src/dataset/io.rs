//! Reading and writing labelled flow CSVs.
//!
//! Real exports are messy: headers carry stray spaces, numeric cells hold
//! `NaN`/`Infinity` tokens or nothing at all, address columns are dotted
//! quads, and some label cells contain non-UTF-8 bytes. The loader absorbs
//! all of that and produces rows of plain `f64` features; values it cannot
//! interpret become NaN so the cleaning pass can drop them later.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::net::Ipv4Addr;
use std::path::Path;

use crate::dataset::schema::{FeatureSchema, LABEL_HEADERS};
use crate::dataset::{FlowDataset, FlowRecord};
use crate::error::{Error, Result};

/// Loads a labelled flow CSV, resolving columns through the schema.
///
/// Every schema feature must match some header (several features may share
/// one column when the table aliases them together). Rows keep the schema's
/// feature order regardless of the file's column order. Cells that parse as
/// neither a number nor an IPv4 address are mapped to NaN and counted in a
/// single warning per file.
pub fn load_flow_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<FlowDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(BufReader::new(file));

    // Headers are decoded lossily: some exports contain latin-1 bytes.
    let headers: Vec<String> = reader
        .byte_headers()?
        .iter()
        .map(|h| String::from_utf8_lossy(h).into_owned())
        .collect();

    let mut columns = Vec::with_capacity(schema.len());
    for def in schema.features() {
        let idx = headers
            .iter()
            .position(|h| def.matches_header(h))
            .ok_or_else(|| Error::MissingColumn {
                column: def.name().to_string(),
            })?;
        columns.push(idx);
    }
    let label_col = headers
        .iter()
        .position(|h| LABEL_HEADERS.contains(&h.trim().to_lowercase().as_str()))
        .ok_or_else(|| Error::MissingLabelColumn {
            column: "label".into(),
        })?;

    let mut records = Vec::new();
    let mut label_vocab: Vec<String> = Vec::new();
    let mut garbage_cells = 0usize;
    let mut record = csv::ByteRecord::new();
    while reader.read_byte_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(Error::RowArity {
                line,
                expected: headers.len(),
                found: record.len(),
            });
        }

        let mut features = Vec::with_capacity(schema.len());
        for &col in &columns {
            let cell = String::from_utf8_lossy(&record[col]);
            match parse_feature_value(cell.trim()) {
                Some(v) => features.push(v),
                None => {
                    garbage_cells += 1;
                    features.push(f64::NAN);
                }
            }
        }

        let label = String::from_utf8_lossy(&record[label_col]).trim().to_string();
        if label.is_empty() {
            return Err(Error::Schema(format!("row {line}: empty label")));
        }
        let label_idx = match label_vocab.iter().position(|l| *l == label) {
            Some(i) => i,
            None => {
                label_vocab.push(label);
                label_vocab.len() - 1
            }
        };
        records.push(FlowRecord {
            features,
            label: label_idx,
        });
    }

    if garbage_cells > 0 {
        log::warn!(
            "{}: {garbage_cells} unparseable feature cells mapped to NaN",
            path.display()
        );
    }
    if records.is_empty() {
        return Err(Error::empty(format!("{} has no data rows", path.display())));
    }
    Ok(FlowDataset {
        feature_names: schema.names(),
        records,
        label_vocab,
    })
}

/// Loads a labelled CSV whose columns may not match the standard flow
/// schema. The standard schema is tried first, so full flow exports get
/// alias resolution and canonical names; any other header falls back to
/// a schema inferred from the header itself, one feature per column.
/// This makes files written by [`save_flow_csv`] loadable regardless of
/// which columns survived preparation.
pub fn load_flow_csv_auto(path: impl AsRef<Path>) -> Result<FlowDataset> {
    let path = path.as_ref();
    match load_flow_csv(path, FeatureSchema::standard()) {
        Err(Error::MissingColumn { .. }) => {
            let schema = FeatureSchema::from_header(&read_header(path)?)?;
            log::info!(
                "{}: columns do not match the standard flow schema, using the file's own header",
                path.display()
            );
            load_flow_csv(path, &schema)
        }
        other => other,
    }
}

fn read_header(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(BufReader::new(file));
    Ok(reader
        .byte_headers()?
        .iter()
        .map(|h| String::from_utf8_lossy(h).into_owned())
        .collect())
}

/// Writes a dataset as CSV with canonical feature names plus a final
/// `Label` column. Values round-trip through `load_flow_csv`.
pub fn save_flow_csv(dataset: &FlowDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));

    let mut header: Vec<&str> = dataset.feature_names.iter().map(String::as_str).collect();
    header.push("Label");
    writer.write_record(&header)?;

    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for record in &dataset.records {
        row.clear();
        row.extend(record.features.iter().map(|v| v.to_string()));
        row.push(dataset.label_vocab[record.label].clone());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Interprets one feature cell. Empty cells and `NaN`/`Infinity` tokens are
/// legal missing-value markers; dotted quads become their 32-bit integer
/// value. Returns None for cells that are none of those.
fn parse_feature_value(cell: &str) -> Option<f64> {
    if cell.is_empty() {
        return Some(f64::NAN);
    }
    if let Ok(v) = cell.parse::<f64>() {
        return Some(v);
    }
    if let Ok(ip) = cell.parse::<Ipv4Addr>() {
        return Some(f64::from(u32::from(ip)));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tiny_schema() -> FeatureSchema {
        FeatureSchema::from_csv_str(
            "name,family,aliases\n\
             source_ip,coarse_grained,Source IP\n\
             flow_duration,time_based,Flow Duration\n\
             flow_bytes_per_s,flow_based,Flow Bytes/s|Flow Byts/s\n",
        )
        .unwrap()
    }

    fn write_temp(contents: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents).unwrap();
        f
    }

    #[test]
    fn loads_aliased_headers_and_sentinel_values() {
        let csv = b"Source IP, Flow Duration,Flow Byts/s,Label\n\
                    192.168.0.1,120,NaN,BENIGN\n\
                    10.0.0.2,7,Infinity,DDoS\n\
                    bad-cell,3,1.5,DDoS\n";
        let file = write_temp(csv);
        let ds = load_flow_csv(file.path(), &tiny_schema()).unwrap();
        assert_eq!(ds.records.len(), 3);
        assert_eq!(ds.feature_names, ["source_ip", "flow_duration", "flow_bytes_per_s"]);
        assert_eq!(ds.label_vocab, ["BENIGN", "DDoS"]);

        let r0 = &ds.records[0];
        assert_eq!(r0.features[0], f64::from(u32::from(Ipv4Addr::new(192, 168, 0, 1))));
        assert_eq!(r0.features[1], 120.0);
        assert!(r0.features[2].is_nan());
        assert_eq!(r0.label, 0);

        assert_eq!(ds.records[1].features[2], f64::INFINITY);
        assert!(ds.records[2].features[0].is_nan(), "garbage cell becomes NaN");
    }

    #[test]
    fn reports_missing_columns_and_ragged_rows() {
        let schema = tiny_schema();
        let missing = write_temp(b"Source IP,Flow Duration,Label\n1.2.3.4,1,x\n");
        match load_flow_csv(missing.path(), &schema) {
            Err(Error::MissingColumn { column }) => assert_eq!(column, "flow_bytes_per_s"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }

        let ragged = write_temp(
            b"Source IP,Flow Duration,Flow Bytes/s,Label\n1.2.3.4,1,2,x\n1.2.3.4,1,2\n",
        );
        match load_flow_csv(ragged.path(), &schema) {
            Err(Error::RowArity { line, expected, found }) => {
                assert_eq!((line, expected, found), (3, 4, 3));
            }
            other => panic!("expected RowArity, got {other:?}"),
        }

        let unlabelled = write_temp(b"Source IP,Flow Duration,Flow Bytes/s\n1.2.3.4,1,2\n");
        assert!(matches!(
            load_flow_csv(unlabelled.path(), &schema),
            Err(Error::MissingLabelColumn { .. })
        ));
    }

    #[test]
    fn non_utf8_label_bytes_survive_lossily() {
        // 0x96 is a latin-1 dash; some exports embed it in attack labels.
        let csv = b"Source IP,Flow Duration,Flow Bytes/s,Label\n1.2.3.4,1,2,Web \x96 Attack\n";
        let file = write_temp(csv);
        let ds = load_flow_csv(file.path(), &tiny_schema()).unwrap();
        assert_eq!(ds.label_vocab.len(), 1);
        assert!(ds.label_vocab[0].starts_with("Web "));
    }

    #[test]
    fn auto_loader_accepts_non_standard_columns() {
        // A post-preparation export: arbitrary names, no address columns.
        let csv = b"f0,f1,f2,Label\n0.25,1.5,3.0,class0\n0.75,0.5,2.0,class1\n";
        let file = write_temp(csv);
        let ds = load_flow_csv_auto(file.path()).unwrap();
        assert_eq!(ds.feature_names, ["f0", "f1", "f2"]);
        assert_eq!(ds.label_vocab, ["class0", "class1"]);
        assert_eq!(ds.records[0].features, [0.25, 1.5, 3.0]);

        // Files without any label column fail the same way as the strict loader.
        let unlabelled = write_temp(b"f0,f1\n1,2\n");
        assert!(matches!(
            load_flow_csv_auto(unlabelled.path()),
            Err(Error::MissingLabelColumn { .. })
        ));
    }

    #[test]
    fn save_then_load_round_trips() {
        let schema = tiny_schema();
        let src = write_temp(
            b"Source IP,Flow Duration,Flow Bytes/s,Label\n\
              1.2.3.4,120,0.5,BENIGN\n\
              5.6.7.8,7,3e-9,DDoS\n",
        );
        let ds = load_flow_csv(src.path(), &schema).unwrap();

        let out = tempfile::NamedTempFile::new().unwrap();
        save_flow_csv(&ds, out.path()).unwrap();
        let back = load_flow_csv(out.path(), &schema).unwrap();
        assert_eq!(back.records.len(), ds.records.len());
        for (a, b) in ds.records.iter().zip(&back.records) {
            assert_eq!(a.features, b.features);
            assert_eq!(a.label, b.label);
        }
        assert_eq!(back.label_vocab, ds.label_vocab);
    }
}
