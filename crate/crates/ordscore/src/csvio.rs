//! Typed CSV loading against a declared schema.
//!
//! Only the columns named in the schema are read; extra CSV columns are
//! ignored. Factor columns map labels to level codes in the declared order,
//! and every parse failure reports the offending data row.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ordscore_core::design::Column;

/// Declared type of one CSV column.
#[derive(Debug, Clone)]
pub enum ColumnKind {
    Numeric,
    /// Ordered factor with its level labels in increasing order.
    Factor { levels: Vec<String> },
}

/// One column the loader should extract.
#[derive(Debug, Clone)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn factor<S: Into<String>>(name: impl Into<String>, levels: Vec<S>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Factor {
                levels: levels.into_iter().map(Into::into).collect(),
            },
        }
    }
}

/// Load the schema's columns from a CSV file.
pub fn load_csv_path(path: &Path, schema: &[ColumnSchema]) -> Result<Vec<Column>> {
    let file =
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_csv_reader(file, schema).with_context(|| format!("while reading {}", path.display()))
}

/// Load the schema's columns from any CSV source.
pub fn load_csv_reader<R: Read>(reader: R, schema: &[ColumnSchema]) -> Result<Vec<Column>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().context("CSV has no header row")?.clone();
    let position = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("CSV is missing column '{name}'"))
    };

    struct Slot {
        index: usize,
        values: Vec<f64>,
        codes: Vec<usize>,
        level_map: Option<HashMap<String, usize>>,
    }
    let mut slots = Vec::with_capacity(schema.len());
    for cs in schema {
        let level_map = match &cs.kind {
            ColumnKind::Numeric => None,
            ColumnKind::Factor { levels } => Some(
                levels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.clone(), i))
                    .collect(),
            ),
        };
        slots.push(Slot {
            index: position(&cs.name)?,
            values: Vec::new(),
            codes: Vec::new(),
            level_map,
        });
    }

    let mut n = 0usize;
    for (row_num, record) in rdr.records().enumerate() {
        let record = record.with_context(|| format!("malformed CSV at data row {}", row_num + 1))?;
        for (cs, slot) in schema.iter().zip(&mut slots) {
            let raw = record.get(slot.index).with_context(|| {
                format!("data row {} is missing column '{}'", row_num + 1, cs.name)
            })?;
            match &slot.level_map {
                None => {
                    let v: f64 = raw.trim().parse().with_context(|| {
                        format!(
                            "column '{}', data row {}: '{raw}' is not numeric",
                            cs.name,
                            row_num + 1
                        )
                    })?;
                    slot.values.push(v);
                }
                Some(map) => {
                    let code = *map.get(raw.trim()).with_context(|| {
                        format!(
                            "column '{}', data row {}: label '{raw}' is not a declared level",
                            cs.name,
                            row_num + 1
                        )
                    })?;
                    slot.codes.push(code);
                }
            }
        }
        n += 1;
    }
    if n == 0 {
        bail!("CSV contains a header but no data rows");
    }

    let mut columns = Vec::with_capacity(schema.len());
    for (cs, slot) in schema.iter().zip(slots) {
        match &cs.kind {
            ColumnKind::Numeric => columns.push(Column::numeric(cs.name.clone(), slot.values)),
            ColumnKind::Factor { levels } => {
                columns.push(Column::factor(cs.name.clone(), levels.clone(), slot.codes))
            }
        }
    }
    Ok(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ordscore_core::design::ColumnData;

    const SAMPLE: &str = "g,x,extra\nlo,1.5,q\nhi,2.5,w\nlo,3.0,e\n";

    fn sample_schema() -> Vec<ColumnSchema> {
        vec![
            ColumnSchema::factor("g", vec!["lo", "hi"]),
            ColumnSchema::numeric("x"),
        ]
    }

    #[test]
    fn loads_typed_columns() {
        let cols = load_csv_reader(SAMPLE.as_bytes(), &sample_schema()).unwrap();
        assert_eq!(cols.len(), 2);
        let ColumnData::Factor { labels, codes } = &cols[0].data else {
            panic!("expected factor")
        };
        assert_eq!(labels, &["lo", "hi"]);
        assert_eq!(codes, &[0, 1, 0]);
        let ColumnData::Numeric(v) = &cols[1].data else {
            panic!("expected numeric")
        };
        assert_eq!(v, &[1.5, 2.5, 3.0]);
    }

    #[test]
    fn unknown_label_names_the_label_and_row() {
        let bad = "g,x\nlo,1\nmid,2\n";
        let err = load_csv_reader(bad.as_bytes(), &sample_schema()).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("'mid'"), "{msg}");
        assert!(msg.contains("row 2"), "{msg}");
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let bad = "g,x\nlo,1\nhi,abc\n";
        let err = load_csv_reader(bad.as_bytes(), &sample_schema()).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("'abc'") && msg.contains("row 2"), "{msg}");
    }

    #[test]
    fn missing_column_and_empty_input_rejected() {
        let err = load_csv_reader("x\n1\n".as_bytes(), &sample_schema()).unwrap_err();
        assert!(format!("{err:#}").contains("'g'"));
        assert!(load_csv_reader("g,x\n".as_bytes(), &sample_schema()).is_err());
        assert!(load_csv_reader("".as_bytes(), &sample_schema()).is_err());
    }
}
