//! CSV ingestion for metadata tables and Table-1-shaped coefficient output.
//!
//! Input tables have a leading row-name column (dataset id) and named numeric
//! columns. Empty cells and `nan` parse as missing; [`MissingPolicy`] decides
//! whether offending rows are dropped or mean-imputed.

use super::{CoefficientMatrix, LassoError, MetadataTable, SalientReport};
use ndarray::Array2;
use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    DropRow,
    MeanImpute,
}

/// A raw named table: row names plus a dense value matrix (NaN = missing).
#[derive(Debug, Clone)]
pub struct NamedTable {
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub values: Array2<f64>,
}

pub fn read_table(path: &Path) -> Result<NamedTable, LassoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| LassoError::Csv(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| LassoError::Csv(e.to_string()))?
        .clone();
    if headers.len() < 2 {
        return Err(LassoError::Csv(format!(
            "{}: need a row-name column plus data columns",
            path.display()
        )));
    }
    let col_names: Vec<String> = headers.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let mut row_names = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| LassoError::Csv(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(LassoError::Csv(format!(
                "{}: row '{}' has {} fields, expected {}",
                path.display(),
                record.get(0).unwrap_or(""),
                record.len(),
                headers.len()
            )));
        }
        row_names.push(record[0].trim().to_string());
        let mut row = Vec::with_capacity(col_names.len());
        for field in record.iter().skip(1) {
            let field = field.trim();
            if field.is_empty() || field.eq_ignore_ascii_case("nan") {
                row.push(f64::NAN);
            } else {
                row.push(field.parse().map_err(|_| {
                    LassoError::Csv(format!("{}: bad number '{field}'", path.display()))
                })?);
            }
        }
        rows.push(row);
    }
    let values = Array2::from_shape_vec(
        (rows.len(), col_names.len()),
        rows.into_iter().flatten().collect(),
    )
    .map_err(|e| LassoError::Csv(e.to_string()))?;
    Ok(NamedTable {
        row_names,
        col_names,
        values,
    })
}

/// Record of what the missing-value policy did.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MissingReport {
    pub dropped_rows: Vec<String>,
    /// `(row, table, column)` cells that were mean-imputed.
    pub imputed_cells: Vec<(String, String, String)>,
}

/// Join a properties table and a performance table on row names.
///
/// Rows present in only one table are an error (offenders listed). Missing
/// cells follow `policy`.
pub fn build_metadata_table(
    properties: &NamedTable,
    performance: &NamedTable,
    policy: MissingPolicy,
) -> Result<(MetadataTable, MissingReport), LassoError> {
    let mut offenders: Vec<String> = Vec::new();
    let perf_index: std::collections::HashMap<&str, usize> = performance
        .row_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let prop_index: std::collections::HashMap<&str, usize> = properties
        .row_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    for name in &properties.row_names {
        if !perf_index.contains_key(name.as_str()) {
            offenders.push(name.clone());
        }
    }
    for name in &performance.row_names {
        if !prop_index.contains_key(name.as_str()) {
            offenders.push(name.clone());
        }
    }
    if !offenders.is_empty() {
        offenders.sort();
        return Err(LassoError::RowMismatch(offenders));
    }

    let mut report = MissingReport::default();
    let p = properties.col_names.len();
    let q = performance.col_names.len();
    let mut x_rows: Vec<Vec<f64>> = Vec::new();
    let mut y_rows: Vec<Vec<f64>> = Vec::new();
    let mut kept_names: Vec<String> = Vec::new();
    for (i, name) in properties.row_names.iter().enumerate() {
        let j = perf_index[name.as_str()];
        let xr: Vec<f64> = (0..p).map(|k| properties.values[[i, k]]).collect();
        let yr: Vec<f64> = (0..q).map(|k| performance.values[[j, k]]).collect();
        let has_missing = xr.iter().chain(yr.iter()).any(|v| v.is_nan());
        if has_missing && policy == MissingPolicy::DropRow {
            report.dropped_rows.push(name.clone());
            continue;
        }
        kept_names.push(name.clone());
        x_rows.push(xr);
        y_rows.push(yr);
    }
    if policy == MissingPolicy::MeanImpute {
        impute_columns(&mut x_rows, &properties.col_names, &kept_names, "properties", &mut report);
        impute_columns(&mut y_rows, &performance.col_names, &kept_names, "performance", &mut report);
    }
    let n = kept_names.len();
    let x = Array2::from_shape_vec((n, p), x_rows.into_iter().flatten().collect())
        .map_err(|e| LassoError::Shape(e.to_string()))?;
    let y = Array2::from_shape_vec((n, q), y_rows.into_iter().flatten().collect())
        .map_err(|e| LassoError::Shape(e.to_string()))?;
    let table = MetadataTable::new(
        x,
        y,
        kept_names,
        properties.col_names.clone(),
        performance.col_names.clone(),
    )?;
    Ok((table, report))
}

fn impute_columns(
    rows: &mut [Vec<f64>],
    col_names: &[String],
    row_names: &[String],
    table: &str,
    report: &mut MissingReport,
) {
    let p = col_names.len();
    for j in 0..p {
        let mut sum = 0.0;
        let mut count = 0usize;
        for row in rows.iter() {
            if row[j].is_finite() {
                sum += row[j];
                count += 1;
            }
        }
        let mean = if count > 0 { sum / count as f64 } else { 0.0 };
        for (i, row) in rows.iter_mut().enumerate() {
            if row[j].is_nan() {
                row[j] = mean;
                report.imputed_cells.push((
                    row_names[i].clone(),
                    table.to_string(),
                    col_names[j].clone(),
                ));
            }
        }
    }
}

/// Write coefficients as a properties-by-models CSV (row names first column).
pub fn write_coefficients_csv(
    cm: &CoefficientMatrix,
    x_names: &[String],
    y_names: &[String],
    path: &Path,
) -> Result<(), LassoError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "property")?;
    for name in y_names {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for (i, name) in x_names.iter().enumerate() {
        write!(w, "{name}")?;
        for j in 0..y_names.len() {
            write!(w, ",{}", cm.b[[i, j]])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_salient_csv(report: &SalientReport, path: &Path) -> Result<(), LassoError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "property,salience,nonzero,signs")?;
    for row in &report.rows {
        let signs: String = row.signs.iter().collect();
        writeln!(
            w,
            "{},{:?},{},{}",
            row.property, row.salience, row.nonzero, signs
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(content: &str, name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("graphmeta-msglasso-io");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}-{}", std::process::id(), name));
        fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn join_on_row_names() {
        let props = read_table(&tmp(
            "dataset,a,b\nd1,1,2\nd2,3,4\nd3,5,6\n",
            "p.csv",
        ))
        .unwrap();
        let perf = read_table(&tmp(
            "dataset,m1\nd3,0.3\nd1,0.1\nd2,0.2\n",
            "y.csv",
        ))
        .unwrap();
        let (t, report) = build_metadata_table(&props, &perf, MissingPolicy::DropRow).unwrap();
        assert_eq!(t.row_names, vec!["d1", "d2", "d3"]);
        assert_eq!(t.y[[2, 0]], 0.3);
        assert!(report.dropped_rows.is_empty());
    }

    #[test]
    fn mismatched_rows_list_offenders() {
        let props = read_table(&tmp("dataset,a\nd1,1\nd2,2\n", "p2.csv")).unwrap();
        let perf = read_table(&tmp("dataset,m1\nd1,0.5\nd9,0.9\n", "y2.csv")).unwrap();
        match build_metadata_table(&props, &perf, MissingPolicy::DropRow) {
            Err(LassoError::RowMismatch(names)) => assert_eq!(names, vec!["d2", "d9"]),
            other => panic!("expected RowMismatch, got {other:?}"),
        }
    }

    #[test]
    fn missing_cells_drop_or_impute() {
        let props = read_table(&tmp(
            "dataset,a\nd1,1\nd2,\nd3,3\n",
            "p3.csv",
        ))
        .unwrap();
        let perf = read_table(&tmp(
            "dataset,m1\nd1,0.1\nd2,0.2\nd3,0.3\n",
            "y3.csv",
        ))
        .unwrap();
        let (t, report) = build_metadata_table(&props, &perf, MissingPolicy::DropRow).unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(report.dropped_rows, vec!["d2"]);

        let (t2, report2) =
            build_metadata_table(&props, &perf, MissingPolicy::MeanImpute).unwrap();
        assert_eq!(t2.n(), 3);
        assert_eq!(t2.x[[1, 0]], 2.0);
        assert_eq!(report2.imputed_cells.len(), 1);
    }
}
