//! Snapshot CSV schema, shared by the generators and the analysis commands.
//!
//! Main file: UTF-8, header row, column 0 is the row coordinate, columns
//! 1..=m are snapshot values. Sibling `<basename>.meta.csv` holds one row per
//! snapshot column: scenario-input components under a `u0,u1,...` header, or
//! time stamps under a `t` header. Values are written with 17 significant
//! digits and round-trip exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use svd_core::{AggregationKind, ColumnMeta, SnapshotMatrix};

use crate::error::{CasegenError, Result};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn meta_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("snapshot");
    path.with_file_name(format!("{stem}.meta.csv"))
}

pub fn write_snapshot_csv(path: &Path, snap: &SnapshotMatrix) -> Result<()> {
    let (n, m) = snap.values().dim();
    let mut text = String::new();
    let header: Vec<String> = std::iter::once("y".to_string())
        .chain((0..m).map(|j| format!("c{j}")))
        .collect();
    let _ = writeln!(text, "{}", header.join(","));
    for i in 0..n {
        let mut row = Vec::with_capacity(m + 1);
        row.push(fmt(snap.row_coords()[i]));
        for j in 0..m {
            row.push(fmt(snap.values()[[i, j]]));
        }
        let _ = writeln!(text, "{}", row.join(","));
    }
    std::fs::write(path, text)?;

    let mut meta = String::new();
    match snap.col_meta() {
        ColumnMeta::Scenarios(u) => {
            let header: Vec<String> = (0..u.ncols()).map(|k| format!("u{k}")).collect();
            let _ = writeln!(meta, "{}", header.join(","));
            for row in u.rows() {
                let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
                let _ = writeln!(meta, "{}", cells.join(","));
            }
        }
        ColumnMeta::Times(t) => {
            let _ = writeln!(meta, "t");
            for &v in t {
                let _ = writeln!(meta, "{}", fmt(v));
            }
        }
    }
    std::fs::write(meta_path(path), meta)?;
    Ok(())
}

pub fn load_snapshot_csv(path: &Path) -> Result<SnapshotMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CasegenError::ParseError { line: 1, message: "empty file".into() })?;
    let width = header.split(',').count();
    if width < 2 {
        return Err(CasegenError::ParseError {
            line: 1,
            message: "header needs a row coordinate and at least one column".into(),
        });
    }
    let m = width - 1;
    let mut coords = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(CasegenError::ParseError {
                line: line_no,
                message: format!("expected {width} cells, found {}", cells.len()),
            });
        }
        let mut parsed = Vec::with_capacity(width);
        for cell in cells {
            let v: f64 = cell.trim().parse().map_err(|_| CasegenError::ParseError {
                line: line_no,
                message: format!("bad number '{cell}'"),
            })?;
            parsed.push(v);
        }
        coords.push(parsed[0]);
        rows.push(parsed[1..].to_vec());
    }
    if rows.is_empty() {
        return Err(CasegenError::ParseError { line: 1, message: "no data rows".into() });
    }
    let n = rows.len();
    let mut values = Array2::zeros((n, m));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            values[[i, j]] = v;
        }
    }

    let mpath = meta_path(path);
    if !mpath.exists() {
        return Err(CasegenError::MetaMissing(mpath.display().to_string()));
    }
    let meta_text = std::fs::read_to_string(&mpath)?;
    let mut meta_lines = meta_text.lines().enumerate();
    let (_, meta_header) = meta_lines
        .next()
        .ok_or_else(|| CasegenError::ParseError { line: 1, message: "empty meta file".into() })?;
    let is_time = meta_header.trim() == "t";
    let mut meta_rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in meta_lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        meta_rows.push(parsed.map_err(|_| CasegenError::ParseError {
            line: line_no,
            message: format!("bad meta row '{line}'"),
        })?);
    }
    if meta_rows.len() != m {
        return Err(CasegenError::ParseError {
            line: meta_rows.len() + 1,
            message: format!("{} meta rows for {m} columns", meta_rows.len()),
        });
    }
    let (kind, col_meta) = if is_time {
        let times: Vec<f64> = meta_rows.iter().map(|r| r[0]).collect();
        (AggregationKind::TimeAggregated, ColumnMeta::Times(Array1::from_vec(times)))
    } else {
        let dim = meta_rows[0].len();
        if meta_rows.iter().any(|r| r.len() != dim) {
            return Err(CasegenError::ParseError {
                line: 2,
                message: "scenario rows have mixed dimensionality".into(),
            });
        }
        let mut u = Array2::zeros((m, dim));
        for (j, row) in meta_rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                u[[j, k]] = v;
            }
        }
        (AggregationKind::ScenarioAggregated, ColumnMeta::Scenarios(u))
    };
    Ok(SnapshotMatrix::new(values, kind, Array1::from_vec(coords), col_meta)?)
}
