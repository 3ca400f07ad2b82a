//! CSV ingestion.
//!
//! Expected header: `window,label,f0,...,f{d-1}`. Rows whose window, label, or
//! feature cells are missing or unparsable are dropped (missing-value
//! removal); a cell that parses but falls outside its domain (a label other
//! than 0/1, a window index below 1) is a hard error naming the row.

use std::path::Path;

use crate::data::{ChronologicalStream, Sample, Window};
use crate::error::{Error, Result};

pub fn ingest_csv(path: impl AsRef<Path>, init_count: usize) -> Result<ChronologicalStream> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path.as_ref())?;

    let headers = reader.headers()?.clone();
    let window_col = headers
        .iter()
        .position(|h| h == "window")
        .ok_or_else(|| Error::config("csv is missing a 'window' column"))?;
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| Error::config("csv is missing a 'label' column"))?;
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != window_col && i != label_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::config("csv has no feature columns"));
    }

    let mut by_window: Vec<(usize, Vec<Sample>)> = Vec::new();
    let mut next_id: u64 = 0;
    let mut dropped = 0usize;

    for (row_idx, record) in reader.records().enumerate() {
        // 1-based data row number for error messages (header is row 0).
        let row_no = row_idx + 1;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Ingest {
                row: row_no,
                reason: format!(
                    "expected {} columns, found {}",
                    headers.len(),
                    record.len()
                ),
            });
        }

        let window_raw = record.get(window_col).unwrap_or("").trim();
        let label_raw = record.get(label_col).unwrap_or("").trim();

        let window_idx = match window_raw.parse::<i64>() {
            Ok(v) if v >= 1 => v as usize,
            Ok(v) => {
                return Err(Error::Ingest {
                    row: row_no,
                    reason: format!("window index {v} is out of domain (must be >= 1)"),
                })
            }
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        let label = match label_raw.parse::<i64>() {
            Ok(0) => 0u8,
            Ok(1) => 1u8,
            Ok(v) => {
                return Err(Error::Ingest {
                    row: row_no,
                    reason: format!("unknown label value {v:?} (expected 0 or 1)"),
                })
            }
            Err(_) => {
                dropped += 1;
                continue;
            }
        };

        let mut features = Vec::with_capacity(feature_cols.len());
        let mut bad_cell = false;
        for &c in &feature_cols {
            match record.get(c).unwrap_or("").trim().parse::<f64>() {
                Ok(v) if v.is_finite() => features.push(v),
                _ => {
                    bad_cell = true;
                    break;
                }
            }
        }
        if bad_cell {
            dropped += 1;
            continue;
        }

        let sample = Sample {
            id: next_id,
            features,
            label,
        };
        next_id += 1;
        match by_window.iter_mut().find(|(w, _)| *w == window_idx) {
            Some((_, samples)) => samples.push(sample),
            None => by_window.push((window_idx, vec![sample])),
        }
    }

    if dropped > 0 {
        log::warn!("ingest: dropped {dropped} rows with missing or unparsable values");
    }

    by_window.sort_by_key(|(w, _)| *w);
    let windows = by_window
        .into_iter()
        .map(|(index, samples)| Window { index, samples })
        .collect();
    ChronologicalStream::new(windows, init_count)
}
