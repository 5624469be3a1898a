//! CSV-backed labeled datasets: 39 attribute columns plus `action`.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use super::features::{FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::fortattack::N_ACTIONS;

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub policy: String,
    pub episodes: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub rows: Vec<(FeatureVector, u8)>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
}

pub fn write_csv<W: Write>(w: W, data: &LabeledDataset) -> Result<(), DatasetError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.push("action");
    out.write_record(&header)?;
    for (f, a) in &data.rows {
        let mut rec: Vec<String> = f.0.iter().map(|v| format!("{v}")).collect();
        rec.push(a.to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R, provenance: Provenance) -> Result<LabeledDataset, DatasetError> {
    let mut rdr = csv::Reader::from_reader(r);
    {
        let headers = rdr.headers()?;
        if headers.len() != N_FEATURES + 1 {
            return Err(DatasetError::Malformed {
                row: 0,
                message: format!("expected {} columns, found {}", N_FEATURES + 1, headers.len()),
            });
        }
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            if &headers[i] != *name {
                return Err(DatasetError::Malformed {
                    row: 0,
                    message: format!("column {i} named `{}`, expected `{name}`", &headers[i]),
                });
            }
        }
    }
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut f = [0.0f64; N_FEATURES];
        for i in 0..N_FEATURES {
            let v: f64 = rec[i].parse().map_err(|_| DatasetError::Malformed {
                row: idx + 1,
                message: format!("bad float `{}` in column {i}", &rec[i]),
            })?;
            if !v.is_finite() {
                return Err(DatasetError::Malformed { row: idx + 1, message: "non-finite feature".into() });
            }
            f[i] = v;
        }
        let action: u8 = rec[N_FEATURES].parse().map_err(|_| DatasetError::Malformed {
            row: idx + 1,
            message: format!("bad action `{}`", &rec[N_FEATURES]),
        })?;
        if action as usize >= N_ACTIONS {
            return Err(DatasetError::Malformed {
                row: idx + 1,
                message: format!("action id {action} outside the action set"),
            });
        }
        rows.push((FeatureVector(f), action));
    }
    Ok(LabeledDataset { rows, provenance })
}

pub fn read_csv_path(path: &Path) -> Result<LabeledDataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    let provenance = Provenance {
        policy: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        episodes: 0,
        seed: 0,
    };
    read_csv(file, provenance)
}
