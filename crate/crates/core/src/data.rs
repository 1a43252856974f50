//! Dataset loading, standardization, PCA, and label encoding.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

use crate::numerics::{sym_eigen, NumericsError};
use crate::{Real, RealMatrix};

/// Bundled copy of the Iris measurements, shipped so runs never touch the
/// network.
const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// A loaded tabular dataset with ground-truth class ids.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub features: RealMatrix,
    pub true_labels: Vec<usize>,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Restricted copy keeping only `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset, DataError> {
        let n = self.n_samples();
        let mut picked = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= n {
                return Err(DataError::RowOutOfRange { row: r, n });
            }
            picked.push(self.features.row(r).to_vec());
            labels.push(self.true_labels[r]);
        }
        Ok(Dataset {
            features: RealMatrix::from_rows(&picked).map_err(DataError::Numerics)?,
            true_labels: labels,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        })
    }
}

/// PCA fitted on standardized features.
#[derive(Clone, Debug)]
pub struct PcaModel {
    pub mean: Vec<Real>,
    /// `k x d`, rows orthonormal.
    pub components: RealMatrix,
    /// Descending, nonnegative, variance units.
    pub eigenvalues: Vec<Real>,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: not a number: {value:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("malformed CSV near row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("dataset has no rows")]
    Empty,
    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },
    #[error("row filter index {row} out of range for {n} samples")]
    RowOutOfRange { row: usize, n: usize },
    #[error("label {label} not found in vocabulary")]
    UnknownLabel { label: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Loads a 4-feature/1-species CSV (header row, comma delimited, UTF-8).
pub fn load_iris(path: &Path) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(file)
}

/// Loads the bundled Iris copy.
pub fn load_iris_bundled() -> Result<Dataset, DataError> {
    parse_csv(IRIS_CSV.as_bytes())
}

fn parse_csv<R: Read>(reader: R) -> Result<Dataset, DataError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| DataError::Malformed {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 {
        return Err(DataError::ColumnCount {
            row: 1,
            expected: 5,
            found: headers.len(),
        });
    }
    let n_features = headers.len() - 1;
    let feature_names: Vec<String> = headers.iter().take(n_features).map(String::from).collect();

    let mut rows: Vec<Vec<Real>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    for (idx, record) in csv.records().enumerate() {
        let row_number = idx + 2; // 1-based, after the header
        let record = record.map_err(|e| DataError::Malformed {
            row: row_number,
            message: e.to_string(),
        })?;
        if record.len() != n_features + 1 {
            return Err(DataError::ColumnCount {
                row: row_number,
                expected: n_features + 1,
                found: record.len(),
            });
        }
        let mut values = Vec::with_capacity(n_features);
        for (col, raw) in record.iter().take(n_features).enumerate() {
            let v: Real = raw.trim().parse().map_err(|_| DataError::NonNumeric {
                row: row_number,
                column: feature_names[col].clone(),
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonNumeric {
                    row: row_number,
                    column: feature_names[col].clone(),
                    value: raw.to_string(),
                });
            }
            values.push(v);
        }
        let species = record.get(n_features).unwrap_or("").trim().to_string();
        // Class ids follow first appearance order.
        let id = match class_names.iter().position(|c| c == &species) {
            Some(id) => id,
            None => {
                class_names.push(species);
                class_names.len() - 1
            }
        };
        rows.push(values);
        labels.push(id);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(Dataset {
        features: RealMatrix::from_rows(&rows)?,
        true_labels: labels,
        feature_names,
        class_names,
    })
}

/// Centers each column to mean 0 and scales to population standard
/// deviation 1.
pub fn standardize(features: &RealMatrix) -> Result<RealMatrix, DataError> {
    let n = features.rows();
    let d = features.cols();
    assert!(n > 0, "standardize on empty matrix");
    let means = features.column_means();
    let mut out = features.clone();
    for c in 0..d {
        let var = (0..n)
            .map(|r| {
                let diff = features[(r, c)] - means[c];
                diff * diff
            })
            .sum::<Real>()
            / n as Real;
        if var <= 0.0 {
            return Err(DataError::ZeroVariance { column: c });
        }
        let std = var.sqrt();
        for r in 0..n {
            out[(r, c)] = (features[(r, c)] - means[c]) / std;
        }
    }
    Ok(out)
}

/// Fits PCA with `k` components on (already standardized) features.
///
/// Component signs are fixed so each component's largest-magnitude entry is
/// positive, keeping outputs deterministic across platforms.
pub fn pca_fit(features: &RealMatrix, k: usize) -> Result<PcaModel, DataError> {
    let d = features.cols();
    if k == 0 || k > d {
        return Err(DataError::Numerics(NumericsError::Contract(format!(
            "pca components {k} out of range 1..={d}"
        ))));
    }
    let mean = features.column_means();
    let cov = features.sample_covariance();
    let (values, vectors) = sym_eigen(&cov)?;
    let mut components = RealMatrix::zeros(k, d);
    for comp in 0..k {
        let mut col = vectors.col(comp);
        let argmax = col
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.abs()
                    .partial_cmp(&b.abs())
                    .expect("finite component entries")
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        if col[argmax] < 0.0 {
            for v in &mut col {
                *v = -*v;
            }
        }
        for (j, v) in col.iter().enumerate() {
            components[(comp, j)] = *v;
        }
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues: values[..k].to_vec(),
    })
}

/// Projects features onto the fitted components, producing `N x k` scores.
pub fn pca_transform(model: &PcaModel, features: &RealMatrix) -> RealMatrix {
    assert_eq!(
        features.cols(),
        model.components.cols(),
        "pca dimension mismatch"
    );
    let n = features.rows();
    let k = model.components.rows();
    let mut out = RealMatrix::zeros(n, k);
    for r in 0..n {
        for comp in 0..k {
            let mut acc = 0.0;
            for c in 0..features.cols() {
                acc += (features[(r, c)] - model.mean[c]) * model.components[(comp, c)];
            }
            out[(r, comp)] = acc;
        }
    }
    out
}

/// One-hot encodes `labels` against an ordered vocabulary of distinct ids.
pub fn one_hot(labels: &[usize], vocabulary: &[usize]) -> Result<RealMatrix, DataError> {
    let mut out = RealMatrix::zeros(labels.len(), vocabulary.len());
    for (r, label) in labels.iter().enumerate() {
        let pos = vocabulary
            .iter()
            .position(|v| v == label)
            .ok_or(DataError::UnknownLabel { label: *label })?;
        out[(r, pos)] = 1.0;
    }
    Ok(out)
}
