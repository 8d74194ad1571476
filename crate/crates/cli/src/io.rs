//! File formats: CSV dataset ingestion, the fit JSON document, CSV rendering
//! with full round-trip float precision, and atomic writes.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use dpd_lasso::{CvResult, Dataset, ModelFit};

pub const SCHEMA_VERSION: &str = "1.0";

/// Writes via a temp file in the same directory plus rename, so readers never
/// observe partial output.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating directory {}", dir.display()))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Prepends the schema-version comment line all emitted CSV files carry.
pub fn versioned_csv(body: &str) -> String {
    format!("# schema_version={SCHEMA_VERSION}\n{body}")
}

fn check_schema_version(version: &str) -> Result<()> {
    let major = version.split('.').next().unwrap_or("");
    if major != "1" {
        bail!("unsupported schema_version '{version}' (this build reads major version 1)");
    }
    Ok(())
}

/// A dataset loaded from CSV along with its column names.
pub struct LoadedDataset {
    pub data: Dataset,
    pub feature_names: Vec<String>,
    pub response_name: String,
}

/// Reads a headered CSV, takes `response` as y and every other column as a
/// numeric predictor.
pub fn load_dataset_csv(path: &Path, response: &str) -> Result<LoadedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("reading CSV header")?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let response_idx = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| {
            anyhow!(
                "response column '{}' not found; available columns: {}",
                response,
                headers.join(", ")
            )
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != response_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if feature_names.is_empty() {
        bail!("no predictor columns besides the response '{response}'");
    }

    let mut y = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading CSV data row {}", line + 2))?;
        if record.len() != headers.len() {
            bail!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                headers.len()
            );
        }
        let parse = |idx: usize| -> Result<f64> {
            record[idx].parse::<f64>().map_err(|_| {
                anyhow!(
                    "row {}, column '{}': not a number: '{}'",
                    line + 2,
                    headers[idx],
                    &record[idx]
                )
            })
        };
        y.push(parse(response_idx)?);
        let mut row = Vec::with_capacity(feature_names.len());
        for idx in 0..headers.len() {
            if idx != response_idx {
                row.push(parse(idx)?);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("CSV {} contains a header but no data rows", path.display());
    }

    let n = rows.len();
    let p = feature_names.len();
    let mut x = Array2::zeros((n, p));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            x[[i, j]] = *v;
        }
    }
    let data = Dataset::new(x, Array1::from_vec(y))?;
    Ok(LoadedDataset {
        data,
        feature_names,
        response_name: response.to_string(),
    })
}

/// Reads a CSV of predictor columns matched by name against a fitted model:
/// the stored response column is ignored when present, any other unknown or
/// missing column is an error.
pub fn load_features_csv(path: &Path, doc: &FitDocument) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("reading CSV header")?
        .iter()
        .map(|h| h.to_string())
        .collect();

    let missing: Vec<&String> = doc
        .feature_names
        .iter()
        .filter(|f| !headers.contains(f))
        .collect();
    let extra: Vec<&String> = headers
        .iter()
        .filter(|h| !doc.feature_names.contains(h) && **h != doc.response_name)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("feature columns do not match the model");
        if !missing.is_empty() {
            msg.push_str(&format!(
                "; missing: {}",
                missing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        if !extra.is_empty() {
            msg.push_str(&format!(
                "; unknown: {}",
                extra.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        bail!(msg);
    }

    let col_of: Vec<usize> = doc
        .feature_names
        .iter()
        .map(|f| headers.iter().position(|h| h == f).expect("checked above"))
        .collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading CSV data row {}", line + 2))?;
        let mut row = Vec::with_capacity(col_of.len());
        for (&idx, name) in col_of.iter().zip(doc.feature_names.iter()) {
            let v: f64 = record
                .get(idx)
                .ok_or_else(|| anyhow!("row {} too short", line + 2))?
                .parse()
                .map_err(|_| {
                    anyhow!("row {}, column '{}': not a number", line + 2, name)
                })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("CSV {} contains no data rows", path.display());
    }
    let mut x = Array2::zeros((rows.len(), col_of.len()));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            x[[i, j]] = *v;
        }
    }
    Ok(x)
}

/// The on-disk model document: the fit plus the column names it was trained
/// against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDocument {
    pub schema_version: String,
    #[serde(flatten)]
    pub fit: ModelFit,
    pub feature_names: Vec<String>,
    pub response_name: String,
}

impl FitDocument {
    pub fn new(fit: ModelFit, feature_names: Vec<String>, response_name: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            fit,
            feature_names,
            response_name,
        }
    }
}

pub fn save_fit(path: &Path, doc: &FitDocument) -> Result<()> {
    let json = serde_json::to_string_pretty(doc).context("serializing fit")?;
    write_atomic(path, &format!("{json}\n"))
}

pub fn load_fit(path: &Path) -> Result<FitDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: FitDocument =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    check_schema_version(&doc.schema_version)?;
    if doc.fit.beta.len() != doc.feature_names.len() {
        bail!(
            "{}: {} coefficients but {} feature names",
            path.display(),
            doc.fit.beta.len(),
            doc.feature_names.len()
        );
    }
    Ok(doc)
}

/// The on-disk cross-validation document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvDocument {
    pub schema_version: String,
    #[serde(flatten)]
    pub result: CvResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trimmed_cv_error: Option<Vec<f64>>,
}

pub fn save_cv_json(path: &Path, doc: &CvDocument) -> Result<()> {
    let json = serde_json::to_string_pretty(doc).context("serializing CV result")?;
    write_atomic(path, &format!("{json}\n"))
}

/// lambda, cv_error[, trimmed_cv_error] rows in grid order.
pub fn cv_csv(result: &CvResult, trimmed: Option<&[f64]>) -> String {
    let mut out = String::new();
    match trimmed {
        Some(t) => {
            out.push_str("lambda,cv_error,trimmed_cv_error\n");
            for ((l, e), tr) in result.lambda_grid.iter().zip(&result.cv_error).zip(t) {
                out.push_str(&format!("{l},{e},{tr}\n"));
            }
        }
        None => {
            out.push_str("lambda,cv_error\n");
            for (l, e) in result.lambda_grid.iter().zip(&result.cv_error) {
                out.push_str(&format!("{l},{e}\n"));
            }
        }
    }
    out
}
