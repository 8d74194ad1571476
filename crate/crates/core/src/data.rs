//! Dataset and model representations: centering/scaling, prediction and
//! residual computation shared by every other module.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An n x p predictor matrix paired with a length-n response vector.
///
/// Construction validates shape and finiteness; the data is immutable
/// afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "need at least one observation and one predictor".into(),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.iter().any(|&i| i >= self.n()) {
            return Err(Error::DimensionMismatch("row index out of range".into()));
        }
        let mut x = Array2::zeros((rows.len(), self.p()));
        let mut y = Array1::zeros(rows.len());
        for (k, &i) in rows.iter().enumerate() {
            x.row_mut(k).assign(&self.x.row(i));
            y[k] = self.y[i];
        }
        Dataset::new(x, y)
    }
}

/// Column shifts/scales and the response mean recorded by [`standardize`],
/// sufficient to invert the transform or map coefficients back.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub col_means: Array1<f64>,
    pub col_scales: Array1<f64>,
    pub y_mean: f64,
}

impl Standardizer {
    /// Maps coefficients fitted on the standardized scale back to the
    /// original data scale, recovering the intercept from the stored means.
    pub fn destandardize_coefficients(&self, beta_std: &Array1<f64>) -> (Array1<f64>, f64) {
        self.destandardize_with_intercept(beta_std, 0.0)
    }

    /// As `destandardize_coefficients`, for a fit that also carries an
    /// intercept on the standardized scale.
    pub fn destandardize_with_intercept(
        &self,
        beta_std: &Array1<f64>,
        intercept_std: f64,
    ) -> (Array1<f64>, f64) {
        let beta: Array1<f64> = beta_std
            .iter()
            .zip(self.col_scales.iter())
            .map(|(b, s)| b / s)
            .collect();
        let intercept = self.y_mean + intercept_std - self.col_means.dot(&beta);
        (beta, intercept)
    }

    /// Maps caller-supplied coefficients on the original scale onto the
    /// standardized scale (the inverse of `destandardize_coefficients`,
    /// ignoring the intercept).
    pub fn standardize_coefficients(&self, beta: &Array1<f64>) -> Array1<f64> {
        beta.iter()
            .zip(self.col_scales.iter())
            .map(|(b, s)| b * s)
            .collect()
    }

    /// Undoes the transform, reproducing the original data.
    pub fn invert(&self, data: &Dataset) -> Result<Dataset> {
        let mut x = data.x().clone();
        for (j, mut col) in x.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|v| v * self.col_scales[j] + self.col_means[j]);
        }
        let y = data.y().mapv(|v| v + self.y_mean);
        Dataset::new(x, y)
    }
}

/// A fitted model on the original data scale, along with the tuning
/// parameters and convergence diagnostics that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub n_iter: usize,
    pub converged: bool,
    pub objective: f64,
}

impl ModelFit {
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn beta_array(&self) -> Array1<f64> {
        Array1::from_vec(self.beta.clone())
    }
}

/// Centers every predictor column to mean 0 and scales it to sample standard
/// deviation 1 (n-1 denominator); centers the response when `center_y` is set.
///
/// Constant columns are rejected rather than silently dropped.
pub fn standardize(data: &Dataset, center_y: bool) -> Result<(Dataset, Standardizer)> {
    let n = data.n() as f64;
    let mut col_means = Array1::zeros(data.p());
    let mut col_scales = Array1::zeros(data.p());
    let mut x = data.x().clone();
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        let mean = col.sum() / n;
        let var = if data.n() > 1 {
            col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        if var <= 0.0 {
            return Err(Error::ConstantColumn(j));
        }
        let scale = var.sqrt();
        col.mapv_inplace(|v| (v - mean) / scale);
        col_means[j] = mean;
        col_scales[j] = scale;
    }
    let y_mean = if center_y { data.y().sum() / n } else { 0.0 };
    let y = data.y().mapv(|v| v - y_mean);
    let standardizer = Standardizer {
        col_means,
        col_scales,
        y_mean,
    };
    Ok((Dataset::new(x, y)?, standardizer))
}

/// Evaluates `intercept + X_new . beta` row by row.
pub fn predict(fit: &ModelFit, x_new: &Array2<f64>) -> Result<Array1<f64>> {
    if x_new.ncols() != fit.p() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} coefficients but input has {} columns",
            fit.p(),
            x_new.ncols()
        )));
    }
    let beta = fit.beta_array();
    Ok(x_new.dot(&beta) + fit.intercept)
}

/// r_i = y_i - intercept - x_i . beta.
pub fn residuals(data: &Dataset, beta: &Array1<f64>, intercept: f64) -> Result<Array1<f64>> {
    if beta.len() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries but data has {} predictors",
            beta.len(),
            data.p()
        )));
    }
    let fitted = data.x().dot(beta);
    Ok(data
        .y()
        .iter()
        .zip(fitted.iter())
        .map(|(y, f)| y - intercept - f)
        .collect())
}
