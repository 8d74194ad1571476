//! Synthetic benchmark harness: AR(1) designs, sparse ground truths,
//! SNR-calibrated noise, leverage-plus-vertical contamination, the
//! two-predictor contour study, evaluation metrics, and the replication
//! driver that compares tuned estimators on clean test data.

use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{predict, Dataset};
use crate::error::{Error, Result};
use crate::estimator::{fit_dpd_lasso, sigma2_floor, EstimatorSettings};
use crate::loss::WeightVector;
use crate::seed::derive;
use crate::solver::SolverSettings;

/// Full parameterization of one simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Training-set size.
    pub n: usize,
    pub p: usize,
    pub p_active: usize,
    /// AR(1) correlation of adjacent predictors.
    pub rho: f64,
    /// Target ratio var(x . beta) / var(noise).
    pub snr: f64,
    pub intercept_true: f64,
    pub coef_low: f64,
    pub coef_high: f64,
    /// Fraction of training rows contaminated.
    pub contamination: f64,
    /// Magnitude of the predictor and response shifts.
    pub shift_magnitude: f64,
    pub n_test: usize,
    pub n_reps: usize,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    /// Full-scale study: n=1000, p=50 with 25 active coefficients in
    /// [0.5, 1.5], intercept 2.5, rho=0.7, SNR 5, 10% contamination with
    /// +/-20 shifts, 100 replications.
    fn default() -> Self {
        Self {
            n: 1000,
            p: 50,
            p_active: 25,
            rho: 0.7,
            snr: 5.0,
            intercept_true: 2.5,
            coef_low: 0.5,
            coef_high: 1.5,
            contamination: 0.10,
            shift_magnitude: 20.0,
            n_test: 1000,
            n_reps: 100,
            rng_seed: 0,
        }
    }
}

impl SimConfig {
    /// Same study shrunk to desk scale: n=300 and 20 replications.
    pub fn desk_scale() -> Self {
        Self {
            n: 300,
            n_reps: 20,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 {
            return Err(Error::InvalidParameter(
                "need n >= 2 and p >= 1".into(),
            ));
        }
        if self.p_active > self.p {
            return Err(Error::BadCounts {
                p_active: self.p_active,
                p: self.p,
            });
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::BadRho(self.rho));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "snr must be positive and finite, got {}",
                self.snr
            )));
        }
        if !(0.0..0.5).contains(&self.contamination) {
            return Err(Error::BadFraction(self.contamination));
        }
        if self.coef_low > self.coef_high {
            return Err(Error::InvalidParameter(format!(
                "coef_low {} exceeds coef_high {}",
                self.coef_low, self.coef_high
            )));
        }
        if self.n_test < 1 || self.n_reps < 1 {
            return Err(Error::InvalidParameter(
                "n_test and n_reps must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Parses a flat `key = value` config file ('#' starts a comment).
    /// Unrecognized keys and unparsable values are reported with their line
    /// number; missing keys keep the full-scale defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("line {lineno}: expected 'key = value'"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::InvalidParameter(format!("line {lineno}: invalid {what} '{value}'"))
            };
            match key {
                "n" => cfg.n = value.parse().map_err(|_| bad("integer"))?,
                "p" => cfg.p = value.parse().map_err(|_| bad("integer"))?,
                "p_active" => cfg.p_active = value.parse().map_err(|_| bad("integer"))?,
                "rho" => cfg.rho = value.parse().map_err(|_| bad("number"))?,
                "snr" => cfg.snr = value.parse().map_err(|_| bad("number"))?,
                "intercept_true" => {
                    cfg.intercept_true = value.parse().map_err(|_| bad("number"))?
                }
                "coef_low" => cfg.coef_low = value.parse().map_err(|_| bad("number"))?,
                "coef_high" => cfg.coef_high = value.parse().map_err(|_| bad("number"))?,
                "contamination" => {
                    cfg.contamination = value.parse().map_err(|_| bad("number"))?
                }
                "shift_magnitude" => {
                    cfg.shift_magnitude = value.parse().map_err(|_| bad("number"))?
                }
                "n_test" => cfg.n_test = value.parse().map_err(|_| bad("integer"))?,
                "n_reps" => cfg.n_reps = value.parse().map_err(|_| bad("integer"))?,
                "rng_seed" => cfg.rng_seed = value.parse().map_err(|_| bad("integer"))?,
                "schema_version" => {
                    let major = value.split('.').next().unwrap_or("");
                    if major != "1" {
                        return Err(Error::InvalidParameter(format!(
                            "line {lineno}: unsupported schema_version '{value}'"
                        )));
                    }
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "line {lineno}: unknown config key '{other}'"
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The generating model of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub beta_true: Vec<f64>,
    /// Sorted indices of the nonzero coefficients.
    pub active_set: Vec<usize>,
    pub sigma_eps2: f64,
    /// Sorted indices of the contaminated rows (empty until contamination).
    pub contaminated_idx: Vec<usize>,
    pub intercept_true: f64,
}

impl GroundTruth {
    pub fn beta_array(&self) -> Array1<f64> {
        Array1::from_vec(self.beta_true.clone())
    }
}

/// Estimators the replication driver knows how to tune and fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    DpdLasso { alpha: f64 },
    Lasso,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::DpdLasso { alpha } => format!("dpd_lasso(alpha={alpha})"),
            Method::Lasso => "lasso".to_string(),
        }
    }
}

/// One row of the replication-by-method result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub rep: usize,
    pub method: String,
    pub rmspe: f64,
    pub l2_error: f64,
    pub gamma: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub runtime_ms: f64,
    pub converged: bool,
}

/// Draws an n x p matrix with rows from the zero-mean normal whose
/// covariance is rho^|j-k|, via the sequential construction
/// x_1 ~ N(0,1), x_j = rho x_{j-1} + sqrt(1-rho^2) z_j.
pub fn generate_ar1_design(n: usize, p: usize, rho: f64, rng_seed: u64) -> Result<Array2<f64>> {
    if !(rho.abs() < 1.0) {
        return Err(Error::BadRho(rho));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let mut prev: f64 = StandardNormal.sample(&mut rng);
        x[[i, 0]] = prev;
        for j in 1..p {
            let z: f64 = StandardNormal.sample(&mut rng);
            prev = rho * prev + scale * z;
            x[[i, j]] = prev;
        }
    }
    Ok(x)
}

/// Sparse coefficient vector: `p_active` positions drawn without replacement,
/// each loaded with a Uniform[coef_low, coef_high] value, all others exactly
/// zero. Noise and contamination fields are filled later by the scenario
/// builder.
pub fn generate_truth(
    p: usize,
    p_active: usize,
    coef_low: f64,
    coef_high: f64,
    rng_seed: u64,
) -> Result<GroundTruth> {
    if p_active > p {
        return Err(Error::BadCounts { p_active, p });
    }
    if coef_low > coef_high || !coef_low.is_finite() || !coef_high.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bad coefficient range [{coef_low}, {coef_high}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut active = rand::seq::index::sample(&mut rng, p, p_active).into_vec();
    active.sort_unstable();
    let mut beta = vec![0.0; p];
    for &j in &active {
        beta[j] = if coef_low == coef_high {
            coef_low
        } else {
            rng.gen_range(coef_low..coef_high)
        };
    }
    Ok(GroundTruth {
        beta_true: beta,
        active_set: active,
        sigma_eps2: 0.0,
        contaminated_idx: Vec::new(),
        intercept_true: 0.0,
    })
}

/// Noise variance hitting the target SNR: var(mu) / snr, with the sample
/// variance (n-1 denominator).
pub fn calibrate_noise(mu: &Array1<f64>, snr: f64) -> Result<f64> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "snr must be positive and finite, got {snr}"
        )));
    }
    if mu.len() < 2 {
        return Err(Error::DegenerateSignal);
    }
    let n = mu.len() as f64;
    let mean = mu.sum() / n;
    let var = mu.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateSignal);
    }
    Ok(var / snr)
}

/// Perturbs floor(c n) uniformly chosen rows: a random nonempty predictor
/// subset (each column kept with probability 1/2) is shifted by the given
/// magnitude with independent random signs, and the same row's response is
/// shifted opposite to the sign of its true noise draw. Returns the modified
/// data and the sorted contaminated indices; untouched rows are bit-identical.
pub fn contaminate(
    data: &Dataset,
    truth: &GroundTruth,
    c: f64,
    shift: f64,
    rng_seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    if !(0.0..0.5).contains(&c) {
        return Err(Error::BadFraction(c));
    }
    if truth.beta_true.len() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "truth has {} coefficients but data has {} predictors",
            truth.beta_true.len(),
            data.p()
        )));
    }
    let n = data.n();
    let p = data.p();
    let n_out = (c * n as f64).floor() as usize;
    let mut x = data.x().clone();
    let mut y = data.y().clone();
    if n_out == 0 {
        return Ok((Dataset::new(x, y)?, Vec::new()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut rows = rand::seq::index::sample(&mut rng, n, n_out).into_vec();
    rows.sort_unstable();

    let beta = truth.beta_array();
    for &i in &rows {
        // true noise draw of the clean row, before any perturbation
        let eps = y[i] - truth.intercept_true - x.row(i).dot(&beta);
        let mut mask = vec![false; p];
        loop {
            let mut any = false;
            for m in mask.iter_mut() {
                *m = rng.gen_bool(0.5);
                any |= *m;
            }
            if any {
                break;
            }
        }
        for (j, &picked) in mask.iter().enumerate() {
            if picked {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                x[[i, j]] += sign * shift;
            }
        }
        y[i] -= eps.signum() * shift;
    }
    Ok((Dataset::new(x, y)?, rows))
}

/// The two-predictor study: n=100 correlated normal inputs
/// (covariance 0.5^|j-k|), coefficients (5, -5), no intercept, noise variance
/// 0.05^2 times the sample variance of the signal. A fraction c of rows is
/// replaced by off-model points with x1 ~ U[-0.1, 0.1], x2 ~ U[1, 2] and
/// y = -3 x1 + 3 x2 exactly.
pub fn contour_scenario(c: f64, rng_seed: u64) -> Result<(Dataset, GroundTruth)> {
    if !(0.0..0.5).contains(&c) {
        return Err(Error::BadFraction(c));
    }
    let n = 100usize;
    let mut x = generate_ar1_design(n, 2, 0.5, derive(rng_seed, 0))?;
    let beta = Array1::from_vec(vec![5.0, -5.0]);
    let mu = x.dot(&beta);
    let mu_mean = mu.sum() / n as f64;
    let s2 = mu.iter().map(|v| (v - mu_mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let sigma_eps2 = 0.05f64.powi(2) * s2;

    let mut rng = ChaCha8Rng::seed_from_u64(derive(rng_seed, 1));
    let sd = sigma_eps2.sqrt();
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        y[i] = mu[i] + sd * z;
    }

    let n_out = (c * n as f64).floor() as usize;
    let mut rows = Vec::new();
    if n_out > 0 {
        let mut out_rng = ChaCha8Rng::seed_from_u64(derive(rng_seed, 2));
        rows = rand::seq::index::sample(&mut out_rng, n, n_out).into_vec();
        rows.sort_unstable();
        for &i in &rows {
            let x1 = out_rng.gen_range(-0.1..0.1);
            let x2 = out_rng.gen_range(1.0..2.0);
            x[[i, 0]] = x1;
            x[[i, 1]] = x2;
            y[i] = -3.0 * x1 + 3.0 * x2;
        }
    }

    let truth = GroundTruth {
        beta_true: beta.to_vec(),
        active_set: vec![0, 1],
        sigma_eps2,
        contaminated_idx: rows,
        intercept_true: 0.0,
    };
    Ok((Dataset::new(x, y)?, truth))
}

/// One axis of a square evaluation grid: `steps` equally spaced points from
/// `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || min >= max || steps < 2 {
            return Err(Error::BadGrid(format!(
                "need finite min < max and steps >= 2, got {min}:{max}:{steps}"
            )));
        }
        Ok(Self { min, max, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.min + h * i as f64).collect()
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// Parses "min:max:steps".
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::BadGrid(format!("expected min:max:steps, got '{s}'")));
        }
        let min: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::BadGrid(format!("bad min '{}'", parts[0])))?;
        let max: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::BadGrid(format!("bad max '{}'", parts[1])))?;
        let steps: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::BadGrid(format!("bad steps '{}'", parts[2])))?;
        GridSpec::new(min, max, steps)
    }
}

/// A loss surface over a square two-coefficient grid, with its argmin.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSurface {
    pub alpha: f64,
    pub axis: GridSpec,
    /// Row-major values: index `i1 * steps + i2` holds the loss at
    /// (beta1[i1], beta2[i2]).
    pub values: Vec<f64>,
    pub argmin: (f64, f64),
    pub min_value: f64,
}

impl LossSurface {
    /// CSV rendering with columns beta1, beta2, loss.
    pub fn to_csv(&self) -> String {
        let pts = self.axis.points();
        let mut out = String::from("beta1,beta2,loss\n");
        for (i1, b1) in pts.iter().enumerate() {
            for (i2, b2) in pts.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", b1, b2, self.values[i1 * pts.len() + i2]));
            }
        }
        out
    }
}

/// Evaluates the loss over a square grid of two-predictor coefficient pairs.
/// alpha = 0 gives the mean-squared-error surface; alpha > 0 gives the
/// divergence loss with sigma2 set to the mean squared residual at each grid
/// point (floored as in the estimator). Also reports the grid argmin, with
/// ties resolved to the first point in row-major scan order.
pub fn loss_surface(data: &Dataset, alpha: f64, axis: &GridSpec) -> Result<LossSurface> {
    if data.p() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "loss surfaces need exactly 2 predictors, got {}",
            data.p()
        )));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    GridSpec::new(axis.min, axis.max, axis.steps)?;

    let n = data.n();
    let x1: Vec<f64> = data.x().column(0).to_vec();
    let x2: Vec<f64> = data.x().column(1).to_vec();
    let y: Vec<f64> = data.y().to_vec();
    let floor = sigma2_floor(data.y());
    let pts = axis.points();

    let mut values = Vec::with_capacity(pts.len() * pts.len());
    let mut best = (f64::INFINITY, 0usize, 0usize);
    let mut r = vec![0.0f64; n];
    for (i1, &b1) in pts.iter().enumerate() {
        for (i2, &b2) in pts.iter().enumerate() {
            let mut sum_sq = 0.0;
            for i in 0..n {
                let ri = y[i] - b1 * x1[i] - b2 * x2[i];
                r[i] = ri;
                sum_sq += ri * ri;
            }
            let mse = sum_sq / n as f64;
            let loss = if alpha == 0.0 {
                mse
            } else {
                let s2 = mse.max(floor);
                let denom = 2.0 * s2;
                // h-scores are <= 0, so the stabilizing max is their largest
                let mut m = f64::NEG_INFINITY;
                for &ri in &r {
                    let h = -(ri * ri) / denom * alpha;
                    if h > m {
                        m = h;
                    }
                }
                let mut acc = 0.0;
                for &ri in &r {
                    acc += (-(ri * ri) / denom * alpha - m).exp();
                }
                -(m + (acc / n as f64).ln())
            };
            values.push(loss);
            if loss < best.0 {
                best = (loss, i1, i2);
            }
        }
    }

    Ok(LossSurface {
        alpha,
        axis: *axis,
        values,
        argmin: (pts[best.1], pts[best.2]),
        min_value: best.0,
    })
}

/// Root mean squared prediction error.
pub fn rmspe(y_test: &Array1<f64>, y_pred: &Array1<f64>) -> Result<f64> {
    if y_test.len() != y_pred.len() || y_test.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "prediction vectors of lengths {} and {}",
            y_test.len(),
            y_pred.len()
        )));
    }
    let mse = y_test
        .iter()
        .zip(y_pred.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / y_test.len() as f64;
    Ok(mse.sqrt())
}

/// Euclidean distance between estimated and true coefficient vectors
/// (intercepts excluded).
pub fn l2_error(beta_hat: &Array1<f64>, beta_true: &Array1<f64>) -> Result<f64> {
    if beta_hat.len() != beta_true.len() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vectors of lengths {} and {}",
            beta_hat.len(),
            beta_true.len()
        )));
    }
    Ok(beta_hat
        .iter()
        .zip(beta_true.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Support-recovery errors against the true active set; a coefficient counts
/// as selected exactly when it is nonzero. Returns (false positives, false
/// negatives, their sum).
pub fn selection_error(beta_hat: &Array1<f64>, active_set: &[usize]) -> (usize, usize, usize) {
    let p = beta_hat.len();
    let mut is_active = vec![false; p];
    for &j in active_set {
        if j < p {
            is_active[j] = true;
        }
    }
    let mut fp = 0;
    let mut fn_ = 0;
    for j in 0..p {
        let selected = beta_hat[j] != 0.0;
        match (selected, is_active[j]) {
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    (fp, fn_, fp + fn_)
}

fn normal_vector(n: usize, sd: f64, rng_seed: u64) -> Array1<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Array1::from_shape_fn(n, |_| {
        let z: f64 = StandardNormal.sample(&mut rng);
        sd * z
    })
}

/// Builds one replication's training data (contaminated), clean test data
/// and completed ground truth, all derived from the replication seed.
pub fn build_replication(
    config: &SimConfig,
    rep_seed: u64,
) -> Result<(Dataset, Dataset, GroundTruth)> {
    let mut truth = generate_truth(
        config.p,
        config.p_active,
        config.coef_low,
        config.coef_high,
        derive(rep_seed, 0),
    )?;
    truth.intercept_true = config.intercept_true;
    let beta = truth.beta_array();

    let x = generate_ar1_design(config.n, config.p, config.rho, derive(rep_seed, 1))?;
    let mu = x.dot(&beta);
    let sigma_eps2 = calibrate_noise(&mu, config.snr)?;
    truth.sigma_eps2 = sigma_eps2;
    let eps = normal_vector(config.n, sigma_eps2.sqrt(), derive(rep_seed, 2));
    let y = &mu + &eps + config.intercept_true;
    let train = Dataset::new(x, y)?;

    let (train, contaminated) = contaminate(
        &train,
        &truth,
        config.contamination,
        config.shift_magnitude,
        derive(rep_seed, 3),
    )?;
    truth.contaminated_idx = contaminated;

    let x_test = generate_ar1_design(config.n_test, config.p, config.rho, derive(rep_seed, 4))?;
    let eps_test = normal_vector(config.n_test, sigma_eps2.sqrt(), derive(rep_seed, 5));
    let y_test = x_test.dot(&beta) + eps_test + config.intercept_true;
    let test = Dataset::new(x_test, y_test)?;

    Ok((train, test, truth))
}

/// Number of cross-validation folds used to tune the robust estimator.
pub const DPD_CV_FOLDS: usize = 5;
/// Number of folds for the plain-lasso baseline tuner.
pub const LASSO_CV_FOLDS: usize = 20;
/// Lambda grid size used by both tuners.
pub const CV_GRID_SIZE: usize = 50;

/// Runs the full study: for every replication, generate fresh truth, design,
/// noise and contamination plus a clean test set; tune lambda per method
/// (stratified 5-fold for the robust estimator, plain 20-fold for the lasso
/// baseline); fit; and score. One record per (replication, method), fully
/// reproducible from `config.rng_seed`. Non-convergence is recorded in the
/// row, never fatal.
pub fn run_replications(config: &SimConfig, methods: &[Method]) -> Result<Vec<SimRecord>> {
    config.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    let mut records = Vec::with_capacity(config.n_reps * methods.len());
    for rep in 0..config.n_reps {
        let rep_seed = derive(config.rng_seed, rep as u64);
        let (train, test, truth) = build_replication(config, rep_seed)?;
        let beta_true = truth.beta_array();
        for method in methods {
            let started = Instant::now();
            let fit = match method {
                Method::DpdLasso { alpha } => {
                    let settings = EstimatorSettings::new(*alpha, 0.0);
                    let cv = crate::cv::tune_lambda(
                        &train,
                        *alpha,
                        DPD_CV_FOLDS,
                        CV_GRID_SIZE,
                        derive(rep_seed, 6),
                        &settings,
                    )?;
                    let settings = EstimatorSettings::new(*alpha, cv.best_lambda);
                    fit_dpd_lasso(&train, &settings)?.0
                }
                Method::Lasso => {
                    let cv = crate::cv::tune_lambda_lasso(
                        &train,
                        LASSO_CV_FOLDS,
                        CV_GRID_SIZE,
                        derive(rep_seed, 7),
                        &SolverSettings::default(),
                    )?;
                    let settings = EstimatorSettings::new(0.0, cv.best_lambda);
                    fit_dpd_lasso(&train, &settings)?.0
                }
            };
            let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
            let pred = predict(&fit, test.x())?;
            let beta_hat = fit.beta_array();
            let (fp, fn_, gamma) = selection_error(&beta_hat, &truth.active_set);
            records.push(SimRecord {
                rep,
                method: method.label(),
                rmspe: rmspe(test.y(), &pred)?,
                l2_error: l2_error(&beta_hat, &beta_true)?,
                gamma,
                false_pos: fp,
                false_neg: fn_,
                runtime_ms,
                converged: fit.converged,
            });
        }
    }
    Ok(records)
}

/// Interpolated quantile (the "linear between closest ranks" convention) of
/// already-sorted values.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-method, per-metric median and interquartile range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub metric: String,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Collapses a result table into per-method medians and quartiles of rmspe,
/// l2_error and gamma, preserving first-appearance method order.
pub fn summarize(records: &[SimRecord]) -> Vec<SummaryRow> {
    let mut methods: Vec<String> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    let mut rows = Vec::new();
    for m in &methods {
        let subset: Vec<&SimRecord> = records.iter().filter(|r| &r.method == m).collect();
        let metrics: [(&str, Box<dyn Fn(&SimRecord) -> f64>); 3] = [
            ("rmspe", Box::new(|r: &SimRecord| r.rmspe)),
            ("l2_error", Box::new(|r: &SimRecord| r.l2_error)),
            ("gamma", Box::new(|r: &SimRecord| r.gamma as f64)),
        ];
        for (name, get) in metrics {
            let mut vals: Vec<f64> = subset.iter().map(|r| get(r)).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
            rows.push(SummaryRow {
                method: m.clone(),
                metric: name.to_string(),
                median: quantile_sorted(&vals, 0.5),
                q25: quantile_sorted(&vals, 0.25),
                q75: quantile_sorted(&vals, 0.75),
            });
        }
    }
    rows
}

/// Weighted-lasso view of the uniform-weight fit, exposed for tests that need
/// an ordinary least-squares reference on two-predictor data.
pub fn ols_two_predictor(data: &Dataset) -> Result<(Array1<f64>, f64)> {
    let sol = crate::solver::solve_weighted_lasso(
        data,
        &WeightVector::uniform(data.n()),
        0.0,
        None,
        &SolverSettings {
            coef_tol: 1e-13,
            ..SolverSettings::default()
        },
    )?;
    Ok((sol.beta, sol.intercept))
}
