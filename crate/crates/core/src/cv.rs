//! Lambda selection by K-fold cross-validation with l-score stratified
//! sampling.
//!
//! Observations are scored by their squared standardized residual under the
//! full-data fit, sorted, chopped into consecutive strata of size K, and each
//! fold draws one index from every non-exhausted stratum. Folds built this
//! way have near-identical score distributions, so contaminated points spread
//! evenly across folds instead of landing in a few of them.

use std::collections::HashMap;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{predict, standardize, Dataset, ModelFit};
use crate::error::{Error, Result};
use crate::estimator::{fit_dpd_lasso, EstimatorSettings, InitStrategy};
use crate::loss::WeightVector;
use crate::seed::derive;
use crate::solver::{lambda_max, SolverSettings};

/// A K-fold partition produced by stratified sampling, together with the
/// strata it was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    /// Fold number of each observation, values in 1..=K.
    pub fold_of: Vec<usize>,
    pub k: usize,
    /// Consecutive score-sorted index sets of size <= K each.
    pub strata: Vec<Vec<usize>>,
}

impl FoldAssignment {
    pub fn n(&self) -> usize {
        self.fold_of.len()
    }

    /// Indices held out by fold `f` (1-based), in ascending order.
    pub fn fold_rows(&self, f: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] == f).collect()
    }

    /// Indices used for training when fold `f` is held out.
    pub fn complement_rows(&self, f: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] != f).collect()
    }
}

/// Grid, per-lambda CV errors and the selected lambda.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda_grid: Vec<f64>,
    pub cv_error: Vec<f64>,
    pub best_lambda: f64,
    pub best_index: usize,
    /// Fits per grid entry (full-data plus fold fits) that hit the iteration
    /// cap without meeting the convergence test.
    pub n_unconverged: Vec<usize>,
}

/// l_i = (y_i - intercept - x_i . beta)^2 / sigma2 under the given fit.
pub fn l_scores(data: &Dataset, fit: &ModelFit) -> Result<Array1<f64>> {
    if !fit.sigma2.is_finite() || fit.sigma2 <= 0.0 {
        return Err(Error::InvalidSigma(fit.sigma2));
    }
    let r = crate::data::residuals(data, &fit.beta_array(), fit.intercept)?;
    Ok(r.mapv(|v| v * v / fit.sigma2))
}

/// Sorts indices by score ascending, chops them into ceil(n/K) consecutive
/// strata of size <= K, and fills each fold with one uniform draw from every
/// non-exhausted stratum. Deterministic given `rng_seed`.
pub fn stratified_folds(scores: &[f64], k: usize, rng_seed: u64) -> Result<FoldAssignment> {
    let n = scores.len();
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ties in index order, so the partition is deterministic
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    let strata: Vec<Vec<usize>> = order.chunks(k).map(|c| c.to_vec()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut remaining: Vec<Vec<usize>> = strata.clone();
    let mut fold_of = vec![0usize; n];
    for f in 1..=k {
        for stratum in remaining.iter_mut() {
            if stratum.is_empty() {
                continue;
            }
            let j = rng.gen_range(0..stratum.len());
            let idx = stratum.remove(j);
            fold_of[idx] = f;
        }
    }

    Ok(FoldAssignment { fold_of, k, strata })
}

fn settings_with(settings: &EstimatorSettings, alpha: f64, lambda: f64) -> EstimatorSettings {
    EstimatorSettings {
        alpha,
        lambda,
        ..settings.clone()
    }
}

fn cv_error_counted(
    data: &Dataset,
    folds: &FoldAssignment,
    alpha: f64,
    lambda: f64,
    settings: &EstimatorSettings,
) -> Result<(f64, usize)> {
    if folds.n() != data.n() {
        return Err(Error::DimensionMismatch(format!(
            "fold assignment covers {} rows but data has {}",
            folds.n(),
            data.n()
        )));
    }
    let fit_settings = settings_with(settings, alpha, lambda);
    let mut sq_err = vec![0.0f64; data.n()];
    let mut unconverged = 0usize;
    for f in 1..=folds.k {
        let train_rows = folds.complement_rows(f);
        let test_rows = folds.fold_rows(f);
        if test_rows.is_empty() {
            continue;
        }
        let train = data.select_rows(&train_rows)?;
        let (fit, _) = fit_dpd_lasso(&train, &fit_settings)?;
        if !fit.converged {
            unconverged += 1;
        }
        let test = data.select_rows(&test_rows)?;
        let pred = predict(&fit, test.x())?;
        for (pos, &i) in test_rows.iter().enumerate() {
            let e = data.y()[i] - pred[pos];
            sq_err[i] = e * e;
        }
    }
    Ok((sq_err.iter().sum::<f64>() / data.n() as f64, unconverged))
}

/// Mean held-out squared prediction error over all n observations: each fold
/// is predicted by the estimator fitted on its complement.
pub fn cv_error(
    data: &Dataset,
    folds: &FoldAssignment,
    alpha: f64,
    lambda: f64,
    settings: &EstimatorSettings,
) -> Result<f64> {
    cv_error_counted(data, folds, alpha, lambda, settings).map(|(cv, _)| cv)
}

/// Log-spaced grid of `size` values from lambda_max down to 1e-4 lambda_max.
pub fn build_lambda_grid(data: &Dataset, size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be >= 2, got {size}"
        )));
    }
    let (std_data, _) = standardize(data, true)?;
    let lmax = lambda_max(&std_data, &WeightVector::uniform(std_data.n()))?;
    if !(lmax > 0.0) || !lmax.is_finite() {
        return Err(Error::InvalidParameter(
            "lambda_max is zero; the centered response is orthogonal to every predictor".into(),
        ));
    }
    Ok((0..size)
        .map(|i| lmax * 10f64.powf(-4.0 * i as f64 / (size - 1) as f64))
        .collect())
}

/// Cross-validates lambda over an explicit grid. For each distinct lambda:
/// fit on the full data (warm-started along the path), score and stratify
/// the observations, and measure the held-out error. Duplicate grid values
/// are evaluated once and reuse the first result. Ties in the CV error break
/// toward the larger lambda.
pub fn tune_lambda_on_grid(
    data: &Dataset,
    alpha: f64,
    grid: &[f64],
    k: usize,
    rng_seed: u64,
    settings: &EstimatorSettings,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::InvalidParameter(
            "lambda grid entries must be finite and >= 0".into(),
        ));
    }

    let mut cv = Vec::with_capacity(grid.len());
    let mut unconverged = Vec::with_capacity(grid.len());
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut warm: Option<Array1<f64>> = None;

    for (idx, &lam) in grid.iter().enumerate() {
        if let Some(&first) = seen.get(&lam.to_bits()) {
            let prev_cv: f64 = cv[first];
            let prev_uc: usize = unconverged[first];
            cv.push(prev_cv);
            unconverged.push(prev_uc);
            continue;
        }
        let mut fit_settings = settings_with(settings, alpha, lam);
        if let Some(prev) = &warm {
            fit_settings.init = InitStrategy::Provided(prev.clone());
        }
        let (fit, _) = fit_dpd_lasso(data, &fit_settings)?;
        let full_unconverged = usize::from(!fit.converged);
        let scores = l_scores(data, &fit)?;
        let folds = stratified_folds(
            scores.as_slice().expect("scores are contiguous"),
            k,
            derive(rng_seed, idx as u64),
        )?;
        let (err, fold_unconverged) = cv_error_counted(data, &folds, alpha, lam, settings)?;
        warm = Some(fit.beta_array());
        seen.insert(lam.to_bits(), idx);
        cv.push(err);
        unconverged.push(full_unconverged + fold_unconverged);
    }

    let mut best_index = 0;
    for i in 1..grid.len() {
        let better = cv[i] < cv[best_index]
            || (cv[i] == cv[best_index] && grid[i] > grid[best_index]);
        if better {
            best_index = i;
        }
    }

    Ok(CvResult {
        lambda_grid: grid.to_vec(),
        cv_error: cv,
        best_lambda: grid[best_index],
        best_index,
        n_unconverged: unconverged,
    })
}

/// Builds the default grid (`grid_size` log-spaced values spanning
/// [1e-4 lambda_max, lambda_max]) and cross-validates lambda over it for the
/// given alpha.
pub fn tune_lambda(
    data: &Dataset,
    alpha: f64,
    k: usize,
    grid_size: usize,
    rng_seed: u64,
    settings: &EstimatorSettings,
) -> Result<CvResult> {
    let grid = build_lambda_grid(data, grid_size)?;
    tune_lambda_on_grid(data, alpha, &grid, k, rng_seed, settings)
}

/// Plain-lasso lambda selection for the alpha = 0 baseline: ordinary
/// shuffled K-fold assignment (no stratification) and uniform-weight fits
/// along the same default grid.
pub fn tune_lambda_lasso(
    data: &Dataset,
    k: usize,
    grid_size: usize,
    rng_seed: u64,
    solver: &SolverSettings,
) -> Result<CvResult> {
    let n = data.n();
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    let grid = build_lambda_grid(data, grid_size)?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive(rng_seed, 0));
    let mut perm: Vec<usize> = (0..n).collect();
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold_of[i] = pos % k + 1;
    }

    // fold-outer, lambda-inner: each fold chains one warm-started path down
    // the grid, which is the same sequence of uniform-weight solutions the
    // alpha = 0 estimator produces, at a fraction of the cost
    let uniform_solver = SolverSettings {
        fit_intercept: false,
        ..*solver
    };
    let mut sq_err = vec![vec![0.0f64; n]; grid.len()];
    let mut unconverged = vec![0usize; grid.len()];
    for f in 1..=k {
        let train_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
        let test_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
        let train = data.select_rows(&train_rows)?;
        let (std_train, standardizer) = standardize(&train, true)?;
        let weights = WeightVector::uniform(std_train.n());
        let mut beta = Array1::zeros(data.p());
        for (gi, &lam) in grid.iter().enumerate() {
            let sol =
                crate::solver::solve_weighted_lasso(&std_train, &weights, lam, Some(&beta), &uniform_solver)?;
            unconverged[gi] += usize::from(!sol.converged);
            beta = sol.beta;
            let (beta_orig, intercept) = standardizer.destandardize_coefficients(&beta);
            for &i in &test_rows {
                let pred = data.x().row(i).dot(&beta_orig) + intercept;
                let e = data.y()[i] - pred;
                sq_err[gi][i] = e * e;
            }
        }
    }
    let cv: Vec<f64> = sq_err
        .iter()
        .map(|errs| errs.iter().sum::<f64>() / n as f64)
        .collect();

    let mut best_index = 0;
    for i in 1..grid.len() {
        if cv[i] < cv[best_index] || (cv[i] == cv[best_index] && grid[i] > grid[best_index]) {
            best_index = i;
        }
    }
    Ok(CvResult {
        best_lambda: grid[best_index],
        best_index,
        lambda_grid: grid,
        cv_error: cv,
        n_unconverged: unconverged,
    })
}

/// Mean of the squared held-out errors after dropping the largest 10%
/// (rounded up). Reported alongside the plain CV error as a diagnostic for
/// contaminated hold-out points; never used for selection.
pub fn trimmed_mean_upper10(sq_errors: &[f64]) -> f64 {
    if sq_errors.is_empty() {
        return 0.0;
    }
    let mut v = sq_errors.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let drop = ((v.len() as f64) * 0.10).ceil() as usize;
    let keep = v.len().saturating_sub(drop).max(1);
    v[..keep].iter().sum::<f64>() / keep as f64
}

/// Per-observation squared held-out errors (for diagnostics export).
pub fn cv_squared_errors(
    data: &Dataset,
    folds: &FoldAssignment,
    alpha: f64,
    lambda: f64,
    settings: &EstimatorSettings,
) -> Result<Vec<f64>> {
    if folds.n() != data.n() {
        return Err(Error::DimensionMismatch(format!(
            "fold assignment covers {} rows but data has {}",
            folds.n(),
            data.n()
        )));
    }
    let fit_settings = settings_with(settings, alpha, lambda);
    let mut sq_err = vec![0.0f64; data.n()];
    for f in 1..=folds.k {
        let train = data.select_rows(&folds.complement_rows(f))?;
        let test_rows = folds.fold_rows(f);
        if test_rows.is_empty() {
            continue;
        }
        let (fit, _) = fit_dpd_lasso(&train, &fit_settings)?;
        let test = data.select_rows(&test_rows)?;
        let pred = predict(&fit, test.x())?;
        for (pos, &i) in test_rows.iter().enumerate() {
            let e = data.y()[i] - pred[pos];
            sq_err[i] = e * e;
        }
    }
    Ok(sq_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    fn fit_with(beta: Vec<f64>, intercept: f64, sigma2: f64) -> ModelFit {
        ModelFit {
            beta,
            intercept,
            sigma2,
            alpha: 1.0,
            lambda: 0.1,
            n_iter: 1,
            converged: true,
            objective: 0.0,
        }
    }

    #[test]
    fn l_score_values() {
        let x = Array2::from_shape_fn((2, 1), |_| 0.0);
        let data = Dataset::new(x, ndarray::arr1(&[1.0, 2.0])).unwrap();
        let fit = fit_with(vec![0.0], 0.0, 4.0);
        let l = l_scores(&data, &fit).unwrap();
        assert_eq!(l[0], 0.25);
        assert_eq!(l[1], 1.0);

        // zero residual scores zero; residual^2 = sigma2 scores one
        let fit = fit_with(vec![0.0], 1.0, 1.0);
        let l = l_scores(&data, &fit).unwrap();
        assert_eq!(l[0], 0.0);
        assert_eq!(l[1], 1.0);
    }

    #[test]
    fn l_scores_reject_bad_sigma() {
        let x = Array2::zeros((2, 1));
        let data = Dataset::new(x + 1.0, ndarray::arr1(&[1.0, 2.0])).unwrap();
        let fit = fit_with(vec![0.0], 0.0, 0.0);
        assert!(matches!(l_scores(&data, &fit), Err(Error::InvalidSigma(_))));
    }

    fn check_partition(fa: &FoldAssignment) {
        let n = fa.n();
        // folds partition 1..n
        assert!(fa.fold_of.iter().all(|&f| f >= 1 && f <= fa.k));
        // strata partition too, and each fold holds at most one index per stratum
        let mut seen = vec![false; n];
        for s in &fa.strata {
            for &i in s {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
        for s in &fa.strata {
            let mut per_fold = vec![0usize; fa.k + 1];
            for &i in s {
                per_fold[fa.fold_of[i]] += 1;
            }
            for f in 1..=fa.k {
                assert!(per_fold[f] <= 1);
                if s.len() == fa.k {
                    assert_eq!(per_fold[f], 1);
                }
            }
        }
    }

    #[test]
    fn four_points_two_folds() {
        let scores = [0.0, 10.0, 1.0, 11.0];
        let fa = stratified_folds(&scores, 2, 7).unwrap();
        check_partition(&fa);
        assert_eq!(fa.strata.len(), 2);
        // low stratum = indices {0, 2}, high = {1, 3}; each fold gets one of each
        for f in 1..=2 {
            let rows = fa.fold_rows(f);
            assert_eq!(rows.len(), 2);
            assert!(rows.iter().any(|&i| i == 0 || i == 2));
            assert!(rows.iter().any(|&i| i == 1 || i == 3));
        }
    }

    #[test]
    fn equal_scores_partition_and_determinism() {
        let scores = [1.0; 10];
        let a = stratified_folds(&scores, 5, 99).unwrap();
        let b = stratified_folds(&scores, 5, 99).unwrap();
        assert_eq!(a, b);
        check_partition(&a);
        for f in 1..=5 {
            assert_eq!(a.fold_rows(f).len(), 2);
        }
    }

    #[test]
    fn non_divisible_strata_and_fold_sizes() {
        let scores: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let fa = stratified_folds(&scores, 3, 5).unwrap();
        check_partition(&fa);
        let sizes: Vec<usize> = fa.strata.iter().map(|s| s.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
        // fold 1 draws from all four strata, folds 2 and 3 from the first three
        let fold_sizes: Vec<usize> = (1..=3).map(|f| fa.fold_rows(f).len()).collect();
        assert_eq!(fold_sizes, vec![4, 3, 3]);
    }

    #[test]
    fn bad_k_rejected() {
        let scores = [1.0, 2.0, 3.0];
        assert!(matches!(stratified_folds(&scores, 1, 0), Err(Error::BadK { .. })));
        assert!(matches!(stratified_folds(&scores, 4, 0), Err(Error::BadK { .. })));
    }

    #[test]
    fn inflated_block_spreads_evenly() {
        // q = 20% of points carry inflated scores; every fold's share of them
        // must deviate from q * fold_size by at most 1
        for (n, k) in [(100usize, 5usize), (103, 5), (60, 4)] {
            let q = 0.2;
            let n_hot = (q * n as f64).round() as usize;
            let scores: Vec<f64> = (0..n)
                .map(|i| if i < n_hot { 1e3 + i as f64 } else { i as f64 * 1e-3 })
                .collect();
            let fa = stratified_folds(&scores, k, 1234).unwrap();
            check_partition(&fa);
            for f in 1..=k {
                let rows = fa.fold_rows(f);
                let hot = rows.iter().filter(|&&i| i < n_hot).count() as f64;
                let expected = q * rows.len() as f64;
                assert!(
                    (hot - expected).abs() <= 1.0,
                    "fold {f}: {hot} hot rows, expected about {expected}"
                );
            }
        }
    }

    fn linear_data(seed: u64, n: usize, p: usize, noise: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-2.0..2.0));
        let beta = Array1::from_shape_fn(p, |j| (j as f64 + 1.0) * 0.8);
        let y = x.dot(&beta)
            + Array1::from_shape_fn(n, |_| if noise > 0.0 { rng.gen_range(-noise..noise) } else { 0.0 });
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn cv_error_zero_on_noiseless_data() {
        let data = linear_data(3, 24, 2, 0.0);
        let scores: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let folds = stratified_folds(&scores, 4, 5).unwrap();
        let mut settings = EstimatorSettings::new(0.0, 0.0);
        settings.solver.coef_tol = 1e-13;
        let cv = cv_error(&data, &folds, 0.0, 0.0, &settings).unwrap();
        assert!(cv <= 1e-16, "cv = {cv}");
    }

    #[test]
    fn cv_error_null_model_at_huge_lambda() {
        let data = linear_data(8, 400, 3, 0.5);
        // center y so the null model is meaningful
        let y_mean = data.y().sum() / data.n() as f64;
        let data = Dataset::new(data.x().clone(), data.y().mapv(|v| v - y_mean)).unwrap();
        let scores: Vec<f64> = (0..400).map(|i| (i * 7 % 13) as f64).collect();
        let folds = stratified_folds(&scores, 5, 2).unwrap();
        let settings = EstimatorSettings::new(1.0, 0.0);
        let cv = cv_error(&data, &folds, 1.0, 1e6, &settings).unwrap();
        let mean_sq = data.y().iter().map(|v| v * v).sum::<f64>() / data.n() as f64;
        assert!(
            (cv - mean_sq).abs() / mean_sq < 0.05,
            "cv {cv} vs mean y^2 {mean_sq}"
        );
    }

    #[test]
    fn duplicate_grid_entries_share_results() {
        let data = linear_data(5, 30, 2, 0.4);
        let settings = EstimatorSettings::new(1.0, 0.0);
        let base = build_lambda_grid(&data, 4).unwrap();
        let grid = vec![base[0], base[2], base[0], base[3], base[2]];
        let r = tune_lambda_on_grid(&data, 1.0, &grid, 3, 11, &settings).unwrap();
        assert_eq!(r.cv_error[0], r.cv_error[2]);
        assert_eq!(r.cv_error[1], r.cv_error[4]);
    }

    #[test]
    fn noiseless_strong_signal_prefers_small_lambda() {
        let data = linear_data(21, 40, 3, 0.0);
        let mut settings = EstimatorSettings::new(0.0, 0.0);
        settings.solver.coef_tol = 1e-12;
        let r = tune_lambda(&data, 0.0, 4, 12, 3, &settings).unwrap();
        // errors fall essentially monotonically toward small lambda...
        for w in r.cv_error.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-18, "{} -> {}", w[0], w[1]);
        }
        // ...and the winner sits at or near the small end of the grid
        assert!(r.best_index + 2 >= r.lambda_grid.len() - 1);
        assert!(r.cv_error[0] > r.cv_error[r.best_index] * 10.0);
    }

    #[test]
    fn tune_is_deterministic() {
        let data = linear_data(9, 36, 3, 0.6);
        let settings = EstimatorSettings::new(0.5, 0.0);
        let a = tune_lambda(&data, 0.5, 4, 8, 42, &settings).unwrap();
        let b = tune_lambda(&data, 0.5, 4, 8, 42, &settings).unwrap();
        assert_eq!(a, b);
        let c = tune_lambda(&data, 0.5, 4, 8, 43, &settings).unwrap();
        assert_eq!(a.lambda_grid, c.lambda_grid);
    }

    #[test]
    fn grid_spans_four_decades() {
        let data = linear_data(2, 30, 2, 0.3);
        let grid = build_lambda_grid(&data, 50).unwrap();
        assert_eq!(grid.len(), 50);
        assert_close(grid[49] / grid[0], 1e-4, 1e-12);
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn plain_lasso_tuner_runs_and_is_deterministic() {
        let data = linear_data(6, 40, 3, 0.5);
        let solver = SolverSettings::default();
        let a = tune_lambda_lasso(&data, 5, 10, 7, &solver).unwrap();
        let b = tune_lambda_lasso(&data, 5, 10, 7, &solver).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lambda_grid.len(), 10);
        assert!(matches!(
            tune_lambda_lasso(&data, 1, 10, 7, &solver),
            Err(Error::BadK { .. })
        ));
    }

    #[test]
    fn trimmed_mean_drops_upper_tail() {
        let v = vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1000.0];
        assert_close(trimmed_mean_upper10(&v), 1.0, 1e-12);
    }
}
