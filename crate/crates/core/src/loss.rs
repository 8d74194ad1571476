//! The density-power-divergence objective and the softmax observation
//! weights that drive the reweighted-lasso iteration.
//!
//! For residuals r_i and scale sigma2, each observation carries the score
//! h_i = -r_i^2 / (2 sigma2). The loss is
//!
//!   Q_alpha = -log( (1/n) sum_i exp(alpha h_i) )
//!
//! and the weights are the softmax of the alpha h_i. Every exp/log here is
//! evaluated in max-subtracted form so arbitrarily large residual/scale
//! ratios stay finite.

use ndarray::Array1;

use crate::data::{residuals, Dataset};
use crate::error::{Error, Result};

/// Robustness parameter alpha >= 0 and noise scale sigma2 > 0.
///
/// alpha = 0 is accepted and yields the plain-lasso limits: zero loss and
/// uniform weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpdParams {
    alpha: f64,
    sigma2: f64,
}

impl DpdParams {
    pub fn new(alpha: f64, sigma2: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(Error::InvalidSigma(sigma2));
        }
        Ok(Self { alpha, sigma2 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// Normalized per-observation weights: nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Array1<f64>,
}

impl WeightVector {
    /// Normalizes raw nonnegative weights to sum exactly one.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidParameter("empty weight vector".into()));
        }
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
        Ok(Self {
            w: raw.iter().map(|v| v / sum).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            w: Array1::from_elem(n, 1.0 / n as f64),
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.w
    }

    pub fn as_slice(&self) -> &[f64] {
        self.w.as_slice().expect("weights are contiguous")
    }
}

/// h_i = -(y_i - x_i . beta)^2 / (2 sigma2); zero exactly when the residual
/// is zero, negative otherwise.
pub fn h_scores(data: &Dataset, beta: &Array1<f64>, params: &DpdParams) -> Result<Array1<f64>> {
    let r = residuals(data, beta, 0.0)?;
    let denom = 2.0 * params.sigma2();
    Ok(r.mapv(|v| -(v * v) / denom))
}

fn stabilized_mean_exp(scores: &Array1<f64>) -> (f64, f64) {
    // returns (max, mean of exp(score - max))
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = scores.iter().map(|s| (s - m).exp()).sum::<f64>() / scores.len() as f64;
    (m, mean)
}

/// The loss evaluated directly on a residual vector.
pub(crate) fn q_of_residuals(r: &Array1<f64>, alpha: f64, sigma2: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let denom = 2.0 * sigma2;
    let scaled = r.mapv(|v| -alpha * (v * v) / denom);
    let (m, mean) = stabilized_mean_exp(&scaled);
    -(m + mean.ln())
}

/// The softmax weights evaluated directly on a residual vector.
pub(crate) fn weights_of_residuals(r: &Array1<f64>, alpha: f64, sigma2: f64) -> WeightVector {
    let denom = 2.0 * sigma2;
    let scaled = r.mapv(|v| -alpha * (v * v) / denom);
    let m = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = scaled.iter().map(|s| (s - m).exp()).collect();
    WeightVector::from_raw(&raw).expect("softmax weights are valid by construction")
}

/// Q_alpha = -log((1/n) sum exp(alpha h_i)), always >= 0.
pub fn dpd_objective(data: &Dataset, beta: &Array1<f64>, params: &DpdParams) -> Result<f64> {
    let r = residuals(data, beta, 0.0)?;
    Ok(q_of_residuals(&r, params.alpha(), params.sigma2()))
}

/// Q_alpha plus the l1 penalty lambda * sum |beta_j|.
pub fn penalized_objective(
    data: &Dataset,
    beta: &Array1<f64>,
    params: &DpdParams,
    lambda: f64,
) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let q = dpd_objective(data, beta, params)?;
    Ok(q + lambda * beta.iter().map(|b| b.abs()).sum::<f64>())
}

/// Softmax weights w_i = exp(alpha h_i) / sum_j exp(alpha h_j).
///
/// At alpha = 0 this is the uniform vector 1/n; for alpha > 0 the weights
/// decrease with |residual|.
pub fn dpd_weights(data: &Dataset, beta: &Array1<f64>, params: &DpdParams) -> Result<WeightVector> {
    let r = residuals(data, beta, 0.0)?;
    Ok(weights_of_residuals(&r, params.alpha(), params.sigma2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2, Array2};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    /// Dataset whose residuals at beta = 0 are exactly `r`.
    fn residual_fixture(r: &[f64]) -> (Dataset, Array1<f64>) {
        let n = r.len();
        let x = Array2::zeros((n, 1)) + 1.0;
        let y = Array1::from_vec(r.to_vec());
        (Dataset::new(x, y).unwrap(), Array1::zeros(1))
    }

    #[test]
    fn h_scores_formula() {
        let (data, beta) = residual_fixture(&[0.0, 1.0, 2.0]);
        let p = DpdParams::new(1.0, 1.0).unwrap();
        let h = h_scores(&data, &beta, &p).unwrap();
        assert_eq!(h[0], 0.0);
        assert_eq!(h[1], -0.5);
        assert_eq!(h[2], -2.0);

        // residual equal to sigma gives exactly -1/2 for any sigma
        let (data, beta) = residual_fixture(&[3.0]);
        let p = DpdParams::new(0.7, 9.0).unwrap();
        let h = h_scores(&data, &beta, &p).unwrap();
        assert_eq!(h[0], -0.5);
    }

    #[test]
    fn dpd_params_rejects_bad_sigma() {
        assert!(matches!(DpdParams::new(1.0, 0.0), Err(Error::InvalidSigma(_))));
        assert!(matches!(DpdParams::new(1.0, -1.0), Err(Error::InvalidSigma(_))));
        assert!(matches!(
            DpdParams::new(-0.5, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn objective_zero_cases() {
        let (data, beta) = residual_fixture(&[0.0, 0.0, 0.0]);
        let p = DpdParams::new(1.3, 0.5).unwrap();
        assert_eq!(dpd_objective(&data, &beta, &p).unwrap(), 0.0);

        let (data, beta) = residual_fixture(&[1.0, -4.0, 2.5]);
        let p = DpdParams::new(0.0, 0.5).unwrap();
        assert_eq!(dpd_objective(&data, &beta, &p).unwrap(), 0.0);
    }

    #[test]
    fn objective_single_observation() {
        // n = 1: Q = alpha r^2 / (2 sigma2) by direct cancellation
        let (data, beta) = residual_fixture(&[3.0]);
        let p = DpdParams::new(0.8, 2.0).unwrap();
        assert_close(
            dpd_objective(&data, &beta, &p).unwrap(),
            0.8 * 9.0 / 4.0,
            1e-14,
        );
    }

    #[test]
    fn objective_two_point_value() {
        // residuals (0, sigma * sqrt(2)), alpha = 1:
        // Q = -log((1 + e^-1)/2), checked against an independent
        // high-precision evaluation.
        let sigma2 = 1.7f64;
        let r1 = (2.0 * sigma2).sqrt();
        let (data, beta) = residual_fixture(&[0.0, r1]);
        let p = DpdParams::new(1.0, sigma2).unwrap();
        assert_close(
            dpd_objective(&data, &beta, &p).unwrap(),
            0.37988549304172248,
            1e-12,
        );
    }

    #[test]
    fn penalized_objective_cases() {
        let (data, beta) = residual_fixture(&[1.0, -2.0]);
        let p = DpdParams::new(1.0, 1.0).unwrap();
        // beta = 0: penalty vanishes
        assert_eq!(
            penalized_objective(&data, &beta, &p, 7.5).unwrap(),
            dpd_objective(&data, &beta, &p).unwrap()
        );
        // lambda = 0: equals the bare objective
        let b = arr1(&[0.5]);
        assert_eq!(
            penalized_objective(&data, &b, &p, 0.0).unwrap(),
            dpd_objective(&data, &b, &p).unwrap()
        );
        // zero residuals: objective is exactly the penalty
        let x = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let b = arr1(&[1.0, -2.0]);
        let y = x.dot(&b);
        let data = Dataset::new(x, y).unwrap();
        assert_close(penalized_objective(&data, &b, &p, 0.5).unwrap(), 1.5, 1e-14);
    }

    #[test]
    fn weights_uniform_cases() {
        let (data, beta) = residual_fixture(&[1.0, -5.0, 0.3]);
        let p = DpdParams::new(0.0, 1.0).unwrap();
        let w = dpd_weights(&data, &beta, &p).unwrap();
        for v in w.as_array() {
            assert_close(*v, 1.0 / 3.0, 1e-15);
        }
        // equal magnitudes at alpha > 0 are symmetric
        let (data, beta) = residual_fixture(&[2.0, -2.0, 2.0, -2.0]);
        let p = DpdParams::new(1.5, 0.7).unwrap();
        let w = dpd_weights(&data, &beta, &p).unwrap();
        for v in w.as_array() {
            assert_close(*v, 0.25, 1e-15);
        }
    }

    #[test]
    fn weights_two_point_value() {
        // residuals (0, sigma sqrt 2), alpha 1 -> (1/(1+e^-1), e^-1/(1+e^-1))
        let sigma2 = 0.9f64;
        let (data, beta) = residual_fixture(&[0.0, (2.0 * sigma2).sqrt()]);
        let p = DpdParams::new(1.0, sigma2).unwrap();
        let w = dpd_weights(&data, &beta, &p).unwrap();
        assert_close(w.as_array()[0], 0.7310585786300049, 1e-12);
        assert_close(w.as_array()[1], 0.2689414213699951, 1e-12);
    }

    #[test]
    fn weights_sum_to_one_and_monotone() {
        let (data, beta) = residual_fixture(&[0.1, -0.4, 2.0, -7.0, 0.0]);
        let p = DpdParams::new(1.2, 0.8).unwrap();
        let w = dpd_weights(&data, &beta, &p).unwrap();
        assert_close(w.as_array().sum(), 1.0, 1e-12);
        // strictly dominated by |residual| ordering: |r_i| < |r_j| => w_i > w_j
        let r = [0.1f64, -0.4, 2.0, -7.0, 0.0];
        for i in 0..r.len() {
            for j in 0..r.len() {
                if r[i].abs() < r[j].abs() {
                    assert!(w.as_array()[i] > w.as_array()[j]);
                }
            }
        }
    }

    #[test]
    fn weights_shift_invariance() {
        // adding a constant to every h_i leaves the softmax unchanged; realized
        // here by scaling all residuals^2 and sigma2 together
        let r = [0.5f64, -1.0, 3.0, 0.2];
        let (data, beta) = residual_fixture(&r);
        let p = DpdParams::new(1.0, 1.0).unwrap();
        let w1 = dpd_weights(&data, &beta, &p).unwrap();

        let scaled: Vec<f64> = r.iter().map(|v| v * 10.0).collect();
        let (data2, beta2) = residual_fixture(&scaled);
        let p2 = DpdParams::new(1.0, 100.0).unwrap();
        let w2 = dpd_weights(&data2, &beta2, &p2).unwrap();
        for (a, b) in w1.as_array().iter().zip(w2.as_array().iter()) {
            assert_close(*a, *b, 1e-14);
        }
    }

    #[test]
    fn l2e_identity_at_alpha_one() {
        // alpha = 1 reduces the loss to -log mean exp(-r^2 / (2 sigma2))
        let r = [0.3f64, -2.0, 1.1];
        let sigma2 = 0.6;
        let (data, beta) = residual_fixture(&r);
        let p = DpdParams::new(1.0, sigma2).unwrap();
        let direct = -(r
            .iter()
            .map(|v| (-(v * v) / (2.0 * sigma2)).exp())
            .sum::<f64>()
            / r.len() as f64)
            .ln();
        assert_close(dpd_objective(&data, &beta, &p).unwrap(), direct, 1e-14);
    }

    #[test]
    fn weights_stable_at_extreme_ratios() {
        // alpha r^2 / (2 sigma2) up to 1e6 must stay finite and normalized
        let (data, beta) = residual_fixture(&[0.0, 1e3, -1.4142e3, 2.5e2]);
        let p = DpdParams::new(2.0, 1.0).unwrap();
        let w = dpd_weights(&data, &beta, &p).unwrap();
        assert!(w.as_array().iter().all(|v| v.is_finite() && *v >= 0.0));
        assert_close(w.as_array().sum(), 1.0, 1e-12);
        let q = dpd_objective(&data, &beta, &p).unwrap();
        assert!(q.is_finite() && q >= 0.0);
    }

    #[test]
    fn objective_nonnegative_random() {
        let (data, beta) = residual_fixture(&[0.7, -0.1, 5.0, -3.3, 0.9]);
        for &alpha in &[0.0, 0.25, 1.0, 2.0] {
            for &s2 in &[1e-6, 0.5, 10.0] {
                let p = DpdParams::new(alpha, s2).unwrap();
                assert!(dpd_objective(&data, &beta, &p).unwrap() >= 0.0);
            }
        }
    }
}
