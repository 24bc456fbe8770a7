//! l2-regularized logistic regression trained by deterministic full-batch
//! gradient descent.
//!
//! The training objective, with labels mapped to y in {-1, +1} and the
//! intercept absorbed as a trailing constant-one feature, is
//!
//! ```text
//! L(w) = (1/n) sum_i log(1 + exp(-y_i w.x_i)) + (lambda/2) |w|^2
//! ```
//!
//! Training always starts from zero weights and uses a fixed step size, so
//! results are reproducible bit for bit.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::dataops::FeatureMatrix;
use crate::error::{Error, Result};

/// Trained logistic-regression classifier: feature weights plus intercept.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: Array1<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub converged: bool,
}

/// Gradient-descent settings.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Regularization strength; must be positive so the DP sensitivity bound
    /// stays finite.
    pub lambda: f64,
    pub max_iters: usize,
    pub step_size: f64,
    /// Stop once the gradient l2 norm falls below this.
    pub tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            max_iters: 2000,
            step_size: 0.5,
            tol: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Numerically stable logistic function, clamped to the open interval (0, 1).
pub(crate) fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Stable log(1 + exp(u)).
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// Training objective evaluated at `w` for a design matrix with the
/// intercept column already appended and labels in {-1, +1}.
pub fn objective(
    x: ArrayView2<'_, f64>,
    y_signed: ArrayView1<'_, f64>,
    w: ArrayView1<'_, f64>,
    lambda: f64,
) -> f64 {
    let n = x.nrows() as f64;
    let z = x.dot(&w);
    let data_term: f64 = z
        .iter()
        .zip(y_signed.iter())
        .map(|(&zi, &yi)| softplus(-yi * zi))
        .sum::<f64>()
        / n;
    data_term + 0.5 * lambda * w.dot(&w)
}

/// Analytic gradient of [`objective`].
pub fn objective_gradient(
    x: ArrayView2<'_, f64>,
    y_signed: ArrayView1<'_, f64>,
    w: ArrayView1<'_, f64>,
    lambda: f64,
) -> Array1<f64> {
    let n = x.nrows() as f64;
    let z = x.dot(&w);
    let residual: Array1<f64> = z
        .iter()
        .zip(y_signed.iter())
        .map(|(&zi, &yi)| -yi * sigmoid(-yi * zi))
        .collect();
    let mut grad = x.t().dot(&residual) / n;
    grad.scaled_add(lambda, &w);
    grad
}

pub(crate) fn augment_ones(rows: &Array2<f64>) -> Array2<f64> {
    let ones = Array2::<f64>::ones((rows.nrows(), 1));
    ndarray::concatenate(Axis(1), &[rows.view(), ones.view()]).expect("row counts match")
}

pub(crate) fn signed_labels(labels: &[bool]) -> Array1<f64> {
    labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect()
}

const DIVERGENCE_PATIENCE: usize = 10;

/// Gradient descent on the augmented design matrix. Returns the augmented
/// weight vector (intercept last) and whether the tolerance was reached.
pub(crate) fn train_augmented(
    x: &Array2<f64>,
    y_signed: &Array1<f64>,
    cfg: &TrainConfig,
) -> Result<(Array1<f64>, bool)> {
    let mut w = Array1::<f64>::zeros(x.ncols());
    let mut prev_loss = f64::INFINITY;
    let mut rising = 0usize;
    let mut converged = false;
    let n = x.nrows() as f64;

    for _ in 0..cfg.max_iters {
        let z = x.dot(&w);
        let loss: f64 = z
            .iter()
            .zip(y_signed.iter())
            .map(|(&zi, &yi)| softplus(-yi * zi))
            .sum::<f64>()
            / n
            + 0.5 * cfg.lambda * w.dot(&w);
        if loss > prev_loss {
            rising += 1;
            if rising >= DIVERGENCE_PATIENCE {
                return Err(Error::Training(format!(
                    "loss increased for {DIVERGENCE_PATIENCE} consecutive iterations; \
                     reduce step_size"
                )));
            }
        } else {
            rising = 0;
        }
        prev_loss = loss;

        let residual: Array1<f64> = z
            .iter()
            .zip(y_signed.iter())
            .map(|(&zi, &yi)| -yi * sigmoid(-yi * zi))
            .collect();
        let mut grad = x.t().dot(&residual) / n;
        grad.scaled_add(cfg.lambda, &w);
        if grad.dot(&grad).sqrt() < cfg.tol {
            converged = true;
            break;
        }
        w.scaled_add(-cfg.step_size, &grad);
    }
    Ok((w, converged))
}

/// Train on a dataset containing both classes.
pub fn train(data: &FeatureMatrix, cfg: &TrainConfig) -> Result<LinearModel> {
    cfg.validate()?;
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::Training("training data contains a single class".into()));
    }
    let x = augment_ones(data.rows());
    let y = signed_labels(data.labels());
    let (w_aug, converged) = train_augmented(&x, &y, cfg)?;
    let d = data.n_features();
    Ok(LinearModel {
        weights: w_aug.slice(ndarray::s![..d]).to_owned(),
        intercept: w_aug[d],
        lambda: cfg.lambda,
        converged,
    })
}

impl LinearModel {
    /// Raw decision score w.x + intercept, the log-odds of the positive class.
    pub fn score(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: x.len(),
            });
        }
        Ok(self.weights.dot(&x) + self.intercept)
    }

    /// Predicted probability of the positive class, strictly inside (0, 1).
    pub fn predict_proba(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        Ok(sigmoid(self.score(x)?))
    }

    /// Decision scores for every row of a matrix.
    pub fn scores(&self, rows: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if rows.ncols() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: rows.ncols(),
            });
        }
        Ok(rows.dot(&self.weights) + self.intercept)
    }

    /// Fraction of rows where thresholding the predicted probability at 1/2
    /// recovers the label.
    pub fn accuracy(&self, data: &FeatureMatrix) -> Result<f64> {
        let scores = self.scores(data.rows().view())?;
        let correct = scores
            .iter()
            .zip(data.labels())
            .filter(|(&z, &label)| (sigmoid(z) >= 0.5) == label)
            .count();
        Ok(correct as f64 / data.n_rows() as f64)
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.dot(&self.weights).sqrt()
    }
}
