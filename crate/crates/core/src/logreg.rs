//! Multinomial logistic regression and its exact embedding in the
//! discriminative Naive Bayes family with linear-softmax posterior columns.
//!
//! The forward map collapses per-position intercepts and the prior into one
//! bias, `b_i = (1−T) ln π(i) + Σ_t c_i^(t)`, and stacks the slopes into
//! `W_i = [a_i^(1), …, a_i^(T)]`. The reverse map is not unique; we take the
//! slopes from `W`, let the caller pick `π`, and split the remaining bias
//! evenly across positions.

use crate::error::{Error, Result};
use crate::naive_bayes::DiscriminativeNbModel;
use crate::numeric::{normalize_log_slice, LabelSpace, ProbabilityVector};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegressionModel {
    labels: LabelSpace,
    /// `N × T`, row `i` is `W_i`.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl LogisticRegressionModel {
    pub fn new(labels: LabelSpace, weights: Vec<Vec<f64>>, biases: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if weights.len() != n {
            return Err(Error::DimensionMismatch {
                what: "weight rows",
                expected: n,
                found: weights.len(),
            });
        }
        if biases.len() != n {
            return Err(Error::DimensionMismatch {
                what: "bias length",
                expected: n,
                found: biases.len(),
            });
        }
        let t_len = weights[0].len();
        if t_len == 0 {
            return Err(Error::DimensionMismatch {
                what: "number of positions (T >= 1)",
                expected: 1,
                found: 0,
            });
        }
        for row in &weights {
            if row.len() != t_len {
                return Err(Error::DimensionMismatch {
                    what: "weight row length",
                    expected: t_len,
                    found: row.len(),
                });
            }
        }
        if weights
            .iter()
            .flatten()
            .chain(&biases)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("logistic regression parameters"));
        }
        Ok(Self {
            labels,
            weights,
            biases,
        })
    }

    pub fn labels(&self) -> &LabelSpace {
        &self.labels
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn n_positions(&self) -> usize {
        self.weights[0].len()
    }

    /// `W · y + b`
    pub fn logits(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n_positions() {
            return Err(Error::DimensionMismatch {
                what: "observation length",
                expected: self.n_positions(),
                found: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(y).map(|(wi, yi)| wi * yi).sum::<f64>() + b)
            .collect())
    }

    pub fn posterior(&self, y: &[f64]) -> Result<ProbabilityVector> {
        normalize_log_slice(&self.logits(y)?)
    }

    /// Re-expresses this model as a discriminative Naive Bayes under the
    /// given prior.
    pub fn to_discriminative_nb(&self, prior: &ProbabilityVector) -> Result<DiscriminativeNbModel> {
        lr_to_nb(self, prior)
    }
}

/// Collapses a linear-softmax discriminative Naive Bayes into the logistic
/// regression with identical posteriors.
pub fn nb_to_lr(model: &DiscriminativeNbModel) -> Result<LogisticRegressionModel> {
    let exponent = 1.0 - model.n_positions() as f64;
    let prior = model.prior();
    if let Some(label) = prior.first_zero() {
        return Err(Error::ZeroPrior { label });
    }
    let biases = (0..model.n_labels())
        .map(|i| exponent * prior[i].ln() + model.intercepts()[i].iter().sum::<f64>())
        .collect();
    LogisticRegressionModel::new(model.labels().clone(), model.slopes().to_vec(), biases)
}

/// One discriminative Naive Bayes with the same posteriors as `model`:
/// `a_i^(t) = W_i[t]` and `c_i^(t) = (b_i − (1−T) ln π(i)) / T`.
pub fn lr_to_nb(
    model: &LogisticRegressionModel,
    prior: &ProbabilityVector,
) -> Result<DiscriminativeNbModel> {
    let n = model.n_labels();
    if prior.len() != n {
        return Err(Error::DimensionMismatch {
            what: "prior length",
            expected: n,
            found: prior.len(),
        });
    }
    if let Some(label) = prior.first_zero() {
        return Err(Error::ZeroPrior { label });
    }
    let t_len = model.n_positions();
    let exponent = 1.0 - t_len as f64;
    let intercepts = (0..n)
        .map(|i| {
            let c = (model.biases()[i] - exponent * prior[i].ln()) / t_len as f64;
            vec![c; t_len]
        })
        .collect();
    DiscriminativeNbModel::new(
        model.labels().clone(),
        prior.clone(),
        model.weights().to_vec(),
        intercepts,
    )
}
