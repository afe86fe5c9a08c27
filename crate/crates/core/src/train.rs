//! Gradient-descent training of the linear-softmax discriminative Naive
//! Bayes by minimizing the mean cross-entropy of its posterior.
//!
//! Per sample, with `u_t(i) = a_i^(t) y_t + c_i^(t)` and
//! `s(i) = (1−T) ln π(i) + Σ_t [u_t(i) − lse_k u_t(k)]`, the loss is
//! `lse(s) − s(label)`. Writing `r = softmax(s) − onehot(label)`, the
//! gradients are `∂/∂a_i^(t) = r_i y_t`, `∂/∂c_i^(t) = r_i` (the per-position
//! normalizers drop out because `Σ_i r_i = 0`) and `∂/∂ln π(i) = (1−T) r_i`.
//! The prior is trained through unconstrained logits `z` with
//! `ln π = log_softmax(z)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logreg::LogisticRegressionModel;
use crate::naive_bayes::DiscriminativeNbModel;
use crate::numeric::{log_normalize_in_place, logsumexp, normalize_log_slice, LabelSpace};

/// A labelled real-valued observation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVector {
    pub label: usize,
    pub features: Vec<f64>,
}

impl LabeledVector {
    pub fn new(label: usize, features: Vec<f64>) -> Self {
        Self { label, features }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchSize {
    Full,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: BatchSize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            batch_size: BatchSize::Full,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == BatchSize::Fixed(0) {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    /// Mean training cross-entropy at the initialization.
    pub initial_loss: f64,
    /// Mean training cross-entropy after each epoch.
    pub loss_curve: Vec<f64>,
    pub final_accuracy: f64,
}

/// Parameters with the log-prior left unconstrained, so every coordinate can
/// be perturbed independently.
#[derive(Debug, Clone, PartialEq)]
pub struct RawParams {
    /// `a[i][t]`
    pub slopes: Vec<Vec<f64>>,
    /// `c[i][t]`
    pub intercepts: Vec<Vec<f64>>,
    pub log_prior: Vec<f64>,
}

/// Same layout as [`RawParams`].
pub type Gradient = RawParams;

impl RawParams {
    pub fn from_model(model: &DiscriminativeNbModel) -> Self {
        Self {
            slopes: model.slopes().to_vec(),
            intercepts: model.intercepts().to_vec(),
            log_prior: model.prior().ln(),
        }
    }

    fn zeros(n: usize, t_len: usize) -> Self {
        Self {
            slopes: vec![vec![0.0; t_len]; n],
            intercepts: vec![vec![0.0; t_len]; n],
            log_prior: vec![0.0; n],
        }
    }

    pub fn n_labels(&self) -> usize {
        self.log_prior.len()
    }

    pub fn n_positions(&self) -> usize {
        self.slopes.first().map_or(0, Vec::len)
    }

    /// Flattened view `[a…, c…, ln π…]`, row-major.
    pub fn to_flat(&self) -> Vec<f64> {
        self.slopes
            .iter()
            .flatten()
            .chain(self.intercepts.iter().flatten())
            .chain(&self.log_prior)
            .copied()
            .collect()
    }

    pub fn from_flat(&self, flat: &[f64]) -> Self {
        let n = self.n_labels();
        let t_len = self.n_positions();
        let block = n * t_len;
        let rows = |off: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| flat[off + i * t_len..off + (i + 1) * t_len].to_vec())
                .collect()
        };
        Self {
            slopes: rows(0),
            intercepts: rows(block),
            log_prior: flat[2 * block..2 * block + n].to_vec(),
        }
    }

    /// Log-posterior over labels for one observation.
    fn log_posterior(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n_labels();
        let exponent = 1.0 - y.len() as f64;
        let mut s: Vec<f64> = self.log_prior.iter().map(|lp| exponent * lp).collect();
        for (t, &y_t) in y.iter().enumerate() {
            let u: Vec<f64> = (0..n)
                .map(|i| self.slopes[i][t] * y_t + self.intercepts[i][t])
                .collect();
            let lse = logsumexp(&u);
            for i in 0..n {
                s[i] += u[i] - lse;
            }
        }
        log_normalize_in_place(&mut s);
        s
    }

    fn check(&self, dataset: &[LabeledVector]) -> Result<()> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (k, sample) in dataset.iter().enumerate() {
            if sample.label >= self.n_labels() {
                return Err(Error::UnknownLabel(sample.label));
            }
            if sample.features.len() != self.n_positions() {
                return Err(Error::LengthMismatch {
                    sample: k,
                    expected: self.n_positions(),
                    found: sample.features.len(),
                });
            }
        }
        Ok(())
    }

    pub fn loss(&self, dataset: &[LabeledVector]) -> Result<f64> {
        self.check(dataset)?;
        let total: f64 = dataset
            .iter()
            .map(|s| -self.log_posterior(&s.features)[s.label])
            .sum();
        Ok(total / dataset.len() as f64)
    }

    pub fn gradient(&self, dataset: &[LabeledVector]) -> Result<Gradient> {
        self.check(dataset)?;
        let n = self.n_labels();
        let t_len = self.n_positions();
        let mut g = Self::zeros(n, t_len);
        let exponent = 1.0 - t_len as f64;
        for sample in dataset {
            let lp = self.log_posterior(&sample.features);
            for (i, lp_i) in lp.iter().enumerate() {
                let r = lp_i.exp() - if i == sample.label { 1.0 } else { 0.0 };
                for (t, &y_t) in sample.features.iter().enumerate() {
                    g.slopes[i][t] += r * y_t;
                    g.intercepts[i][t] += r;
                }
                g.log_prior[i] += exponent * r;
            }
        }
        let scale = 1.0 / dataset.len() as f64;
        g.slopes.iter_mut().flatten().for_each(|v| *v *= scale);
        g.intercepts.iter_mut().flatten().for_each(|v| *v *= scale);
        g.log_prior.iter_mut().for_each(|v| *v *= scale);
        Ok(g)
    }
}

/// Mean `−ln p(label | y)` under the discriminative posterior.
pub fn loss_cross_entropy(model: &DiscriminativeNbModel, dataset: &[LabeledVector]) -> Result<f64> {
    RawParams::from_model(model).loss(dataset)
}

/// Exact gradient of [`loss_cross_entropy`] in `(a, c, ln π)`, with `ln π`
/// treated as free coordinates.
pub fn gradient(model: &DiscriminativeNbModel, dataset: &[LabeledVector]) -> Result<Gradient> {
    RawParams::from_model(model).gradient(dataset)
}

/// Chain rule from `∂/∂ln π` to `∂/∂z` for `ln π = log_softmax(z)`.
pub fn prior_logit_gradient(log_prior_grad: &[f64], prior: &[f64]) -> Vec<f64> {
    let total: f64 = log_prior_grad.iter().sum();
    log_prior_grad
        .iter()
        .zip(prior)
        .map(|(g, p)| g - p * total)
        .collect()
}

/// Mean cross-entropy of a logistic regression on the same data.
pub fn lr_loss_cross_entropy(
    model: &LogisticRegressionModel,
    dataset: &[LabeledVector],
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for sample in dataset {
        if sample.label >= model.n_labels() {
            return Err(Error::UnknownLabel(sample.label));
        }
        let logits = model.logits(&sample.features)?;
        total += logsumexp(&logits) - logits[sample.label];
    }
    Ok(total / dataset.len() as f64)
}

/// Fraction of samples whose label is the posterior argmax (ties to the
/// lowest index).
pub fn accuracy(model: &DiscriminativeNbModel, dataset: &[LabeledVector]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut hits = 0usize;
    for sample in dataset {
        if model.posterior(&sample.features)?.argmax().0 == sample.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / dataset.len() as f64)
}

struct Trainer {
    slopes: Vec<Vec<f64>>,
    intercepts: Vec<Vec<f64>>,
    prior_logits: Vec<f64>,
}

impl Trainer {
    fn raw(&self) -> RawParams {
        let mut log_prior = self.prior_logits.clone();
        log_normalize_in_place(&mut log_prior);
        RawParams {
            slopes: self.slopes.clone(),
            intercepts: self.intercepts.clone(),
            log_prior,
        }
    }

    fn step(&mut self, batch: &[LabeledVector], lr: f64) -> Result<()> {
        let raw = self.raw();
        let g = raw.gradient(batch)?;
        let prior: Vec<f64> = raw.log_prior.iter().map(|v| v.exp()).collect();
        let gz = prior_logit_gradient(&g.log_prior, &prior);
        for (p, d) in self
            .slopes
            .iter_mut()
            .flatten()
            .zip(g.slopes.iter().flatten())
        {
            *p -= lr * d;
        }
        for (p, d) in self
            .intercepts
            .iter_mut()
            .flatten()
            .zip(g.intercepts.iter().flatten())
        {
            *p -= lr * d;
        }
        for (p, d) in self.prior_logits.iter_mut().zip(&gz) {
            *p -= lr * d;
        }
        Ok(())
    }

    fn into_model(self, labels: LabelSpace) -> Result<DiscriminativeNbModel> {
        let prior = normalize_log_slice(&self.prior_logits)?;
        DiscriminativeNbModel::new(labels, prior, self.slopes, self.intercepts)
    }
}

/// Plain gradient descent from `a = 0`, `c = 0`, uniform prior.
/// Deterministic for a given `config.seed`.
pub fn fit_discriminative(
    dataset: &[LabeledVector],
    n_positions: usize,
    labels: LabelSpace,
    config: &TrainConfig,
) -> Result<(DiscriminativeNbModel, TrainReport)> {
    config.validate()?;
    if n_positions == 0 {
        return Err(Error::DimensionMismatch {
            what: "number of positions (T >= 1)",
            expected: 1,
            found: 0,
        });
    }
    let n = labels.len();
    let mut trainer = Trainer {
        slopes: vec![vec![0.0; n_positions]; n],
        intercepts: vec![vec![0.0; n_positions]; n],
        prior_logits: vec![0.0; n],
    };
    let initial_loss = trainer.raw().loss(dataset)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut loss_curve = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        match config.batch_size {
            BatchSize::Full => trainer.step(dataset, config.learning_rate)?,
            BatchSize::Fixed(size) => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(size) {
                    let batch: Vec<LabeledVector> =
                        chunk.iter().map(|&k| dataset[k].clone()).collect();
                    trainer.step(&batch, config.learning_rate)?;
                }
            }
        }
        let loss = trainer.raw().loss(dataset)?;
        if !loss.is_finite() {
            return Err(Error::DivergedLoss { epoch });
        }
        loss_curve.push(loss);
    }
    let model = trainer.into_model(labels).map_err(|e| match e {
        Error::ZeroPrior { .. } | Error::NonFinite(_) => Error::DivergedLoss {
            epoch: config.epochs - 1,
        },
        other => other,
    })?;
    let final_accuracy = accuracy(&model, dataset)?;
    Ok((
        model,
        TrainReport {
            config: config.clone(),
            initial_loss,
            loss_curve,
            final_accuracy,
        },
    ))
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central differences of `RawParams::loss` on every coordinate.
pub fn finite_difference_gradient(
    params: &RawParams,
    dataset: &[LabeledVector],
    h: f64,
) -> Result<Vec<f64>> {
    let base = params.to_flat();
    let mut out = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let mut plus = base.clone();
        plus[k] += h;
        let mut minus = base.clone();
        minus[k] -= h;
        let lp = params.from_flat(&plus).loss(dataset)?;
        let lm = params.from_flat(&minus).loss(dataset)?;
        out.push((lp - lm) / (2.0 * h));
    }
    Ok(out)
}

/// Two Gaussian classes on the real line, centred at `−separation` and
/// `+separation` with unit variance, alternating labels 0 and 1.
pub fn two_class_gaussian(samples: usize, separation: f64, seed: u64) -> Vec<LabeledVector> {
    use rand_distr::{Distribution, Normal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    (0..samples)
        .map(|k| {
            let label = k % 2;
            let mean = if label == 0 { -separation } else { separation };
            LabeledVector::new(label, vec![mean + noise.sample(&mut rng)])
        })
        .collect()
}
