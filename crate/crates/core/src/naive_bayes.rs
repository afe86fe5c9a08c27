//! Naive Bayes with `T` conditionally independent observations.
//!
//! The model can be evaluated two ways. The generative route scores each
//! label by the joint weight `π(i) ∏_t b_i^(t)(y_t)` and normalizes. The
//! discriminative route only needs the prior and the single-observation
//! posteriors `L_t(i) = p(x = i | y_t)`, scoring each label by
//! `δ(i) = π(i)^(1−T) ∏_t L_t(i)`. Both give the same posterior whenever the
//! columns are derived from the same joint law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    logsumexp, normalize_log, normalize_log_slice, LabelSpace, LogWeightVector,
    ObservationAlphabet, ProbabilityVector,
};

/// One training example: a label index and one symbol index per position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSequence {
    pub label: usize,
    pub symbols: Vec<usize>,
}

impl LabeledSequence {
    pub fn new(label: usize, symbols: Vec<usize>) -> Self {
        Self { label, symbols }
    }
}

/// Pattern counts from a labelled dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientStatistics {
    pub sample_count: u64,
    /// `f(i)`
    pub label_counts: Vec<u64>,
    /// `f_i^(t)(s)`, indexed `[t][i][s]`
    pub emission_counts: Vec<Vec<Vec<u64>>>,
}

impl SufficientStatistics {
    pub fn count(
        labels: &LabelSpace,
        alphabets: &[ObservationAlphabet],
        dataset: &[LabeledSequence],
    ) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = labels.len();
        let t_len = alphabets.len();
        let mut label_counts = vec![0u64; n];
        let mut emission_counts: Vec<Vec<Vec<u64>>> = alphabets
            .iter()
            .map(|a| vec![vec![0u64; a.len()]; n])
            .collect();
        for (k, sample) in dataset.iter().enumerate() {
            if sample.label >= n {
                return Err(Error::UnknownLabel(sample.label));
            }
            if sample.symbols.len() != t_len {
                return Err(Error::LengthMismatch {
                    sample: k,
                    expected: t_len,
                    found: sample.symbols.len(),
                });
            }
            label_counts[sample.label] += 1;
            for (t, &s) in sample.symbols.iter().enumerate() {
                if s >= alphabets[t].len() {
                    return Err(Error::UnknownSymbol {
                        position: t,
                        symbol: s,
                    });
                }
                emission_counts[t][sample.label][s] += 1;
            }
        }
        Ok(Self {
            sample_count: dataset.len() as u64,
            label_counts,
            emission_counts,
        })
    }
}

/// Generative parameterization: prior `π` and per-position emission tables.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    labels: LabelSpace,
    alphabets: Vec<ObservationAlphabet>,
    prior: ProbabilityVector,
    /// `[t][i]` is the row `b_i^(t)(·)` over the alphabet of position `t`.
    emissions: Vec<Vec<ProbabilityVector>>,
}

impl NaiveBayesModel {
    pub fn new(
        labels: LabelSpace,
        alphabets: Vec<ObservationAlphabet>,
        prior: ProbabilityVector,
        emissions: Vec<Vec<ProbabilityVector>>,
    ) -> Result<Self> {
        let n = labels.len();
        if alphabets.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "number of positions (T >= 1)",
                expected: 1,
                found: 0,
            });
        }
        if prior.len() != n {
            return Err(Error::DimensionMismatch {
                what: "prior length",
                expected: n,
                found: prior.len(),
            });
        }
        if emissions.len() != alphabets.len() {
            return Err(Error::DimensionMismatch {
                what: "emission tables",
                expected: alphabets.len(),
                found: emissions.len(),
            });
        }
        for (table, alphabet) in emissions.iter().zip(&alphabets) {
            if table.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "emission rows",
                    expected: n,
                    found: table.len(),
                });
            }
            for row in table {
                if row.len() != alphabet.len() {
                    return Err(Error::DimensionMismatch {
                        what: "emission row length",
                        expected: alphabet.len(),
                        found: row.len(),
                    });
                }
            }
        }
        Ok(Self {
            labels,
            alphabets,
            prior,
            emissions,
        })
    }

    /// Maximum-likelihood fit by counting, with optional additive smoothing
    /// `alpha` applied to both the prior and the emission counts.
    ///
    /// With `alpha = 0` a label that never occurs gets `π(i) = 0` and a
    /// uniform emission row, since its counts carry no information.
    pub fn fit_mle(
        labels: LabelSpace,
        alphabets: Vec<ObservationAlphabet>,
        dataset: &[LabeledSequence],
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "smoothing alpha must be finite and nonnegative, got {alpha}"
            )));
        }
        let stats = SufficientStatistics::count(&labels, &alphabets, dataset)?;
        Self::from_statistics(labels, alphabets, &stats, alpha)
    }

    pub fn from_statistics(
        labels: LabelSpace,
        alphabets: Vec<ObservationAlphabet>,
        stats: &SufficientStatistics,
        alpha: f64,
    ) -> Result<Self> {
        let n = labels.len();
        let prior_den = stats.sample_count as f64 + n as f64 * alpha;
        let prior = ProbabilityVector::new(
            stats
                .label_counts
                .iter()
                .map(|&f| (f as f64 + alpha) / prior_den)
                .collect(),
        )?;
        let mut emissions = Vec::with_capacity(alphabets.len());
        for (t, alphabet) in alphabets.iter().enumerate() {
            let m = alphabet.len();
            let mut table = Vec::with_capacity(n);
            for i in 0..n {
                let den = stats.label_counts[i] as f64 + m as f64 * alpha;
                let row = if den > 0.0 {
                    stats.emission_counts[t][i]
                        .iter()
                        .map(|&f| (f as f64 + alpha) / den)
                        .collect()
                } else {
                    vec![1.0 / m as f64; m]
                };
                table.push(ProbabilityVector::new(row)?);
            }
            emissions.push(table);
        }
        Self::new(labels, alphabets, prior, emissions)
    }

    pub fn labels(&self) -> &LabelSpace {
        &self.labels
    }

    pub fn alphabets(&self) -> &[ObservationAlphabet] {
        &self.alphabets
    }

    pub fn prior(&self) -> &ProbabilityVector {
        &self.prior
    }

    pub fn emissions(&self) -> &[Vec<ProbabilityVector>] {
        &self.emissions
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn n_positions(&self) -> usize {
        self.alphabets.len()
    }

    /// `b_i^(t)(s)`
    pub fn emission(&self, t: usize, label: usize, symbol: usize) -> f64 {
        self.emissions[t][label][symbol]
    }

    fn check_observation(&self, observation: &[usize]) -> Result<()> {
        if observation.len() != self.n_positions() {
            return Err(Error::DimensionMismatch {
                what: "observation length",
                expected: self.n_positions(),
                found: observation.len(),
            });
        }
        for (t, &s) in observation.iter().enumerate() {
            if s >= self.alphabets[t].len() {
                return Err(Error::UnknownSymbol {
                    position: t,
                    symbol: s,
                });
            }
        }
        Ok(())
    }

    /// `ln p(x = i, y_1:T)` for every label.
    pub fn joint_log_weights(&self, observation: &[usize]) -> Result<Vec<f64>> {
        self.check_observation(observation)?;
        Ok((0..self.n_labels())
            .map(|i| {
                observation
                    .iter()
                    .enumerate()
                    .fold(self.prior[i].ln(), |acc, (t, &s)| {
                        acc + self.emission(t, i, s).ln()
                    })
            })
            .collect())
    }

    /// Posterior through the joint law and Bayes' rule.
    pub fn generative_posterior(&self, observation: &[usize]) -> Result<ProbabilityVector> {
        let logw = self.joint_log_weights(observation)?;
        normalize_log_slice(&logw).map_err(|e| match e {
            Error::AllZeroWeights => Error::ZeroEvidence,
            other => other,
        })
    }

    /// Training-set joint log-likelihood `Σ_k ln p(x_k, y_k)`.
    pub fn joint_log_likelihood(&self, dataset: &[LabeledSequence]) -> Result<f64> {
        let mut total = 0.0;
        for sample in dataset {
            if sample.label >= self.n_labels() {
                return Err(Error::UnknownLabel(sample.label));
            }
            total += self.joint_log_weights(&sample.symbols)?[sample.label];
        }
        Ok(total)
    }

    /// Model-implied symbol marginals `p(y_t = s) = Σ_j π(j) b_j^(t)(s)`,
    /// indexed `[t][s]`.
    pub fn symbol_marginals(&self) -> Vec<Vec<f64>> {
        self.alphabets
            .iter()
            .enumerate()
            .map(|(t, a)| {
                (0..a.len())
                    .map(|s| {
                        let logs: Vec<f64> = (0..self.n_labels())
                            .map(|j| self.prior[j].ln() + self.emission(t, j, s).ln())
                            .collect();
                        logsumexp(&logs).exp()
                    })
                    .collect()
            })
            .collect()
    }

    /// Inverts every emission table into single-observation posteriors
    /// `L_s^(t)(i) = π(i) b_i^(t)(s) / p(y_t = s)`.
    ///
    /// `marginals` overrides the model-implied `p(y_t = s)`; each resulting
    /// column must still land on the simplex. Symbols with zero marginal get
    /// no column and report [`Error::ZeroMarginal`] when looked up.
    pub fn to_discriminative(&self, marginals: Option<&[Vec<f64>]>) -> Result<TabularPosteriors> {
        if let Some(label) = self.prior.first_zero() {
            return Err(Error::ZeroPrior { label });
        }
        if let Some(m) = marginals {
            if m.len() != self.n_positions() {
                return Err(Error::DimensionMismatch {
                    what: "marginal tables",
                    expected: self.n_positions(),
                    found: m.len(),
                });
            }
            for (t, row) in m.iter().enumerate() {
                if row.len() != self.alphabets[t].len() {
                    return Err(Error::DimensionMismatch {
                        what: "marginal row length",
                        expected: self.alphabets[t].len(),
                        found: row.len(),
                    });
                }
            }
        }
        let log_prior = self.prior.ln();
        let mut columns = Vec::with_capacity(self.n_positions());
        for (t, alphabet) in self.alphabets.iter().enumerate() {
            let mut by_symbol = Vec::with_capacity(alphabet.len());
            for s in 0..alphabet.len() {
                let log_joint: Vec<f64> = (0..self.n_labels())
                    .map(|i| log_prior[i] + self.emission(t, i, s).ln())
                    .collect();
                let log_marginal = match marginals {
                    Some(m) => m[t][s].ln(),
                    None => logsumexp(&log_joint),
                };
                let column = if log_marginal == f64::NEG_INFINITY {
                    None
                } else if !log_marginal.is_finite() {
                    return Err(Error::NonFinite("symbol marginal"));
                } else {
                    Some(ProbabilityVector::new(
                        log_joint.iter().map(|v| (v - log_marginal).exp()).collect(),
                    )?)
                };
                by_symbol.push(column);
            }
            columns.push(by_symbol);
        }
        Ok(TabularPosteriors {
            prior: self.prior.clone(),
            columns,
        })
    }
}

/// Discrete single-observation posteriors `L_s^(t)(·)` for every position
/// and symbol, paired with the prior they were derived under.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPosteriors {
    prior: ProbabilityVector,
    columns: Vec<Vec<Option<ProbabilityVector>>>,
}

impl TabularPosteriors {
    pub fn prior(&self) -> &ProbabilityVector {
        &self.prior
    }

    pub fn n_positions(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, position: usize, symbol: usize) -> Result<&ProbabilityVector> {
        let by_symbol = self.columns.get(position).ok_or(Error::DimensionMismatch {
            what: "position",
            expected: self.columns.len(),
            found: position + 1,
        })?;
        match by_symbol.get(symbol) {
            None => Err(Error::UnknownSymbol { position, symbol }),
            Some(None) => Err(Error::ZeroMarginal { position, symbol }),
            Some(Some(c)) => Ok(c),
        }
    }

    /// The columns selected by an observation sequence.
    pub fn columns_for(&self, observation: &[usize]) -> Result<Vec<&ProbabilityVector>> {
        if observation.len() != self.n_positions() {
            return Err(Error::DimensionMismatch {
                what: "observation length",
                expected: self.n_positions(),
                found: observation.len(),
            });
        }
        observation
            .iter()
            .enumerate()
            .map(|(t, &s)| self.column(t, s))
            .collect()
    }

    pub fn posterior(&self, observation: &[usize]) -> Result<ProbabilityVector> {
        discriminative_posterior(&self.prior, &self.columns_for(observation)?)
    }
}

/// Log of the discriminative score `δ(i) = π(i)^(1−T) ∏_t L_t(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub log_delta: LogWeightVector,
}

impl ScoreVector {
    pub fn normalize(&self) -> Result<ProbabilityVector> {
        normalize_log(&self.log_delta)
    }
}

/// Builds `ln δ` from a prior and `T` nonnegative columns. The columns need
/// not be normalized; any positive rescaling of one column cancels in the
/// posterior.
pub fn delta_scores(prior: &ProbabilityVector, columns: &[&[f64]]) -> Result<ScoreVector> {
    if let Some(label) = prior.first_zero() {
        return Err(Error::ZeroPrior { label });
    }
    let n = prior.len();
    let exponent = 1.0 - columns.len() as f64;
    let mut log_delta: Vec<f64> = prior.as_slice().iter().map(|p| exponent * p.ln()).collect();
    for col in columns {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                what: "posterior column length",
                expected: n,
                found: col.len(),
            });
        }
        for (acc, &l) in log_delta.iter_mut().zip(col.iter()) {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidProbability(format!(
                    "posterior column entry {l} is not a finite nonnegative weight"
                )));
            }
            *acc += l.ln();
        }
    }
    Ok(ScoreVector {
        log_delta: LogWeightVector::new(log_delta)?,
    })
}

/// Posterior from the prior and the single-observation posterior columns,
/// without touching any emission or observation law.
pub fn discriminative_posterior(
    prior: &ProbabilityVector,
    columns: &[&ProbabilityVector],
) -> Result<ProbabilityVector> {
    let raw: Vec<&[f64]> = columns.iter().map(|c| c.as_slice()).collect();
    delta_scores(prior, &raw)?.normalize()
}

/// Discriminative Naive Bayes over real observations, where every
/// single-observation posterior is a linear softmax
/// `L_t(i) ∝ exp(a_i^(t) y_t + c_i^(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminativeNbModel {
    labels: LabelSpace,
    prior: ProbabilityVector,
    /// `a[i][t]`
    slopes: Vec<Vec<f64>>,
    /// `c[i][t]`
    intercepts: Vec<Vec<f64>>,
}

impl DiscriminativeNbModel {
    pub fn new(
        labels: LabelSpace,
        prior: ProbabilityVector,
        slopes: Vec<Vec<f64>>,
        intercepts: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = labels.len();
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
        for (what, m) in [("slope rows", &slopes), ("intercept rows", &intercepts)] {
            if m.len() != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    found: m.len(),
                });
            }
        }
        let t_len = slopes[0].len();
        if t_len == 0 {
            return Err(Error::DimensionMismatch {
                what: "number of positions (T >= 1)",
                expected: 1,
                found: 0,
            });
        }
        for row in slopes.iter().chain(&intercepts) {
            if row.len() != t_len {
                return Err(Error::DimensionMismatch {
                    what: "parameter row length",
                    expected: t_len,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("discriminative parameters"));
            }
        }
        Ok(Self {
            labels,
            prior,
            slopes,
            intercepts,
        })
    }

    /// All-zero slopes and intercepts with a uniform prior.
    pub fn symmetric(labels: LabelSpace, n_positions: usize) -> Result<Self> {
        let n = labels.len();
        let prior = ProbabilityVector::uniform(n)?;
        Self::new(
            labels,
            prior,
            vec![vec![0.0; n_positions]; n],
            vec![vec![0.0; n_positions]; n],
        )
    }

    pub fn labels(&self) -> &LabelSpace {
        &self.labels
    }

    pub fn prior(&self) -> &ProbabilityVector {
        &self.prior
    }

    pub fn slopes(&self) -> &[Vec<f64>] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[Vec<f64>] {
        &self.intercepts
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn n_positions(&self) -> usize {
        self.slopes[0].len()
    }

    fn check_observation(&self, y: &[f64]) -> Result<()> {
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
        Ok(())
    }

    /// `ln L_t(·)` evaluated at the real observation `y_t`.
    pub fn log_posterior_column(&self, t: usize, y_t: f64) -> Vec<f64> {
        let logits: Vec<f64> = (0..self.n_labels())
            .map(|i| self.slopes[i][t] * y_t + self.intercepts[i][t])
            .collect();
        let lse = logsumexp(&logits);
        logits.into_iter().map(|u| u - lse).collect()
    }

    pub fn posterior_column(&self, t: usize, y_t: f64) -> Result<ProbabilityVector> {
        normalize_log_slice(&self.log_posterior_column(t, y_t))
    }

    /// `ln δ(i)` for a real observation vector.
    pub fn scores(&self, y: &[f64]) -> Result<ScoreVector> {
        self.check_observation(y)?;
        let exponent = 1.0 - self.n_positions() as f64;
        let mut log_delta: Vec<f64> = self
            .prior
            .as_slice()
            .iter()
            .map(|p| exponent * p.ln())
            .collect();
        for (t, &y_t) in y.iter().enumerate() {
            for (acc, l) in log_delta.iter_mut().zip(self.log_posterior_column(t, y_t)) {
                *acc += l;
            }
        }
        Ok(ScoreVector {
            log_delta: LogWeightVector::new(log_delta)?,
        })
    }

    pub fn posterior(&self, y: &[f64]) -> Result<ProbabilityVector> {
        self.scores(y)?.normalize()
    }
}
