//! Posterior marginals `p(x_t = i | y_1:T)` of a homogeneous HMM, computed
//! two ways.
//!
//! The classical forward-backward pass runs on the joint law, with factors
//! `b_i(y_t)`. The entropic variant replaces every emission factor with the
//! ratio `L_{y_t}(i) / π(i)` of a single-observation posterior to the prior,
//! and seeds the forward pass with `L_{y_1}` directly; it never touches the
//! emission law. Both passes run in log space and rescale the backward
//! messages at every step.

use crate::error::{Error, Result};
use crate::numeric::{
    log_normalize_in_place, logsumexp, normalize_log_slice, LabelSpace, ObservationAlphabet,
    ProbabilityVector, EQUIVALENCE_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    labels: LabelSpace,
    alphabet: ObservationAlphabet,
    prior: ProbabilityVector,
    /// Row `i` is `a_i(·)`.
    transitions: Vec<ProbabilityVector>,
    /// Row `i` is `b_i(·)` over the alphabet.
    emissions: Option<Vec<ProbabilityVector>>,
    /// Column `y` is `L_y(·)` over the labels.
    posteriors: Option<Vec<ProbabilityVector>>,
}

impl HmmModel {
    pub fn new(
        labels: LabelSpace,
        alphabet: ObservationAlphabet,
        prior: ProbabilityVector,
        transitions: Vec<ProbabilityVector>,
        emissions: Option<Vec<ProbabilityVector>>,
        posteriors: Option<Vec<ProbabilityVector>>,
    ) -> Result<Self> {
        let n = labels.len();
        let m = alphabet.len();
        let dim = |what, expected, found| Error::DimensionMismatch {
            what,
            expected,
            found,
        };
        if prior.len() != n {
            return Err(dim("prior length", n, prior.len()));
        }
        if transitions.len() != n {
            return Err(dim("transition rows", n, transitions.len()));
        }
        if let Some(row) = transitions.iter().find(|r| r.len() != n) {
            return Err(dim("transition row length", n, row.len()));
        }
        if emissions.is_none() && posteriors.is_none() {
            return Err(Error::MissingEmissions);
        }
        if let Some(em) = &emissions {
            if em.len() != n {
                return Err(dim("emission rows", n, em.len()));
            }
            if let Some(row) = em.iter().find(|r| r.len() != m) {
                return Err(dim("emission row length", m, row.len()));
            }
        }
        if let Some(post) = &posteriors {
            if post.len() != m {
                return Err(dim("posterior columns", m, post.len()));
            }
            if let Some(col) = post.iter().find(|c| c.len() != n) {
                return Err(dim("posterior column length", n, col.len()));
            }
        }
        let model = Self {
            labels,
            alphabet,
            prior,
            transitions,
            emissions,
            posteriors,
        };
        if model.emissions.is_some() && model.posteriors.is_some() {
            model.check_consistency()?;
        }
        Ok(model)
    }

    fn check_consistency(&self) -> Result<()> {
        let (Some(em), Some(post)) = (&self.emissions, &self.posteriors) else {
            return Ok(());
        };
        for (y, column) in post.iter().enumerate() {
            let joint: Vec<f64> = (0..self.n_labels())
                .map(|i| self.prior[i] * em[i][y])
                .collect();
            let marginal: f64 = joint.iter().sum();
            if marginal <= 0.0 {
                continue;
            }
            let deviation = joint
                .iter()
                .zip(column.as_slice())
                .map(|(j, l)| (j / marginal - l).abs())
                .fold(0.0, f64::max);
            if deviation > EQUIVALENCE_TOL {
                return Err(Error::InconsistentPosteriors {
                    symbol: y,
                    deviation,
                });
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &LabelSpace {
        &self.labels
    }

    pub fn alphabet(&self) -> &ObservationAlphabet {
        &self.alphabet
    }

    pub fn prior(&self) -> &ProbabilityVector {
        &self.prior
    }

    pub fn transitions(&self) -> &[ProbabilityVector] {
        &self.transitions
    }

    pub fn emissions(&self) -> Option<&[ProbabilityVector]> {
        self.emissions.as_deref()
    }

    pub fn posteriors(&self) -> Option<&[ProbabilityVector]> {
        self.posteriors.as_deref()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.alphabet.len()
    }

    /// Fills the posterior columns by one-step Bayes inversion,
    /// `L_y(i) = π(i) b_i(y) / Σ_j π(j) b_j(y)`.
    pub fn derive_posteriors(&self) -> Result<HmmModel> {
        let em = self.emissions.as_ref().ok_or(Error::MissingEmissions)?;
        if let Some(label) = self.prior.first_zero() {
            return Err(Error::ZeroPrior { label });
        }
        let log_prior = self.prior.ln();
        let mut columns = Vec::with_capacity(self.n_symbols());
        for y in 0..self.n_symbols() {
            let log_joint: Vec<f64> = log_prior
                .iter()
                .zip(em)
                .map(|(lp, row)| lp + row[y].ln())
                .collect();
            let column = normalize_log_slice(&log_joint).map_err(|e| match e {
                Error::AllZeroWeights => Error::ZeroSymbolMarginal { symbol: y },
                other => other,
            })?;
            columns.push(column);
        }
        Ok(HmmModel {
            posteriors: Some(columns),
            ..self.clone()
        })
    }

    fn check_observations(&self, observations: &[usize]) -> Result<()> {
        if observations.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "observation length (T >= 1)",
                expected: 1,
                found: 0,
            });
        }
        for (t, &y) in observations.iter().enumerate() {
            if y >= self.n_symbols() {
                return Err(Error::UnknownSymbol {
                    position: t,
                    symbol: y,
                });
            }
        }
        Ok(())
    }

    fn log_transitions(&self) -> Vec<Vec<f64>> {
        self.transitions.iter().map(|r| r.ln()).collect()
    }
}

/// Row `t` is the distribution `p(x_t = · | y_1:T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMarginals {
    pub gamma: Vec<ProbabilityVector>,
}

impl PosteriorMarginals {
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn row(&self, t: usize) -> &ProbabilityVector {
        &self.gamma[t]
    }

    /// Largest absolute entry-wise difference over all rows.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            self.len(),
            other.len(),
            "marginal tables of different length"
        );
        self.gamma
            .iter()
            .zip(&other.gamma)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// Whether the backward messages are renormalized at every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackwardScaling {
    #[default]
    PerStep,
    Unscaled,
}

/// Messages of one smoothing pass, in log space.
struct Messages {
    log_alpha: Vec<Vec<f64>>,
    log_beta: Vec<Vec<f64>>,
    /// Constant subtracted from `log_beta[t]` when rescaling.
    beta_log_scales: Vec<f64>,
}

/// `log_alpha[0] = init`,
/// `log_alpha[t](i) = factor[t](i) + lse_j(log_alpha[t−1](j) + ln a_j(i))`,
/// `log_beta[T−1] = 0`,
/// `log_beta[t](i) = lse_j(factor[t+1](j) + log_beta[t+1](j) + ln a_i(j))`.
///
/// `factors[0]` is never read.
fn pass(
    init: Vec<f64>,
    factors: &[Vec<f64>],
    log_trans: &[Vec<f64>],
    scaling: BackwardScaling,
) -> Result<Messages> {
    let n = init.len();
    let t_len = factors.len();
    let mut log_alpha = Vec::with_capacity(t_len);
    log_alpha.push(init);
    for t in 1..t_len {
        let prev = &log_alpha[t - 1];
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let terms: Vec<f64> = (0..n).map(|j| prev[j] + log_trans[j][i]).collect();
                factors[t][i] + logsumexp(&terms)
            })
            .collect();
        log_alpha.push(next);
    }
    if logsumexp(&log_alpha[t_len - 1]) == f64::NEG_INFINITY {
        return Err(Error::ZeroEvidence);
    }

    let mut log_beta = vec![vec![0.0; n]; t_len];
    let mut beta_log_scales = vec![0.0; t_len];
    for t in (0..t_len.saturating_sub(1)).rev() {
        let mut row: Vec<f64> = (0..n)
            .map(|i| {
                let terms: Vec<f64> = (0..n)
                    .map(|j| factors[t + 1][j] + log_beta[t + 1][j] + log_trans[i][j])
                    .collect();
                logsumexp(&terms)
            })
            .collect();
        if scaling == BackwardScaling::PerStep {
            beta_log_scales[t] = log_normalize_in_place(&mut row);
        }
        log_beta[t] = row;
    }
    Ok(Messages {
        log_alpha,
        log_beta,
        beta_log_scales,
    })
}

fn marginals(messages: &Messages) -> Result<PosteriorMarginals> {
    let gamma = messages
        .log_alpha
        .iter()
        .zip(&messages.log_beta)
        .map(|(a, b)| {
            let w: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            normalize_log_slice(&w).map_err(|e| match e {
                Error::AllZeroWeights => Error::ZeroEvidence,
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorMarginals { gamma })
}

fn fb_factors(model: &HmmModel, observations: &[usize]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let em = model.emissions.as_ref().ok_or(Error::MissingEmissions)?;
    model.check_observations(observations)?;
    let log_em: Vec<Vec<f64>> = em.iter().map(|r| r.ln()).collect();
    let factors: Vec<Vec<f64>> = observations
        .iter()
        .map(|&y| log_em.iter().map(|row| row[y]).collect())
        .collect();
    let init: Vec<f64> = model
        .prior
        .ln()
        .iter()
        .zip(&factors[0])
        .map(|(p, b)| p + b)
        .collect();
    Ok((init, factors))
}

/// Classical forward-backward on `(π, a, b)`.
pub fn forward_backward(model: &HmmModel, observations: &[usize]) -> Result<PosteriorMarginals> {
    forward_backward_with(model, observations, BackwardScaling::PerStep)
}

pub fn forward_backward_with(
    model: &HmmModel,
    observations: &[usize],
    scaling: BackwardScaling,
) -> Result<PosteriorMarginals> {
    let (init, factors) = fb_factors(model, observations)?;
    marginals(&pass(init, &factors, &model.log_transitions(), scaling)?)
}

/// `ln p(y_1:T)`, recovered from the first backward message and the
/// recorded rescaling constants.
pub fn log_evidence(model: &HmmModel, observations: &[usize]) -> Result<f64> {
    let (init, factors) = fb_factors(model, observations)?;
    let msg = pass(
        init,
        &factors,
        &model.log_transitions(),
        BackwardScaling::PerStep,
    )?;
    let first: Vec<f64> = msg.log_alpha[0]
        .iter()
        .zip(&msg.log_beta[0])
        .map(|(a, b)| a + b)
        .collect();
    Ok(logsumexp(&first) + msg.beta_log_scales.iter().sum::<f64>())
}

/// Entropic forward-backward on `(π, a, L)`.
pub fn entropic_forward_backward(
    model: &HmmModel,
    observations: &[usize],
) -> Result<PosteriorMarginals> {
    entropic_forward_backward_with(model, observations, BackwardScaling::PerStep)
}

pub fn entropic_forward_backward_with(
    model: &HmmModel,
    observations: &[usize],
    scaling: BackwardScaling,
) -> Result<PosteriorMarginals> {
    efb_impl(model, observations, scaling, false)
}

/// `invert_prior_ratio` multiplies by `π` instead of dividing; it exists only
/// so the verification suite can prove it detects a broken recursion.
pub(crate) fn efb_impl(
    model: &HmmModel,
    observations: &[usize],
    scaling: BackwardScaling,
    invert_prior_ratio: bool,
) -> Result<PosteriorMarginals> {
    let post = model.posteriors.as_ref().ok_or(Error::MissingPosteriors)?;
    if let Some(label) = model.prior.first_zero() {
        return Err(Error::ZeroPrior { label });
    }
    model.check_observations(observations)?;
    let log_prior = model.prior.ln();
    let sign = if invert_prior_ratio { 1.0 } else { -1.0 };
    let log_post: Vec<Vec<f64>> = post.iter().map(|c| c.ln()).collect();
    let factors: Vec<Vec<f64>> = observations
        .iter()
        .map(|&y| {
            log_post[y]
                .iter()
                .zip(&log_prior)
                .map(|(l, p)| l + sign * p)
                .collect()
        })
        .collect();
    let init = log_post[observations[0]].clone();
    marginals(&pass(init, &factors, &model.log_transitions(), scaling)?)
}
