//! Seeded generators for random models and observations, used by the
//! verification suites and the tests. Entries are kept away from zero so the
//! plain-arithmetic oracles stay in floating-point range.

use rand::Rng;

use crate::hmm::HmmModel;
use crate::logreg::LogisticRegressionModel;
use crate::naive_bayes::{DiscriminativeNbModel, NaiveBayesModel};
use crate::numeric::{LabelSpace, ObservationAlphabet, ProbabilityVector};

const MIN_WEIGHT: f64 = 0.05;

/// A random point in the interior of the simplex.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProbabilityVector {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(MIN_WEIGHT..1.0)).collect();
    ProbabilityVector::from_weights(&w).expect("positive weights normalize")
}

/// Draws an index with probability proportional to `weights`.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen_range(0.0..total);
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

pub fn random_nb_model<R: Rng + ?Sized>(
    rng: &mut R,
    n_labels: usize,
    n_positions: usize,
    n_symbols: usize,
) -> NaiveBayesModel {
    let labels = LabelSpace::indexed(n_labels).expect("n_labels >= 2");
    let alphabets =
        vec![ObservationAlphabet::indexed(n_symbols).expect("n_symbols >= 1"); n_positions];
    let prior = random_simplex(rng, n_labels);
    let emissions = (0..n_positions)
        .map(|_| {
            (0..n_labels)
                .map(|_| random_simplex(rng, n_symbols))
                .collect()
        })
        .collect();
    NaiveBayesModel::new(labels, alphabets, prior, emissions).expect("consistent dimensions")
}

/// Ancestral sample of the observation part of `(x, y)`.
pub fn sample_nb_observation<R: Rng + ?Sized>(rng: &mut R, model: &NaiveBayesModel) -> Vec<usize> {
    let label = sample_index(rng, model.prior().as_slice());
    (0..model.n_positions())
        .map(|t| sample_index(rng, model.emissions()[t][label].as_slice()))
        .collect()
}

fn random_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    scale: f64,
) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect()
}

pub fn random_disc_nb<R: Rng + ?Sized>(
    rng: &mut R,
    n_labels: usize,
    n_positions: usize,
) -> DiscriminativeNbModel {
    let labels = LabelSpace::indexed(n_labels).expect("n_labels >= 2");
    let prior = random_simplex(rng, n_labels);
    let a = random_matrix(rng, n_labels, n_positions, 2.0);
    let c = random_matrix(rng, n_labels, n_positions, 2.0);
    DiscriminativeNbModel::new(labels, prior, a, c).expect("valid parameters")
}

pub fn random_logreg<R: Rng + ?Sized>(
    rng: &mut R,
    n_labels: usize,
    n_positions: usize,
) -> LogisticRegressionModel {
    let labels = LabelSpace::indexed(n_labels).expect("n_labels >= 2");
    let w = random_matrix(rng, n_labels, n_positions, 2.0);
    let b = (0..n_labels).map(|_| rng.gen_range(-3.0..3.0)).collect();
    LogisticRegressionModel::new(labels, w, b).expect("valid parameters")
}

pub fn random_real_observation<R: Rng + ?Sized>(rng: &mut R, n_positions: usize) -> Vec<f64> {
    (0..n_positions).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

/// Random HMM with emissions only.
pub fn random_hmm<R: Rng + ?Sized>(rng: &mut R, n_labels: usize, n_symbols: usize) -> HmmModel {
    let labels = LabelSpace::indexed(n_labels).expect("n_labels >= 2");
    let alphabet = ObservationAlphabet::indexed(n_symbols).expect("n_symbols >= 1");
    let prior = random_simplex(rng, n_labels);
    let transitions = (0..n_labels)
        .map(|_| random_simplex(rng, n_labels))
        .collect();
    let emissions = (0..n_labels)
        .map(|_| random_simplex(rng, n_symbols))
        .collect();
    HmmModel::new(labels, alphabet, prior, transitions, Some(emissions), None)
        .expect("consistent dimensions")
}

pub fn sample_hmm_observations<R: Rng + ?Sized>(
    rng: &mut R,
    model: &HmmModel,
    length: usize,
) -> Vec<usize> {
    let emissions = model.emissions().expect("sampling needs emissions");
    let mut state = sample_index(rng, model.prior().as_slice());
    let mut out = Vec::with_capacity(length);
    for t in 0..length {
        if t > 0 {
            state = sample_index(rng, model.transitions()[state].as_slice());
        }
        out.push(sample_index(rng, emissions[state].as_slice()));
    }
    out
}
