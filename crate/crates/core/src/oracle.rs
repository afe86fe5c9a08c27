//! Brute-force reference posteriors.
//!
//! Everything here evaluates joint weights in plain floating-point
//! arithmetic and normalizes by direct summation. There is no log-space
//! code and nothing is shared with the recursive algorithms, so a numerics
//! bug on the fast path cannot hide behind the same bug here. Results are
//! only trustworthy while weights stay in range, roughly `T ≤ 30` with
//! probabilities above `1e-6`.

use crate::error::{Error, Result};
use crate::hmm::{HmmModel, PosteriorMarginals};
use crate::naive_bayes::NaiveBayesModel;
use crate::numeric::ProbabilityVector;

/// Upper bound on the number of state paths `joint_enumeration_hmm` visits.
pub const MAX_PATHS: u128 = 1 << 20;

fn normalize_plain(weights: &[f64]) -> Result<ProbabilityVector> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    let mut out = Vec::with_capacity(weights.len());
    for w in weights {
        out.push(w / total);
    }
    ProbabilityVector::new(out)
}

/// `p(x = i | y)` from the joint `π(i) ∏_t b_i^(t)(y_t)`.
pub fn joint_enumeration_nb(
    model: &NaiveBayesModel,
    observation: &[usize],
) -> Result<ProbabilityVector> {
    if observation.len() != model.n_positions() {
        return Err(Error::DimensionMismatch {
            what: "observation length",
            expected: model.n_positions(),
            found: observation.len(),
        });
    }
    let mut joint = vec![0.0; model.n_labels()];
    for (i, w) in joint.iter_mut().enumerate() {
        let mut p = model.prior()[i];
        for (t, &s) in observation.iter().enumerate() {
            let row = &model.emissions()[t][i];
            if s >= row.len() {
                return Err(Error::UnknownSymbol {
                    position: t,
                    symbol: s,
                });
            }
            p *= row[s];
        }
        *w = p;
    }
    normalize_plain(&joint)
}

/// Plain HMM parameter tables, with no invariants beyond matching shapes.
/// This admits the single-state chain that [`HmmModel`] rules out.
#[derive(Debug, Clone)]
pub struct HmmTables<'a> {
    pub prior: &'a [f64],
    /// `transitions[i][j] = a_i(j)`
    pub transitions: &'a [Vec<f64>],
    /// `emissions[i][y] = b_i(y)`
    pub emissions: &'a [Vec<f64>],
}

/// Marginals of an HMM by summing the joint over all `N^T` state paths.
pub fn joint_enumeration_hmm(
    model: &HmmModel,
    observations: &[usize],
) -> Result<PosteriorMarginals> {
    let emissions = model.emissions().ok_or(Error::MissingEmissions)?;
    let transitions: Vec<Vec<f64>> = model
        .transitions()
        .iter()
        .map(|r| r.as_slice().to_vec())
        .collect();
    let emissions: Vec<Vec<f64>> = emissions.iter().map(|r| r.as_slice().to_vec()).collect();
    joint_enumeration_hmm_tables(
        &HmmTables {
            prior: model.prior().as_slice(),
            transitions: &transitions,
            emissions: &emissions,
        },
        observations,
    )
}

pub fn joint_enumeration_hmm_tables(
    tables: &HmmTables<'_>,
    observations: &[usize],
) -> Result<PosteriorMarginals> {
    let n = tables.prior.len();
    let t_len = observations.len();
    if n == 0 || t_len == 0 {
        return Err(Error::DimensionMismatch {
            what: "states and observations (both >= 1)",
            expected: 1,
            found: 0,
        });
    }
    let paths = (n as u128).checked_pow(t_len as u32).unwrap_or(u128::MAX);
    if paths > MAX_PATHS {
        return Err(Error::StateSpaceTooLarge {
            paths,
            limit: MAX_PATHS,
        });
    }
    for (t, &y) in observations.iter().enumerate() {
        if tables.emissions.iter().any(|row| y >= row.len()) {
            return Err(Error::UnknownSymbol {
                position: t,
                symbol: y,
            });
        }
    }

    // odometer over state paths, x[0] varies fastest
    let mut path = vec![0usize; t_len];
    let mut mass = vec![vec![0.0; n]; t_len];
    for _ in 0..paths {
        let mut w = tables.prior[path[0]] * tables.emissions[path[0]][observations[0]];
        for t in 1..t_len {
            w *= tables.transitions[path[t - 1]][path[t]]
                * tables.emissions[path[t]][observations[t]];
        }
        for t in 0..t_len {
            mass[t][path[t]] += w;
        }
        for digit in path.iter_mut() {
            *digit += 1;
            if *digit < n {
                break;
            }
            *digit = 0;
        }
    }
    let gamma = mass
        .iter()
        .map(|row| normalize_plain(row))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorMarginals { gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{LabelSpace, ObservationAlphabet};
    use crate::random::{random_hmm, sample_hmm_observations};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn nb_single_position_is_bayes_rule() {
        let m = NaiveBayesModel::new(
            LabelSpace::indexed(2).unwrap(),
            vec![ObservationAlphabet::indexed(2).unwrap()],
            pv(&[0.25, 0.75]),
            vec![vec![pv(&[0.6, 0.4]), pv(&[0.2, 0.8])]],
        )
        .unwrap();
        let p = joint_enumeration_nb(&m, &[0]).unwrap();
        // 0.25·0.6 = 0.15, 0.75·0.2 = 0.15
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = joint_enumeration_nb(&m, &[1]).unwrap();
        assert!((p[0] - 0.1 / 0.7).abs() < 1e-15);
    }

    #[test]
    fn nb_uniform_everything() {
        let u = ProbabilityVector::uniform(3).unwrap();
        let m = NaiveBayesModel::new(
            LabelSpace::indexed(3).unwrap(),
            vec![ObservationAlphabet::indexed(3).unwrap(); 2],
            u.clone(),
            vec![vec![u.clone(); 3]; 2],
        )
        .unwrap();
        assert!(joint_enumeration_nb(&m, &[2, 1]).unwrap().max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn hmm_single_step() {
        let prior = [0.2, 0.8];
        let trans = vec![vec![0.5, 0.5], vec![0.1, 0.9]];
        let em = vec![vec![0.3, 0.7], vec![0.6, 0.4]];
        let g = joint_enumeration_hmm_tables(
            &HmmTables {
                prior: &prior,
                transitions: &trans,
                emissions: &em,
            },
            &[1],
        )
        .unwrap();
        let w = [0.2 * 0.7, 0.8 * 0.4];
        assert!((g.row(0)[0] - w[0] / (w[0] + w[1])).abs() < 1e-15);
    }

    #[test]
    fn hmm_single_state_is_a_point_mass() {
        let g = joint_enumeration_hmm_tables(
            &HmmTables {
                prior: &[1.0],
                transitions: &[vec![1.0]],
                emissions: &[vec![0.3, 0.7]],
            },
            &[0, 1, 1, 0],
        )
        .unwrap();
        for row in &g.gamma {
            assert_eq!(row.as_slice(), &[1.0]);
        }
    }

    #[test]
    fn hmm_hand_computed_two_steps() {
        // paths (x1,x2) with weights π(x1) b(y1) a(x1,x2) b(y2)
        let prior = [0.6, 0.4];
        let trans = vec![vec![0.7, 0.3], vec![0.4, 0.6]];
        let em = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        let g = joint_enumeration_hmm_tables(
            &HmmTables {
                prior: &prior,
                transitions: &trans,
                emissions: &em,
            },
            &[0, 1],
        )
        .unwrap();
        let w00 = 0.6 * 0.9 * 0.7 * 0.1;
        let w01 = 0.6 * 0.9 * 0.3 * 0.8;
        let w10 = 0.4 * 0.2 * 0.4 * 0.1;
        let w11 = 0.4 * 0.2 * 0.6 * 0.8;
        let z = w00 + w01 + w10 + w11;
        assert!((g.row(0)[0] - (w00 + w01) / z).abs() < 1e-15);
        assert!((g.row(1)[0] - (w00 + w10) / z).abs() < 1e-15);
    }

    #[test]
    fn hmm_state_space_cap() {
        let prior = [0.5, 0.5];
        let trans = vec![vec![0.5, 0.5]; 2];
        let em = vec![vec![1.0]; 2];
        let r = joint_enumeration_hmm_tables(
            &HmmTables {
                prior: &prior,
                transitions: &trans,
                emissions: &em,
            },
            &[0; 21],
        );
        assert!(matches!(r, Err(Error::StateSpaceTooLarge { .. })));
    }

    #[test]
    fn hmm_permutation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_hmm(&mut rng, 3, 3);
        let y = sample_hmm_observations(&mut rng, &m, 5);
        let perm = [2usize, 0, 1];
        let prior: Vec<f64> = (0..3).map(|i| m.prior()[perm[i]]).collect();
        let trans: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| m.transitions()[perm[i]][perm[j]]).collect())
            .collect();
        let em: Vec<Vec<f64>> = (0..3)
            .map(|i| m.emissions().unwrap()[perm[i]].as_slice().to_vec())
            .collect();
        let base = joint_enumeration_hmm(&m, &y).unwrap();
        let permuted = joint_enumeration_hmm_tables(
            &HmmTables {
                prior: &prior,
                transitions: &trans,
                emissions: &em,
            },
            &y,
        )
        .unwrap();
        for t in 0..y.len() {
            for (i, &j) in perm.iter().enumerate() {
                assert!((permuted.row(t)[i] - base.row(t)[j]).abs() < 1e-14);
            }
            let s: f64 = base.row(t).as_slice().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
