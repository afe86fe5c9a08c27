//! Randomized equivalence suites. Each suite draws fresh models from a
//! seeded generator and records the largest posterior discrepancy between
//! two independent routes to the same quantity.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hmm::{self, BackwardScaling};
use crate::logreg::{lr_to_nb, nb_to_lr};
use crate::numeric::{worst_discrepancy, EQUIVALENCE_TOL};
use crate::oracle;
use crate::random::{
    random_disc_nb, random_hmm, random_logreg, random_nb_model, random_real_observation,
    random_simplex, sample_hmm_observations, sample_nb_observation,
};

pub const DEFAULT_CASES: usize = 1000;
/// Real observations evaluated per model in the logistic-regression suite.
pub const PROBES_PER_MODEL: usize = 100;
/// Largest `N^T` used against the path-enumeration oracle.
pub const ORACLE_PATH_LIMIT: usize = 4096;

/// A deliberate defect, used to prove the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Multiply by `π` instead of dividing in the entropic recursion.
    EfbPriorSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub comparisons: usize,
    /// Cases that returned an error instead of a posterior.
    pub errors: usize,
    pub max_discrepancy: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    fn new(name: &'static str, cases: usize) -> Self {
        Self {
            name,
            cases,
            comparisons: 0,
            errors: 0,
            max_discrepancy: 0.0,
            tolerance: EQUIVALENCE_TOL,
        }
    }

    fn record(&mut self, discrepancy: Result<f64>) {
        match discrepancy {
            Ok(d) => {
                self.comparisons += 1;
                self.max_discrepancy = worst_discrepancy(self.max_discrepancy, d);
            }
            Err(_) => self.errors += 1,
        }
    }

    pub fn passed(&self) -> bool {
        self.errors == 0 && self.comparisons > 0 && self.max_discrepancy <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    /// Plain-text report; identical inputs give identical bytes.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verify seed={} cases={}", self.seed, self.cases);
        for s in &self.suites {
            let _ = writeln!(
                out,
                "{:<22} cases={:<6} comparisons={:<8} errors={:<4} max_discrepancy={:.3e} tol={:.0e} {}",
                s.name,
                s.cases,
                s.comparisons,
                s.errors,
                s.max_discrepancy,
                s.tolerance,
                if s.passed() { "PASS" } else { "FAIL" }
            );
        }
        let passed = self.suites.iter().filter(|s| s.passed()).count();
        let _ = writeln!(
            out,
            "{}: {}/{} suites passed",
            if self.all_passed() { "OK" } else { "FAILED" },
            passed,
            self.suites.len()
        );
        out
    }
}

fn suite_rng(seed: u64, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ suite.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Generative vs discriminative Naive Bayes posteriors.
pub fn naive_bayes_suite(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = suite_rng(seed, 1);
    let mut result = SuiteResult::new("nb-generative-vs-disc", cases);
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let t_len = rng.gen_range(1..=6);
        let m_sym = rng.gen_range(1..=6);
        let model = random_nb_model(&mut rng, n, t_len, m_sym);
        let y = sample_nb_observation(&mut rng, &model);
        result.record((|| {
            let gen = model.generative_posterior(&y)?;
            let disc = model.to_discriminative(None)?.posterior(&y)?;
            Ok(gen.max_abs_diff(&disc))
        })());
    }
    result
}

/// Discriminative Naive Bayes vs logistic regression, both directions and
/// the round trip.
pub fn logreg_suite(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = suite_rng(seed, 2);
    let mut result = SuiteResult::new("disc-nb-vs-logreg", cases);
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let t_len = rng.gen_range(1..=6);
        let nb = random_disc_nb(&mut rng, n, t_len);
        let lr = random_logreg(&mut rng, n, t_len);
        let prior = random_simplex(&mut rng, n);
        let forward = nb_to_lr(&nb);
        let reciprocal = lr_to_nb(&lr, &prior);
        let round_trip = reciprocal.as_ref().ok().map(nb_to_lr);
        for _ in 0..PROBES_PER_MODEL {
            let y = random_real_observation(&mut rng, t_len);
            result.record((|| {
                let fwd = forward.clone()?;
                let rec = reciprocal.clone()?;
                let back = round_trip.clone().expect("reciprocal succeeded")?;
                let p_lr = lr.posterior(&y)?;
                let d = [
                    nb.posterior(&y)?.max_abs_diff(&fwd.posterior(&y)?),
                    p_lr.max_abs_diff(&rec.posterior(&y)?),
                    p_lr.max_abs_diff(&back.posterior(&y)?),
                ];
                Ok(d.into_iter().fold(0.0, f64::max))
            })());
        }
    }
    result
}

/// Forward-backward vs entropic forward-backward with posteriors derived
/// from the same prior and emissions.
pub fn hmm_suite(seed: u64, cases: usize, fault: Fault) -> SuiteResult {
    let mut rng = suite_rng(seed, 3);
    let mut result = SuiteResult::new("fb-vs-entropic-fb", cases);
    for _ in 0..cases {
        let n = rng.gen_range(2..=4);
        let m_sym = rng.gen_range(1..=5);
        let t_len = rng.gen_range(1..=8);
        let base = random_hmm(&mut rng, n, m_sym);
        let y = sample_hmm_observations(&mut rng, &base, t_len);
        result.record((|| {
            let model = base.derive_posteriors()?;
            let fb = hmm::forward_backward(&model, &y)?;
            let efb = hmm::efb_impl(
                &model,
                &y,
                BackwardScaling::PerStep,
                fault == Fault::EfbPriorSign,
            )?;
            Ok(fb.max_abs_diff(&efb))
        })());
    }
    result
}

/// Recursions vs brute-force enumeration: forward-backward against all
/// state paths, and generative Naive Bayes against the plain joint.
pub fn brute_force_suite(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = suite_rng(seed, 4);
    let mut result = SuiteResult::new("recursions-vs-oracle", cases);
    for _ in 0..cases {
        let n: usize = rng.gen_range(2..=4);
        let max_t = (1..)
            .take_while(|&t| n.pow(t) <= ORACLE_PATH_LIMIT)
            .last()
            .unwrap_or(1) as usize;
        let t_len = rng.gen_range(1..=max_t);
        let m_sym = rng.gen_range(1..=5);
        let model = random_hmm(&mut rng, n, m_sym);
        let y = sample_hmm_observations(&mut rng, &model, t_len);
        result.record((|| {
            let fb = hmm::forward_backward(&model, &y)?;
            let brute = oracle::joint_enumeration_hmm(&model, &y)?;
            Ok(fb.max_abs_diff(&brute))
        })());

        let (nb_n, nb_t, nb_m) = (
            rng.gen_range(2..=5),
            rng.gen_range(1..=6),
            rng.gen_range(1..=6),
        );
        let nb = random_nb_model(&mut rng, nb_n, nb_t, nb_m);
        let obs = sample_nb_observation(&mut rng, &nb);
        result.record((|| {
            let fast = nb.generative_posterior(&obs)?;
            let brute = oracle::joint_enumeration_nb(&nb, &obs)?;
            Ok(fast.max_abs_diff(&brute))
        })());
    }
    result
}

pub fn run_all(seed: u64, cases: usize, fault: Fault) -> VerifyReport {
    VerifyReport {
        seed,
        cases,
        suites: vec![
            naive_bayes_suite(seed, cases),
            logreg_suite(seed, cases),
            hmm_suite(seed, cases, fault),
            brute_force_suite(seed, cases),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let r = run_all(1, 20, Fault::None);
        assert!(r.all_passed(), "{}", r.render());
        assert_eq!(r.suites.len(), 4);
    }

    #[test]
    fn injected_fault_fails_only_the_hmm_suite() {
        let r = run_all(1, 50, Fault::EfbPriorSign);
        let failed: Vec<_> = r
            .suites
            .iter()
            .filter(|s| !s.passed())
            .map(|s| s.name)
            .collect();
        assert_eq!(failed, vec!["fb-vs-entropic-fb"]);
    }

    #[test]
    fn render_is_deterministic() {
        assert_eq!(
            run_all(7, 10, Fault::None).render(),
            run_all(7, 10, Fault::None).render()
        );
    }

    #[test]
    fn nan_discrepancy_fails() {
        let mut s = SuiteResult::new("x", 1);
        s.record(Ok(f64::NAN));
        assert!(!s.passed());
    }
}
