//! Shared numeric types: label and symbol spaces, points on the probability
//! simplex, log-domain weight vectors, and the stable reductions that every
//! inference routine normalizes through.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σ p − 1|` for a [`ProbabilityVector`].
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Maximum absolute discrepancy accepted between two algorithms that compute
/// the same posterior.
pub const EQUIVALENCE_TOL: f64 = 1e-10;
/// Relative tolerance for analytic gradients against central differences.
pub const GRADIENT_REL_TOL: f64 = 1e-5;
/// Step used by the central finite-difference checks.
pub const FINITE_DIFF_STEP: f64 = 1e-5;
/// Denominator floor of the gradient relative error; only guards `0 / 0`.
pub const GRADIENT_REL_FLOOR: f64 = 1e-8;

fn check_unique(names: &[String]) -> bool {
    let mut seen = HashSet::with_capacity(names.len());
    names.iter().all(|n| seen.insert(n.as_str()))
}

/// The finite output space of a classifier: `N ≥ 2` distinct label names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSpace {
    names: Vec<String>,
}

impl LabelSpace {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::InvalidLabelSpace(format!(
                "need at least 2 labels, got {}",
                names.len()
            )));
        }
        if !check_unique(&names) {
            return Err(Error::InvalidLabelSpace(
                "label names must be unique".into(),
            ));
        }
        Ok(Self { names })
    }

    /// Labels named `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl TryFrom<Vec<String>> for LabelSpace {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LabelSpace> for Vec<String> {
    fn from(l: LabelSpace) -> Self {
        l.names
    }
}

/// A finite observation alphabet of `M ≥ 1` distinct symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ObservationAlphabet {
    symbols: Vec<String>,
}

impl ObservationAlphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("need at least 1 symbol".into()));
        }
        if !check_unique(&symbols) {
            return Err(Error::InvalidAlphabet("symbol names must be unique".into()));
        }
        Ok(Self { symbols })
    }

    pub fn indexed(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, k: usize) -> &str {
        &self.symbols[k]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }
}

impl TryFrom<Vec<String>> for ObservationAlphabet {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ObservationAlphabet> for Vec<String> {
    fn from(a: ObservationAlphabet) -> Self {
        a.symbols
    }
}

/// A point on the probability simplex.
///
/// Construction never renormalizes: entries must already be in `[0, 1]` and
/// sum to one within [`SIMPLEX_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        for (i, &p) in entries.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(format!(
                    "entry {i} = {p} is outside [0, 1]"
                )));
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidProbability(format!(
                "entries sum to {sum:.17}, not 1"
            )));
        }
        Ok(Self(entries))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Normalizes nonnegative weights by their sum.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidProbability(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::AllZeroWeights);
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }

    /// Index of the first entry equal to zero, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.0.iter().position(|&p| p <= 0.0)
    }

    /// Natural logs of the entries; zero maps to `-inf`.
    pub fn ln(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.ln()).collect()
    }

    /// Largest entry and whether that maximum is shared; ties resolve to the
    /// lowest index.
    pub fn argmax(&self) -> (usize, bool) {
        let mut best = 0;
        let mut tie = false;
        for (i, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = i;
                tie = false;
            } else if p == self.0[best] {
                tie = true;
            }
        }
        (best, tie)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}

/// Unnormalized log weights. `-inf` is the log of zero; at least one entry
/// is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeightVector(Vec<f64>);

impl LogWeightVector {
    pub fn new(log_entries: Vec<f64>) -> Result<Self> {
        if log_entries
            .iter()
            .any(|v| v.is_nan() || *v == f64::INFINITY)
        {
            return Err(Error::NonFinite("log weights"));
        }
        if !log_entries.iter().any(|v| v.is_finite()) {
            return Err(Error::AllZeroWeights);
        }
        Ok(Self(log_entries))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `ln Σ exp(v_k)` with a max shift. Empty or all `-inf` input gives `-inf`.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    if max.is_nan() {
        return f64::NAN;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Exponentiates and normalizes log weights onto the simplex.
pub fn normalize_log(weights: &LogWeightVector) -> Result<ProbabilityVector> {
    normalize_log_slice(weights.as_slice())
}

pub(crate) fn normalize_log_slice(log_entries: &[f64]) -> Result<ProbabilityVector> {
    if log_entries
        .iter()
        .any(|v| v.is_nan() || *v == f64::INFINITY)
    {
        return Err(Error::NonFinite("log weights"));
    }
    let max = log_entries
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllZeroWeights);
    }
    // dividing by the shifted sum keeps the largest entry's exponent exact
    let shifted: Vec<f64> = log_entries.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    ProbabilityVector::new(shifted.into_iter().map(|w| w / total).collect())
}

/// In-place `v ← v − logsumexp(v)`; returns the subtracted constant.
pub(crate) fn log_normalize_in_place(v: &mut [f64]) -> f64 {
    let lse = logsumexp(v);
    if lse.is_finite() {
        v.iter_mut().for_each(|x| *x -= lse);
    }
    lse
}

/// Running maximum of discrepancies in which NaN counts as infinitely bad.
pub fn worst_discrepancy(acc: f64, d: f64) -> f64 {
    if d.is_nan() {
        f64::INFINITY
    } else {
        acc.max(d)
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(
        a.len(),
        b.len(),
        "max_abs_diff on vectors of different length"
    );
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logsumexp_basics() {
        assert!((logsumexp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        assert_eq!(
            logsumexp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        let direct = (3f64.exp() + 4f64.exp() + 5f64.exp()).ln();
        assert!((logsumexp(&[3.0, 4.0, 5.0]) - direct).abs() < 1e-14);
    }

    #[test]
    fn logsumexp_dominant_entry_returns_max() {
        assert_eq!(logsumexp(&[10.0, 10.0 - 41.0, 10.0 - 50.0]), 10.0);
        assert_eq!(logsumexp(&[0.0, -40.5]), 0.0);
    }

    #[test]
    fn logsumexp_large_magnitudes() {
        // ln(e^1234 + e^1232) = 1232 + ln(e^2 + 1)
        let expected = 1232.0 + (2f64.exp() + 1.0).ln();
        assert!((logsumexp(&[1234.0, 1232.0]) - expected).abs() < 1e-12);
        assert!((1234f64.exp() + 1232f64.exp()).ln().is_infinite());
    }

    #[test]
    fn normalize_log_examples() {
        let p = normalize_log(&LogWeightVector::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);

        let p = normalize_log(&LogWeightVector::new(vec![1f64.ln(), 3f64.ln()]).unwrap()).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-15);
        assert!((p[1] - 0.75).abs() < 1e-15);

        // naive evaluation after shifting by +1000
        let p =
            normalize_log(&LogWeightVector::new(vec![-1000.0, -1001.0, -1002.0]).unwrap()).unwrap();
        let naive = [1.0, (-1f64).exp(), (-2f64).exp()];
        let total: f64 = naive.iter().sum();
        for k in 0..3 {
            assert!((p[k] - naive[k] / total).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_log_rejects_all_neg_inf() {
        assert_eq!(
            LogWeightVector::new(vec![f64::NEG_INFINITY; 3]),
            Err(Error::AllZeroWeights)
        );
        assert_eq!(
            normalize_log_slice(&[f64::NEG_INFINITY; 2]),
            Err(Error::AllZeroWeights)
        );
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![0.25, 0.75]).is_ok());
        assert!(ProbabilityVector::new(vec![0.1, 0.2, 0.7]).is_ok());
        assert!(ProbabilityVector::new(vec![0.5, 0.5 + 1e-11]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
        let p = ProbabilityVector::from_weights(&[1.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let p = ProbabilityVector::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert_eq!(p.argmax(), (0, true));
        let p = ProbabilityVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(p.argmax(), (1, false));
        let p = ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(p.argmax(), (2, false));
    }

    #[test]
    fn label_space_invariants() {
        assert!(LabelSpace::new(["a"]).is_err());
        assert!(LabelSpace::new(["a", "a"]).is_err());
        let l = LabelSpace::new(["a", "b"]).unwrap();
        assert_eq!(l.index_of("b"), Some(1));
        assert!(ObservationAlphabet::new(Vec::<String>::new()).is_err());
        assert!(ObservationAlphabet::new(["x"]).is_ok());
        assert!(ObservationAlphabet::new(["x", "x"]).is_err());
    }

    proptest! {
        #[test]
        fn logsumexp_shift_equivariant(
            v in prop::collection::vec(-50.0f64..50.0, 1..10),
            c in -100.0f64..100.0,
        ) {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            prop_assert!((logsumexp(&shifted) - (logsumexp(&v) + c)).abs() <= 1e-12);
        }

        #[test]
        fn normalize_log_shift_invariant(
            v in prop::collection::vec(-50.0f64..50.0, 1..10),
            c in -500.0f64..500.0,
        ) {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let a = normalize_log_slice(&v).unwrap();
            let b = normalize_log_slice(&shifted).unwrap();
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
            let s: f64 = a.as_slice().iter().sum();
            prop_assert!((s - 1.0).abs() <= SIMPLEX_TOL);
        }
    }
}
