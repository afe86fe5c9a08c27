//! JSON model documents.
//!
//! Every document carries a `"type"` tag: `naive_bayes`, `disc_nb`,
//! `logreg` or `hmm`. Floats are written as the shortest decimal that
//! parses back to the identical `f64`, and parsing is exact, so a round trip
//! reproduces every parameter bit for bit.
//!
//! Layouts:
//! - `naive_bayes`: `emissions[t][i][s] = b_i^(t)(s)`; `alphabets[t]` names
//!   the symbols of position `t` (optional on input, defaults to `"0"…`).
//! - `disc_nb`: `params.a[i][t]`, `params.c[i][t]`.
//! - `logreg`: `weights[i][t]`, `biases[i]`.
//! - `hmm`: `transitions[i][j] = a_i(j)`, `emissions[i][y] = b_i(y)`,
//!   `posteriors[y][i] = L_y(i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::HmmModel;
use crate::logreg::LogisticRegressionModel;
use crate::naive_bayes::{DiscriminativeNbModel, NaiveBayesModel};
use crate::numeric::{LabelSpace, ObservationAlphabet, ProbabilityVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LinearParams {
    a: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum Document {
    NaiveBayes {
        labels: Vec<String>,
        #[serde(rename = "T")]
        positions: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabets: Option<Vec<Vec<String>>>,
        prior: Vec<f64>,
        emissions: Vec<Vec<Vec<f64>>>,
    },
    DiscNb {
        labels: Vec<String>,
        #[serde(rename = "T")]
        positions: usize,
        prior: Vec<f64>,
        params: LinearParams,
    },
    Logreg {
        labels: Vec<String>,
        #[serde(rename = "T")]
        positions: usize,
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
    },
    Hmm {
        labels: Vec<String>,
        alphabet: Vec<String>,
        prior: Vec<f64>,
        transitions: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        emissions: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        posteriors: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NaiveBayes,
    DiscNb,
    LogReg,
    Hmm,
}

impl ModelKind {
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::DiscNb => "disc_nb",
            ModelKind::LogReg => "logreg",
            ModelKind::Hmm => "hmm",
        }
    }
}

/// Any model that can be stored as a JSON document.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    NaiveBayes(NaiveBayesModel),
    DiscNb(DiscriminativeNbModel),
    LogReg(LogisticRegressionModel),
    Hmm(HmmModel),
}

impl From<NaiveBayesModel> for Model {
    fn from(m: NaiveBayesModel) -> Self {
        Model::NaiveBayes(m)
    }
}

impl From<DiscriminativeNbModel> for Model {
    fn from(m: DiscriminativeNbModel) -> Self {
        Model::DiscNb(m)
    }
}

impl From<LogisticRegressionModel> for Model {
    fn from(m: LogisticRegressionModel) -> Self {
        Model::LogReg(m)
    }
}

impl From<HmmModel> for Model {
    fn from(m: HmmModel) -> Self {
        Model::Hmm(m)
    }
}

fn pv_rows(rows: Vec<Vec<f64>>) -> Result<Vec<ProbabilityVector>> {
    rows.into_iter().map(ProbabilityVector::new).collect()
}

fn rows_of(pvs: &[ProbabilityVector]) -> Vec<Vec<f64>> {
    pvs.iter().map(|p| p.as_slice().to_vec()).collect()
}

fn check_positions(declared: usize, found: usize, what: &'static str) -> Result<()> {
    if declared != found {
        return Err(Error::DimensionMismatch {
            what,
            expected: declared,
            found,
        });
    }
    Ok(())
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::NaiveBayes(_) => ModelKind::NaiveBayes,
            Model::DiscNb(_) => ModelKind::DiscNb,
            Model::LogReg(_) => ModelKind::LogReg,
            Model::Hmm(_) => ModelKind::Hmm,
        }
    }

    pub fn labels(&self) -> &LabelSpace {
        match self {
            Model::NaiveBayes(m) => m.labels(),
            Model::DiscNb(m) => m.labels(),
            Model::LogReg(m) => m.labels(),
            Model::Hmm(m) => m.labels(),
        }
    }

    fn to_document(&self) -> Document {
        match self {
            Model::NaiveBayes(m) => Document::NaiveBayes {
                labels: m.labels().names().to_vec(),
                positions: m.n_positions(),
                alphabets: Some(m.alphabets().iter().map(|a| a.symbols().to_vec()).collect()),
                prior: m.prior().as_slice().to_vec(),
                emissions: m.emissions().iter().map(|t| rows_of(t)).collect(),
            },
            Model::DiscNb(m) => Document::DiscNb {
                labels: m.labels().names().to_vec(),
                positions: m.n_positions(),
                prior: m.prior().as_slice().to_vec(),
                params: LinearParams {
                    a: m.slopes().to_vec(),
                    c: m.intercepts().to_vec(),
                },
            },
            Model::LogReg(m) => Document::Logreg {
                labels: m.labels().names().to_vec(),
                positions: m.n_positions(),
                weights: m.weights().to_vec(),
                biases: m.biases().to_vec(),
            },
            Model::Hmm(m) => Document::Hmm {
                labels: m.labels().names().to_vec(),
                alphabet: m.alphabet().symbols().to_vec(),
                prior: m.prior().as_slice().to_vec(),
                transitions: rows_of(m.transitions()),
                emissions: m.emissions().map(rows_of),
                posteriors: m.posteriors().map(rows_of),
            },
        }
    }

    fn from_document(doc: Document) -> Result<Self> {
        Ok(match doc {
            Document::NaiveBayes {
                labels,
                positions,
                alphabets,
                prior,
                emissions,
            } => {
                check_positions(positions, emissions.len(), "emission tables vs T")?;
                let alphabets = match alphabets {
                    Some(a) => {
                        check_positions(positions, a.len(), "alphabets vs T")?;
                        a.into_iter()
                            .map(ObservationAlphabet::new)
                            .collect::<Result<Vec<_>>>()?
                    }
                    None => emissions
                        .iter()
                        .map(|table| {
                            ObservationAlphabet::indexed(table.first().map_or(0, Vec::len))
                        })
                        .collect::<Result<Vec<_>>>()?,
                };
                let emissions = emissions
                    .into_iter()
                    .map(pv_rows)
                    .collect::<Result<Vec<_>>>()?;
                Model::NaiveBayes(NaiveBayesModel::new(
                    LabelSpace::new(labels)?,
                    alphabets,
                    ProbabilityVector::new(prior)?,
                    emissions,
                )?)
            }
            Document::DiscNb {
                labels,
                positions,
                prior,
                params,
            } => {
                for row in params.a.iter().chain(&params.c) {
                    check_positions(positions, row.len(), "parameter row length vs T")?;
                }
                Model::DiscNb(DiscriminativeNbModel::new(
                    LabelSpace::new(labels)?,
                    ProbabilityVector::new(prior)?,
                    params.a,
                    params.c,
                )?)
            }
            Document::Logreg {
                labels,
                positions,
                weights,
                biases,
            } => {
                for row in &weights {
                    check_positions(positions, row.len(), "weight row length vs T")?;
                }
                Model::LogReg(LogisticRegressionModel::new(
                    LabelSpace::new(labels)?,
                    weights,
                    biases,
                )?)
            }
            Document::Hmm {
                labels,
                alphabet,
                prior,
                transitions,
                emissions,
                posteriors,
            } => Model::Hmm(HmmModel::new(
                LabelSpace::new(labels)?,
                ObservationAlphabet::new(alphabet)?,
                ProbabilityVector::new(prior)?,
                pv_rows(transitions)?,
                emissions.map(pv_rows).transpose()?,
                posteriors.map(pv_rows).transpose()?,
            )?),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        Self::from_document(doc)
    }
}
