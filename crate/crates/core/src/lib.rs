//! Naive Bayes in generative and discriminative form, its equivalence with
//! multinomial logistic regression, and forward-backward smoothing for
//! hidden Markov models driven either by emissions or by one-step label
//! posteriors.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod hmm;
pub mod logreg;
pub mod model_io;
pub mod naive_bayes;
pub mod numeric;
pub mod oracle;
pub mod random;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
pub use hmm::{entropic_forward_backward, forward_backward, HmmModel, PosteriorMarginals};
pub use logreg::{lr_to_nb, nb_to_lr, LogisticRegressionModel};
pub use model_io::{Model, ModelKind};
pub use naive_bayes::{DiscriminativeNbModel, LabeledSequence, NaiveBayesModel, TabularPosteriors};
pub use numeric::{LabelSpace, ObservationAlphabet, ProbabilityVector};
pub use train::{fit_discriminative, LabeledVector, TrainConfig, TrainReport};
