//! The `gendisc` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 numerical
//! failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{self, DatasetError};
use crate::error::Error;
use crate::hmm::{self, HmmModel, PosteriorMarginals};
use crate::logreg::{lr_to_nb, nb_to_lr};
use crate::model_io::Model;
use crate::naive_bayes::NaiveBayesModel;
use crate::numeric::{worst_discrepancy, LabelSpace, ProbabilityVector, EQUIVALENCE_TOL};
use crate::random::random_real_observation;
use crate::train::{fit_discriminative, BatchSize, TrainConfig};
use crate::verify::{self, Fault, DEFAULT_CASES, PROBES_PER_MODEL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gendisc",
    version,
    about = "Generative and discriminative Naive Bayes, logistic regression and HMM smoothing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to a labelled CSV dataset
    Fit(FitArgs),
    /// Posterior table for every row of an observation file
    Predict(PredictArgs),
    /// Convert between disc_nb and logreg models
    Convert(ConvertArgs),
    /// Run the randomized equivalence suites
    Verify(VerifyArgs),
    /// Smoothed state marginals of an HMM
    HmmPosterior(HmmArgs),
}

#[derive(Debug, Args)]
#[group(id = "mode", required = true, multiple = false)]
struct FitMode {
    /// Count-based Naive Bayes on symbol features
    #[arg(long)]
    generative: bool,
    /// Gradient-trained discriminative Naive Bayes on real features
    #[arg(long)]
    discriminative: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    mode: FitMode,
    /// CSV with a header row, label in the first column
    data: PathBuf,
    /// Model output path (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Comma-separated label set, fixing order and admitting unseen labels
    #[arg(long)]
    labels: Option<String>,
    /// Additive smoothing pseudo-count (generative)
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Learning rate (discriminative)
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    /// `full` or a positive batch size
    #[arg(long, default_value = "full", value_parser = parse_batch_size)]
    batch_size: BatchSize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the training report as JSON
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Generative,
    Discriminative,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model JSON (naive_bayes, disc_nb or logreg)
    model: PathBuf,
    /// CSV of observations, with or without a leading label column
    observations: PathBuf,
    /// Output CSV path (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Posterior route for naive_bayes models
    #[arg(long, value_enum, default_value_t = Route::Generative)]
    route: Route,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// disc_nb or logreg model JSON
    model: PathBuf,
    /// Converted model path (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Comma-separated prior for logreg sources (default: uniform)
    #[arg(long)]
    prior: Option<String>,
    /// Seed of the probe observations
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InjectedFault {
    EfbPriorSign,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random models per suite
    #[arg(long, default_value_t = DEFAULT_CASES, value_parser = parse_cases)]
    cases: usize,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<InjectedFault>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Fb,
    Efb,
    Both,
}

#[derive(Debug, Args)]
#[group(id = "obs", required = true, multiple = false)]
struct HmmObservations {
    /// File of symbols separated by commas or whitespace
    observations: Option<PathBuf>,
    /// Inline symbol sequence, e.g. "a,b,a"
    #[arg(long)]
    seq: Option<String>,
}

#[derive(Debug, Args)]
struct HmmArgs {
    /// HMM model JSON
    model: PathBuf,
    #[command(flatten)]
    obs: HmmObservations,
    #[arg(long, value_enum, default_value_t = Algorithm::Both)]
    algorithm: Algorithm,
}

fn parse_cases(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got '{s}'")),
    }
}

fn parse_batch_size(s: &str) -> Result<BatchSize, String> {
    if s.eq_ignore_ascii_case("full") {
        return Ok(BatchSize::Full);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(BatchSize::Fixed(n)),
        _ => Err(format!("expected 'full' or a positive integer, got '{s}'")),
    }
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn bad_input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_BAD_INPUT,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DivergedLoss { .. } | Error::NonFinite(_) => Failure::numerical(e.to_string()),
            _ => Failure::bad_input(e.to_string()),
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::bad_input(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Output streams of one invocation.
struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        self.out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::bad_input(format!("cannot write output: {e}")))
    }

    fn note(&mut self, text: &str) {
        let _ = self.err.write_all(text.as_bytes());
    }

    /// Writes `text` to `path`, or to stdout when no path is given.
    fn deliver(&mut self, path: Option<&Path>, text: &str) -> Result<(), Failure> {
        match path {
            Some(p) => fs::write(p, text)
                .map_err(|e| Failure::bad_input(format!("cannot write {}: {e}", p.display()))),
            None => self.emit(text),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::bad_input(format!("cannot read {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<fs::File, Failure> {
    fs::File::open(path)
        .map_err(|e| Failure::bad_input(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    Model::from_json(&read_text(path)?)
        .map_err(|e| Failure::bad_input(format!("{}: {e}", path.display())))
}

fn parse_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_owned())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_BAD_INPUT
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let mut io = Io { out, err };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a, &mut io),
        Command::Predict(a) => cmd_predict(&a, &mut io),
        Command::Convert(a) => cmd_convert(&a, &mut io),
        Command::Verify(a) => cmd_verify(&a, &mut io),
        Command::HmmPosterior(a) => cmd_hmm_posterior(&a, &mut io),
    };
    let code = match result {
        Ok(code) => code,
        Err(f) => {
            io.note(&format!("error: {}\n", f.message));
            f.code
        }
    };
    let _ = io.out.flush();
    code
}

fn cmd_fit(args: &FitArgs, io: &mut Io<'_>) -> CmdResult {
    let declared = args
        .labels
        .as_deref()
        .map(|s| LabelSpace::new(parse_list(s)))
        .transpose()?;
    let file = open(&args.data)?;
    // the report goes to stdout unless the model already occupies it
    let mut report = String::new();
    let model: Model = if args.mode.generative {
        let data = dataset::read_discrete(file, declared.as_ref())?;
        let model = NaiveBayesModel::fit_mle(
            data.labels.clone(),
            data.alphabets.clone(),
            &data.samples,
            args.alpha,
        )?;
        let _ = writeln!(report, "samples: {}", data.samples.len());
        for (i, name) in data.labels.names().iter().enumerate() {
            let count = data.samples.iter().filter(|s| s.label == i).count();
            let _ = writeln!(report, "label {name}: {count}");
        }
        for (t, (name, alphabet)) in data.feature_names.iter().zip(&data.alphabets).enumerate() {
            let _ = writeln!(
                report,
                "position {} ({name}): {} symbols",
                t + 1,
                alphabet.len()
            );
        }
        model.into()
    } else {
        let data = dataset::read_real(file, declared.as_ref())?;
        let config = TrainConfig {
            learning_rate: args.lr,
            epochs: args.epochs,
            batch_size: args.batch_size,
            seed: args.seed,
        };
        let (model, train_report) = fit_discriminative(
            &data.samples,
            data.feature_names.len(),
            data.labels.clone(),
            &config,
        )?;
        let _ = writeln!(report, "epoch 0 loss {:.16e}", train_report.initial_loss);
        for (k, loss) in train_report.loss_curve.iter().enumerate() {
            let _ = writeln!(report, "epoch {} loss {loss:.16e}", k + 1);
        }
        let _ = writeln!(
            report,
            "training accuracy {:.6}",
            train_report.final_accuracy
        );
        if let Some(path) = &args.report {
            let json = serde_json::to_string_pretty(&train_report).expect("report serializes");
            io.deliver(Some(path), &(json + "\n"))?;
        }
        model.into()
    };
    let json = model.to_json() + "\n";
    match &args.output {
        Some(path) => {
            io.deliver(Some(path), &json)?;
            io.emit(&report)?;
        }
        None => {
            io.emit(&json)?;
            io.note(&report);
        }
    }
    Ok(EXIT_OK)
}

/// One CSV cell with 17 significant digits, enough to recover the `f64`.
fn float_cell(v: f64) -> String {
    format!("{v:.16e}")
}

fn posterior_table(labels: &LabelSpace, rows: &[ProbabilityVector]) -> String {
    let mut out = String::new();
    let header: Vec<String> = labels.names().iter().map(|n| format!("p_{n}")).collect();
    let _ = writeln!(out, "{},argmax,tie", header.join(","));
    for p in rows {
        let (best, tie) = p.argmax();
        let cells: Vec<String> = p.as_slice().iter().map(|&v| float_cell(v)).collect();
        let _ = writeln!(out, "{},{},{}", cells.join(","), labels.name(best), tie);
    }
    out
}

fn with_zero_evidence_hint(e: Error) -> Failure {
    match e {
        Error::ZeroEvidence | Error::ZeroMarginal { .. } => Failure::bad_input(format!(
            "{e} (an unseen symbol under alpha = 0; refit with --alpha > 0)"
        )),
        other => other.into(),
    }
}

fn cmd_predict(args: &PredictArgs, io: &mut Io<'_>) -> CmdResult {
    let model = load_model(&args.model)?;
    let file = open(&args.observations)?;
    let rows: Vec<ProbabilityVector> = match &model {
        Model::NaiveBayes(m) => {
            let obs = dataset::read_discrete_observations(file, m.alphabets())?;
            match args.route {
                Route::Generative => obs
                    .iter()
                    .map(|y| m.generative_posterior(y))
                    .collect::<Result<_, _>>()
                    .map_err(with_zero_evidence_hint)?,
                Route::Discriminative => {
                    let tab = m.to_discriminative(None)?;
                    obs.iter()
                        .map(|y| tab.posterior(y))
                        .collect::<Result<_, _>>()
                        .map_err(with_zero_evidence_hint)?
                }
            }
        }
        Model::DiscNb(m) => {
            let obs = dataset::read_real_observations(file, m.n_positions())?;
            obs.iter()
                .map(|y| m.posterior(y))
                .collect::<Result<_, _>>()?
        }
        Model::LogReg(m) => {
            let obs = dataset::read_real_observations(file, m.n_positions())?;
            obs.iter()
                .map(|y| m.posterior(y))
                .collect::<Result<_, _>>()?
        }
        Model::Hmm(_) => {
            return Err(Failure::bad_input(
                "hmm models are evaluated with `hmm-posterior`",
            ));
        }
    };
    io.deliver(
        args.output.as_deref(),
        &posterior_table(model.labels(), &rows),
    )?;
    Ok(EXIT_OK)
}

/// Largest posterior difference between two models over seeded random
/// observations in `[-3, 3]^T`.
fn probe_discrepancy(
    source: &dyn Fn(&[f64]) -> crate::Result<ProbabilityVector>,
    target: &dyn Fn(&[f64]) -> crate::Result<ProbabilityVector>,
    n_positions: usize,
    seed: u64,
) -> crate::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..PROBES_PER_MODEL {
        let y = random_real_observation(&mut rng, n_positions);
        let d = source(&y)?.max_abs_diff(&target(&y)?);
        worst = worst_discrepancy(worst, d);
    }
    Ok(worst)
}

fn cmd_convert(args: &ConvertArgs, io: &mut Io<'_>) -> CmdResult {
    let model = load_model(&args.model)?;
    let (converted, discrepancy): (Model, f64) = match &model {
        Model::DiscNb(m) => {
            if args.prior.is_some() {
                return Err(Failure::bad_input("--prior applies only to logreg sources"));
            }
            let lr = nb_to_lr(m)?;
            let d = probe_discrepancy(
                &|y| m.posterior(y),
                &|y| lr.posterior(y),
                m.n_positions(),
                args.seed,
            )?;
            (lr.into(), d)
        }
        Model::LogReg(m) => {
            let prior = match &args.prior {
                Some(text) => {
                    let values = parse_list(text)
                        .iter()
                        .map(|s| s.parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Failure::bad_input(format!("--prior: {e}")))?;
                    ProbabilityVector::new(values)?
                }
                None => ProbabilityVector::uniform(m.n_labels())?,
            };
            let nb = lr_to_nb(m, &prior)?;
            let d = probe_discrepancy(
                &|y| m.posterior(y),
                &|y| nb.posterior(y),
                m.n_positions(),
                args.seed,
            )?;
            (nb.into(), d)
        }
        other => {
            return Err(Failure::bad_input(format!(
                "convert expects a disc_nb or logreg model, found {}",
                other.kind().tag()
            )));
        }
    };
    let summary = format!(
        "{} -> {}: max probe discrepancy {:.3e} over {} probes (tol {:.0e})\n",
        model.kind().tag(),
        converted.kind().tag(),
        discrepancy,
        PROBES_PER_MODEL,
        EQUIVALENCE_TOL
    );
    if discrepancy.is_nan() || discrepancy > EQUIVALENCE_TOL {
        io.note(&summary);
        return Err(Failure::numerical(
            "converted model disagrees with its source",
        ));
    }
    let json = converted.to_json() + "\n";
    match &args.output {
        Some(path) => {
            io.deliver(Some(path), &json)?;
            io.emit(&summary)?;
        }
        None => {
            io.emit(&json)?;
            io.note(&summary);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, io: &mut Io<'_>) -> CmdResult {
    let fault = match args.inject_fault {
        Some(InjectedFault::EfbPriorSign) => Fault::EfbPriorSign,
        None => Fault::None,
    };
    let report = verify::run_all(args.seed, args.cases, fault);
    io.emit(&report.render())?;
    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn marginal_table(model: &HmmModel, obs: &[usize], g: &PosteriorMarginals) -> String {
    let mut out = String::new();
    let header: Vec<String> = model
        .labels()
        .names()
        .iter()
        .map(|n| format!("p_{n}"))
        .collect();
    let _ = writeln!(out, "t,y,{}", header.join(","));
    for (t, row) in g.gamma.iter().enumerate() {
        let cells: Vec<String> = row.as_slice().iter().map(|&v| float_cell(v)).collect();
        let _ = writeln!(
            out,
            "{},{},{}",
            t + 1,
            model.alphabet().symbol(obs[t]),
            cells.join(",")
        );
    }
    out
}

fn cmd_hmm_posterior(args: &HmmArgs, io: &mut Io<'_>) -> CmdResult {
    let model = match load_model(&args.model)? {
        Model::Hmm(m) => m,
        other => {
            return Err(Failure::bad_input(format!(
                "hmm-posterior expects an hmm model, found {}",
                other.kind().tag()
            )))
        }
    };
    let text = match (&args.obs.observations, &args.obs.seq) {
        (Some(path), _) => read_text(path)?,
        (None, Some(seq)) => seq.clone(),
        (None, None) => unreachable!("clap requires one observation source"),
    };
    let obs = dataset::parse_symbol_sequence(&text, model.alphabet())?;
    let needs_efb = args.algorithm != Algorithm::Fb;
    let model = if needs_efb && model.posteriors().is_none() {
        model.derive_posteriors()?
    } else {
        model
    };

    let mut out = String::new();
    let fb = match args.algorithm {
        Algorithm::Efb => None,
        _ => Some(hmm::forward_backward(&model, &obs)?),
    };
    let efb = if needs_efb {
        Some(hmm::entropic_forward_backward(&model, &obs)?)
    } else {
        None
    };
    if let Some(g) = &fb {
        out.push_str("# forward-backward\n");
        out.push_str(&marginal_table(&model, &obs, g));
    }
    if let Some(g) = &efb {
        out.push_str("# entropic forward-backward\n");
        out.push_str(&marginal_table(&model, &obs, g));
    }
    if let (Some(a), Some(b)) = (&fb, &efb) {
        let _ = writeln!(out, "max_discrepancy {:.3e}", a.max_abs_diff(b));
    }
    io.emit(&out)?;
    Ok(EXIT_OK)
}
