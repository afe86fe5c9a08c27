//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::fs;
use std::process::{Command, ExitCode};

use gendisc::hmm::{entropic_forward_backward, forward_backward};
use gendisc::model_io::Model;
use gendisc::naive_bayes::{LabeledSequence, NaiveBayesModel};
use gendisc::numeric::{
    worst_discrepancy, LabelSpace, ObservationAlphabet, ProbabilityVector, EQUIVALENCE_TOL,
    FINITE_DIFF_STEP, GRADIENT_REL_FLOOR, GRADIENT_REL_TOL,
};
use gendisc::oracle::{joint_enumeration_hmm, joint_enumeration_nb};
use gendisc::random::{
    random_disc_nb, random_hmm, random_logreg, random_nb_model, random_real_observation,
    sample_hmm_observations, sample_nb_observation,
};
use gendisc::train::{
    finite_difference_gradient, fit_discriminative, relative_error, two_class_gaussian, BatchSize,
    LabeledVector, RawParams, TrainConfig,
};
use gendisc::verify::{self, SuiteResult, ORACLE_PATH_LIMIT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240501;

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn suite_outcome(s: &SuiteResult) -> Outcome {
    Outcome {
        passed: s.passed(),
        detail: format!(
            "{} models, {} comparisons, {} errors, max discrepancy {:.3e} (tol {:.0e})",
            s.cases, s.comparisons, s.errors, s.max_discrepancy, s.tolerance
        ),
    }
}

fn ac1() -> Outcome {
    suite_outcome(&verify::naive_bayes_suite(SEED, 1000))
}

fn ac2() -> Outcome {
    suite_outcome(&verify::logreg_suite(SEED, 500))
}

fn ac3() -> Outcome {
    suite_outcome(&verify::hmm_suite(SEED, 500, verify::Fault::None))
}

fn ac4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let mut worst = 0.0_f64;
    let mut hmm_cases = 0;
    let mut failures = 0;
    // every (N, T) with N^T within the limit, several models each
    for n in 2..=5usize {
        let mut t_len = 1u32;
        while n.pow(t_len) <= ORACLE_PATH_LIMIT {
            for _ in 0..10 {
                let m_sym = rng.gen_range(1..=5);
                let model = random_hmm(&mut rng, n, m_sym);
                let y = sample_hmm_observations(&mut rng, &model, t_len as usize);
                match (
                    forward_backward(&model, &y),
                    joint_enumeration_hmm(&model, &y),
                ) {
                    (Ok(a), Ok(b)) => worst = worst.max(a.max_abs_diff(&b)),
                    _ => failures += 1,
                }
                hmm_cases += 1;
            }
            t_len += 1;
        }
    }
    let mut nb_cases = 0;
    for _ in 0..1000 {
        let (n, t_len, m_sym) = (
            rng.gen_range(2..=5),
            rng.gen_range(1..=6),
            rng.gen_range(1..=6),
        );
        let model = random_nb_model(&mut rng, n, t_len, m_sym);
        let y = sample_nb_observation(&mut rng, &model);
        match (
            model.generative_posterior(&y),
            joint_enumeration_nb(&model, &y),
        ) {
            (Ok(a), Ok(b)) => worst = worst.max(a.max_abs_diff(&b)),
            _ => failures += 1,
        }
        nb_cases += 1;
    }
    Outcome {
        passed: failures == 0 && worst <= EQUIVALENCE_TOL,
        detail: format!(
            "{hmm_cases} HMM cases (N^T <= {ORACLE_PATH_LIMIT}), {nb_cases} NB cases, {failures} errors, max discrepancy {worst:.3e} (tol {EQUIVALENCE_TOL:.0e})"
        ),
    }
}

fn ac5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let configs = 60;
    let mut worst = 0.0_f64;
    let mut coords = 0;
    for _ in 0..configs {
        let n = rng.gen_range(2..=5);
        let t_len = rng.gen_range(1..=6);
        let model = random_disc_nb(&mut rng, n, t_len);
        let size = rng.gen_range(5..=40);
        let data: Vec<LabeledVector> = (0..size)
            .map(|_| {
                LabeledVector::new(
                    rng.gen_range(0..n),
                    random_real_observation(&mut rng, t_len),
                )
            })
            .collect();
        let params = RawParams::from_model(&model);
        let analytic = params.gradient(&data).expect("finite gradient").to_flat();
        let numeric =
            finite_difference_gradient(&params, &data, FINITE_DIFF_STEP).expect("finite loss");
        for (a, b) in analytic.iter().zip(&numeric) {
            let e = relative_error(*a, *b, GRADIENT_REL_FLOOR);
            worst = worst_discrepancy(worst, e);
            coords += 1;
        }
    }
    Outcome {
        passed: worst <= GRADIENT_REL_TOL,
        detail: format!(
            "{configs} configurations, {coords} coordinates, h = {FINITE_DIFF_STEP:.0e}, max relative error {worst:.3e} (tol {GRADIENT_REL_TOL:.0e})"
        ),
    }
}

fn ac6() -> Outcome {
    let data = two_class_gaussian(200, 2.0, SEED);
    let config = TrainConfig {
        learning_rate: 0.1,
        epochs: 500,
        batch_size: BatchSize::Full,
        seed: SEED,
    };
    let labels = LabelSpace::new(["neg", "pos"]).expect("two labels");
    let (_, report) = match fit_discriminative(&data, 1, labels, &config) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                passed: false,
                detail: format!("training failed: {e}"),
            }
        }
    };
    let mut curve = vec![report.initial_loss];
    curve.extend(&report.loss_curve);
    let worst_rise = curve
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        passed: report.final_accuracy >= 0.95 && worst_rise <= 1e-9,
        detail: format!(
            "accuracy {:.4} (>= 0.95), loss {:.6} -> {:.6}, largest per-epoch rise {:.3e} (<= 1e-9)",
            report.final_accuracy,
            report.initial_loss,
            curve[curve.len() - 1],
            worst_rise
        ),
    }
}

/// `|x · den − num|` scaled by `2^80`, exact for `x ∈ [2^-80, 1]` and
/// `num, den ≤ 1000`.
fn scaled_distance(x: f64, num: u64, den: u64) -> i128 {
    const SCALE: i32 = 80;
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1 << 52) - 1)) as i128;
    let (mant, exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), raw_exp - 1075)
    };
    assert!(exp + SCALE >= 0, "value below the exact range");
    let lhs = mant * den as i128 * (1i128 << (exp + SCALE));
    let rhs = (num as i128) << SCALE;
    (lhs - rhs).abs()
}

/// Whether `x` is the `f64` nearest to `num / den`.
fn is_correctly_rounded(x: f64, num: u64, den: u64) -> bool {
    if num == 0 {
        return x == 0.0;
    }
    let d = scaled_distance(x, num, den);
    let below = f64::from_bits(x.to_bits() - 1);
    let above = f64::from_bits(x.to_bits() + 1);
    d <= scaled_distance(below, num, den) && (x == 1.0 || d <= scaled_distance(above, num, den))
}

fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut checked = 0;
    let mut wrong = 0;
    let mut datasets = 0;
    // the two-sample example first, then random datasets up to 1000 rows
    let mut cases: Vec<(usize, usize, usize, Vec<LabeledSequence>)> = vec![(
        2,
        1,
        2,
        vec![
            LabeledSequence::new(0, vec![0]),
            LabeledSequence::new(1, vec![1]),
        ],
    )];
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let t_len = rng.gen_range(1..=4);
        let m_sym = rng.gen_range(1..=7);
        let size = rng.gen_range(1..=1000);
        let data = (0..size)
            .map(|_| {
                LabeledSequence::new(
                    rng.gen_range(0..n),
                    (0..t_len).map(|_| rng.gen_range(0..m_sym)).collect(),
                )
            })
            .collect();
        cases.push((n, t_len, m_sym, data));
    }
    for (n, t_len, m_sym, data) in cases {
        datasets += 1;
        let labels = LabelSpace::indexed(n).expect("n >= 2");
        let alphabets = vec![ObservationAlphabet::indexed(m_sym).expect("m >= 1"); t_len];
        let model = NaiveBayesModel::fit_mle(labels, alphabets, &data, 0.0).expect("fit");
        let label_count = |i: usize| data.iter().filter(|s| s.label == i).count() as u64;
        for i in 0..n {
            let ci = label_count(i);
            checked += 1;
            if !is_correctly_rounded(model.prior()[i], ci, data.len() as u64) {
                wrong += 1;
            }
            if ci == 0 {
                continue;
            }
            for t in 0..t_len {
                for s in 0..m_sym {
                    let cs = data
                        .iter()
                        .filter(|d| d.label == i && d.symbols[t] == s)
                        .count() as u64;
                    checked += 1;
                    if !is_correctly_rounded(model.emission(t, i, s), cs, ci) {
                        wrong += 1;
                    }
                }
            }
        }
    }
    Outcome {
        passed: wrong == 0,
        detail: format!("{datasets} datasets, {checked} parameters, {wrong} differ from the correctly rounded count ratio"),
    }
}

fn bits(p: &ProbabilityVector) -> Vec<u64> {
    p.as_slice().iter().map(|v| v.to_bits()).collect()
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for _ in 0..100 {
        let nb = random_nb_model(&mut rng, 3, 3, 4);
        let disc = random_disc_nb(&mut rng, 4, 3);
        let lr = random_logreg(&mut rng, 3, 2);
        let hmm = random_hmm(&mut rng, 3, 3)
            .derive_posteriors()
            .expect("positive prior");
        let models: Vec<Model> = vec![nb.into(), disc.into(), lr.into(), hmm.into()];
        for model in models {
            let back = match Model::from_json(&model.to_json()) {
                Ok(m) => m,
                Err(e) => {
                    mismatches.push(format!("{}: {e}", model.kind().tag()));
                    continue;
                }
            };
            let same = match (&model, &back) {
                (Model::NaiveBayes(a), Model::NaiveBayes(b)) => (0..5).all(|_| {
                    let y = sample_nb_observation(&mut rng, a);
                    let tab_a = a.to_discriminative(None).and_then(|t| t.posterior(&y));
                    let tab_b = b.to_discriminative(None).and_then(|t| t.posterior(&y));
                    bits(&a.generative_posterior(&y).unwrap())
                        == bits(&b.generative_posterior(&y).unwrap())
                        && tab_a.map(|p| bits(&p)) == tab_b.map(|p| bits(&p))
                }),
                (Model::DiscNb(a), Model::DiscNb(b)) => (0..5).all(|_| {
                    let y = random_real_observation(&mut rng, a.n_positions());
                    bits(&a.posterior(&y).unwrap()) == bits(&b.posterior(&y).unwrap())
                }),
                (Model::LogReg(a), Model::LogReg(b)) => (0..5).all(|_| {
                    let y = random_real_observation(&mut rng, a.n_positions());
                    bits(&a.posterior(&y).unwrap()) == bits(&b.posterior(&y).unwrap())
                }),
                (Model::Hmm(a), Model::Hmm(b)) => (0..5).all(|_| {
                    let y = sample_hmm_observations(&mut rng, a, 6);
                    let fb = |m| {
                        forward_backward(m, &y)
                            .unwrap()
                            .gamma
                            .iter()
                            .map(bits)
                            .collect::<Vec<_>>()
                    };
                    let efb = |m| {
                        entropic_forward_backward(m, &y)
                            .unwrap()
                            .gamma
                            .iter()
                            .map(bits)
                            .collect::<Vec<_>>()
                    };
                    fb(a) == fb(b) && efb(a) == efb(b)
                }),
                _ => false,
            };
            checked += 1;
            if !same || model != back {
                mismatches.push(model.kind().tag().to_owned());
            }
        }
    }
    Outcome {
        passed: mismatches.is_empty(),
        detail: format!(
            "{checked} models over naive_bayes, disc_nb, logreg, hmm; {} not bitwise identical{}",
            mismatches.len(),
            mismatches
                .first()
                .map(|m| format!(" (first: {m})"))
                .unwrap_or_default()
        ),
    }
}

struct Run {
    code: Option<i32>,
    stdout: Vec<u8>,
    stderr: String,
}

fn gendisc(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_gendisc"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code(),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn ac9() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let write = |name: &str, text: &str| fs::write(dir.path().join(name), text).expect("write");

    let mut problems = Vec::new();
    let first = gendisc(&["verify", "--seed", "42", "--cases", "50"]);
    let second = gendisc(&["verify", "--seed", "42", "--cases", "50"]);
    if first.stdout != second.stdout || first.stdout.is_empty() {
        problems.push("verify reports differ between runs".to_owned());
    }

    write("empty.csv", "");
    write("ragged.csv", "label,f1\na,x\nb,y,z\n");
    write("train.csv", "label,f1,f2\na,x,p\nb,y,q\n");
    // each label has probability zero for one of the two symbols
    write("unseen.csv", "f1,f2\nx,q\n");
    write("diverge.csv", "label,y\na,1e150\nb,-1e150\n");
    write(
        "lr.json",
        r#"{"type":"logreg","labels":["a","b"],"T":1,"weights":[[1.0],[-1.0]],"biases":[0.0,0.0]}"#,
    );
    let (empty, ragged, train, unseen, diverge, lr, nb) = (
        path("empty.csv"),
        path("ragged.csv"),
        path("train.csv"),
        path("unseen.csv"),
        path("diverge.csv"),
        path("lr.json"),
        path("nb.json"),
    );
    let checks: Vec<(&str, Vec<&str>, i32, &str)> = vec![
        (
            "default verify passes",
            vec!["verify", "--cases", "20"],
            0,
            "",
        ),
        (
            "fault injection fails",
            vec![
                "verify",
                "--cases",
                "20",
                "--inject-fault",
                "efb-prior-sign",
            ],
            1,
            "",
        ),
        (
            "empty dataset",
            vec!["fit", "--generative", &empty],
            2,
            "empty dataset",
        ),
        (
            "ragged dataset",
            vec!["fit", "--generative", &ragged],
            2,
            "line 3",
        ),
        (
            "fit writes model",
            vec!["fit", "--generative", &train, "-o", &nb],
            0,
            "",
        ),
        (
            "unseen symbol",
            vec!["predict", &nb, &unseen],
            2,
            "zero evidence",
        ),
        (
            "zero prior",
            vec!["convert", &lr, "--prior", "0,1"],
            2,
            "prior must be strictly positive",
        ),
        (
            "diverged loss",
            vec!["fit", "--discriminative", "--lr", "1e10", &diverge],
            3,
            "diverged",
        ),
        ("unknown flag", vec!["verify", "--bogus"], 2, ""),
        (
            "missing model",
            vec!["predict", "/nonexistent.json", &unseen],
            2,
            "cannot read",
        ),
    ];
    for (what, args, code, needle) in &checks {
        let run = gendisc(args);
        if run.code != Some(*code) || !run.stderr.contains(needle) {
            problems.push(format!(
                "{what}: exit {:?}, stderr {:?}",
                run.code,
                run.stderr.trim()
            ));
        }
    }
    Outcome {
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!(
                "verify output byte-identical across runs, {} exit-code checks honored",
                checks.len()
            )
        } else {
            problems.join("; ")
        },
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1", "generative vs discriminative Naive Bayes", ac1),
        (
            "AC2",
            "discriminative Naive Bayes vs logistic regression",
            ac2,
        ),
        ("AC3", "forward-backward vs entropic forward-backward", ac3),
        ("AC4", "recursions vs brute-force enumeration", ac4),
        ("AC5", "analytic vs finite-difference gradients", ac5),
        ("AC6", "training on two Gaussian classes", ac6),
        ("AC7", "exact count ratios from maximum likelihood", ac7),
        ("AC8", "bitwise JSON round trip of posteriors", ac8),
        ("AC9", "CLI determinism and exit codes", ac9),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let outcome = check();
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "{id} {} {name}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("acceptance: {}/9 passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
