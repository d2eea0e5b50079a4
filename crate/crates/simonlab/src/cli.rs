//! Batch command-line front end. Every subcommand emits one JSON document
//! (or TSV for tables) with sorted keys and fixed float formatting, so a
//! rerun with the same flags and seed is byte-identical.
//!
//! Exit codes: 0 on success, 1 when a verdict in the output is FAIL, 2 on
//! usage errors, bad input files, or cap violations.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::classical::{basis_solve, birthday_probability, collision_search, CollisionOutcome};
use crate::error::{Error, Result};
use crate::fflinalg::counting::{alpha, beta, count_fd, sample_fd, DEFAULT_ENUM_CAP};
use crate::fflinalg::{FieldSpec, FpMatrix};
use crate::instances::{GeneralInstance, LinearInstance, PartialFn, PromiseLabel};
use crate::lemma1::{min_feasible_degree, Lemma1Instance};
use crate::polymethod::{q_of_d, ClosedFormQs, Ensemble, QTableExact};
use crate::qsim::{
    simon_decide, spanning_probability, Circuit, StateVector, DEFAULT_SIM_CAP,
};
use crate::verify::run_suites;

#[derive(Parser)]
#[command(name = "simonlab", version, about = "Exact laboratory for the linear Simon problem over F_p^n")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// Override both the enumeration cap and the simulator cap
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// Worker threads for parallel sections (output order is unaffected)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// RNG seed; falls back to SIMONLAB_SEED, then 0
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit tables as tab-separated text instead of JSON
    #[arg(long, global = true)]
    tsv: bool,
}

impl GlobalArgs {
    fn enum_cap(&self) -> u64 {
        self.cap.unwrap_or(DEFAULT_ENUM_CAP)
    }

    fn sim_cap(&self) -> u64 {
        self.cap.unwrap_or(DEFAULT_SIM_CAP)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("SIMONLAB_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(0)
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Subspace and kernel-class counts: alpha, beta, |F_D|
    Count {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        /// Restrict the table to a single kernel dimension
        #[arg(long)]
        h: Option<usize>,
    },
    /// Kernel basis, dimension, and promise label of a matrix
    Kernel {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Seeded Fourier-sampling decision trials on random instances
    Simulate {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=1))]
        kernel_dim: u64,
        #[arg(long)]
        rounds: usize,
        #[arg(long)]
        trials: usize,
    },
    /// Exact one-round Fourier-sampling distribution of a matrix
    RoundDist {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Q_s(D) table of a partial function, with degree check
    Qs {
        #[arg(long)]
        partial: PathBuf,
        #[arg(long, value_enum, default_value_t = QsMode::Both)]
        mode: QsMode,
    },
    /// Averaged acceptance Q(D) of a circuit, with the 2T degree fit
    Qofd {
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Exact feasibility search for the acceptance-polynomial hypothesis
    Lemma1 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_degree: usize,
    },
    /// Property suites with one PASS/FAIL per invariant
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteName::All)]
        suite: SuiteName,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
    },
    /// Classical baselines
    Classical {
        #[command(subcommand)]
        which: ClassicalCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum QsMode {
    Brute,
    Closed,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Counting,
    Lemma2,
    Qsim,
    Instances,
    All,
}

#[derive(Subcommand)]
enum ClassicalCommand {
    /// Deterministic n-query basis reconstruction on a matrix oracle
    Basis {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Randomized collision search on table instances vs the birthday DP
    Collision {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        trials: usize,
        /// Use a two-to-one instance (hidden shift e_1) instead of a bijection
        #[arg(long)]
        two_to_one: bool,
    },
}

/// A float as a JSON number with fixed 17-significant-digit scientific
/// formatting, so output is byte-stable across runs and platforms.
fn float_value(x: f64) -> Value {
    let s = format!("{x:.16e}");
    Value::Number(s.parse().expect("formatted float is a valid JSON number"))
}

fn read_json(path: &PathBuf) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn exact_entry(v: &num_rational::BigRational) -> Value {
    json!({
        "num": v.numer().to_string(),
        "den": v.denom().to_string(),
        "approx": float_value(v.to_f64().unwrap_or(f64::NAN)),
    })
}

/// Run the parsed command; returns the JSON/TSV payload and whether every
/// verdict in it passed.
fn execute(cli: &Cli) -> Result<(String, bool)> {
    let g = &cli.global;
    match &cli.command {
        Command::Count { p, n, h } => cmd_count(*p, *n, *h, g),
        Command::Kernel { matrix } => cmd_kernel(matrix),
        Command::Simulate {
            p,
            n,
            kernel_dim,
            rounds,
            trials,
        } => cmd_simulate(*p, *n, *kernel_dim as usize, *rounds, *trials, g),
        Command::RoundDist { matrix } => cmd_round_dist(matrix, g),
        Command::Qs { partial, mode } => cmd_qs(partial, *mode, g),
        Command::Qofd { circuit } => cmd_qofd(circuit, g),
        Command::Lemma1 { p, n, max_degree } => cmd_lemma1(*p, *n, *max_degree),
        Command::Verify { suite, p, n } => cmd_verify(*suite, *p, *n, g),
        Command::Classical { which } => match which {
            ClassicalCommand::Basis { matrix } => cmd_classical_basis(matrix),
            ClassicalCommand::Collision {
                n,
                budget,
                trials,
                two_to_one,
            } => cmd_classical_collision(*n, *budget, *trials, *two_to_one, g),
        },
    }
}

fn cmd_count(p: u64, n: usize, only_h: Option<usize>, g: &GlobalArgs) -> Result<(String, bool)> {
    let field = FieldSpec::new(p, n)?;
    let hs: Vec<usize> = match only_h {
        Some(h) if h > n => {
            return Err(Error::Domain(format!("h = {h} exceeds n = {n}")));
        }
        Some(h) => vec![h],
        None => (0..=n).collect(),
    };
    let mut rows = Vec::new();
    for &h in &hs {
        rows.push((
            h,
            alpha(p, n, h)?,
            beta(p, n, h)?,
            count_fd(p, n, h)?,
        ));
    }
    if g.tsv {
        let mut out = String::from("h\talpha\tbeta\tcount_fd\n");
        for (h, a, b, c) in &rows {
            out.push_str(&format!("{h}\t{a}\t{b}\t{c}\n"));
        }
        return Ok((out, true));
    }
    let table: Vec<Value> = rows
        .iter()
        .map(|(h, a, b, c)| {
            json!({
                "h": h,
                "alpha": a.to_string(),
                "beta": b.to_string(),
                "count_fd": c.to_string(),
            })
        })
        .collect();
    let _ = field;
    let doc = json!({
        "command": "count",
        "params": {"p": p, "n": n, "h": only_h},
        "result": {"table": table},
    });
    Ok((pretty(&doc), true))
}

fn cmd_kernel(path: &PathBuf) -> Result<(String, bool)> {
    let matrix = FpMatrix::from_json(&read_json(path)?)?;
    let inst = LinearInstance::new(matrix);
    let doc = json!({
        "command": "kernel",
        "params": {"matrix": path.display().to_string()},
        "result": {
            "kernel": inst.kernel().to_json(),
            "dim": inst.kernel_dim(),
            "label": label_str(inst.label()),
        },
    });
    Ok((pretty(&doc), true))
}

fn label_str(label: PromiseLabel) -> &'static str {
    match label {
        PromiseLabel::OneToOne => "ONE_TO_ONE",
        PromiseLabel::KernelP => "KERNEL_P",
        PromiseLabel::Unrestricted => "UNRESTRICTED",
    }
}

fn cmd_simulate(
    p: u64,
    n: usize,
    kernel_dim: usize,
    rounds: usize,
    trials: usize,
    g: &GlobalArgs,
) -> Result<(String, bool)> {
    let field = FieldSpec::new(p, n)?;
    let seed = g.seed();
    let expected = if kernel_dim == 0 {
        PromiseLabel::OneToOne
    } else {
        PromiseLabel::KernelP
    };
    // per-trial seeds are a pure function of (seed, t): order and thread
    // count never change the outcome
    let results: Vec<Result<(bool, Option<Value>)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2 * t as u64));
            let inst = LinearInstance::new(sample_fd(field, kernel_dim, &mut rng)?);
            let (label, transcript) =
                simon_decide(&inst, rounds, seed.wrapping_add(2 * t as u64 + 1))?;
            let sample = if t == 0 {
                Some(serde_json::to_value(&transcript)?)
            } else {
                None
            };
            Ok((label == expected, sample))
        })
        .collect();
    let mut successes = 0usize;
    let mut sample = Value::Null;
    for r in results {
        let (ok, s) = r?;
        if ok {
            successes += 1;
        }
        if let Some(s) = s {
            sample = s;
        }
    }
    let exact = if kernel_dim == 0 {
        spanning_probability(p, n, rounds)
    } else {
        num_rational::BigRational::from_integer(1.into())
    };
    let doc = json!({
        "command": "simulate",
        "params": {
            "p": p, "n": n, "kernel_dim": kernel_dim,
            "rounds": rounds, "trials": trials, "seed": seed,
        },
        "result": {
            "successes": successes,
            "success_rate": float_value(successes as f64 / trials.max(1) as f64),
            "exact_success_probability": exact_entry(&exact),
            "transcript_sample": sample,
        },
    });
    Ok((pretty(&doc), true))
}

fn cmd_round_dist(path: &PathBuf, g: &GlobalArgs) -> Result<(String, bool)> {
    let matrix = FpMatrix::from_json(&read_json(path)?)?;
    let inst = LinearInstance::new(matrix);
    let field = inst.field();
    let mut state = StateVector::zero_state(field, 1, g.sim_cap())?;
    state.qft_query();
    state.apply_oracle(&inst)?;
    state.qft_query();
    let dist = state.query_distribution();
    let annihilator = inst.kernel().annihilator();
    if g.tsv {
        let mut out = String::from("index\tvector\tprobability\n");
        for (i, pr) in dist.iter().enumerate() {
            let v = field.index_to_vector(i as u64);
            out.push_str(&format!(
                "{i}\t{}\t{:.16e}\n",
                v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
                pr
            ));
        }
        return Ok((out, true));
    }
    let entries: Vec<Value> = dist
        .iter()
        .enumerate()
        .map(|(i, &pr)| {
            let v = field.index_to_vector(i as u64);
            json!({
                "index": i,
                "vector": v,
                "probability": float_value(pr),
                "in_annihilator": annihilator.contains(&v),
            })
        })
        .collect();
    let doc = json!({
        "command": "round-dist",
        "params": {"matrix": path.display().to_string()},
        "result": {
            "distribution": entries,
            "annihilator": annihilator.to_json(),
        },
    });
    Ok((pretty(&doc), true))
}

fn cmd_qs(path: &PathBuf, mode: QsMode, g: &GlobalArgs) -> Result<(String, bool)> {
    let s = PartialFn::from_json(&read_json(path)?)?;
    let field = s.field();
    let closed = ClosedFormQs::new(&Ensemble::new(field, g.enum_cap())?, &s)?;
    let consistent = crate::instances::linear_consistency(&s).is_consistent();
    let bound = closed.span_dim();
    let (values, tables) = match mode {
        QsMode::Brute => {
            let ensemble = Ensemble::new(field, g.enum_cap())?;
            let brute = ensemble.q_s_bruteforce_all(&s);
            let t = json!({"brute": table_json(field, &brute)});
            (brute, t)
        }
        QsMode::Closed => {
            let vals = closed.eval_all();
            let t = json!({"closed": table_json(field, &vals)});
            (vals, t)
        }
        QsMode::Both => {
            let ensemble = Ensemble::new(field, g.enum_cap())?;
            let brute = ensemble.q_s_bruteforce_all(&s);
            let cf = closed.eval_all();
            let agree = brute == cf;
            let t = json!({
                "brute": table_json(field, &brute),
                "closed": table_json(field, &cf),
                "agree": agree,
            });
            if !agree {
                let doc = report_qs(path, &s, consistent, bound, 0, false, t, Value::Null);
                return Ok((pretty(&doc), false));
            }
            (brute, t)
        }
    };
    let table = QTableExact { field, values };
    let poly = table.interpolant()?;
    let degree = if poly.is_zero() { 0 } else { poly.degree() };
    let pass = degree <= bound;
    let coeffs: Vec<Value> = poly.coeffs().iter().map(exact_entry).collect();
    let doc = report_qs(
        path,
        &s,
        consistent,
        bound,
        degree,
        pass,
        tables,
        Value::Array(coeffs),
    );
    Ok((pretty(&doc), pass))
}

#[allow(clippy::too_many_arguments)]
fn report_qs(
    path: &PathBuf,
    s: &PartialFn,
    consistent: bool,
    bound: usize,
    degree: usize,
    pass: bool,
    tables: Value,
    coeffs: Value,
) -> Value {
    json!({
        "command": "qs",
        "params": {"partial": path.display().to_string(), "domain_size": s.domain_size()},
        "result": {
            "consistent": consistent,
            "tables": tables,
            "interpolant_coeffs": coeffs,
            "degree": degree,
            "degree_bound": bound,
            "verdict": if pass { "PASS" } else { "FAIL" },
        },
    })
}

fn table_json(field: FieldSpec, values: &[num_rational::BigRational]) -> Value {
    QTableExact {
        field,
        values: values.to_vec(),
    }
    .to_json()
}

fn cmd_qofd(path: &PathBuf, g: &GlobalArgs) -> Result<(String, bool)> {
    let circuit = Circuit::from_json(&read_json(path)?)?;
    let field = circuit.field();
    let (values, fit) = q_of_d(&circuit, g.enum_cap(), g.sim_cap())?;
    let points: Vec<Value> = values
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            json!({
                "k": k,
                "D": (field.p() as u128).pow(k as u32).to_string(),
                "q": float_value(q),
            })
        })
        .collect();
    let doc = json!({
        "command": "qofd",
        "params": {"circuit": path.display().to_string(), "queries": circuit.query_count()},
        "result": {
            "points": points,
            "fitted_degree": fit.degree,
            "degree_bound": fit.bound,
            "residuals": fit.residuals.iter().map(|&r| float_value(r)).collect::<Vec<_>>(),
            "verdict": if fit.pass { "PASS" } else { "FAIL" },
        },
    });
    Ok((pretty(&doc), fit.pass))
}

fn cmd_lemma1(p: u64, n: usize, max_degree: usize) -> Result<(String, bool)> {
    let inst = Lemma1Instance::new(FieldSpec::new(p, n)?);
    let search = min_feasible_degree(&inst, max_degree);
    let pass = search.certifies_lemma_bound(n);
    let doc = json!({
        "command": "lemma1",
        "params": {"p": p, "n": n, "max_degree": max_degree},
        "result": search.to_json(&inst),
    });
    Ok((pretty(&doc), pass))
}

fn cmd_verify(suite: SuiteName, p: u64, n: usize, g: &GlobalArgs) -> Result<(String, bool)> {
    let field = FieldSpec::new(p, n)?;
    let names: Vec<&str> = match suite {
        SuiteName::Counting => vec!["counting"],
        SuiteName::Lemma2 => vec!["lemma2"],
        SuiteName::Qsim => vec!["qsim"],
        SuiteName::Instances => vec!["instances"],
        SuiteName::All => vec!["counting", "lemma2", "qsim", "instances"],
    };
    let reports = run_suites(&names, field, g.enum_cap(), g.seed())?;
    let pass = reports.iter().all(|r| r.pass);
    let suites: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "suite": r.suite,
                "checks": r.checks.iter().map(|c| json!({
                    "name": c.name,
                    "detail": c.detail,
                    "verdict": if c.pass { "PASS" } else { "FAIL" },
                })).collect::<Vec<_>>(),
                "verdict": if r.pass { "PASS" } else { "FAIL" },
            })
        })
        .collect();
    let doc = json!({
        "command": "verify",
        "params": {"p": p, "n": n},
        "result": {"suites": suites, "verdict": if pass { "PASS" } else { "FAIL" }},
    });
    Ok((pretty(&doc), pass))
}

fn cmd_classical_basis(path: &PathBuf) -> Result<(String, bool)> {
    let matrix = FpMatrix::from_json(&read_json(path)?)?;
    let inst = LinearInstance::new(matrix);
    let (label, queries) = basis_solve(inst.field(), |x| inst.apply(x))?;
    let doc = json!({
        "command": "classical basis",
        "params": {"matrix": path.display().to_string()},
        "result": {
            "label": label_str(label),
            "queries_used": queries,
        },
    });
    Ok((pretty(&doc), true))
}

fn cmd_classical_collision(
    n: usize,
    budget: usize,
    trials: usize,
    two_to_one: bool,
    g: &GlobalArgs,
) -> Result<(String, bool)> {
    let seed = g.seed();
    let shift: Vec<u64> = std::iter::once(1)
        .chain(std::iter::repeat(0))
        .take(n)
        .collect();
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2 * t as u64));
            let g_inst = GeneralInstance::random(
                n,
                if two_to_one { Some(&shift) } else { None },
                &mut rng,
            )
            .expect("instance construction");
            let rep = collision_search(&g_inst, budget, seed.wrapping_add(2 * t as u64 + 1));
            usize::from(matches!(rep.outcome, CollisionOutcome::CollisionFound { .. }))
        })
        .sum();
    let exact = if two_to_one {
        birthday_probability(n, budget.min(1 << n))
    } else {
        num_rational::BigRational::from_integer(0.into())
    };
    let doc = json!({
        "command": "classical collision",
        "params": {
            "n": n, "budget": budget, "trials": trials,
            "two_to_one": two_to_one, "seed": seed,
        },
        "result": {
            "collisions": hits,
            "empirical_rate": float_value(hits as f64 / trials.max(1) as f64),
            "exact_birthday_probability": exact_entry(&exact),
        },
    });
    Ok((pretty(&doc), true))
}

fn pretty(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable document");
    s.push('\n');
    s
}

fn exit_code_for(err: &Error) -> i32 {
    // every library error reaching the CLI is a usage, input, or cap problem
    let _ = err;
    2
}

/// Parse argv, run, print, and return the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with code 0; usage errors get 2
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.global.jobs {
        // ignore the error if a pool already exists (e.g. repeated calls in
        // tests); determinism never depends on the pool size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match execute(&cli) {
        Ok((output, pass)) => {
            print!("{output}");
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
