//! Command-line surface of the `funcomp` binary.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 precondition or guard
//! failure, 3 internal-consistency error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::auxiliary::{AuxSystem, Cardinalities};
use crate::error::{Error, Result};
use crate::io::{self, Format};
use crate::model::{Distortion, SourceModel};
use crate::prob::Tolerances;
use crate::regions::{self, RateBounds};
use crate::search::{search_inner, SearchConfig, SearchMode};
use crate::sim::{default_rates, simulate_exact, simulate_mc, BinRates};

#[derive(Debug, Parser)]
#[command(name = "funcomp", version, about = "Secure and private two-transmitter function computation")]
pub struct Cli {
    /// Tolerance for information identities and clamping.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_num: f64,
    /// Tolerance on the admissibility residual H(f|U1,U2,Y,Q).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_adm: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file (JSON).
    #[arg(long, conflicts_with = "example_bernoulli")]
    pub model: Option<PathBuf>,
    /// Builtin multiplicative-Bernoulli model: BETA1 BETA2 ALPHA Q.
    #[arg(long, num_args = 4, value_names = ["BETA1", "BETA2", "ALPHA", "Q"])]
    pub example_bernoulli: Option<Vec<f64>>,
    /// Attach Hamming distortion over the F alphabet.
    #[arg(long)]
    pub hamming: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    #[value(name = "1-inner")]
    OneInner,
    #[value(name = "1-outer")]
    OneOuter,
    #[value(name = "2-inner")]
    TwoInner,
    #[value(name = "2-outer")]
    TwoOuter,
    /// Both decoding-order corner points of the lossless inner bound.
    Corners,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AuxPreset {
    Identity,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Exact,
    Mc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the function and the observation channel.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate one bound.
    Evaluate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), required_unless_present = "theorem", conflicts_with = "theorem")]
        lemma: Option<u8>,
        #[arg(long, value_enum)]
        theorem: Option<Theorem>,
        /// Auxiliary system file (JSON).
        #[arg(long, conflicts_with = "aux_preset")]
        aux: Option<PathBuf>,
        #[arg(long, value_enum)]
        aux_preset: Option<AuxPreset>,
        /// Lemma 2 only: search this many random time-sharing channels in
        /// addition to the deterministic ones.
        #[arg(long)]
        q_search: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Markov-chain tolerance for outer bounds.
        #[arg(long, default_value_t = 1e-9)]
        markov_tol: f64,
    },
    /// Search auxiliary systems for a Pareto front of the inner bound.
    Search {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Lossless)]
        mode: ModeArg,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        scale: Option<f64>,
        /// Comma-separated objective weights (6 lossless, 7 lossy).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        penalty: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Cardinalities Q,U1,V1,U2,V2.
        #[arg(long, value_delimiter = ',')]
        card: Option<Vec<usize>>,
    },
    /// Run the random-binning simulator.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: u64,
        /// Number of consecutive seeds to run, starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Comma-separated blocklengths.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value_t = SimKind::Exact)]
        kind: SimKind,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Stored rates W1,W2 for direct binning of X1, X2.
        #[arg(long, value_delimiter = ',', conflicts_with = "epsilon")]
        rates: Option<Vec<f64>>,
        /// Use the scheme's default bin rates with this epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Auxiliary system for the layered decoder (Monte Carlo only).
        #[arg(long, conflicts_with = "aux_preset")]
        aux: Option<PathBuf>,
        #[arg(long, value_enum)]
        aux_preset: Option<AuxPreset>,
    },
    /// Write a model file for the builtin example.
    WriteModel {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Lossless,
    Lossy,
}

fn load_model(args: &ModelArgs, tol: Tolerances) -> Result<SourceModel> {
    let model = match (&args.model, &args.example_bernoulli) {
        (Some(path), _) => io::read_model(path)?,
        (None, Some(p)) => SourceModel::bernoulli_example(p[0], p[1], p[2], p[3])?,
        (None, None) => return Err(Error::Parse("one of --model or --example-bernoulli is required".into())),
    };
    let model = if args.hamming {
        let d = Distortion::hamming(&model.alphabets().f);
        model.with_distortion(d)?
    } else {
        model
    };
    Ok(model.with_tolerances(tol))
}

fn load_aux(model: &SourceModel, file: &Option<PathBuf>, preset: Option<AuxPreset>) -> Result<Option<AuxSystem>> {
    Ok(match (file, preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            let aux: AuxSystem = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("aux file: {e}")))?;
            aux.check_compatible(model)?;
            Some(aux)
        }
        (None, Some(AuxPreset::Identity)) => Some(AuxSystem::identity(model)),
        (None, Some(AuxPreset::Constant)) => Some(AuxSystem::constant(model)),
        (None, None) => None,
    })
}

fn sink<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

#[derive(Serialize)]
struct ClassifyRow {
    function_class: &'static str,
    eve_degraded: bool,
    residual_eve: f64,
    fusion_degraded: bool,
    residual_fusion: f64,
    applicable: Vec<&'static str>,
}

fn classify(model: &SourceModel) -> Result<ClassifyRow> {
    let class = model.classify_function()?;
    let deg = model.check_degradedness()?;
    let mut applicable = vec!["theorem1"];
    if model.distortion().is_some() {
        applicable.push("theorem2");
    }
    if class.partially_invertible_wrt_1() {
        applicable.push("lemma1");
    }
    if class == crate::model::FunctionClass::Invertible {
        applicable.push("lemma2");
        if deg.eve_degraded {
            applicable.push("lemma3");
        }
        if deg.fusion_degraded {
            applicable.push("lemma4");
        }
    }
    Ok(ClassifyRow {
        function_class: class.as_str(),
        eve_degraded: deg.eve_degraded,
        residual_eve: deg.residual_eve,
        fusion_degraded: deg.fusion_degraded,
        residual_fusion: deg.residual_fusion,
        applicable,
    })
}

fn write_classify(out: &mut dyn Write, format: Format, row: &ClassifyRow) -> Result<()> {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                schema_version: u32,
                kind: &'a str,
                #[serde(flatten)]
                row: &'a ClassifyRow,
            }
            serde_json::to_writer_pretty(
                &mut *out,
                &Doc {
                    schema_version: io::OUTPUT_SCHEMA_VERSION,
                    kind: "classification",
                    row,
                },
            )?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "function_class",
                "eve_degraded",
                "residual_eve",
                "fusion_degraded",
                "residual_fusion",
                "applicable",
            ])?;
            w.write_record([
                row.function_class.to_string(),
                row.eve_degraded.to_string(),
                row.residual_eve.to_string(),
                row.fusion_degraded.to_string(),
                row.residual_fusion.to_string(),
                row.applicable.join(";"),
            ])?;
            w.flush()?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    model: &SourceModel,
    lemma: Option<u8>,
    theorem: Option<Theorem>,
    aux: Option<AuxSystem>,
    q_search: Option<usize>,
    seed: u64,
    markov_tol: f64,
) -> Result<Vec<RateBounds>> {
    let aux_or_identity = || aux.clone().unwrap_or_else(|| AuxSystem::identity(model));
    Ok(match (lemma, theorem) {
        (Some(1), _) => vec![regions::eval_lemma1(model, &aux_or_identity())?],
        (Some(2), _) => match q_search {
            Some(k) => vec![regions::search_lemma2_q(model, k, seed)?.1],
            None => vec![regions::eval_lemma2(model, None)?],
        },
        (Some(3), _) => vec![regions::eval_lemma3(model)?],
        (Some(4), _) => vec![regions::eval_lemma4(model)?],
        (Some(other), _) => return Err(Error::Parse(format!("no lemma {other}"))),
        (None, Some(t)) => {
            let a = aux_or_identity();
            match t {
                Theorem::OneInner => vec![regions::eval_inner_lossless(model, &a)?],
                Theorem::OneOuter => vec![regions::eval_outer_lossless(&a.induced_joint(model)?, markov_tol)?],
                Theorem::TwoInner => vec![regions::eval_inner_lossy(model, &a, None)?],
                Theorem::TwoOuter => vec![regions::eval_outer_lossy(model, &a, markov_tol)?],
                Theorem::Corners => {
                    let (c1, c2) = regions::corner_points(model, &a)?;
                    vec![c1.bounds, c2.bounds]
                }
            }
        }
        (None, None) => return Err(Error::Parse("one of --lemma or --theorem is required".into())),
    })
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let tol = Tolerances {
        num: cli.tol_num,
        adm: cli.tol_adm,
        ..Tolerances::default()
    };
    match cli.command {
        Command::Classify { model, out } => {
            let m = load_model(&model, tol)?;
            let row = classify(&m)?;
            let mut w = sink(&out.output, stdout)?;
            write_classify(&mut w, out.format.into(), &row)?;
            w.flush()?;
        }
        Command::Evaluate {
            model,
            out,
            lemma,
            theorem,
            aux,
            aux_preset,
            q_search,
            seed,
            markov_tol,
        } => {
            let m = load_model(&model, tol)?;
            let a = load_aux(&m, &aux, aux_preset)?;
            let rows = evaluate(&m, lemma, theorem, a, q_search, seed, markov_tol)?;
            let mut w = sink(&out.output, stdout)?;
            io::write_bounds(&mut w, out.format.into(), &rows)?;
            w.flush()?;
        }
        Command::Search {
            model,
            out,
            seed,
            mode,
            restarts,
            iterations,
            scale,
            weights,
            penalty,
            workers,
            card,
        } => {
            let m = load_model(&model, tol)?;
            let mode = match mode {
                ModeArg::Lossless => SearchMode::Lossless,
                ModeArg::Lossy => SearchMode::Lossy,
            };
            let mut cfg = SearchConfig::new(&m, mode, seed);
            if let Some(v) = restarts {
                cfg.restarts = v;
            }
            if let Some(v) = iterations {
                cfg.iterations = v;
            }
            if let Some(v) = scale {
                cfg.scale = v;
            }
            if let Some(v) = weights {
                cfg.weights = v;
            }
            if let Some(v) = penalty {
                cfg.penalty = v;
            }
            cfg.workers = workers;
            if let Some(c) = card {
                if c.len() != 5 {
                    return Err(Error::Parse("--card takes five values Q,U1,V1,U2,V2".into()));
                }
                cfg.card = Cardinalities {
                    q: c[0],
                    u1: c[1],
                    v1: c[2],
                    u2: c[3],
                    v2: c[4],
                };
            }
            let front = search_inner(&m, &cfg)?;
            let mut w = sink(&out.output, stdout)?;
            io::write_front(&mut w, out.format.into(), &front)?;
            w.flush()?;
        }
        Command::Simulate {
            model,
            out,
            seed,
            seeds,
            n,
            kind,
            trials,
            rates,
            epsilon,
            aux,
            aux_preset,
        } => {
            let m = load_model(&model, tol)?;
            let a = load_aux(&m, &aux, aux_preset)?;
            if a.is_some() && kind == SimKind::Exact {
                return Err(Error::Precondition("exact simulation bins X1, X2 directly; use --kind mc with an aux system".into()));
            }
            let bin_rates = match (rates, epsilon) {
                (Some(r), _) if r.len() == 2 => BinRates::invertible(r[0], r[1]),
                (Some(_), _) => return Err(Error::Parse("--rates takes two values W1,W2".into())),
                (None, Some(e)) => default_rates(&m, a.as_ref(), e)?,
                (None, None) => {
                    let a = m.alphabets();
                    BinRates::invertible((a.x1.len() as f64).log2(), (a.x2.len() as f64).log2())
                }
            };
            let mut reports = Vec::new();
            for &len in &n {
                for s in seed..seed + seeds {
                    reports.push(match kind {
                        SimKind::Exact => simulate_exact(&m, len, &bin_rates, s)?,
                        SimKind::Mc => simulate_mc(&m, len, &bin_rates, s, trials, a.as_ref())?,
                    });
                }
            }
            let mut w = sink(&out.output, stdout)?;
            io::write_sim(&mut w, out.format.into(), &reports)?;
            w.flush()?;
        }
        Command::WriteModel { model, output } => {
            let m = load_model(&model, tol)?;
            let mut w = sink(&output, stdout)?;
            writeln!(w, "{}", io::model_to_json(&m))?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Parse `args` (including the program name) and run, writing results to
/// `stdout` and diagnostics to stderr. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
