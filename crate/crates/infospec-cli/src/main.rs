//! Command-line front end. All computation lives in the `infospec` library;
//! this binary parses flags, loads/saves JSON and CSV, and writes a run
//! manifest next to every output file.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 resource cap exceeded,
//! 4 invariant violation (including any non-finite value in an output).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use infospec::bounds::{feinstein_bound, sandwich_report, verdu_han_bound};
use infospec::channel::{validate, ChannelFamily};
use infospec::coding::{build_feinstein, code_spectrum, error_probabilities, Codebook};
use infospec::diag::{
    mixed_capacity_estimate, strong_converse_diag, uniformity_diag, worst_case_vs_compound,
    MixtureWeights,
};
use infospec::rate::stability_diag;
use infospec::error::Error;
use infospec::input::InputProcess;
use infospec::rate::{rate_estimate, ChannelSource, RateKind};
use infospec::scenarios;
use infospec::spectrum::{spectrum_exact, spectrum_mc, Spectrum};

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Parser)]
#[command(name = "infospec", version, about = "Information-spectrum laboratory for compound channels")]
struct Cli {
    /// Present rates in bits per symbol (all computation stays in nats).
    #[arg(long, global = true)]
    bits: bool,
    /// Base seed for Monte Carlo sampling; per-state streams are derived.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a channel family file: row sums, entry ranges, factorization.
    Validate {
        #[arg(long)]
        family: PathBuf,
        /// Comma-separated blocklengths, e.g. 2,4,6.
        #[arg(long, default_value = "2,4")]
        ladder: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact (or Monte Carlo) information-density spectrum of one state.
    Spectrum {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        n: usize,
        /// "iid-uniform" or @path to an input-process JSON file.
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        /// Sample count; switches to Monte Carlo estimation.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-blocklength rate ladders.
    Rate {
        /// inf | per-state | sup | check | eps
        #[arg(long)]
        kind: String,
        #[arg(long)]
        family: PathBuf,
        /// State id, required for --kind per-state.
        #[arg(long)]
        state: Option<String>,
        /// Error budget, required for --kind eps.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        ladder: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Codebook(CodebookCmd),
    #[command(subcommand)]
    Bounds(BoundsCmd),
    #[command(subcommand)]
    Diag(DiagCmd),
    #[command(subcommand)]
    Scenario(ScenarioCmd),
}

#[derive(Subcommand)]
enum CodebookCmd {
    /// Greedy maximal-code construction.
    Build {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        messages: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact per-state and compound error probabilities.
    Eval {
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Information spectrum induced by the uniform-codeword input.
    Spectrum {
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Achievability error bound at a given rate.
    Feinstein {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Converse lower bound on the average error of a given codebook.
    VerduHan {
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bound <= exact error <= construction budget, over a gamma grid.
    Sandwich {
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        gammas: String,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DiagCmd {
    /// Compare the compound inf rate against the check rate.
    StrongConverse {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        ladder: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniform-convergence ladders sup_s Pr{Z <= r_min - gamma}.
    Uniformity {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        ladder: String,
        #[arg(long)]
        gammas: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case (min over states) rate vs the compound rate.
    WorstCase {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        ladder: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mixture-channel rate vs the compound rate.
    Mixed {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        ladder: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Comma-separated explicit state weights.
        #[arg(long, conflicts_with = "geometric")]
        weights: Option<String>,
        /// Geometric weight ratio in (0,1).
        #[arg(long)]
        geometric: Option<f64>,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral concentration around a reference rate.
    Stability {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        ladder: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        r_star: f64,
        #[arg(long, default_value = "iid-uniform")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// List built-in scenario ids with example parameters.
    List {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a scenario into a channel-family JSON file.
    Build {
        #[arg(long)]
        id: String,
        /// Inline JSON object or @path to a JSON file.
        #[arg(long, default_value = "{}")]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct RunManifest {
    command: Vec<String>,
    version: &'static str,
    seed: u64,
    duration_ms: u128,
}

fn parse_usize_list(s: &str, name: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("{name}: bad entry {t:?}")))
        })
        .collect()
}

fn parse_f64_list(s: &str, name: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("{name}: bad entry {t:?}")))
        })
        .collect()
}

fn load_family(path: &Path) -> Result<ChannelFamily, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("family: cannot read {}: {e}", path.display())))?;
    ChannelFamily::from_json(&text)
}

fn load_codebook(path: &Path) -> Result<Codebook, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("codebook: cannot read {}: {e}", path.display())))?;
    Codebook::from_json(&text)
}

fn load_input(spec: &str, family: &ChannelFamily) -> Result<InputProcess, Error> {
    if spec == "iid-uniform" {
        return Ok(InputProcess::iid_uniform(family.input_alphabet));
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("input: cannot read {path}: {e}")))?;
        return serde_json::from_str(&text)
            .map_err(|e| Error::Usage(format!("input: bad process JSON: {e}")));
    }
    Err(Error::Usage(format!(
        "input: expected \"iid-uniform\" or @file, got {spec:?}"
    )))
}

fn load_params(spec: &str) -> Result<serde_json::Value, Error> {
    let text = if let Some(path) = spec.strip_prefix('@') {
        fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("params: cannot read {path}: {e}")))?
    } else {
        spec.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("params: bad JSON: {e}")))
}

/// Rate-valued JSON fields that the --bits flag rescales.
const RATE_KEYS: &[&str] = &[
    "value",
    "rate_nats",
    "best_inf",
    "best_check",
    "reference_rate",
    "formula_rate",
    "compound_rate",
    "worst_case",
    "compound",
    "max_atom_value",
    "equality_tolerance",
    "r_star",
    "gap",
];

fn rescale_rates(v: &mut serde_json::Value, active: bool) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, inner) in map.iter_mut() {
                if active && RATE_KEYS.contains(&k.as_str()) {
                    if let Some(x) = inner.as_f64() {
                        *inner = serde_json::json!(x / LN2);
                        continue;
                    }
                }
                rescale_rates(inner, active);
            }
        }
        serde_json::Value::Array(items) => {
            for item in items {
                rescale_rates(item, active);
            }
        }
        _ => {}
    }
}

fn check_finite(v: &serde_json::Value) -> Result<(), Error> {
    match v {
        serde_json::Value::Number(num) => {
            if num.as_f64().map(|x| !x.is_finite()).unwrap_or(false) {
                return Err(Error::Invariant("non-finite value in output".into()));
            }
            Ok(())
        }
        serde_json::Value::Object(map) => map.values().try_for_each(check_finite),
        serde_json::Value::Array(items) => items.iter().try_for_each(check_finite),
        _ => Ok(()),
    }
}

struct OutputCtx {
    argv: Vec<String>,
    seed: u64,
    bits: bool,
    started: Instant,
}

impl OutputCtx {
    fn emit_json<T: Serialize>(&self, out: Option<&Path>, value: &T) -> Result<(), Error> {
        let mut v = serde_json::to_value(value)
            .map_err(|e| Error::Invariant(format!("serialization failed: {e}")))?;
        check_finite(&v)?;
        rescale_rates(&mut v, self.bits);
        let text = format!("{}\n", serde_json::to_string_pretty(&v)?);
        self.write(out, &text)
    }

    fn emit_spectrum_csv(&self, out: Option<&Path>, sp: &Spectrum) -> Result<(), Error> {
        let unit = if self.bits { "bits" } else { "nats" };
        let mut text = format!("value_{unit}_per_symbol,probability\n");
        for atom in &sp.atoms {
            if !atom.value.is_finite() || !atom.probability.is_finite() {
                return Err(Error::Invariant("non-finite value in output".into()));
            }
            let value = if self.bits { atom.value / LN2 } else { atom.value };
            text.push_str(&format!("{value},{}\n", atom.probability));
        }
        self.write(out, &text)
    }

    fn write(&self, out: Option<&Path>, text: &str) -> Result<(), Error> {
        match out {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => {
                fs::write(path, text)
                    .map_err(|e| Error::Usage(format!("out: cannot write {}: {e}", path.display())))?;
                let manifest = RunManifest {
                    command: self.argv.clone(),
                    version: env!("CARGO_PKG_VERSION"),
                    seed: self.seed,
                    duration_ms: self.started.elapsed().as_millis(),
                };
                let mpath = manifest_path(path);
                fs::write(&mpath, format!("{}\n", serde_json::to_string_pretty(&manifest)?))
                    .map_err(|e| {
                        Error::Usage(format!("manifest: cannot write {}: {e}", mpath.display()))
                    })?;
                Ok(())
            }
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn run(cli: Cli, ctx: &OutputCtx) -> Result<(), Error> {
    match cli.command {
        Command::Validate { family, ladder, out } => {
            let fam = load_family(&family)?;
            let ns = parse_usize_list(&ladder, "ladder")?;
            let report = validate(&fam, &ns)?;
            let pass = report.pass;
            ctx.emit_json(out.as_deref(), &report)?;
            if !pass {
                return Err(Error::Invariant("family failed validation".into()));
            }
            Ok(())
        }
        Command::Spectrum {
            family,
            state,
            n,
            input,
            mc,
            out,
        } => {
            let fam = load_family(&family)?;
            let input = load_input(&input, &fam)?;
            let states = fam.states_at(n)?;
            let st = states
                .iter()
                .find(|s| s.id == state)
                .ok_or_else(|| Error::Usage(format!("state: unknown id {state:?}")))?;
            let sp = match mc {
                None => spectrum_exact(n, st, &input, fam.input_alphabet, fam.output_alphabet)?,
                Some(samples) => spectrum_mc(
                    n,
                    st,
                    &input,
                    fam.input_alphabet,
                    fam.output_alphabet,
                    samples,
                    ctx.seed,
                )?,
            };
            ctx.emit_spectrum_csv(out.as_deref(), &sp)
        }
        Command::Rate {
            kind,
            family,
            state,
            eps,
            ladder,
            tol,
            input,
            out,
        } => {
            let fam = load_family(&family)?;
            let input = load_input(&input, &fam)?;
            let ns = parse_usize_list(&ladder, "ladder")?;
            let kind = match kind.as_str() {
                "inf" => RateKind::InfCompound,
                "sup" => RateKind::SupCompound,
                "check" => RateKind::Check,
                "per-state" => RateKind::InfPerState(state.ok_or_else(|| {
                    Error::Usage("state: required for --kind per-state".into())
                })?),
                "eps" => RateKind::Eps(
                    eps.ok_or_else(|| Error::Usage("eps: required for --kind eps".into()))?,
                ),
                other => {
                    return Err(Error::Usage(format!(
                        "kind: expected inf|per-state|sup|check|eps, got {other:?}"
                    )))
                }
            };
            let source = ChannelSource {
                family: &fam,
                input: &input,
            };
            let est = rate_estimate(kind, &source, &ns, tol)?;
            ctx.emit_json(out.as_deref(), &est)
        }
        Command::Codebook(cmd) => match cmd {
            CodebookCmd::Build {
                family,
                n,
                messages,
                gamma,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let input = load_input(&input, &fam)?;
                let cb = build_feinstein(n, messages, gamma, &fam, &input)?;
                let text = format!("{}\n", cb.to_json()?);
                ctx.write(out.as_deref(), &text)
            }
            CodebookCmd::Eval { codebook, family, out } => {
                let fam = load_family(&family)?;
                let cb = load_codebook(&codebook)?;
                let report = error_probabilities(&cb, &fam)?;
                ctx.emit_json(out.as_deref(), &report)
            }
            CodebookCmd::Spectrum {
                codebook,
                family,
                delta,
                out,
            } => {
                let fam = load_family(&family)?;
                let cb = load_codebook(&codebook)?;
                let report = code_spectrum(&cb, &fam, delta)?;
                ctx.emit_json(out.as_deref(), &report)
            }
        },
        Command::Bounds(cmd) => match cmd {
            BoundsCmd::Feinstein {
                family,
                n,
                rate,
                gamma,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let input = load_input(&input, &fam)?;
                let rate_nats = if ctx.bits { rate * LN2 } else { rate };
                let value = feinstein_bound(n, rate_nats, gamma, &fam, &input)?;
                ctx.emit_json(
                    out.as_deref(),
                    &serde_json::json!({"n": n, "rate_nats": rate_nats, "gamma": gamma, "upper_bound": value}),
                )
            }
            BoundsCmd::VerduHan {
                codebook,
                family,
                gamma,
                out,
            } => {
                let fam = load_family(&family)?;
                let cb = load_codebook(&codebook)?;
                let value = verdu_han_bound(&cb, gamma, &fam)?;
                ctx.emit_json(
                    out.as_deref(),
                    &serde_json::json!({"n": cb.n, "rate_nats": cb.rate(), "gamma": gamma, "lower_bound": value}),
                )
            }
            BoundsCmd::Sandwich {
                codebook,
                family,
                gammas,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let cb = load_codebook(&codebook)?;
                let input = load_input(&input, &fam)?;
                let gs = parse_f64_list(&gammas, "gammas")?;
                let report = sandwich_report(&cb, &fam, &input, &gs)?;
                ctx.emit_json(out.as_deref(), &report)
            }
        },
        Command::Diag(cmd) => match cmd {
            DiagCmd::StrongConverse {
                family,
                ladder,
                tol,
                delta,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let input = load_input(&input, &fam)?;
                let ns = parse_usize_list(&ladder, "ladder")?;
                let report = strong_converse_diag(&fam, &[input], &ns, tol, delta)?;
                ctx.emit_json(out.as_deref(), &report)
            }
            DiagCmd::Uniformity {
                family,
                ladder,
                gammas,
                tol,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let input = load_input(&input, &fam)?;
                let ns = parse_usize_list(&ladder, "ladder")?;
                let gs = parse_f64_list(&gammas, "gammas")?;
                let report = uniformity_diag(&fam, &input, &ns, &gs, tol)?;
                ctx.emit_json(out.as_deref(), &report)
            }
            DiagCmd::WorstCase {
                family,
                ladder,
                tol,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let input = load_input(&input, &fam)?;
                let ns = parse_usize_list(&ladder, "ladder")?;
                let report = worst_case_vs_compound(&fam, &[input], &ns, tol)?;
                ctx.emit_json(out.as_deref(), &report)
            }
            DiagCmd::Mixed {
                family,
                ladder,
                tol,
                weights,
                geometric,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let input = load_input(&input, &fam)?;
                let ns = parse_usize_list(&ladder, "ladder")?;
                let w = match (weights, geometric) {
                    (Some(list), None) => {
                        MixtureWeights::Explicit(parse_f64_list(&list, "weights")?)
                    }
                    (None, Some(ratio)) => MixtureWeights::Geometric { ratio },
                    _ => {
                        return Err(Error::Usage(
                            "weights: give exactly one of --weights or --geometric".into(),
                        ))
                    }
                };
                let report = mixed_capacity_estimate(&fam, &w, &[input], &ns, tol)?;
                ctx.emit_json(out.as_deref(), &report)
            }
            DiagCmd::Stability {
                family,
                ladder,
                delta,
                r_star,
                input,
                out,
            } => {
                let fam = load_family(&family)?;
                let input = load_input(&input, &fam)?;
                let ns = parse_usize_list(&ladder, "ladder")?;
                let r_star_nats = if ctx.bits { r_star * LN2 } else { r_star };
                let source = ChannelSource {
                    family: &fam,
                    input: &input,
                };
                let report = stability_diag(&source, &ns, delta, r_star_nats)?;
                ctx.emit_json(out.as_deref(), &report)
            }
        },
        Command::Scenario(cmd) => match cmd {
            ScenarioCmd::List { out } => ctx.emit_json(out.as_deref(), &scenarios::list()),
            ScenarioCmd::Build { id, params, out } => {
                let params = load_params(&params)?;
                let fam = scenarios::build(&id, &params)?;
                let text = format!("{}\n", fam.to_json()?);
                ctx.write(out.as_deref(), &text)
            }
        },
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Resource { .. } => 3,
        Error::Invariant(_) | Error::InternalConsistency(_) | Error::Json(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let ctx = OutputCtx {
        argv,
        seed: cli.seed,
        bits: cli.bits,
        started: Instant::now(),
    };
    match run(cli, &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
