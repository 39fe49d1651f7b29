//! `sr`: command-line front end for the roommates toolkit.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use roommates::derive::cycle_stats;
use roommates::enumeration::{
    enum_all_partitions, enum_reduced_partitions, enum_stable_matchings, solution_sets,
    DEFAULT_BUDGET,
};
use roommates::experiments::{exact_pn, run_experiment, to_csv, ExperimentConfig};
use roommates::format::{
    candidate_from_json, matching_to_json, parse_instance, partition_to_json, stats_to_json,
    write_instance, Candidate, MatchingDoc, PartitionDoc, FORMAT_VERSION,
};
use roommates::generators::{trial_rng, Culture, CultureKind};
use roommates::partition::{solve, stable_partition};
use roommates::stability::{check_partition, find_blocking_pair};
use roommates::{Cycle, Instance};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_SOLUTION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "sr",
    about = "Stable roommates toolkit",
    disable_version_flag = true
)]
struct Cli {
    /// Print toolkit and format versions.
    #[arg(long)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        culture: CultureKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trial index within the seed's stream.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Mallows dispersion.
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a stable matching, or UNSOLVABLE.
    Solve { input: PathBuf },
    /// Print a stable partition.
    Partition {
        input: PathBuf,
        /// Also print odd-cycle statistics.
        #[arg(long)]
        stats: bool,
    },
    /// Enumerate solutions.
    Enum {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: EnumKind,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Check a matching or partition (JSON) against an instance.
    Verify { input: PathBuf, candidate: PathBuf },
    /// Run a Monte Carlo experiment.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated culture tags.
        #[arg(long)]
        culture: Option<String>,
        /// Sizes, e.g. `10,11` or `50..200:10`.
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Any config key, as `key=value`; may be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Exact solvable fraction for tiny n.
    ExactPn {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumKind {
    Matchings,
    Reduced,
    All,
    Cycles,
}

/// A failure mapped to an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read_text(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cycle_json(c: &Cycle) -> Vec<u32> {
    c.agents().iter().map(|a| a.label()).collect()
}

fn gen(
    culture: CultureKind,
    n: usize,
    seed: u64,
    trial: u64,
    phi: Option<f64>,
    out: Option<PathBuf>,
) -> Outcome {
    let culture = match phi {
        Some(phi) if culture == CultureKind::MallowsEuclidean => {
            Culture::mallows(phi).map_err(Failure::usage)?
        }
        Some(_) => return Err(Failure::usage("--phi only applies to mallows-euclidean")),
        None => Culture::new(culture),
    };
    let inst = culture
        .generate(n, &mut trial_rng(seed, culture.kind, n, trial))
        .map_err(Failure::input)?;
    let text = write_instance(&inst);
    match out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn enumerate(inst: &Instance, kind: EnumKind, budget: u64) -> Outcome {
    let (docs, count, exhausted, extra) = match kind {
        EnumKind::Matchings => match enum_stable_matchings(inst, budget) {
            Ok(e) => {
                let docs: Vec<_> = e
                    .items
                    .iter()
                    .map(MatchingDoc::from)
                    .map(to_value)
                    .collect();
                (docs, e.items.len(), e.budget_exhausted, None)
            }
            Err(_) => (Vec::new(), 0, false, None),
        },
        EnumKind::Reduced => {
            let e = enum_reduced_partitions(inst, budget);
            let docs = e
                .items
                .iter()
                .map(PartitionDoc::from)
                .map(to_value)
                .collect();
            (docs, e.items.len(), e.budget_exhausted, None)
        }
        EnumKind::All => {
            let e = enum_all_partitions(inst, budget);
            let docs = e
                .items
                .iter()
                .map(PartitionDoc::from)
                .map(to_value)
                .collect();
            (docs, e.items.len(), e.budget_exhausted, None)
        }
        EnumKind::Cycles => {
            let sets = solution_sets(inst, budget);
            let docs = sets
                .stable_cycles
                .iter()
                .map(|c| to_value(cycle_json(c)))
                .collect();
            let extra = serde_json::json!({
                "reduced_stable_cycles": sets.reduced_stable_cycles.iter().map(cycle_json).collect::<Vec<_>>(),
                "stable_pairs": sets.stable_pairs.iter().map(|(a, b)| [a.label(), b.label()]).collect::<Vec<_>>(),
            });
            (
                docs,
                sets.stable_cycles.len(),
                sets.budget_exhausted,
                Some(extra),
            )
        }
    };
    println!("{}", serde_json::Value::Array(docs));
    let mut summary = serde_json::json!({ "count": count, "budget_exhausted": exhausted });
    if let Some(serde_json::Value::Object(extra)) = extra {
        for (k, v) in extra {
            summary[k.as_str()] = v;
        }
    }
    println!("{summary}");
    Ok(if exhausted { EXIT_BUDGET } else { 0 })
}

fn to_value<T: serde::Serialize>(v: T) -> serde_json::Value {
    serde_json::to_value(v).expect("plain data serialises")
}

fn verify(inst: &Instance, candidate: &Candidate) -> Outcome {
    if candidate.n() != inst.n() {
        return Err(Failure::input(format!(
            "candidate has {} agents, instance has {}",
            candidate.n(),
            inst.n()
        )));
    }
    let verdict = match candidate {
        Candidate::Matching(m) => match find_blocking_pair(inst, m) {
            None => Ok(()),
            Some((a, b)) => Err(format!("blocking pair {{{}, {}}}", a.label(), b.label())),
        },
        Candidate::Partition(p) => check_partition(inst, p).map_err(|v| v.to_string()),
    };
    match verdict {
        Ok(()) => {
            println!("STABLE");
            Ok(0)
        }
        Err(reason) => {
            println!("UNSTABLE: {reason}");
            Ok(EXIT_NO_SOLUTION)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    config: Option<PathBuf>,
    culture: Option<String>,
    n: Option<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    budget: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    set: Vec<String>,
) -> Outcome {
    let mut cfg = match &config {
        Some(path) => ExperimentConfig::from_kv_text(&read_text(path)?)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_env().map_err(Failure::usage)?;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            overrides.push((k.to_string(), v));
        }
    };
    push("cultures", culture);
    push("sizes", n);
    push("seed", seed.map(|v| v.to_string()));
    push("trials", trials.map(|v| v.to_string()));
    push("budget", budget.map(|v| v.to_string()));
    push("threads", threads.map(|v| v.to_string()));
    push("out", out.map(|p| p.display().to_string()));
    for kv in set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    for (k, v) in overrides {
        cfg.set(&k, &v).map_err(Failure::usage)?;
    }
    let records = run_experiment(&cfg).map_err(Failure::input)?;
    match &cfg.out {
        Some(path) => eprintln!("wrote {} rows to {}", records.len(), path.display()),
        None => print!("{}", to_csv(&records)),
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    if cli.version {
        println!("sr {} (format v{})", roommates::VERSION, FORMAT_VERSION);
        return Ok(0);
    }
    let Some(command) = cli.command else {
        return Err(Failure::usage("missing subcommand; try --help"));
    };
    match command {
        Command::Gen {
            culture,
            n,
            seed,
            trial,
            phi,
            out,
        } => gen(culture, n, seed, trial, phi, out),
        Command::Solve { input } => {
            let inst = read_instance(&input)?;
            match solve(&inst) {
                Some(m) => {
                    println!("{}", matching_to_json(&m));
                    Ok(0)
                }
                None => {
                    println!("UNSOLVABLE");
                    Ok(EXIT_NO_SOLUTION)
                }
            }
        }
        Command::Partition { input, stats } => {
            let inst = read_instance(&input)?;
            let p = stable_partition(&inst);
            println!("{}", partition_to_json(&p));
            if stats {
                println!("{}", stats_to_json(&cycle_stats(&p)));
            }
            Ok(0)
        }
        Command::Enum {
            input,
            kind,
            budget,
        } => enumerate(&read_instance(&input)?, kind, budget),
        Command::Verify { input, candidate } => {
            let inst = read_instance(&input)?;
            let cand = candidate_from_json(&read_text(&candidate)?)
                .map_err(|e| Failure::input(format!("{}: {e}", candidate.display())))?;
            verify(&inst, &cand)
        }
        Command::Experiment {
            config,
            culture,
            n,
            seed,
            trials,
            budget,
            threads,
            out,
            set,
        } => experiment(config, culture, n, seed, trials, budget, threads, out, set),
        Command::ExactPn { n } => {
            let e = exact_pn(n).map_err(Failure::usage)?;
            println!("{e}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let text = rendered.trim_end();
            if text.starts_with("error:") {
                eprintln!("{text}");
            } else {
                eprintln!("error: {text}");
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    let _ = io::stdout().flush();
    ExitCode::from(code)
}
