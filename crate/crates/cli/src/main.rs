use clap::{Parser, Subcommand};
use folia_core::json::FieldSpec;
use serde_json::Value;
use std::io::{Read, Write};
use std::process::ExitCode;

mod commands;
mod encode;

use commands::{Failure, Opts};

#[derive(Parser, Debug)]
#[command(name = "folia", version, about = "Formal germs, twisted surface cohomology and formal foliations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Truncation order (target order for `construct`).
    #[arg(long, global = true, default_value_t = 16)]
    order: usize,

    /// Coefficient backend: cyclotomic[:n] or bigfloat[:p].
    #[arg(long, global = true)]
    backend: Option<FieldSpec>,

    /// Seed for sampled words and random seeds.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Compact JSON output (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,

    /// Indented JSON output.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form of a single germ.
    ClassifyGerm { input: String },
    /// Classify the group generated by a list of germs.
    GroupAnalyze { input: String },
    /// Twisted cohomology of a local system on a surface.
    Cohomology { input: String },
    /// Validity order, Ueda type and Ueda class of a transition system.
    Ueda { input: String },
    /// Extend a seed to a system satisfying the triangle condition.
    Construct { input: String },
    /// Normalize a seed to log-affine relations.
    LogAffine { input: String },
    /// Pullbacks, invariant forms and projective triples.
    FormsCheck { input: String },
}

impl Command {
    fn split(&self) -> (&'static str, &str) {
        match self {
            Command::ClassifyGerm { input } => ("classify-germ", input),
            Command::GroupAnalyze { input } => ("group-analyze", input),
            Command::Cohomology { input } => ("cohomology", input),
            Command::Ueda { input } => ("ueda", input),
            Command::Construct { input } => ("construct", input),
            Command::LogAffine { input } => ("log-affine", input),
            Command::FormsCheck { input } => ("forms-check", input),
        }
    }
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("reading standard input: {e}"))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))
    }
}

fn emit(v: &Value, pretty: bool) {
    let s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) };
    let mut out = std::io::stdout().lock();
    // a closed pipe is not an error worth reporting
    let _ = writeln!(out, "{}", s.expect("serializable report"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, path) = cli.command.split();
    let opts = Opts { order: cli.order, seed: cli.seed, backend: cli.backend };
    let doc: Result<Value, Failure> = read_input(path)
        .map_err(Failure::Input)
        .and_then(|s| serde_json::from_str(&s).map_err(|e| Failure::Input(format!("invalid JSON: {e}"))));
    let result = doc.and_then(|d| commands::run(name, &d, &opts));
    match result {
        Ok(report) => {
            emit(&report.body, cli.pretty);
            ExitCode::from(report.code)
        }
        Err(f) => {
            eprintln!("folia {name}: {f}");
            emit(&f.to_json(name), cli.pretty);
            ExitCode::from(1)
        }
    }
}
