use std::path::PathBuf;
use std::process::ExitCode;

use beurling::harness::{
    audit_table, canonical, run, verdict_table, ExitStatus, ExperimentConfig, RunOptions, Stage, CANONICAL_NAMES,
};
use beurling::Error;
use clap::{Args, Parser, Subcommand};

/// Thread count for the internal worker pool.
const THREADS_ENV: &str = "BEURLING_THREADS";

#[derive(Parser)]
#[command(name = "beurling", version, about = "Density versus trace experiments for reproducing kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one stage (default: the whole pipeline).
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all", value_parser = parse_stage)]
        stage: Stage,
    },
    /// List the canonical experiments.
    List,
    /// Axiom audit only.
    Audit(Common),
    /// Beurling density estimates only.
    Density(Common),
    /// Averaged trace only.
    Trace(Common),
    /// Gram spectra over the configured windows.
    Gram(Common),
    /// Finite-section frame bounds.
    Framebounds(Common),
    /// Localization-operator spectra.
    Locspec(Common),
    /// Audit, estimates and the verdict report.
    Verdict(Common),
    /// Every stage with all outputs.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "canonical", required_unless_present = "canonical")]
    config: Option<PathBuf>,
    /// Name of a canonical experiment.
    #[arg(long)]
    canonical: Option<String>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "beurling-out")]
    out: PathBuf,
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::input(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::input(format!("cannot configure {n} threads: {e}")))
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    match (&common.config, &common.canonical) {
        (Some(path), _) => ExperimentConfig::load(path),
        (None, Some(name)) => canonical(name).ok_or_else(|| {
            Error::input(format!("unknown canonical experiment `{name}`; known: {}", CANONICAL_NAMES.join(", ")))
        }),
        (None, None) => Err(Error::input("either --config or --canonical is required")),
    }
}

fn execute(common: Common, stage: Stage) -> Result<ExitStatus, Error> {
    init_threads()?;
    let cfg = load(&common)?;
    let opts = RunOptions {
        stage,
        out_dir: common.out.clone(),
        seed: common.seed,
    };
    let outcome = run(cfg, &opts)?;
    if let Some(a) = &outcome.audit {
        print!("{}", audit_table(a));
    }
    if let Some(r) = &outcome.report {
        print!("{}", verdict_table(r));
    }
    match outcome.status {
        ExitStatus::NotApplicable => {
            let failed = outcome.audit.as_ref().map(|a| a.failed_axioms().join(", ")).unwrap_or_default();
            eprintln!("theorem not applicable: failed axioms: {failed}");
        }
        ExitStatus::Violated => eprintln!("a licensed inequality is violated beyond slack"),
        _ => {}
    }
    println!("outputs written to {}", common.out.display());
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::InputError.code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (common, stage) = match cli.command {
        Command::List => {
            for name in CANONICAL_NAMES {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Run { common, stage } => (common, stage),
        Command::Audit(c) => (c, Stage::Audit),
        Command::Density(c) => (c, Stage::Density),
        Command::Trace(c) => (c, Stage::Trace),
        Command::Gram(c) => (c, Stage::Gram),
        Command::Framebounds(c) => (c, Stage::Framebounds),
        Command::Locspec(c) => (c, Stage::Locspec),
        Command::Verdict(c) => (c, Stage::Verdict),
        Command::All(c) => (c, Stage::All),
    };
    let status = match execute(common, stage) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::for_error(&e)
        }
    };
    ExitCode::from(status.code() as u8)
}
