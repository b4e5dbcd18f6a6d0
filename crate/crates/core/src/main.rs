use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wbc_arena::arena::Arena;
use wbc_arena::cli::{
    cmd_check_obfuscator, cmd_demo, cmd_learnability, cmd_run, spec_list_json, zoo_list_json,
    CliError, RunConfig,
};
use wbc_arena::learnability::LearnReport;

#[derive(Parser)]
#[command(name = "wbc-arena", version, about = "Game-based security experiments for keyed program families and obfuscators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run configured advantage/gap estimates and write a results table.
    Run {
        /// JSON config file; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        obfuscator: Option<String>,
        /// Comma-separated adversary ids.
        #[arg(long)]
        adversaries: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// blackbox | whitebox | whitebox-pair
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv | json
        #[arg(long)]
        format: Option<String>,
    },
    /// Correctness report for an obfuscator over a family (JSON to stdout).
    CheckObfuscator {
        #[arg(long)]
        family: String,
        #[arg(long)]
        obfuscator: String,
        /// Key bit length; omit for families with a fixed key length.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 10)]
        keys_per_batch: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Compare outputs through the family's decider instead of bit
        /// equality.
        #[arg(long)]
        tau: bool,
    },
    /// Packaged demonstrations: find-q-prime, wbp-pairing, uwbp-ro,
    /// pair-obfuscation.
    Demo {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path (default wbc-demo-<name>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learner success-rate estimation (CSV row to stdout).
    Learnability {
        #[arg(long)]
        family: String,
        #[arg(long)]
        learner: String,
        /// exact | approx
        #[arg(long)]
        mode: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Zoo registry commands.
    Zoo {
        #[command(subcommand)]
        action: ListAction,
    },
    /// Specification registry commands.
    Spec {
        #[command(subcommand)]
        action: ListAction,
    },
}

#[derive(Subcommand)]
enum ListAction {
    /// Print the registry as JSON.
    List,
}

fn env_seed() -> u64 {
    std::env::var("WBC_ARENA_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

#[allow(clippy::too_many_arguments)]
fn load_run_config(
    config: Option<PathBuf>,
    spec: Option<String>,
    obfuscator: Option<String>,
    adversaries: Option<String>,
    k: Option<usize>,
    trials: Option<u64>,
    seed: Option<u64>,
    mode: Option<String>,
    out: Option<PathBuf>,
    format: Option<String>,
) -> Result<RunConfig, CliError> {
    let mut cfg = match config {
        Some(path) => {
            let raw = fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&raw)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig {
            spec_id: String::new(),
            obfuscator_id: None,
            adversary_ids: Vec::new(),
            k: 16,
            trials: 1000,
            seed: env_seed(),
            mode: "blackbox".into(),
            output_path: None,
            format: "csv".into(),
        },
    };
    if let Some(v) = spec {
        cfg.spec_id = v;
    }
    if let Some(v) = obfuscator {
        cfg.obfuscator_id = Some(v);
    }
    if let Some(v) = adversaries {
        cfg.adversary_ids = v.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(v) = k {
        cfg.k = v;
    }
    if let Some(v) = trials {
        cfg.trials = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    if let Some(v) = mode {
        cfg.mode = v;
    }
    if let Some(v) = out {
        cfg.output_path = Some(v.display().to_string());
    }
    if let Some(v) = format {
        cfg.format = v;
    }
    if cfg.spec_id.is_empty() {
        return Err(CliError::Config(
            "a spec id is required (--spec or config file)".into(),
        ));
    }
    Ok(cfg)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let arena = Arena::with_defaults();
    match cli.command {
        Command::Run {
            config,
            spec,
            obfuscator,
            adversaries,
            k,
            trials,
            seed,
            mode,
            out,
            format,
        } => {
            let cfg = load_run_config(
                config, spec, obfuscator, adversaries, k, trials, seed, mode, out, format,
            )?;
            let (_, _, rendered) = cmd_run(&arena, &cfg)?;
            match &cfg.output_path {
                Some(path) => fs::write(path, rendered)
                    .map_err(|e| CliError::Runtime(format!("cannot write {path}: {e}")))?,
                None => print!("{rendered}"),
            }
            Ok(())
        }
        Command::CheckObfuscator {
            family,
            obfuscator,
            k,
            samples,
            keys_per_batch,
            seed,
            tau,
        } => {
            let report = cmd_check_obfuscator(
                &arena,
                &family,
                &obfuscator,
                k,
                samples,
                keys_per_batch,
                seed.unwrap_or_else(env_seed),
                tau,
            )?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{json}");
            Ok(())
        }
        Command::Demo { name, seed, out } => {
            let seed = seed.unwrap_or_else(env_seed);
            let demo = cmd_demo(&arena, &name, seed)?;
            print!("{}", demo.summary);
            let path = out.unwrap_or_else(|| PathBuf::from(format!("wbc-demo-{name}.csv")));
            fs::write(&path, demo.csv())
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
            println!("results written to {}", path.display());
            Ok(())
        }
        Command::Learnability {
            family,
            learner,
            mode,
            k,
            trials,
            seed,
        } => {
            let report = cmd_learnability(
                &arena,
                &family,
                &learner,
                &mode,
                k,
                trials,
                seed.unwrap_or_else(env_seed),
            )?;
            println!("{}", LearnReport::csv_header());
            println!("{}", report.csv_row());
            Ok(())
        }
        Command::Zoo {
            action: ListAction::List,
        } => {
            print!("{}", zoo_list_json());
            Ok(())
        }
        Command::Spec {
            action: ListAction::List,
        } => {
            print!("{}", spec_list_json(&arena));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
