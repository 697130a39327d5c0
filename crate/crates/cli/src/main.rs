mod config;
mod exec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use slab_tbc::spectral::{Side, WeightPreset};

#[derive(Parser)]
#[command(name = "slab-tbc", version, about = "Slab Maxwell solver with transparent boundaries: runs, checks and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Trace-norm weight used by the trace-inequality check.
    #[arg(long, global = true, value_enum, default_value_t = Preset::StandardWeight)]
    preset: Preset,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the scenario described by a JSON config.
    Run { config: PathBuf },
    /// Runs the whole check suite (`suite`) or one check by id.
    Check { target: String },
    /// Samples the capacity symbol bounds for one exterior medium.
    AuditSymbols {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Top)]
        side: SideArg,
        #[arg(long, default_value_t = 1.0)]
        thickness: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    StandardWeight,
    AsPrintedWeight,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Top,
    Bottom,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", serde_json::json!({ "error": "threads", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    }
    let preset = match cli.preset {
        Preset::StandardWeight => WeightPreset::StandardWeight,
        Preset::AsPrintedWeight => WeightPreset::AsPrintedWeight,
    };
    let outcome = match cli.command {
        Command::Run { config } => exec::run_config(&config, cli.out.as_deref(), cli.seed, preset),
        Command::Check { target } => exec::run_checks(&target, cli.out.as_deref(), cli.seed, preset),
        Command::AuditSymbols { samples, eps, mu, side, thickness } => {
            let side = match side {
                SideArg::Top => Side::Top,
                SideArg::Bottom => Side::Bottom,
            };
            exec::audit_symbols(samples, eps, mu, side, thickness, cli.out.as_deref(), cli.seed)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
