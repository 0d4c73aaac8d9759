use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tms_cli::{cmd_assess, cmd_enumerate, cmd_pareto, cmd_simulate, report, PipelineConfig, StageSummary};

#[derive(Parser)]
#[command(name = "tmsarch", version, about = "Enumerate, verify, simulate and rank coolant-network architectures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Generate mode sequences and store the unique architectures.
    Enumerate,
    /// Check every stored architecture against every mode.
    Assess {
        /// Also dump each mode's graph with its closed valves removed.
        #[arg(long)]
        dump_pruned: bool,
    },
    /// Run the fixed-mode tests and the drive on every architecture.
    Simulate,
    /// Score architectures and draw the Pareto front.
    Pareto {
        /// Leave out architectures without dynamic metrics instead of failing.
        #[arg(long)]
        skip_missing: bool,
    },
    /// All of the above.
    Report {
        #[arg(long)]
        dump_pruned: bool,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Mode sequences to try.
    #[arg(long, global = true, default_value_t = 150)]
    count: usize,
    /// Operating-mode catalog JSON; the built-in thirteen modes otherwise.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Plant parameter JSON; missing fields take their defaults.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Drive cycle CSV (t_s,speed_mps), one pass.
    #[arg(long, global = true)]
    cycle: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Integration step, s.
    #[arg(long, global = true, default_value_t = 0.1)]
    dt: f64,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Junction leak fraction.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Passes of the drive cycle in the dynamic test.
    #[arg(long, global = true, default_value_t = 3)]
    repeats: u32,
    #[arg(long, global = true)]
    no_fixed: bool,
    #[arg(long, global = true)]
    no_dynamic: bool,
}

impl Opts {
    fn config(self) -> PipelineConfig {
        PipelineConfig {
            seed: self.seed,
            count: self.count,
            catalog: self.catalog,
            params: self.params,
            cycle: self.cycle,
            out: self.out,
            fixed: !self.no_fixed,
            dynamic: !self.no_dynamic,
            repeats: self.repeats,
            dt: self.dt,
            jobs: self.jobs,
            lambda: self.lambda,
        }
    }
}

fn print(s: &StageSummary) {
    println!("{}: {} ok, {} failed", s.stage, s.ok.len(), s.failed.len());
    for (k, v) in &s.failed {
        println!("  {k}: {v}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = cli.opts.config();
    let summaries = match cli.command {
        Command::Enumerate => cmd_enumerate(&cfg).map(|s| vec![s]),
        Command::Assess { dump_pruned } => cmd_assess(&cfg, dump_pruned).map(|s| vec![s]),
        Command::Simulate => cmd_simulate(&cfg).map(|s| vec![s]),
        Command::Pareto { skip_missing } => cmd_pareto(&cfg, skip_missing).map(|(s, _)| vec![s]),
        Command::Report { dump_pruned } => report(&cfg, dump_pruned),
    };
    match summaries {
        Ok(all) => {
            all.iter().for_each(print);
            if all.iter().all(StageSummary::success) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
