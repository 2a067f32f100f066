use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linreach::cli::{cmd_mintime, cmd_reach, cmd_study, cmd_trajectory, exit_code, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "linreach", version, about = "Reachable sets and minimum time functions of linear control systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the reachable-set fronts and export them.
    Reach(Common),
    /// Build the minimum time surface and its error report.
    Mintime(Common),
    /// Reconstruct an optimal control to a front vertex.
    Trajectory {
        #[command(flatten)]
        common: Common,
        /// Front level (defaults to the last one).
        #[arg(long)]
        level: Option<usize>,
        /// Grid direction whose supporting vertex is the endpoint.
        #[arg(long)]
        direction: Option<usize>,
    },
    /// Refinement study with empirical orders of convergence.
    Study(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dirs: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    substeps: Option<usize>,
    #[arg(long, value_parser = ["euler", "heun", "combination"])]
    scheme: Option<String>,
    /// Accept direction counts below ceil(pi / h^p).
    #[arg(long)]
    allow_coarse_directions: bool,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            directions: self.dirs,
            levels: self.levels,
            substeps: self.substeps,
            scheme: self.scheme.clone(),
            allow_coarse_directions: self.allow_coarse_directions,
            sequential: self.sequential,
            level: None,
            direction: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, kind, level, direction) = match &cli.command {
        Command::Reach(c) => (c, "reach", None, None),
        Command::Mintime(c) => (c, "mintime", None, None),
        Command::Trajectory { common, level, direction } => (common, "trajectory", *level, *direction),
        Command::Study(c) => (c, "study", None, None),
    };
    let mut ov = common.overrides();
    ov.level = level;
    ov.direction = direction;
    let result = RunConfig::load(&common.config, &ov).and_then(|cfg| match kind {
        "reach" => cmd_reach(&cfg),
        "mintime" => cmd_mintime(&cfg),
        "trajectory" => cmd_trajectory(&cfg),
        _ => cmd_study(&cfg),
    });
    match result {
        Ok(outcome) => {
            for l in &outcome.lines {
                println!("{l}");
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
