use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gp_power::power::example1;
use gp_power_cli::case1::{run_case1, Case1Options};
use gp_power_cli::case2::{run_case2, Case2Options, Mode};
use gp_power_cli::export::export_scenarios;
use gp_power_cli::solve::{describe, run_oracle, solve_file, OracleMethod};
use gp_power_cli::{ensure_dir, load_config, load_problem, CliError};

#[derive(Parser)]
#[command(name = "gp-power", version, about = "Weighted sum rate power control by successive geometric programming")]
struct Cli {
    /// Worker threads for independent runs (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// SCA stopping threshold on the power step (W).
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a JSON problem file; writes trajectory.csv and allocation.csv.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Random-start study against the grid oracle.
    Case1 {
        /// Problem file; the bundled four-link network when omitted.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        inits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        grid_points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Cellular-UAV uplink study.
    Case2 {
        #[arg(long, default_value_t = 100)]
        realizations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repeat to select several; all three when omitted.
        #[arg(long, value_enum)]
        mode: Vec<Mode>,
        /// Network configuration JSON; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force reference optimum of a small problem file.
    Oracle {
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "grid")]
        method: OracleMethod,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Scenario utilities.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Write realizations as problem files plus UAV positions.
    Export {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        realizations: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { problem, common } => {
            let report = solve_file(&problem, common.eps, &common.out)?;
            println!("{}", describe(&report));
        }
        Command::Case1 {
            problem,
            inits,
            seed,
            grid_points,
            common,
        } => {
            let prob = match problem {
                Some(p) => load_problem(&p)?,
                None => example1(),
            };
            let opts = Case1Options {
                inits,
                seed,
                eps: common.eps,
                grid_points,
            };
            let s = run_case1(&prob, &opts)?;
            ensure_dir(&common.out)?;
            s.write(&common.out, seed)?;
            println!(
                "oracle {:.9}  best {:.9}  success {}/{} = {:.3}  failed runs {}",
                s.oracle.objective,
                s.best_objective,
                s.runs.iter().filter(|r| r.success).count(),
                s.runs.len(),
                s.success_fraction,
                s.failures
            );
        }
        Command::Case2 {
            realizations,
            seed,
            mode,
            config,
            common,
        } => {
            let cfg = load_config(config.as_deref())?;
            let opts = Case2Options {
                realizations,
                seed,
                modes: if mode.is_empty() { Mode::ALL.to_vec() } else { mode },
                eps: common.eps,
            };
            let s = run_case2(&cfg, &opts)?;
            ensure_dir(&common.out)?;
            s.write(&common.out)?;
            for m in &opts.modes {
                let avg: Vec<f64> = s.results.iter().filter_map(|r| r.outcome(*m)).map(|o| o.avg_rate).collect();
                if !avg.is_empty() {
                    println!(
                        "{:<10} mean per-UAV rate {:.4} bit/s/Hz over {} realizations",
                        m.name(),
                        avg.iter().sum::<f64>() / avg.len() as f64,
                        avg.len()
                    );
                }
            }
            let skipped = s.skipped().count();
            if skipped > 0 {
                eprintln!("skipped {skipped} (realization, mode) pairs; see case2_skipped.csv");
            }
        }
        Command::Oracle {
            problem,
            method,
            points,
            out,
        } => {
            let r = run_oracle(&problem, method, points, &out)?;
            println!("objective {:.9} over {} points, p = {:?}", r.objective, r.evaluations, r.p_best);
        }
        Command::Scenario {
            action:
                ScenarioAction::Export {
                    seed,
                    realizations,
                    config,
                    out,
                },
        } => {
            let cfg = load_config(config.as_deref())?;
            for p in export_scenarios(&cfg, seed, realizations, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
