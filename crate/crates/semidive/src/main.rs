use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use semidive::genbench::{generate, run_experiment, write_report, ExperimentConfig, GenParams};
use semidive::io::{load_problem, write_native, write_result, Format, RunInfo};
use semidive::WallClock;
use semidive_core::bnb::{solve, SolverConfig};

#[derive(Parser)]
#[command(name = "semidive", version, about = "MIP solver with indicator diving for semi-continuous variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Mps,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an MPS or native JSON instance.
    Solve {
        file: PathBuf,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Stop after the root node.
        #[arg(long)]
        root_only: bool,
        #[arg(long)]
        no_indicator_diving: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Result record path; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Input format; guessed from the extension if omitted.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Generate lot-sizing instances as native JSON.
    Gen {
        /// A parameter object or an array of them.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write its report.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Solve {
            file,
            time_limit,
            node_limit,
            root_only,
            no_indicator_diving,
            seed,
            out,
            format,
        } => {
            let format = format.map(|f| match f {
                FormatArg::Mps => Format::Mps,
                FormatArg::Json => Format::Native,
            });
            let problem = load_problem(&file, format).map_err(|e| e.to_string())?;
            let mut cfg = SolverConfig::default().with_seed(seed);
            cfg.time_limit = time_limit.unwrap_or(f64::INFINITY);
            cfg.node_limit = node_limit;
            cfg.root_only = root_only;
            cfg.heuristics.diving = !no_indicator_diving;
            let clock = WallClock::new();
            let result = solve(&problem, &cfg, &clock);
            let info = RunInfo {
                walltime_s: result.stats.time,
            };
            let record = write_result(&problem, &result, info);
            match out {
                Some(path) => {
                    write(&path, &record)?;
                    let obj = result.objective().map_or("-".to_string(), |v| format!("{v}"));
                    eprintln!("{}: {} objective {obj}", file.display(), result.status.as_str());
                }
                None => print!("{record}"),
            }
            Ok(())
        }
        Command::Gen { params, out } => {
            let text = read(&params)?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", params.display()))?;
            let list: Vec<GenParams> = match value {
                serde_json::Value::Array(_) => serde_json::from_value(value),
                _ => serde_json::from_value(value).map(|p| vec![p]),
            }
            .map_err(|e| format!("{}: {e}", params.display()))?;
            std::fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            for p in &list {
                let problem = generate(p).map_err(|e| e.to_string())?;
                let path = out.join(format!("{}.json", problem.name));
                write(&path, &write_native(&problem))?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Bench { config, out } => {
            let text = read(&config)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", config.display()))?;
            let output = run_experiment(&cfg).map_err(|e| e.to_string())?;
            let summary = write_report(&out, &output).map_err(|e| format!("{}: {e}", out.display()))?;
            if let Some(c) = summary.comparison {
                let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "observations {} called {} root PG ratio {} PI ratio {} wins {} losses {} diving time share {:.4}",
                    c.observations,
                    c.called,
                    show(c.root_pg_ratio),
                    show(c.pi_ratio),
                    c.wins,
                    c.losses,
                    c.heur_time_share
                );
            }
            println!("report written to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
