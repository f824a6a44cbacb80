use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tricomp::experiment::{parse_config, run_experiment, validate, ExperimentSpec};

#[derive(Parser)]
#[command(name = "tricomp", about = "Triangle-cooperation network models: figure data and validation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonOpts {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts (overrides config and TRICOMP_OUT_DIR)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override a single configuration key, repeatable: --set drops=5000
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reproduce one figure's data series as CSV files
    Run {
        /// fig4..fig11 or headline-se (default: headline-se)
        #[arg(long)]
        figure: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Re-run the model cross-checks at desk scale; exits nonzero on any failure
    Validate {
        #[command(flatten)]
        common: CommonOpts,
        /// Analytic and small-geometry checks only (finishes in well under a minute)
        #[arg(long)]
        quick: bool,
    },
}

fn split_sets(sets: &[String]) -> Result<Vec<(String, String)>, String> {
    sets.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| format!("--set expects KEY=VALUE, got '{s}'"))
        })
        .collect()
}

fn resolve(
    figure: Option<&str>,
    common: &CommonOpts,
    quick: bool,
) -> Result<ExperimentSpec, String> {
    let sets = split_sets(&common.sets)?;
    parse_config(
        figure,
        common.config.as_deref(),
        &sets,
        common.out_dir.as_deref(),
        quick,
    )
    .map_err(|e| e.to_string())
}

fn print_echo(spec: &ExperimentSpec) {
    println!("resolved configuration:");
    for (k, v, p) in spec.echo() {
        println!("  {k} = {v} [{p}]");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { figure, common } => {
            let spec = match resolve(figure.as_deref(), &common, false) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            print_echo(&spec);
            match run_experiment(&spec) {
                Ok(report) => {
                    print!("{}", report.summary);
                    for f in &report.files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Cmd::Validate { common, quick } => {
            let spec = match resolve(None, &common, quick) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            print_echo(&spec);
            match validate(&spec) {
                Ok(report) => {
                    print!("{}", report.render());
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
