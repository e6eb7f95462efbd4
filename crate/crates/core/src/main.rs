use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dpp_spacings::experiment::{
    format_float, run_montecarlo, run_selfcheck, ExperimentConfig, KernelSpec,
};
use dpp_spacings::fredholm::intensity_table;
use dpp_spacings::Result;

#[derive(Parser)]
#[command(
    version,
    about = "Small-gap statistics of translation-invariant determinantal point processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct KernelArgs {
    /// sine, gaussian, scaled_indicator, indicator, table or zero
    #[arg(long)]
    kernel: String,
    /// Scale for scaled_indicator
    #[arg(long)]
    a: Option<f64>,
    /// CSV of (t, phi(t)) for the table kernel
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    height: Option<f64>,
    #[arg(long)]
    half_width: Option<f64>,
}

impl KernelArgs {
    fn spec(&self) -> KernelSpec {
        KernelSpec {
            name: self.kernel.clone(),
            a: self.a,
            path: self.table.clone(),
            height: self.height,
            half_width: self.half_width,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the analytic self-checks for a configuration
    Selfcheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a Monte Carlo campaign
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        skip_selfcheck: bool,
    },
    /// Print the small-gap constant alpha of a kernel
    Alpha {
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Print the modified-intensity ratio table at s, s/2, s/4, s/8
    Intensity {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        stilde: f64,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn print_checks(checks: &[dpp_spacings::experiment::Check]) {
    for c in checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
}

fn kernel_from_spec(spec: &KernelSpec) -> Result<dpp_spacings::TranslationKernel> {
    let config = ExperimentConfig {
        kernel: spec.clone(),
        length: 10.0,
        s_values: vec![1.0],
        trials: 1,
        master_seed: 0,
        quadrature_order: 12,
        workers: 1,
        output_dir: None,
        eta_grid: None,
    };
    config.kernel()
}

fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Selfcheck { config } => {
            let config = ExperimentConfig::load(&config)?;
            let report = run_selfcheck(&config)?;
            println!(
                "kernel {} alpha {}",
                report.kernel,
                format_float(report.alpha)
            );
            print_checks(&report.checks);
            Ok(if report.passed() {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
        Command::Run {
            config,
            workers,
            skip_selfcheck,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(w) = workers {
                config.workers = w;
                config.validate()?;
            }
            if !skip_selfcheck {
                let report = run_selfcheck(&config)?;
                if !report.passed() {
                    print_checks(&report.checks);
                    return Ok(Outcome::Fail);
                }
            }
            let out = run_montecarlo(&config)?;
            println!("trials written to {}", out.csv_path.display());
            println!("summary written to {}", out.summary_path.display());
            if out.summary.insufficient_for_gof {
                println!(
                    "note: {} trials are insufficient for goodness-of-fit tests",
                    out.summary.completed_trials
                );
            }
            print_checks(&out.summary.checks);
            Ok(if out.summary.passed() {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
        Command::Alpha { kernel } => {
            let k = kernel_from_spec(&kernel.spec())?;
            println!("{}", format_float(k.alpha()));
            Ok(Outcome::Pass)
        }
        Command::Intensity { kernel, stilde } => {
            let k = kernel_from_spec(&kernel.spec())?;
            let s_values: Vec<f64> = (0..4).map(|j| stilde / 2f64.powi(j)).collect();
            let table = intensity_table(&k, &s_values)?;
            println!("alpha {}", format_float(table.alpha));
            println!("s_tilde,fredholm,series,alpha_s3,ratio,route_rel_diff");
            for r in &table.rows {
                println!(
                    "{},{},{},{},{},{}",
                    format_float(r.s_tilde),
                    format_float(r.fredholm),
                    format_float(r.series),
                    format_float(r.alpha_s3),
                    format_float(r.ratio),
                    format_float(r.route_rel_diff)
                );
            }
            println!(
                "extrapolated ratio {} (order {:.3})",
                format_float(table.extrapolated_ratio),
                table.estimated_order
            );
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}
