use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use heatflow::cli::{run, summary, RunConfig, TGrid};
use heatflow::conjectures::Method;
use heatflow::DEFAULT_ORDER;

/// Check entropy-power, completely-monotone and McKean sign patterns along
/// the heat flow of a Gaussian mixture.
#[derive(Parser, Debug)]
#[command(name = "heatflow", version)]
struct Args {
    /// Mixture file (TOML with a [[components]] list)
    #[arg(long)]
    input: PathBuf,

    /// Highest derivative order M
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,

    /// log:COUNT:LO:HI or list:T1,T2,...
    #[arg(long, default_value = "log:16:0.05:5")]
    t_grid: TGrid,

    /// analytic, spectral or both
    #[arg(long, default_value = "both")]
    method: Method,

    /// Absolute quadrature tolerance [default: 1e-12]
    #[arg(long)]
    abs_tol: Option<f64>,

    /// Relative quadrature tolerance [default: 1e-10]
    #[arg(long)]
    rel_tol: Option<f64>,

    /// Output directory for report.json, table.csv and curves.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Allow orders 5 and 6
    #[arg(long)]
    allow_high_order: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let mut config = RunConfig::new(args.input, args.out);
    config.order = args.order;
    config.t_grid = args.t_grid;
    config.method = args.method;
    config.allow_high_order = args.allow_high_order;
    if let Some(tol) = args.abs_tol {
        config.quadrature.abs_tol = tol;
    }
    if let Some(tol) = args.rel_tol {
        config.quadrature.rel_tol = tol;
    }
    match run(&config) {
        Ok(outcome) => {
            println!("{}", summary(&outcome.report, outcome.status));
            ExitCode::from(outcome.status.code())
        }
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
