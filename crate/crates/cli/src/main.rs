use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;

use persistence_lab::{parse_config, run_experiment, Overrides, Subcommand};

fn subcommand(s: &str) -> Result<Subcommand, String> {
    Subcommand::parse(s).ok_or_else(|| {
        let names: Vec<_> = Subcommand::ALL.iter().map(|c| c.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// Persistence-probability experiments for random polynomials and
/// sech-covariance Gaussian processes.
#[derive(Debug, Parser)]
#[command(name = "persistence-lab", version)]
struct Cli {
    /// poly-persistence, gp-exponent, fit, covariance-check, root-count or kac
    #[arg(value_parser = subcommand)]
    subcommand: Subcommand,
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config file
    #[arg(long, env = "PERSISTENCE_LAB_SEED")]
    seed: Option<u64>,
    /// Worker threads; overrides the config file
    #[arg(long, env = "PERSISTENCE_LAB_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Output directory; overrides the config file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    let parsed = match parse_config(&text) {
        Ok(p) => p,
        Err(e) => bail!("{}: {e}", cli.config.display()),
    };
    let mut cfg = parsed.config;
    if cfg.subcommand != cli.subcommand {
        bail!(
            "{} is a `{}` config, but `{}` was requested",
            cli.config.display(),
            cfg.subcommand,
            cli.subcommand
        );
    }
    Overrides {
        seed: cli.seed,
        workers: cli.workers.map(|w| w as usize),
        output: cli.out,
    }
    .apply(&mut cfg);
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let report = run_experiment(&cfg, &parsed.warnings)?;

    if cfg.subcommand == Subcommand::RootCount && cfg.coefficients_file.is_some() {
        let r = &report.results[0];
        println!(
            "verdict: {}  count: {}  tier: {}",
            r["verdict"].as_str().unwrap_or("?"),
            r["count"].as_u64().map_or("unavailable".to_string(), |c| c.to_string()),
            r["tier"].as_str().unwrap_or("?"),
        );
    }
    for f in &report.fits {
        for key in ["b_hat", "slope"] {
            if let Some(v) = f.get(key).and_then(|v| v.as_f64()) {
                println!("{key} = {v:.4} ± {:.4}", f["stderr"].as_f64().unwrap_or(f64::NAN));
            }
        }
    }
    for c in &report.checks {
        let tag = match (c.passed, c.enforced) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "note",
        };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    println!("report written to {}", cfg.output.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
