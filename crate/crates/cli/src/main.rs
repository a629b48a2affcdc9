//! `relaysec`: secrecy metrics of an energy-harvesting untrusted relay link.
//!
//! Exit status: 0 success, 1 a validation check failed, 2 bad configuration
//! or i/o, 3 numerical integration did not converge.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relaysec::PolicyRegistry;

use commands::{CliError, CliResult};
use config::{merge, resolve, ConfigError, Layer, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "relaysec", version, about = "Secrecy metrics for an energy-harvesting untrusted AF relay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every analytic metric at one design point.
    Eval(Common),
    /// One row per point of a sweep over a single variable.
    Sweep(Common),
    /// Analytic metrics against Monte Carlo, with a verdict per check.
    Validate(Common),
    /// Best beta (PS) or alpha (TS) for an objective.
    Optimize(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Any config key, as KEY=VALUE. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// ps, ts, a comma list, or all.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Sweep variable: beta, alpha, r_th, snr_db, d_sr, rho or eta.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    step: Option<String>,
    /// min_secrecy_outage or max_ergodic_rate.
    #[arg(long)]
    optimize: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when absent or `-`.
    #[arg(short, long)]
    output: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "mc-samples")]
    mc_samples: Option<String>,
    #[arg(long)]
    threads: Option<String>,
}

impl Common {
    fn flag_layer(&self) -> Result<Layer, ConfigError> {
        let mut layer = Layer::from_pairs(self.set.iter().map(String::as_str), "--set")?;
        for (key, value) in [
            ("policy", &self.policy),
            ("beta", &self.beta),
            ("alpha", &self.alpha),
            ("sweep", &self.sweep),
            ("from", &self.from),
            ("to", &self.to),
            ("step", &self.step),
            ("optimize", &self.optimize),
            ("format", &self.format),
            ("output", &self.output),
            ("seed", &self.seed),
            ("mc_samples", &self.mc_samples),
            ("threads", &self.threads),
        ] {
            if let Some(v) = value {
                layer.set(key, v.as_str())?;
            }
        }
        Ok(layer)
    }

    fn resolve(&self, registry: &PolicyRegistry) -> Result<RunConfig, ConfigError> {
        let mut layers = Vec::new();
        if let Some(path) = &self.config {
            layers.push(Layer::load(path)?);
        }
        layers.push(self.flag_layer()?);
        resolve(&merge(&layers), registry)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let registry = PolicyRegistry::builtin();
    let (name, common) = match &cli.command {
        Command::Eval(c) => ("eval", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Validate(c) => ("validate", c),
        Command::Optimize(c) => ("optimize", c),
    };
    let cfg = common.resolve(&registry)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| ConfigError::key("threads", e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Eval(_) => output::emit(&commands::eval(&cfg, &registry)?, &cfg, name).map_err(CliError::from),
        Command::Sweep(_) => output::emit(&commands::sweep(&cfg, &registry)?, &cfg, name).map_err(CliError::from),
        Command::Optimize(_) => output::emit(&commands::optimize(&cfg, &registry)?, &cfg, name).map_err(CliError::from),
        Command::Validate(_) => {
            let (table, rows) = commands::validate(&cfg, &registry)?;
            output::emit(&table, &cfg, name)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                return Err(CliError::ValidationFailed {
                    failed,
                    total: rows.len(),
                });
            }
            eprintln!("validate: all {} checks passed", rows.len());
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relaysec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
