use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use umi_sim::deployment::generate_layout_with;
use umi_sim::engine::{
    run_scenario_with, run_sweep, write_outputs, ConstantGain, RunOptions, ScenarioConfig,
};
use umi_sim::linkbudget::PowerScheme;

#[derive(Parser)]
#[command(
    name = "umi-sim",
    version,
    about = "mmWave UMi downlink coupling-loss / geometry simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario config (TOML). Defaults are used for anything omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (1 = single-threaded).
    #[arg(short, long)]
    workers: Option<usize>,
    /// Also write links.csv with every sector-MS link.
    #[arg(long)]
    links: bool,
    /// Also write deployment.json.
    #[arg(long)]
    deployment: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Run every (frequency, scheme) combination.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Carrier frequencies in GHz.
        #[arg(long, value_delimiter = ',', default_value = "2,10,30,60,100")]
        frequencies: Vec<f64>,
        /// Power allocation schemes.
        #[arg(long, value_delimiter = ',', default_value = "scaled,constant")]
        schemes: Vec<String>,
    },
}

fn load(common: &Common) -> Result<(ScenarioConfig, RunOptions)> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    if common.workers == Some(0) {
        bail!("--workers must be at least 1");
    }
    let opts = RunOptions {
        workers: common.workers,
        keep_links: common.links,
    };
    Ok((cfg, opts))
}

fn write_deployment(cfg: &ScenarioConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let dep = generate_layout_with(&cfg.deployment)?;
    std::fs::write(dir.join("deployment.json"), dep.to_json()?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common } => {
            let (cfg, opts) = load(&common)?;
            let result = run_scenario_with(&cfg, &opts, &ConstantGain(cfg.g_sm_db))?;
            write_outputs(&result, &common.out)?;
            if common.deployment {
                write_deployment(&cfg, &common.out)?;
            }
            println!(
                "{} GHz {} {:?}: median CL {:.2} dB, GM<0 dB {:.1}%, noise-limited {:.1}% -> {}",
                cfg.frequency_ghz,
                cfg.power_scheme,
                cfg.environment,
                result.cl.median(),
                100.0 * result.gm.fraction_below(0.0),
                100.0 * result.regimes.noise_limited,
                common.out.display()
            );
        }
        Command::Sweep {
            common,
            frequencies,
            schemes,
        } => {
            let (cfg, opts) = load(&common)?;
            let schemes = schemes
                .iter()
                .map(|s| s.parse::<PowerScheme>())
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if common.deployment {
                write_deployment(&cfg, &common.out)?;
            }
            let mut failures = 0;
            for entry in run_sweep(&cfg, &frequencies, &schemes, &opts)? {
                let dir = common
                    .out
                    .join(format!("{}GHz_{}", entry.frequency_ghz, entry.scheme));
                match entry.result {
                    Ok(r) => {
                        write_outputs(&r, &dir)?;
                        println!(
                            "{:>6} GHz {:<8} median CL {:>8.2} dB  GM<0 dB {:>5.1}%  noise-limited {:>5.1}%",
                            entry.frequency_ghz,
                            entry.scheme.to_string(),
                            r.cl.median(),
                            100.0 * r.gm.fraction_below(0.0),
                            100.0 * r.regimes.noise_limited
                        );
                    }
                    Err(e) => {
                        failures += 1;
                        eprintln!("{} GHz {}: {e}", entry.frequency_ghz, entry.scheme);
                    }
                }
            }
            if failures > 0 {
                bail!("{failures} sweep run(s) failed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
