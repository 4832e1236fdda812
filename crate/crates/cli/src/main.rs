use std::path::PathBuf;
use std::process::ExitCode;

use circulant_cli::config::ScenarioConfig;
use circulant_cli::figures::{run_figure, FigureId};
use circulant_cli::ionchain::{self, IonChainConfig};
use circulant_cli::{checks, scenario, sweep, tune, CliError, CliResult, Overrides};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "circulant", version, about = "Adiabatic circulant Fourier-gate simulator")]
struct Cli {
    /// Integrator step-halving tolerance (overrides the config).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reproduce a figure (1a 1b 2a 2b 3 4a 4b 5a 5b 6, or `all`).
    Figure { id: String },
    /// Propagate one scenario config.
    Scenario { path: PathBuf },
    /// Tune the detunings so that alpha2 = 2k pi and beta2 = 2p pi.
    Tune { k: u32, p: u32, path: PathBuf },
    /// Run the [sweep] section of a config.
    Sweep { path: PathBuf },
    /// Ion-chain modes and effective coupling.
    IonChain { path: PathBuf },
    /// Seeded randomized circulant and spectrum oracle checks.
    Check {
        #[arg(long, default_value_t = 1000)]
        draws: usize,
    },
}

fn load(path: &PathBuf, o: &Overrides) -> CliResult<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path)?;
    cfg.apply(o);
    cfg.resolve()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads: must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("--threads: {e}")))?;
    }
    let o = Overrides { tolerance: cli.tolerance, out: cli.out, seed: cli.seed };
    match cli.command {
        Command::Figure { id } => {
            let ids = if id == "all" { FigureId::ALL.to_vec() } else { vec![id.parse()?] };
            for id in ids {
                for p in run_figure(id, &o)? {
                    println!("wrote {}", p.display());
                }
            }
        }
        Command::Scenario { path } => {
            let cfg = load(&path, &o)?;
            let (report, out) = scenario::run_and_write(&cfg)?;
            print!("{}", report.summary());
            println!("wrote {}", out.display());
        }
        Command::Tune { k, p, path } => {
            let cfg = load(&path, &o)?;
            let report = tune::run_tune(k, p, &cfg)?;
            print!("{}", report.summary());
            let mut t = report.table();
            t.comment(&cfg.to_toml());
            let out = t.write(&cfg.output.dir, &format!("{}_tune.csv", cfg.output.stem))?;
            println!("wrote {}", out.display());
        }
        Command::Sweep { path } => {
            let cfg = load(&path, &o)?;
            let t = sweep::run_sweep(&cfg)?;
            let out = t.write(&cfg.output.dir, &format!("{}_sweep.csv", cfg.output.stem))?;
            println!("wrote {}", out.display());
        }
        Command::IonChain { path } => {
            let mut cfg = IonChainConfig::load(&path)?;
            cfg.apply(&o);
            let (report, out) = ionchain::run_and_write(&cfg)?;
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            print!("{}", report.summary());
            println!("wrote {}", out.display());
        }
        Command::Check { draws } => {
            let (ok, text) = checks::report(o.seed.unwrap_or(2024), draws)?;
            print!("{text}");
            if !ok {
                return Err(CliError::Core(circulant_core::Error::Instability("randomized oracle check failed".into())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
