use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmwsim_cli::{load_config, preset, run, validate_spec, CliError, EngineSet, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "mmwsim",
    version,
    about = "BER sweeps for directional mmWave links under Poisson interferer and blockage fields"
)]
struct Cli {
    /// Worker threads for the Monte Carlo engine (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config (or manifest).
    Run {
        /// Path to the config file.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Resolve and check a config without computing anything.
    Validate {
        /// Path to the config file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a built-in experiment preset: fig2 (interferer-density sweep),
    /// fig3 (blockage-density sweep), fig4 (blockage on/off).
    Preset {
        /// Preset name: fig2 | fig3 | fig4.
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(clap::Args)]
struct Overrides {
    /// Output directory (default: out/NAME).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Comma-separated engine list, e.g. "analytic,montecarlo".
    #[arg(long)]
    engines: Option<String>,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<(), CliError> {
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
        if let Some(engines) = &self.engines {
            let items: Vec<String> = engines.split(',').map(|s| s.trim().to_string()).collect();
            spec.engines = EngineSet::parse_list(&items)?;
        }
        if let Some(out) = &self.out {
            spec.output_path = Some(out.clone());
        }
        Ok(())
    }
}

fn execute(spec: &mut ExperimentSpec, overrides: &Overrides) -> Result<(), CliError> {
    overrides.apply(spec)?;
    let out_dir = spec
        .output_path
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(&spec.name));
    let artifacts = run(spec, &out_dir)?;
    for path in &artifacts.csv_paths {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", artifacts.manifest_path.display());
    println!("wrote {}", artifacts.plot_path.display());
    println!("done in {:.1}s", artifacts.wall_time_s);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config, overrides } => {
            let mut spec = load_config(config)?;
            execute(&mut spec, overrides)
        }
        Command::Validate { config } => {
            let spec = load_config(config)?;
            let report = validate_spec(&spec)?;
            print!("{report}");
            Ok(())
        }
        Command::Preset { name, overrides } => {
            let mut spec = preset(name)?;
            execute(&mut spec, overrides)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore rebuild errors (the global pool can only be set once).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
