use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use experiments_cli::{
    preset, run_experiment, CliError, ExperimentConfig, Profile, PRESETS, WORKERS_ENV,
};

#[derive(Parser)]
#[command(
    name = "zeno-otto",
    version,
    about = "Lubricated qubit Otto engine experiments"
)]
struct Cli {
    /// Print the preset ids and exit.
    #[arg(long)]
    list_presets: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a configuration file.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present_any = ["config", "list_presets"])]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    profile: ProfileArg,
    /// Overrides the master seed of the experiment.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `out/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Resolve and validate the configuration without running it.
    #[arg(long)]
    validate_only: bool,
    #[arg(long)]
    list_presets: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProfileArg {
    Desk,
    Full,
}

fn list() {
    for p in PRESETS {
        println!("{:<6}  {}", p.id, p.summary);
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let profile = match args.profile {
        ProfileArg::Desk => Profile::Desk,
        ProfileArg::Full => Profile::Full,
    };
    let mut config = match (&args.preset, &args.config) {
        (Some(id), _) => preset(id, profile)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        (None, None) => return Err(CliError::Config("give --preset or --config".into())),
    };
    if let Some(seed) = args.seed {
        eprintln!(
            "override: master_seed {} -> {seed}",
            config.params.master_seed
        );
        config.params.master_seed = seed;
    }
    let panels = config.resolve()?;
    if args.validate_only {
        for p in &panels {
            println!("{}: {:?}, {} points", p.id, p.kind, p.points.len());
        }
        println!("configuration `{}` is valid", config.name);
        return Ok(());
    }
    let workers = args
        .workers
        .or(config.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let results = run_experiment(&config, workers)?;
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&config.name));
    for path in results.write(&out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Run(args)) if args.list_presets => {
            list();
            Ok(())
        }
        Some(Command::Run(args)) => run(args),
        None if cli.list_presets => {
            list();
            Ok(())
        }
        None => {
            eprintln!("nothing to do; try `zeno-otto run --preset fig4` or `--list-presets`");
            Err(CliError::Config("no command".into()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
