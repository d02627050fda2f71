use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbeam::experiment::{self, preset, verify, ExperimentConfig, RunManifest, RunOptions, Suite, PRESETS};
use gbeam::Error;

#[derive(Parser)]
#[command(name = "gbeam", version, about = "Gaussian beam superposition convergence studies")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run one self-check suite (beam-core, quadrature, spectral, examples) or all.
    Verify { suite: String },
    /// Run a preset and print its error tables.
    Table {
        preset: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a preset and print its fitted rates, growth exponents and scaling norms.
    Rates {
        preset: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print a preset's TOML configuration, or list presets.
    Show { preset: Option<String> },
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Recompute even if a complete run exists.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl OutputArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            force: self.force,
            output_dir: self.output_dir.clone(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConverged { .. } => 2,
        Error::Config(_) | Error::UnknownExample(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(command: Command) -> gbeam::Result<ExitCode> {
    match command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_path(&config).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("{}: {io}", config.display())),
                other => other,
            })?;
            let m = experiment::run(&cfg, &out.options())?;
            report(&m);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite } => {
            let suites = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let mut failed = 0;
            for s in suites {
                for c in verify(s)? {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    println!("{tag} {}/{}: {:.3e} (tolerance {:.1e})", s.name(), c.name, c.value, c.tolerance);
                    failed += usize::from(!c.passed);
                }
            }
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Table { preset: name, out } => {
            let cfg = preset(&name)?;
            let m = experiment::run(&cfg, &out.options())?;
            let dir = out.output_dir.clone().unwrap_or_else(|| cfg.output_dir());
            for n in &cfg.norms {
                let file = dir.join(format!("errors_{}.csv", experiment::run::norm_name(n.kind)));
                println!("# {} ({:?}, denominator {:?})", name, n.kind, n.denominator);
                print!("{}", std::fs::read_to_string(file)?);
            }
            if cfg.norms.is_empty() {
                println!("# {name} has no error tables; see `gbeam rates {name}`");
            }
            report(&m);
            Ok(ExitCode::SUCCESS)
        }
        Command::Rates { preset: name, out } => {
            let cfg = preset(&name)?;
            let m = experiment::run(&cfg, &out.options())?;
            let dir = out.output_dir.clone().unwrap_or_else(|| cfg.output_dir());
            for file in ["fits.csv", "sup_rates.csv", "sups.csv", "scaling.csv"] {
                if let Ok(text) = std::fs::read_to_string(dir.join(file)) {
                    println!("# {file}");
                    print!("{text}");
                }
            }
            report(&m);
            Ok(ExitCode::SUCCESS)
        }
        Command::Show { preset: None } => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Show { preset: Some(name) } => {
            print!("{}", preset(&name)?.to_toml_string()?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn report(m: &RunManifest) {
    let time: f64 = m.provenance.iter().map(|p| p.wall_seconds).sum();
    eprintln!("{}: {} entries, {:.1} s of evaluation, outputs: {}", m.name, m.provenance.len(), time, m.outputs.join(", "));
}
