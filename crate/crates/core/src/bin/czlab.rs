use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use czlab::experiment::{is_setup_error, run, Experiment, ExperimentConfig};

/// Batch runner for the commutator experiments.
#[derive(Parser, Debug)]
#[command(name = "czlab", version)]
struct Cli {
    /// boundedness | compactness | factorization | lowerbound | kernelcheck
    experiment: String,
    /// INI file; omitted keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value`, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prepared = (|| {
        let experiment: Experiment = cli.experiment.parse()?;
        let text = match &cli.config {
            Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                czlab::Error::Config(format!("cannot read {}: {e}", path.display()))
            })?),
            None => None,
        };
        ExperimentConfig::resolve(experiment, text.as_deref(), &cli.set)
    })();
    let cfg = match prepared {
        Ok(c) => c,
        Err(e) => {
            eprintln!("czlab: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("czlab: {e}");
            return ExitCode::from(if is_setup_error(&e) { 2 } else { 1 });
        }
    };
    if let Err(e) = report.write(&cli.out, &cfg.settings.to_ini_string()) {
        eprintln!("czlab: writing {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for k in &report.constants {
        let flag = if k.unresolved { " (unresolved)" } else { "" };
        match k.delta {
            Some(d) => println!("const {} = {:.6e} (refined delta {:.1}%){flag}", k.name, k.value, 100.0 * d),
            None => println!("const {} = {:.6e}", k.name, k.value),
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
