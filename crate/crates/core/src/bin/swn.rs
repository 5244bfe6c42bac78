use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use swn::runner::{exit_code, run, Execution, Mode, RunConfig};

/// Run a verification suite or experiment on the lattice Seiberg–Witten system.
#[derive(Parser, Debug)]
#[command(name = "swn", version)]
struct Cli {
    /// Flat TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mode, overriding the configuration.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Single-threaded deterministic mode with reproducible manifest hashes.
    #[arg(long)]
    reference: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match (&cli.config, cli.mode) {
        (Some(path), _) => RunConfig::load(path),
        (None, Some(mode)) => Ok(RunConfig::with_mode(mode)),
        (None, None) => Err(swn::Error::Config {
            field: "mode".into(),
            message: "give --config or --mode".into(),
        }),
    };
    let result = config.and_then(|mut c| {
        if let Some(m) = cli.mode {
            c.mode = m;
        }
        if let Some(s) = cli.seed {
            c.seed = s;
        }
        if let Some(o) = &cli.out {
            c.out = o.clone();
        }
        let execution = if cli.reference {
            Execution::Reference
        } else {
            Execution::Parallel(cli.threads)
        };
        run(&c, execution)
    });
    match &result {
        Ok(o) => {
            println!(
                "{} {} (config {})",
                if o.passed { "PASS" } else { "FAIL" },
                serde_json::to_string(&o.manifest.mode)
                    .unwrap_or_default()
                    .trim_matches('"'),
                &o.manifest.config_hash[..12]
            );
            for f in &o.manifest.files {
                println!("  {}  {}", &f.sha256[..16], f.path);
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
