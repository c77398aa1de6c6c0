use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hamlearn::experiment::{cmd_gen, cmd_learn, cmd_sweep, cmd_verify, error_exit_code, ExperimentConfig};
use hamlearn::Result;

/// Learn Hamiltonians and temperatures from Gibbs-state expectation values.
///
/// Dense state preparation is capped at HAMLEARN_DENSE_LIMIT sites (default 12).
#[derive(Parser)]
#[command(name = "hamlearn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write exact expectation tables, one per temperature.
    Gen {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "tables")]
        out: PathBuf,
    },
    /// Reconstruct from one table. Exit code 0 = candidate, 2 = not stationary,
    /// 3 = not Gibbs, 4 = data or numerical error.
    Learn {
        #[command(flatten)]
        config: ConfigArgs,
        /// Expectation table to read.
        #[arg(long)]
        table: PathBuf,
        /// Where to write the result (TOML).
        #[arg(long)]
        result: Option<PathBuf>,
        /// True temperature, for the temperature ratio in the summary.
        #[arg(long)]
        temperature: Option<f64>,
    },
    /// Noise sweep: per-run CSV plus mean and standard deviation per grid point.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        /// Run the jobs on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Brute-force verification battery on random states.
    Verify {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        /// Scale every state by this factor before checking (anything but 1 corrupts the trace).
        #[arg(long, default_value_t = 1.0, hide = true)]
        trace_scale: f64,
    },
}

/// Configuration file plus per-field overrides.
#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    temperatures: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    sigma_grid: Option<Vec<f64>>,
    #[arg(long)]
    runs_per_point: Option<usize>,
    #[arg(long)]
    k_local: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    include_identity: bool,
    #[arg(long)]
    project_delta: bool,
    #[arg(long)]
    epsilon_w_override: Option<f64>,
    /// XXZ anisotropy (ignored for custom models).
    #[arg(long)]
    anisotropy: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(t) = &self.temperatures {
            cfg.temperatures = t.clone();
        }
        if let Some(s) = &self.sigma_grid {
            cfg.sigma_grid = s.clone();
        }
        if let Some(r) = self.runs_per_point {
            cfg.runs_per_point = r;
        }
        if let Some(k) = self.k_local {
            cfg.k_local = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.include_identity |= self.include_identity;
        cfg.project_delta |= self.project_delta;
        if self.epsilon_w_override.is_some() {
            cfg.epsilon_w_override = self.epsilon_w_override;
        }
        if let (Some(d), hamlearn::experiment::ModelConfig::Xxz { anisotropy, .. }) = (self.anisotropy, &mut cfg.model) {
            *anisotropy = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Gen { config, out } => {
            for path in cmd_gen(&config.resolve()?, &out)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Learn { config, table, result, temperature } => {
            let report = cmd_learn(&config.resolve()?, &table, result.as_deref(), temperature)?;
            print!("{}", report.summary());
            Ok(report.exit_code() as u8)
        }
        Command::Sweep { config, out, serial } => {
            let output = cmd_sweep(&config.resolve()?, &out, !serial)?;
            println!("{} runs", output.records.len());
            println!("{}", output.records_path.display());
            println!("{}", output.aggregate_path.display());
            Ok(0)
        }
        Command::Verify { n, seed, instances, trace_scale } => {
            let report = cmd_verify(n, seed, instances, trace_scale)?;
            println!("{report}");
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
