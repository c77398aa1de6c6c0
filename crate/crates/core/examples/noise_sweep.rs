//! A reduced noise sweep on the four-site XXZ chain: every grid point is reconstructed
//! several times and summarized as mean and standard deviation.
//!
//! ```text
//! cargo run --release --example noise_sweep
//! ```

use hamlearn::experiment::{aggregate, aggregate_csv, run_sweep, ExperimentConfig};

const CONFIG: &str = r#"
n = 4
temperatures = [1.0, 2.0]
sigma_grid = [0.0, 1e-7, 1e-5, 1e-3]
runs_per_point = 4
seed = 2024

[model]
kind = "xxz"
anisotropy = 0.5
"#;

fn main() -> hamlearn::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let records = run_sweep(&cfg, true)?;
    for r in &records {
        println!(
            "sigma {:>7e} T {:>3} run {} verdict {:<16} theta {}",
            r.sigma_noise,
            r.temperature,
            r.run,
            r.verdict,
            r.theta.map_or("-".into(), |t| format!("{t:.3e}"))
        );
    }
    println!();
    print!("{}", aggregate_csv(&aggregate(&records))?);
    Ok(())
}
