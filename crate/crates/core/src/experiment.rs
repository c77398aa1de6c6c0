//! Experiment plumbing behind the command-line tool: configuration files, generation of
//! expectation tables, single reconstructions, noise sweeps and the verification battery.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{reconstruct, recovery_angle, temperature_ratio, ReconstructOptions, ReconstructionResult, Verdict};
use crate::models::xxz_chain;
use crate::pauli::{dense_limit, enumerate_geometric_k_local, PauliOperator, PauliString};
use crate::state::{add_noise, build_table, gibbs_density, mix_seed, required_strings, ExpectationTable};
use crate::verify::{run_battery_with, BatteryOptions, BatteryReport, GNS_MAX_SITES};

/// Which two-site coupling carries the anisotropy in the XXZ chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnisotropyAxis {
    /// `XX + YY + δ ZZ`.
    #[default]
    Z,
    /// `XX + YY + δ YY`, the coupling with the repeated `YY` term.
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Pauli string such as `"X0 X1"`.
    pub string: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Xxz {
        #[serde(default = "default_anisotropy")]
        anisotropy: f64,
        #[serde(default)]
        anisotropy_axis: AnisotropyAxis,
    },
    Custom {
        terms: Vec<TermConfig>,
    },
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Xxz { anisotropy: default_anisotropy(), anisotropy_axis: AnisotropyAxis::Z }
    }
}

fn default_anisotropy() -> f64 {
    0.5
}

fn default_runs() -> usize {
    10
}

fn default_k_local() -> usize {
    2
}

fn default_sigma_grid() -> Vec<f64> {
    vec![0.0]
}

/// Everything an experiment needs: system, model, grids and pipeline flags.
///
/// ```toml
/// n = 6
/// temperatures = [1.0, 2.0, 10.0]
/// sigma_grid = [1e-8, 1e-6, 1e-4]
/// runs_per_point = 10
/// seed = 7
///
/// [model]
/// kind = "xxz"
/// anisotropy = 0.5
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub temperatures: Vec<f64>,
    #[serde(default = "default_sigma_grid")]
    pub sigma_grid: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs_per_point: usize,
    /// Locality of both the perturbing operators and the Hamiltonian terms.
    #[serde(default = "default_k_local")]
    pub k_local: usize,
    #[serde(default)]
    pub seed: u64,
    /// Add the identity to the perturbing operators.
    #[serde(default)]
    pub include_identity: bool,
    #[serde(default)]
    pub project_delta: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_w_override: Option<f64>,
    #[serde(default)]
    pub model: ModelConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 4,
            temperatures: vec![1.0],
            sigma_grid: default_sigma_grid(),
            runs_per_point: default_runs(),
            k_local: default_k_local(),
            seed: 0,
            include_identity: false,
            project_delta: false,
            epsilon_w_override: None,
            model: ModelConfig::default(),
        }
    }
}

/// Line of the first `key = ...` assignment in `text`, or 0.
fn key_line(text: Option<&str>, key: &str) -> usize {
    text.and_then(|t| {
        t.lines().position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
    })
    .map_or(0, |i| i + 1)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::Config { line, message: e.message().to_string() }
        })?;
        cfg.validate_with(Some(text))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(None)
    }

    fn validate_with(&self, text: Option<&str>) -> Result<()> {
        let fail = |key: &str, message: String| Err(Error::Config { line: key_line(text, key), message });
        let limit = dense_limit();
        if self.n == 0 {
            return fail("n", "n must be at least 1".into());
        }
        if self.n > limit {
            return fail("n", format!("n = {} exceeds the dense limit {limit} (HAMLEARN_DENSE_LIMIT overrides it)", self.n));
        }
        if self.k_local == 0 || self.k_local > self.n {
            return fail("k_local", format!("k_local must lie in 1..={}, got {}", self.n, self.k_local));
        }
        if self.temperatures.is_empty() {
            return fail("temperatures", "temperature grid is empty".into());
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return fail("temperatures", format!("temperatures must be positive and finite, got {t}"));
        }
        if self.sigma_grid.is_empty() {
            return fail("sigma_grid", "noise grid is empty".into());
        }
        if let Some(s) = self.sigma_grid.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return fail("sigma_grid", format!("noise levels must be finite and nonnegative, got {s}"));
        }
        if self.runs_per_point == 0 {
            return fail("runs_per_point", "runs_per_point must be at least 1".into());
        }
        if let Some(e) = self.epsilon_w_override {
            if !(e.is_finite() && e > 0.0) {
                return fail("epsilon_w_override", format!("epsilon_w_override must be positive, got {e}"));
            }
        }
        match &self.model {
            ModelConfig::Xxz { anisotropy, .. } => {
                if self.n < 2 {
                    return fail("kind", "the XXZ chain needs at least two sites".into());
                }
                if !anisotropy.is_finite() {
                    return fail("anisotropy", "anisotropy must be finite".into());
                }
            }
            ModelConfig::Custom { terms } => {
                if terms.is_empty() {
                    return fail("terms", "custom model has no terms".into());
                }
                let basis = self.hamiltonian_strings()?;
                for t in terms {
                    let p = PauliString::parse(&t.string, self.n)
                        .map_err(|e| Error::Config { line: key_line(text, "terms"), message: e.to_string() })?;
                    if !t.coefficient.is_finite() {
                        return fail("terms", format!("coefficient of `{}` is not finite", t.string));
                    }
                    if !p.is_identity() && basis.binary_search(&p).is_err() {
                        return fail("terms", format!("term `{p}` is not {}-local", self.k_local));
                    }
                }
            }
        }
        Ok(())
    }

    /// The model Hamiltonian.
    pub fn hamiltonian(&self) -> Result<PauliOperator> {
        match &self.model {
            ModelConfig::Xxz { anisotropy, anisotropy_axis } => {
                Ok(xxz_chain(self.n, *anisotropy, *anisotropy_axis == AnisotropyAxis::Y))
            }
            ModelConfig::Custom { terms } => {
                let parsed = terms
                    .iter()
                    .map(|t| Ok((PauliString::parse(&t.string, self.n)?, t.coefficient)))
                    .collect::<Result<Vec<_>>>()?;
                PauliOperator::from_real_terms(self.n, parsed)
            }
        }
    }

    /// Geometrically `k`-local perturbing operators (optionally with the identity).
    pub fn perturbing_strings(&self) -> Result<Vec<PauliString>> {
        enumerate_geometric_k_local(self.n, self.k_local, self.include_identity)
    }

    /// Geometrically `k`-local Hamiltonian terms, identity excluded, canonical order.
    pub fn hamiltonian_strings(&self) -> Result<Vec<PauliString>> {
        enumerate_geometric_k_local(self.n, self.k_local, false)
    }

    pub fn reconstruct_options(&self, noise_sigma: f64) -> ReconstructOptions {
        let mut opts = ReconstructOptions::default();
        opts.moments.noise_sigma = noise_sigma;
        opts.moments.epsilon_w_override = self.epsilon_w_override;
        opts.project_delta = self.project_delta;
        opts
    }

    pub fn prepare(&self) -> Result<Prepared> {
        let b = self.perturbing_strings()?;
        let h_strings = self.hamiltonian_strings()?;
        let h_terms: Vec<PauliOperator> = h_strings.iter().cloned().map(PauliOperator::from).collect();
        let hamiltonian = self.hamiltonian()?;
        let z_true = hamiltonian.real_coefficients(&h_strings);
        let required = required_strings(&b, &h_terms)?.into_iter().collect();
        Ok(Prepared { b, h_strings, h_terms, hamiltonian, z_true, required })
    }
}

/// Bases and model derived from a configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub b: Vec<PauliString>,
    pub h_strings: Vec<PauliString>,
    pub h_terms: Vec<PauliOperator>,
    pub hamiltonian: PauliOperator,
    /// Model coefficients in the Hamiltonian-term basis.
    pub z_true: Vec<f64>,
    /// Every string whose expectation the pipeline reads.
    pub required: Vec<PauliString>,
}

impl Prepared {
    /// Exact expectation table of the model's Gibbs state at `temperature`.
    pub fn exact_table(&self, temperature: f64) -> Result<ExpectationTable> {
        let rho = gibbs_density(&self.hamiltonian, temperature)?;
        build_table(&rho, &self.required)
    }
}

/// File name of the exact table written for `temperature`.
pub fn table_file_name(temperature: f64) -> String {
    format!("table_T{temperature}.txt")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

/// Writes one exact table per configured temperature into `out_dir`.
pub fn cmd_gen(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let prep = cfg.prepare()?;
    create_dir(out_dir)?;
    cfg.temperatures
        .iter()
        .map(|&t| {
            let path = out_dir.join(table_file_name(t));
            write_file(&path, &prep.exact_table(t)?.to_text())?;
            Ok(path)
        })
        .collect()
}

/// Outcome of a single reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnReport {
    pub result: ReconstructionResult,
    /// Angle to the configured model, when coefficients were returned.
    pub theta: Option<f64>,
    /// `T*·c⁻¹ / T` against `truth_temperature`, when given.
    pub temperature_ratio: Option<f64>,
}

impl LearnReport {
    /// 0 = candidate, 2 = not stationary, 3 = not Gibbs.
    pub fn exit_code(&self) -> i32 {
        match self.result.verdict {
            Verdict::Candidate => 0,
            Verdict::NotStationary => 2,
            Verdict::NotGibbs => 3,
        }
    }

    pub fn summary(&self) -> String {
        let mut out = self.result.summary();
        if let Some(theta) = self.theta {
            out.push_str(&format!("theta = {theta:e} rad from the configured model\n"));
        }
        if let Some(ratio) = self.temperature_ratio {
            out.push_str(&format!("temperature ratio = {ratio}\n"));
        }
        out
    }
}

/// Exit code for a failed command: 4 for data and numerical failures, 1 for configuration,
/// usage and I/O problems.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Io(_) | Error::Resource(_) => 1,
        _ => 4,
    }
}

/// Reconstructs from the table at `table_path` with the bases of `cfg`, optionally writing
/// the result as TOML to `result_path`.
pub fn cmd_learn(
    cfg: &ExperimentConfig,
    table_path: &Path,
    result_path: Option<&Path>,
    truth_temperature: Option<f64>,
) -> Result<LearnReport> {
    cfg.validate()?;
    let text = fs::read_to_string(table_path).map_err(|e| Error::Io(format!("{}: {e}", table_path.display())))?;
    let table = ExpectationTable::from_text(&text)?;
    if table.n() != cfg.n {
        return Err(Error::DimensionMismatch { expected: cfg.n, found: table.n() });
    }
    let prep = cfg.prepare()?;
    let result = reconstruct(&table, &prep.b, &prep.h_terms, &cfg.reconstruct_options(table.noise_sigma()))?;
    if let Some(path) = result_path {
        write_file(path, &result.to_toml())?;
    }
    let (theta, ratio) = metrics(&result, &prep.z_true, truth_temperature);
    Ok(LearnReport { result, theta, temperature_ratio: ratio })
}

fn metrics(result: &ReconstructionResult, z_true: &[f64], truth_temperature: Option<f64>) -> (Option<f64>, Option<f64>) {
    if result.y_star.is_empty() || z_true.iter().all(|&v| v == 0.0) {
        return (None, None);
    }
    let theta = recovery_angle(&result.y_star, z_true).ok();
    let ratio = match (result.t_star, truth_temperature) {
        (Some(ts), Some(t)) => temperature_ratio(&result.y_star, ts, z_true, t).ok().map(|(r, _)| r),
        _ => None,
    };
    (theta, ratio)
}

/// One reconstruction of a noise sweep. Failed runs carry the error kind as verdict and no
/// metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sigma_noise: f64,
    pub temperature: f64,
    pub run: usize,
    pub theta: Option<f64>,
    pub temp_ratio: Option<f64>,
    pub mu_star: Option<f64>,
    pub verdict: String,
    pub q: Option<usize>,
    pub wall_ms: f64,
}

/// Mean and sample standard deviation over the runs of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub sigma_noise: f64,
    pub temperature: f64,
    pub runs: usize,
    /// Runs that produced a recovery angle.
    pub completed: usize,
    pub theta_mean: Option<f64>,
    pub theta_std: Option<f64>,
    pub temp_ratio_mean: Option<f64>,
    pub temp_ratio_std: Option<f64>,
    pub mu_star_mean: Option<f64>,
    pub candidate: usize,
    pub not_gibbs: usize,
    pub not_stationary: usize,
    pub failed: usize,
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

/// Groups records by `(sigma_noise, temperature)` in the order they first appear.
pub fn aggregate(records: &[SweepRecord]) -> Vec<AggregateRecord> {
    let mut keys: Vec<(f64, f64)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.sigma_noise, r.temperature)) {
            keys.push((r.sigma_noise, r.temperature));
        }
    }
    keys.into_iter()
        .map(|(sigma, t)| {
            let group: Vec<&SweepRecord> = records.iter().filter(|r| r.sigma_noise == sigma && r.temperature == t).collect();
            let thetas: Vec<f64> = group.iter().filter_map(|r| r.theta).collect();
            let ratios: Vec<f64> = group.iter().filter_map(|r| r.temp_ratio).collect();
            let mus: Vec<f64> = group.iter().filter_map(|r| r.mu_star).collect();
            let (theta_mean, theta_std) = mean_std(&thetas);
            let (temp_ratio_mean, temp_ratio_std) = mean_std(&ratios);
            let count = |v: &str| group.iter().filter(|r| r.verdict == v).count();
            let candidate = count("Candidate");
            let not_gibbs = count("NotGibbs");
            let not_stationary = count("NotStationary");
            AggregateRecord {
                sigma_noise: sigma,
                temperature: t,
                runs: group.len(),
                completed: thetas.len(),
                theta_mean,
                theta_std,
                temp_ratio_mean,
                temp_ratio_std,
                mu_star_mean: mean_std(&mus).0,
                candidate,
                not_gibbs,
                not_stationary,
                failed: group.len() - candidate - not_gibbs - not_stationary,
            }
        })
        .collect()
}

/// Runs every `(σ, T, run)` job of the sweep, sorted by grid position. Each job's noise seed
/// is `mix_seed(seed, σ index, T index, run)`, so results do not depend on scheduling.
pub fn run_sweep(cfg: &ExperimentConfig, parallel: bool) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let prep = cfg.prepare()?;
    let tables: Vec<ExpectationTable> = cfg.temperatures.iter().map(|&t| prep.exact_table(t)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, usize)> = (0..cfg.sigma_grid.len())
        .flat_map(|si| (0..cfg.temperatures.len()).flat_map(move |ti| (0..cfg.runs_per_point).map(move |run| (si, ti, run))))
        .collect();
    let job = |&(si, ti, run): &(usize, usize, usize)| sweep_job(cfg, &prep, &tables[ti], si, ti, run);
    let records = if parallel { jobs.par_iter().map(job).collect() } else { jobs.iter().map(job).collect() };
    Ok(records)
}

fn sweep_job(cfg: &ExperimentConfig, prep: &Prepared, exact: &ExpectationTable, si: usize, ti: usize, run: usize) -> SweepRecord {
    let start = Instant::now();
    let sigma = cfg.sigma_grid[si];
    let temperature = cfg.temperatures[ti];
    let seed = mix_seed(&[cfg.seed, si as u64, ti as u64, run as u64]);
    let outcome = add_noise(exact, sigma, seed)
        .and_then(|table| reconstruct(&table, &prep.b, &prep.h_terms, &cfg.reconstruct_options(table.noise_sigma())));
    let mut record = SweepRecord {
        sigma_noise: sigma,
        temperature,
        run,
        theta: None,
        temp_ratio: None,
        mu_star: None,
        verdict: String::new(),
        q: None,
        wall_ms: 0.0,
    };
    match outcome {
        Ok(result) => {
            let (theta, ratio) = metrics(&result, &prep.z_true, Some(temperature));
            record.theta = theta;
            record.temp_ratio = ratio;
            record.mu_star = result.mu_star;
            record.verdict = result.verdict.to_string();
            record.q = Some(result.diagnostics.q);
        }
        Err(e) => record.verdict = e.kind().to_string(),
    }
    record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    record
}

pub fn records_csv(records: &[SweepRecord]) -> Result<String> {
    to_csv(records)
}

pub fn aggregate_csv(rows: &[AggregateRecord]) -> Result<String> {
    to_csv(rows)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_records_csv(text: &str) -> Result<Vec<SweepRecord>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::Parse { line: i + 2, message: e.to_string() }))
        .collect()
}

/// Files written by [`cmd_sweep`].
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub records_path: PathBuf,
    pub aggregate_path: PathBuf,
}

/// Runs the sweep and writes `sweep.csv` and `aggregate.csv` into `out_dir`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out_dir: &Path, parallel: bool) -> Result<SweepOutput> {
    let records = run_sweep(cfg, parallel)?;
    create_dir(out_dir)?;
    let records_path = out_dir.join("sweep.csv");
    let aggregate_path = out_dir.join("aggregate.csv");
    write_file(&records_path, &records_csv(&records)?)?;
    write_file(&aggregate_path, &aggregate_csv(&aggregate(&records))?)?;
    Ok(SweepOutput { records, records_path, aggregate_path })
}

/// Runs the verification battery on `instances` random states of `n <= 4` qubits.
pub fn cmd_verify(n: usize, seed: u64, instances: usize, trace_scale: f64) -> Result<BatteryReport> {
    if n == 0 || n > GNS_MAX_SITES {
        return Err(Error::Resource(format!("verify supports 1 <= n <= {GNS_MAX_SITES}, got {n}")));
    }
    run_battery_with(&BatteryOptions { n, seed, instances, trace_scale })
}
