//! End-to-end reconstruction: moments, quasi-symmetry kernel, semidefinite program,
//! and the evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, CMat};
use crate::moments::{kernel_from_spectrum, pull_back, MomentOptions, MomentSet, RawMoments};
use crate::pauli::{PauliOperator, PauliString};
use crate::precise::{precise_log_delta, precise_w, GRAM_CONDITION_LIMIT};
use crate::sdp::{log_psd, solve, SdpOptions, SdpProblem, SdpStatus};
use crate::state::ExpectationTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    pub moments: MomentOptions,
    /// Absolute floor at or below which `𝚫` eigenvalues count as nonpositive.
    pub delta_floor: f64,
    /// Restrict to the positive part of `𝚫` (and of the Gram form) instead of failing.
    pub project_delta: bool,
    /// Threshold for the not-Gibbs verdict; `None` means `1e-6 · ‖log 𝚫‖`.
    pub certificate_tol: Option<f64>,
    pub sdp: SdpOptions,
    pub precision: Precision,
}

/// Arithmetic used to form `log 𝚫` and the kernel matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    /// Double-double when the Gram form is badly conditioned, double otherwise.
    Auto,
    Double,
    Extended,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            moments: MomentOptions::default(),
            delta_floor: 1e-14,
            project_delta: false,
            certificate_tol: None,
            sdp: SdpOptions::default(),
            precision: Precision::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The kernel of `W` is empty: no operator in the span leaves the state stationary.
    NotStationary,
    /// `μ* < 0`: the state is not a Gibbs state of any Hamiltonian in the span.
    NotGibbs,
    /// `μ* >= 0`: `(y*, T*)` is a candidate Hamiltonian and temperature.
    Candidate,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::NotStationary => "not a stationary state of any operator in the span of the Hamiltonian terms",
            Verdict::NotGibbs => "not a Gibbs state of any Hamiltonian in the span of the Hamiltonian terms",
            Verdict::Candidate => "candidate Gibbs state; the returned Hamiltonian and temperature satisfy the stability constraint",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::NotStationary => "NotStationary",
            Verdict::NotGibbs => "NotGibbs",
            Verdict::Candidate => "Candidate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub r: usize,
    pub s: usize,
    pub q: usize,
    pub term_count: usize,
    pub epsilon_w: f64,
    pub w_min: f64,
    pub w_max: f64,
    /// Largest `W` eigenvalue kept in the kernel and smallest one rejected.
    pub w_kernel_edge: Option<f64>,
    pub w_gap_edge: Option<f64>,
    pub gram_min: f64,
    pub gram_max: f64,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub reduced_dim: Option<usize>,
    pub extended_precision: bool,
    pub certificate_tol: Option<f64>,
    pub sdp_status: Option<String>,
    pub sdp_iterations: Option<usize>,
    pub kkt_primal: Option<f64>,
    pub kkt_dual: Option<f64>,
    pub kkt_gap: Option<f64>,
    pub temperature_at_zero: bool,
    pub temperature_unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub verdict: Verdict,
    /// Coefficients in the original Hamiltonian-term basis (empty when not stationary).
    pub y_star: Vec<f64>,
    pub t_star: Option<f64>,
    pub mu_star: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl ReconstructionResult {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("result serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::Parse { line, message: e.message().to_string() }
        })
    }

    /// Short human-readable report.
    pub fn summary(&self) -> String {
        let mut out = format!("verdict: {} ({})\n", self.verdict, self.verdict.describe());
        let d = &self.diagnostics;
        out.push_str(&format!("kernel dimension q = {} of s = {} (epsilon_W = {:e})\n", d.q, d.s, d.epsilon_w));
        if let Some(mu) = self.mu_star {
            out.push_str(&format!("mu* = {mu:e}\n"));
        }
        if let Some(t) = self.t_star {
            out.push_str(&format!("T* = {t:e}\n"));
        }
        out
    }
}

/// Runs the full pipeline on a table of expectation values.
pub fn reconstruct(
    table: &ExpectationTable,
    b: &[PauliString],
    h_terms: &[PauliOperator],
    opts: &ReconstructOptions,
) -> Result<ReconstructionResult> {
    if b.is_empty() || h_terms.is_empty() {
        return Err(Error::Contract("need at least one perturbing operator and one Hamiltonian term".into()));
    }
    if let Some(bad) = h_terms.iter().find(|h| !h.is_selfadjoint()) {
        return Err(Error::Contract(format!("Hamiltonian term `{bad}` is not selfadjoint")));
    }
    let raw = RawMoments::assemble(table, b, h_terms)?;
    reconstruct_from_raw(&raw, opts)
}

/// Pipeline from already assembled raw moments (any basis of perturbing operators).
pub fn reconstruct_from_raw(raw: &RawMoments, opts: &ReconstructOptions) -> Result<ReconstructionResult> {
    let mut mopts = opts.moments;
    mopts.project_degenerate |= opts.project_delta;
    let mut ms = MomentSet::compute(raw, &mopts)?;
    let gram_min = ms.ortho.gram_eigenvalues.last().copied().unwrap_or(0.0);
    let gram_max = ms.ortho.gram_eigenvalues.first().copied().unwrap_or(0.0);
    let full_rank = ms.ortho.coeffs.ncols() == raw.r();
    let extended = full_rank
        && match opts.precision {
            Precision::Auto => gram_max > GRAM_CONDITION_LIMIT * gram_min,
            Precision::Double => false,
            Precision::Extended => true,
        };
    if extended {
        let (w, values, vectors) = precise_w(raw)?;
        let sym: Vec<CMat> = ms.h_mats.iter().map(|h| h.symmetrized.clone()).collect();
        ms.kernel = kernel_from_spectrum(&values, &vectors, ms.epsilon_w, &sym, &raw.h_expectations);
        ms.w = w;
        ms.w_spectrum = values;
    }
    let mut diag = Diagnostics {
        r: raw.r(),
        s: raw.s(),
        q: ms.q(),
        term_count: raw.term_count,
        epsilon_w: ms.epsilon_w,
        w_min: ms.w_spectrum.first().copied().unwrap_or(0.0),
        w_max: ms.w_spectrum.last().copied().unwrap_or(0.0),
        w_kernel_edge: ms.w_spectrum.iter().copied().filter(|&v| v < ms.epsilon_w).last(),
        w_gap_edge: ms.w_spectrum.iter().copied().find(|&v| v >= ms.epsilon_w),
        gram_min,
        gram_max,
        extended_precision: extended,
        ..Diagnostics::default()
    };
    if ms.q() == 0 {
        return Ok(ReconstructionResult { verdict: Verdict::NotStationary, y_star: vec![], t_star: None, mu_star: None, diagnostics: diag });
    }
    let (log_delta, h_tilde) = if extended {
        precise_log_delta(raw, &ms.kernel.coeffs, opts.delta_floor, opts.project_delta)?
    } else {
        let log_delta = log_psd(&ms.delta, opts.delta_floor, opts.project_delta)?;
        let h_tilde = ms.kernel.h_tilde_mats.iter().map(|m| log_delta.compress(m)).collect();
        (log_delta, h_tilde)
    };
    diag.delta_min = log_delta.eigenvalues.first().copied();
    diag.delta_max = log_delta.eigenvalues.last().copied();
    diag.reduced_dim = Some(log_delta.reduced_dim);
    let l0_norm = herm_eigen(&log_delta.l0).values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let problem = SdpProblem::new(log_delta.l0, h_tilde, ms.kernel.h_tilde_expectations.clone(), opts.sdp)?;
    let sol = solve(&problem)?;
    diag.sdp_status = Some(format!("{:?}", sol.status));
    diag.sdp_iterations = Some(sol.iterations);
    diag.kkt_primal = Some(sol.kkt_residuals.primal);
    diag.kkt_dual = Some(sol.kkt_residuals.dual);
    diag.kkt_gap = Some(sol.kkt_residuals.gap);
    diag.temperature_at_zero = sol.temperature_at_zero;
    diag.temperature_unbounded = sol.temperature_unbounded;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("{:?}", sol.status)));
    }
    let cert_tol = opts.certificate_tol.unwrap_or(1e-6 * l0_norm);
    diag.certificate_tol = Some(cert_tol);
    let verdict = if sol.mu_star < -cert_tol { Verdict::NotGibbs } else { Verdict::Candidate };
    Ok(ReconstructionResult {
        verdict,
        y_star: pull_back(&ms.kernel, &sol.y_star),
        t_star: Some(sol.t_star),
        mu_star: Some(sol.mu_star),
        diagnostics: diag,
    })
}

/// Scale- and sign-insensitive angle between two coefficient vectors.
pub fn recovery_angle(y: &[f64], z: &[f64]) -> Result<f64> {
    if y.len() != z.len() {
        return Err(Error::Contract(format!("vectors of length {} and {}", y.len(), z.len())));
    }
    let ny = norm(y);
    let nz = norm(z);
    if ny == 0.0 || nz == 0.0 {
        return Err(Error::Contract("recovery angle of a zero vector".into()));
    }
    // arccos(|<y,z>|/(|y||z|)) evaluated as the half-angle form, which keeps full
    // precision for nearly parallel vectors
    let s = if dot(y, z) < 0.0 { -1.0 } else { 1.0 };
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in y.iter().zip(z) {
        let (u, v) = (a / ny, s * b / nz);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).clamp(0.0, std::f64::consts::FRAC_PI_2))
}

/// `(ratio, c)` with `c = <y*, z>/<z, z>` and `ratio = (T*/c)/T_true`.
pub fn temperature_ratio(y_star: &[f64], t_star: f64, z_true: &[f64], t_true: f64) -> Result<(f64, f64)> {
    if y_star.len() != z_true.len() {
        return Err(Error::Contract(format!("vectors of length {} and {}", y_star.len(), z_true.len())));
    }
    let zz = dot(z_true, z_true);
    if zz == 0.0 || norm(y_star) == 0.0 {
        return Err(Error::Contract("temperature ratio of a zero vector".into()));
    }
    let c = dot(y_star, z_true) / zz;
    if c.abs() <= 1e-12 * norm(y_star) / zz.sqrt() {
        return Err(Error::Contract("scale factor vanishes: recovered direction is orthogonal to the truth".into()));
    }
    Ok((t_star / c / t_true, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub theta: f64,
    pub temperature_ratio: f64,
    pub scale_factor: f64,
}

pub fn recovery_report(y_star: &[f64], t_star: f64, z_true: &[f64], t_true: f64) -> Result<RecoveryReport> {
    let theta = recovery_angle(y_star, z_true)?;
    let (temperature_ratio, scale_factor) = temperature_ratio(y_star, t_star, z_true, t_true)?;
    Ok(RecoveryReport { theta, temperature_ratio, scale_factor })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{all_strings, enumerate_geometric_k_local};
    use crate::state::{build_table, gibbs_density, required_strings, DensityMatrix};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn table_for(rho: &DensityMatrix, b: &[PauliString], h: &[PauliOperator]) -> ExpectationTable {
        build_table(rho, &required_strings(b, h).unwrap()).unwrap()
    }

    fn single_qubit_terms() -> Vec<PauliOperator> {
        all_strings(1, false).unwrap().into_iter().map(PauliOperator::from).collect()
    }

    #[test]
    fn angle_examples() {
        assert_eq!(recovery_angle(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(recovery_angle(&[1.0, 2.0], &[-1.0, -2.0]).unwrap(), 0.0);
        assert!((recovery_angle(&[1.0, 0.0], &[0.0, 3.0]).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(recovery_angle(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(recovery_angle(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn ratio_examples() {
        let z = [0.3, -1.2, 0.5];
        let (ratio, c) = temperature_ratio(&z, 2.5, &z, 2.5).unwrap();
        assert!((ratio - 1.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
        let y: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
        let (ratio, c) = temperature_ratio(&y, 5.0, &z, 2.5).unwrap();
        assert!((ratio - 1.0).abs() < 1e-15 && (c - 2.0).abs() < 1e-15);
        assert!(temperature_ratio(&[0.0, 1.0], 1.0, &[1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn single_qubit_full_algebra() {
        let terms = single_qubit_terms();
        let b = all_strings(1, false).unwrap();
        let h = PauliOperator::from_real_terms(1, [(PauliString::parse("Z0", 1).unwrap(), -1.0)]).unwrap();
        let rho = gibbs_density(&h, 1.0).unwrap();
        let res = reconstruct(&table_for(&rho, &b, &terms), &b, &terms, &ReconstructOptions::default()).unwrap();
        assert_eq!(res.verdict, Verdict::Candidate);
        let z_true = h.real_coefficients(&b);
        let rep = recovery_report(&res.y_star, res.t_star.unwrap(), &z_true, 1.0).unwrap();
        assert!(rep.theta <= 1e-6, "{rep:?}");
        assert!((rep.temperature_ratio - 1.0).abs() <= 1e-4, "{rep:?}");
        assert!(res.mu_star.unwrap().abs() < 1e-7);
    }

    #[test]
    fn maximally_mixed_has_no_normalization() {
        let n = 2;
        let b = enumerate_geometric_k_local(n, 2, false).unwrap();
        let terms: Vec<PauliOperator> = b.iter().cloned().map(PauliOperator::from).collect();
        let rho = DensityMatrix::maximally_mixed(n).unwrap();
        let err = reconstruct(&table_for(&rho, &b, &terms), &b, &terms, &ReconstructOptions::default()).unwrap_err();
        assert_eq!(err, Error::NormalizationDegenerate);
    }

    #[test]
    fn no_quasi_symmetry_is_not_stationary() {
        let b = all_strings(1, false).unwrap();
        let h = PauliOperator::from_real_terms(1, [(PauliString::parse("Z0", 1).unwrap(), 1.0)]).unwrap();
        let rho = gibbs_density(&h, 1.0).unwrap();
        let terms = vec![PauliOperator::from(PauliString::parse("X0", 1).unwrap())];
        let res = reconstruct(&table_for(&rho, &b, &terms), &b, &terms, &ReconstructOptions::default()).unwrap();
        assert_eq!(res.verdict, Verdict::NotStationary);
        assert_eq!(res.diagnostics.q, 0);
        assert!(res.y_star.is_empty());
    }

    #[test]
    fn gauge_and_basis_invariance() {
        let n = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = enumerate_geometric_k_local(n, 2, false).unwrap();
        let terms: Vec<PauliOperator> = b.iter().cloned().map(PauliOperator::from).collect();
        let h = crate::models::random_k_local(n, 2, &mut rng).unwrap();
        let z_true = h.real_coefficients(&b);
        let opts = ReconstructOptions::default();
        let rho = gibbs_density(&h, 1.3).unwrap();
        let table = table_for(&rho, &b, &terms);
        let base = reconstruct(&table, &b, &terms, &opts).unwrap();
        let theta = recovery_angle(&base.y_star, &z_true).unwrap();

        let scaled = gibbs_density(&h.scale(Complex64::new(3.0, 0.0)), 3.9).unwrap();
        let res = reconstruct(&table_for(&scaled, &b, &terms), &b, &terms, &opts).unwrap();
        assert_eq!(res.verdict, base.verdict);
        assert!((recovery_angle(&res.y_star, &z_true).unwrap() - theta).abs() < 1e-6);

        let raw = RawMoments::assemble(&table, &b, &terms).unwrap();
        let r = raw.r();
        let mix = CMat::from_fn(r, r, |i, j| {
            let d = if i == j { 2.0 } else { 0.0 };
            Complex64::new(d + rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))
        });
        let mixed = reconstruct_from_raw(&raw.recombine(&mix), &opts).unwrap();
        assert_eq!(mixed.verdict, base.verdict);
        for (a, b) in mixed.y_star.iter().zip(&base.y_star) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!((mixed.t_star.unwrap() - base.t_star.unwrap()).abs() < 1e-6);
        assert!((mixed.mu_star.unwrap() - base.mu_star.unwrap()).abs() < 1e-6);
    }

    #[test]
    fn rank_deficient_state() {
        // |00><00| regularized by 1e-12·I: the moment data is nearly singular
        let n = 2;
        let mut m = CMat::identity(4, 4).scale(1e-12);
        m[(0, 0)] += Complex64::new(1.0 - 4e-12, 0.0);
        let rho = DensityMatrix::new(n, m).unwrap();
        let b = enumerate_geometric_k_local(n, 2, false).unwrap();
        let terms: Vec<PauliOperator> = b.iter().cloned().map(PauliOperator::from).collect();
        match reconstruct(&table_for(&rho, &b, &terms), &b, &terms, &ReconstructOptions::default()) {
            Err(Error::GramDegenerate { .. }) => {}
            Ok(res) => assert_eq!(res.verdict, Verdict::NotGibbs),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn result_round_trip() {
        let terms = single_qubit_terms();
        let b = all_strings(1, false).unwrap();
        let h = PauliOperator::from_real_terms(1, [(PauliString::parse("Z0", 1).unwrap(), -1.0)]).unwrap();
        let rho = gibbs_density(&h, 1.0).unwrap();
        let res = reconstruct(&table_for(&rho, &b, &terms), &b, &terms, &ReconstructOptions::default()).unwrap();
        let text = res.to_toml();
        assert!(text.contains("verdict = \"Candidate\""));
        assert_eq!(ReconstructionResult::from_toml(&text).unwrap(), res);
        assert!(res.summary().contains("Candidate"));
    }
}
