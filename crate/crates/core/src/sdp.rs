//! The linear-matrix-inequality program
//!
//! ```text
//! maximize μ  over y ∈ R^q, T >= 0, μ ∈ R
//! subject to  T·L0 + Σ_α y_α H̃_α − μ I ⪰ 0,   Σ_α y_α ω(h̃_α) = −1
//! ```
//!
//! solved by a primal-dual interior-point method (HKM direction, Mehrotra
//! predictor-corrector) on the real symmetric embedding of the Hermitian LMI.
//! The equality constraint is eliminated by parametrizing its affine plane, and
//! `T >= 0` rides along as a 1x1 diagonal block of the same cone.

use nalgebra::{Cholesky, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, collapse_real, embed_real, herm_eigen, hermitian_part, sym_eigen_values, trace_product, CMat, RMat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SdpMode {
    /// The normalized program with `T` free in `[0, ∞)`.
    Normalized,
    /// Normalization dropped and `T` pinned to 1.
    FixedTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    pub mode: SdpMode,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { feas_tol: 1e-8, gap_tol: 1e-8, max_iter: 200, mode: SdpMode::Normalized }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    #[serde(with = "cmat_serde")]
    pub l0: CMat,
    #[serde(with = "cmat_vec_serde")]
    pub h_tilde_mats: Vec<CMat>,
    pub h_tilde_expectations: Vec<f64>,
    pub options: SdpOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalTrouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub y_star: Vec<f64>,
    pub t_star: f64,
    pub mu_star: f64,
    pub status: SdpStatus,
    /// `Z ⪰ 0` paired with the LMI, `tr Z = 1` at optimality.
    #[serde(with = "cmat_serde")]
    pub dual_certificate: CMat,
    /// Multiplier of `T >= 0`.
    pub temperature_multiplier: f64,
    /// Multiplier of the normalization (the dual objective).
    pub normalization_multiplier: f64,
    pub kkt_residuals: KktResiduals,
    pub iterations: usize,
    /// μ returned by the interior-point iterate before the λ_min consistency pass.
    pub mu_interior: f64,
    pub temperature_at_zero: bool,
    pub temperature_unbounded: bool,
}

/// `log 𝚫` together with the optional restriction to its positive eigenspace.
#[derive(Debug, Clone)]
pub struct LogDelta {
    pub l0: CMat,
    /// Columns spanning the kept eigenspace when projection was applied.
    pub basis: Option<CMat>,
    pub eigenvalues: Vec<f64>,
    pub reduced_dim: usize,
}

impl LogDelta {
    /// Restrict an `r x r` matrix to the kept eigenspace (identity when nothing was dropped).
    pub fn compress(&self, m: &CMat) -> CMat {
        match &self.basis {
            Some(q) => hermitian_part(&(q.adjoint() * m * q)),
            None => m.clone(),
        }
    }
}

/// Hermitian logarithm of `𝚫`. Eigenvalues at or below `eig_floor` raise
/// [`Error::DeltaNotPositive`] unless `project` is set, in which case everything is
/// restricted to the orthocomplement of that eigenspace.
pub fn log_psd(delta: &CMat, eig_floor: f64, project: bool) -> Result<LogDelta> {
    let eig = herm_eigen(delta);
    let floor = eig_floor;
    let bad: Vec<f64> = eig.values.iter().copied().filter(|&v| v <= floor).collect();
    if bad.is_empty() {
        let l0 = hermitian_part(&eig.apply(f64::ln));
        let reduced_dim = eig.values.len();
        return Ok(LogDelta { l0, basis: None, eigenvalues: eig.values, reduced_dim });
    }
    if !project {
        return Err(Error::DeltaNotPositive { eigenvalues: bad });
    }
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > floor).collect();
    let r = delta.nrows();
    let q = CMat::from_fn(r, keep.len(), |i, k| eig.vectors[(i, keep[k])]);
    let l0 = CMat::from_diagonal(&DVector::from_iterator(keep.len(), keep.iter().map(|&k| c(eig.values[k].ln()))));
    Ok(LogDelta { l0, basis: Some(q), eigenvalues: eig.values, reduced_dim: keep.len() })
}

impl SdpProblem {
    pub fn new(l0: CMat, h_tilde_mats: Vec<CMat>, h_tilde_expectations: Vec<f64>, options: SdpOptions) -> Result<Self> {
        let p = SdpProblem { l0, h_tilde_mats, h_tilde_expectations, options };
        p.validate()?;
        Ok(p)
    }

    pub fn r(&self) -> usize {
        self.l0.nrows()
    }

    pub fn q(&self) -> usize {
        self.h_tilde_mats.len()
    }

    fn validate(&self) -> Result<()> {
        let r = self.r();
        if self.h_tilde_mats.len() != self.h_tilde_expectations.len() {
            return Err(Error::Contract("one expectation per kernel matrix required".into()));
        }
        if self.h_tilde_mats.is_empty() {
            return Err(Error::Contract("empty kernel".into()));
        }
        for m in std::iter::once(&self.l0).chain(self.h_tilde_mats.iter()) {
            if m.nrows() != r || m.ncols() != r {
                return Err(Error::Contract(format!("all LMI matrices must be {r}x{r}")));
            }
            let skew = (m - m.adjoint()).norm();
            if skew > 1e-10 * (1.0 + m.norm()) {
                return Err(Error::Contract(format!("LMI matrix not Hermitian (residual {skew:e})")));
            }
        }
        Ok(())
    }

    /// `T·L0 + Σ y_α H̃_α`.
    pub fn pencil(&self, y: &[f64], t: f64) -> CMat {
        let mut m = self.l0.scale(t);
        for (yk, h) in y.iter().zip(&self.h_tilde_mats) {
            m += h.scale(*yk);
        }
        hermitian_part(&m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: SdpProblem = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        p.validate()?;
        Ok(p)
    }
}

impl SdpSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
    }
}

/// Affine parametrization `y = y0 + N z` of the plane `e·y = −1`.
struct Plane {
    y0: Vec<f64>,
    null: RMat,
}

fn normalization_plane(e: &[f64]) -> Result<Plane> {
    let q = e.len();
    let norm2: f64 = e.iter().map(|v| v * v).sum();
    if !(norm2.sqrt() > 1e-12) {
        return Err(Error::NormalizationDegenerate);
    }
    let norm = norm2.sqrt();
    let y0 = e.iter().map(|v| -v / norm2).collect();
    // Householder reflector mapping e1 onto ±e/|e|; its other columns span e⊥
    let mut v: Vec<f64> = e.iter().map(|x| x / norm).collect();
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let null = RMat::from_fn(q, q - 1, |i, k| {
        let j = k + 1;
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - 2.0 * v[i] * v[j] / vv
    });
    Ok(Plane { y0, null })
}

/// Dual-form SDP `max b·x  s.t.  S = C − Σ x_k A_k ⪰ 0` with primal `min <C,X>, <A_k,X> = b_k, X ⪰ 0`.
struct ConeProgram {
    c: RMat,
    a: Vec<RMat>,
    b: Vec<f64>,
}

struct IpmOutput {
    x: Vec<f64>,
    big_x: RMat,
    status: SdpStatus,
    iterations: usize,
}

fn max_step(m: &RMat, dm: &RMat) -> f64 {
    let Some(ch) = Cholesky::new(m.clone()) else {
        return 0.0;
    };
    let l = ch.l();
    let linv = match l.clone().try_inverse() {
        Some(v) => v,
        None => return 0.0,
    };
    let w = &linv * dm * linv.transpose();
    let lam = sym_eigen_values(&w)[0];
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn sym(m: &RMat) -> RMat {
    (m + m.transpose()).scale(0.5)
}

impl ConeProgram {
    fn op_a(&self, y: &RMat) -> Vec<f64> {
        self.a.iter().map(|ak| ak.dot(y)).collect()
    }

    fn slack(&self, x: &[f64]) -> RMat {
        let mut s = self.c.clone();
        for (xk, ak) in x.iter().zip(&self.a) {
            s -= ak.scale(*xk);
        }
        s
    }

    fn solve(&self, tol: f64, max_iter: usize) -> IpmOutput {
        let dim = self.c.nrows();
        let m = self.a.len();
        let scale = self
            .a
            .iter()
            .map(|a| a.norm())
            .chain(std::iter::once(self.c.norm()))
            .fold(1.0f64, f64::max);
        let mut big_x = RMat::identity(dim, dim);
        let mut s = RMat::identity(dim, dim).scale(scale.sqrt());
        let mut x = vec![0.0; m];
        let bnorm = self.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cnorm = self.c.norm();
        let mut status = SdpStatus::NumericalTrouble;
        let mut iterations = 0;

        for it in 0..max_iter {
            iterations = it;
            let mu = big_x.dot(&s) / dim as f64;
            let ax = self.op_a(&big_x);
            let rp: Vec<f64> = self.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let rd = self.slack(&x) - &s;
            let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + bnorm);
            let dinf = rd.norm() / (1.0 + cnorm);
            let pobj: f64 = self.b.iter().zip(&x).map(|(b, v)| b * v).sum();
            let dobj = self.c.dot(&big_x);
            let gap = big_x.dot(&s) / (1.0 + pobj.abs() + dobj.abs());
            if pinf < tol && dinf < tol && gap < tol {
                status = SdpStatus::Optimal;
                break;
            }
            if x.iter().any(|v| !v.is_finite()) || pobj.abs() > 1e12 * (1.0 + cnorm) {
                status = SdpStatus::Infeasible;
                break;
            }

            let Some(s_chol) = Cholesky::new(s.clone()) else {
                break;
            };
            let s_inv = s_chol.inverse();
            let xa_sinv: Vec<RMat> = self.a.iter().map(|ak| &big_x * ak * &s_inv).collect();
            let mut schur = RMat::zeros(m, m);
            for k in 0..m {
                for l in k..m {
                    let v = self.a[k].dot(&xa_sinv[l].transpose());
                    schur[(k, l)] = v;
                    schur[(l, k)] = v;
                }
            }
            let schur_fac = match Cholesky::new(schur.clone()) {
                Some(ch) => Factor::Chol(ch),
                None => match schur.clone().lu().try_inverse() {
                    Some(inv) => Factor::Inv(inv),
                    None => break,
                },
            };
            let x_rd_sinv = &big_x * &rd * &s_inv;

            let direction = |rc: &RMat| -> (RMat, Vec<f64>, RMat) {
                let rc_sinv = rc * &s_inv;
                let base = &rc_sinv - &x_rd_sinv;
                let t: Vec<f64> = self.a.iter().map(|ak| ak.dot(&base.transpose())).collect();
                let rhs = DVector::from_iterator(m, rp.iter().zip(&t).map(|(p, t)| p - t));
                let dx = schur_fac.solve(&rhs);
                let mut ds = rd.clone();
                let mut dbig = base.clone();
                for k in 0..m {
                    ds -= self.a[k].scale(dx[k]);
                    dbig += xa_sinv[k].scale(dx[k]);
                }
                (sym(&dbig), dx.iter().copied().collect(), sym(&ds))
            };

            // predictor
            let rc_aff = -(&big_x * &s);
            let (dx_a, _, ds_a) = direction(&rc_aff);
            let ap = max_step(&big_x, &dx_a).min(1.0);
            let ad = max_step(&s, &ds_a).min(1.0);
            let mu_aff = (&big_x + dx_a.scale(ap)).dot(&(&s + ds_a.scale(ad))) / dim as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let rc = RMat::identity(dim, dim).scale(sigma * mu) - &big_x * &s - &dx_a * &ds_a;
            let (dbig, dx, ds) = direction(&rc);
            let ap = (0.95 * max_step(&big_x, &dbig)).min(1.0);
            let ad = (0.95 * max_step(&s, &ds)).min(1.0);
            if ap < 1e-14 && ad < 1e-14 {
                break;
            }
            big_x += dbig.scale(ap);
            s += ds.scale(ad);
            for (xk, d) in x.iter_mut().zip(&dx) {
                *xk += ad * d;
            }
            iterations = it + 1;
        }
        IpmOutput { x, big_x, status, iterations }
    }
}

enum Factor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Inv(RMat),
}

impl Factor {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Chol(ch) => ch.solve(rhs),
            Factor::Inv(inv) => inv * rhs,
        }
    }
}

fn block_diag(top: &RMat, corner: Option<f64>) -> RMat {
    let n = top.nrows();
    let dim = n + usize::from(corner.is_some());
    let mut m = RMat::zeros(dim, dim);
    m.view_mut((0, 0), (n, n)).copy_from(top);
    if let Some(v) = corner {
        m[(n, n)] = v;
    }
    m
}

/// Solves the program; see the module docs.
pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    problem.validate()?;
    match problem.options.mode {
        SdpMode::Normalized => solve_normalized(problem),
        SdpMode::FixedTemperature => solve_fixed_temperature(problem),
    }
}

fn solve_normalized(problem: &SdpProblem) -> Result<SdpSolution> {
    let q = problem.q();
    let r = problem.r();
    let opts = problem.options;
    let plane = normalization_plane(&problem.h_tilde_expectations)?;
    let null = acting_directions(&problem.h_tilde_mats, &plane.null);
    let free = null.ncols();
    let f0 = combine(&problem.h_tilde_mats, plane.y0.iter().copied());
    let mut a = Vec::with_capacity(free + 2);
    for k in 0..free {
        let fk = combine(&problem.h_tilde_mats, null.column(k).iter().copied());
        a.push(-block_diag(&embed_real(&fk), Some(0.0)));
    }
    a.push(-block_diag(&embed_real(&problem.l0), Some(1.0)));
    a.push(block_diag(&RMat::identity(2 * r, 2 * r), Some(0.0)));
    let mut b = vec![0.0; free + 2];
    b[free + 1] = 1.0;
    let program = ConeProgram { c: block_diag(&embed_real(&f0), Some(0.0)), a, b };
    let tol = 0.1 * opts.feas_tol.min(opts.gap_tol);
    let out = program.solve(tol, opts.max_iter);

    let z = &out.x[..free];
    let t_raw = out.x[free];
    let mu_interior = out.x[free + 1];
    let y: Vec<f64> = (0..q)
        .map(|i| plane.y0[i] + (0..free).map(|k| null[(i, k)] * z[k]).sum::<f64>())
        .collect();
    let top = out.big_x.view((0, 0), (2 * r, 2 * r)).into_owned();
    let cert = hermitian_part(&collapse_real(&top));
    let t_mult = out.big_x[(2 * r, 2 * r)];
    finish(problem, y, t_raw.max(0.0), mu_interior, cert, t_mult, out.status, out.iterations)
}

fn solve_fixed_temperature(problem: &SdpProblem) -> Result<SdpSolution> {
    let q = problem.q();
    let r = problem.r();
    let opts = problem.options;
    let basis = acting_directions(&problem.h_tilde_mats, &RMat::identity(q, q));
    let free = basis.ncols();
    let mut a: Vec<RMat> = (0..free)
        .map(|k| -embed_real(&combine(&problem.h_tilde_mats, basis.column(k).iter().copied())))
        .collect();
    a.push(RMat::identity(2 * r, 2 * r));
    let mut b = vec![0.0; free + 1];
    b[free] = 1.0;
    let program = ConeProgram { c: embed_real(&problem.l0), a, b };
    let tol = 0.1 * opts.feas_tol.min(opts.gap_tol);
    let out = program.solve(tol, opts.max_iter);
    let y = (0..q).map(|i| (0..free).map(|k| basis[(i, k)] * out.x[k]).sum()).collect();
    let cert = hermitian_part(&collapse_real(&out.big_x));
    finish(problem, y, 1.0, out.x[free], cert, 0.0, out.status, out.iterations)
}

/// `Σ_α c_α H̃_α`.
fn combine(mats: &[CMat], coef: impl Iterator<Item = f64>) -> CMat {
    let r = mats[0].nrows();
    let mut acc = CMat::zeros(r, r);
    for (k, h) in coef.zip(mats) {
        acc += h.scale(k);
    }
    hermitian_part(&acc)
}

/// Recombines the columns of `basis` so that the resulting directions act on the LMI
/// through linearly independent matrices. Directions along which `Σ_α c_α H̃_α` vanishes
/// leave the program unchanged and would make the Newton system singular, so they are
/// dropped (their coefficients stay at zero).
fn acting_directions(mats: &[CMat], basis: &RMat) -> RMat {
    let k = basis.ncols();
    if k == 0 {
        return basis.clone();
    }
    let f: Vec<CMat> = (0..k).map(|j| combine(mats, basis.column(j).iter().copied())).collect();
    let gram = RMat::from_fn(k, k, |i, j| trace_product(&f[i], &f[j]).re);
    let eig = sym(&gram).symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 1e-20 * top.max(1e-300)).collect();
    if keep.len() == k {
        return basis.clone();
    }
    let u = RMat::from_fn(k, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]);
    basis * u
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &SdpProblem,
    y: Vec<f64>,
    t: f64,
    mu_interior: f64,
    cert: CMat,
    t_mult: f64,
    mut status: SdpStatus,
    iterations: usize,
) -> Result<SdpSolution> {
    // best μ for the returned (y, T) is λ_min of the pencil; it must agree with the iterate
    let mu_star = herm_eigen(&problem.pencil(&y, t)).min();
    let opts = problem.options;
    if status == SdpStatus::Optimal && (mu_star - mu_interior).abs() > 100.0 * opts.feas_tol.max(opts.gap_tol) * (1.0 + mu_star.abs()) {
        status = SdpStatus::NumericalTrouble;
    }
    let nu = dual_objective(problem, &cert);
    let mut sol = SdpSolution {
        y_star: y,
        t_star: t,
        mu_star,
        status,
        dual_certificate: cert,
        temperature_multiplier: t_mult,
        normalization_multiplier: nu,
        kkt_residuals: KktResiduals::default(),
        iterations,
        mu_interior,
        temperature_at_zero: opts.mode == SdpMode::Normalized && t <= 1e-7,
        temperature_unbounded: t > 1e8,
    };
    let report = check_solution(problem, &sol);
    sol.kkt_residuals = KktResiduals { primal: report.primal(), dual: report.dual(), gap: report.gap.abs() };
    if sol.status == SdpStatus::Optimal
        && (sol.kkt_residuals.primal > 10.0 * opts.feas_tol || sol.kkt_residuals.dual > 10.0 * opts.feas_tol)
    {
        sol.status = SdpStatus::NumericalTrouble;
    }
    Ok(sol)
}

fn dual_objective(problem: &SdpProblem, cert: &CMat) -> f64 {
    let g: Vec<f64> = problem.h_tilde_mats.iter().map(|h| trace_product(h, cert).re).collect();
    match problem.options.mode {
        SdpMode::Normalized => {
            let e = &problem.h_tilde_expectations;
            let ee: f64 = e.iter().map(|v| v * v).sum();
            -g.iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / ee
        }
        SdpMode::FixedTemperature => trace_product(&problem.l0, cert).re,
    }
}

/// Residuals recomputed from scratch on the complex Hermitian form.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    /// `max(0, μ* − λ_min(T·L0 + Σ y H̃))`.
    pub lmi_violation: f64,
    /// `|Σ y ω(h̃) + 1|` (zero in fixed-temperature mode).
    pub normalization_residual: f64,
    /// `max(0, −T)`.
    pub temperature_violation: f64,
    /// `max(0, −λ_min(Z))`.
    pub dual_psd_violation: f64,
    /// `|tr Z − 1|`.
    pub dual_trace_residual: f64,
    /// Component of `(tr(Z H̃_α))_α` off the normalization direction.
    pub dual_stationarity: f64,
    /// `|tr(Z L0) + multiplier_T|` and negativity of that multiplier.
    pub dual_temperature_residual: f64,
    /// `tr(Z (T L0 + Σ y H̃ − μ I)) + T·multiplier_T`.
    pub complementarity: f64,
    /// dual objective minus μ*.
    pub gap: f64,
}

impl ResidualReport {
    pub fn primal(&self) -> f64 {
        self.lmi_violation.max(self.normalization_residual).max(self.temperature_violation)
    }

    pub fn dual(&self) -> f64 {
        self.dual_psd_violation
            .max(self.dual_trace_residual)
            .max(self.dual_stationarity)
            .max(self.dual_temperature_residual)
    }

    pub fn max(&self) -> f64 {
        self.primal().max(self.dual()).max(self.complementarity.abs()).max(self.gap.abs())
    }
}

pub fn check_solution(problem: &SdpProblem, sol: &SdpSolution) -> ResidualReport {
    let r = problem.r();
    let y = &sol.y_star;
    let pencil = problem.pencil(y, sol.t_star);
    let lmin = herm_eigen(&pencil).min();
    let z = &sol.dual_certificate;
    let zmin = herm_eigen(z).min();
    let g: Vec<f64> = problem.h_tilde_mats.iter().map(|h| trace_product(h, z).re).collect();
    let tz_l0 = trace_product(&problem.l0, z).re;
    let shifted = &pencil - CMat::identity(r, r).scale(sol.mu_star);
    let compl = trace_product(&shifted, z).re;
    let (norm_res, stationarity, temp_res, dual_obj, compl) = match problem.options.mode {
        SdpMode::Normalized => {
            let e = &problem.h_tilde_expectations;
            let ee: f64 = e.iter().map(|v| v * v).sum();
            let ge: f64 = g.iter().zip(e).map(|(a, b)| a * b).sum();
            let off: f64 = g.iter().zip(e).map(|(gi, ei)| (gi - ge / ee * ei).powi(2)).sum::<f64>().sqrt();
            let ye: f64 = y.iter().zip(e).map(|(a, b)| a * b).sum();
            let temp = (tz_l0 + sol.temperature_multiplier).abs().max((-sol.temperature_multiplier).max(0.0));
            ((ye + 1.0).abs(), off, temp, -ge / ee, compl + sol.t_star * sol.temperature_multiplier)
        }
        SdpMode::FixedTemperature => {
            let off = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            (0.0, off, 0.0, tz_l0, compl)
        }
    };
    ResidualReport {
        lmi_violation: (sol.mu_star - lmin).max(0.0),
        normalization_residual: norm_res,
        temperature_violation: (-sol.t_star).max(0.0),
        dual_psd_violation: (-zmin).max(0.0),
        dual_trace_residual: (z.trace().re - 1.0).abs(),
        dual_stationarity: stationarity,
        dual_temperature_residual: temp_res,
        complementarity: compl,
        gap: dual_obj - sol.mu_star,
    }
}

mod cmat_serde {
    use super::CMat;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    /// Row-major real and imaginary parts.
    #[derive(Serialize, Deserialize)]
    pub struct Repr {
        rows: usize,
        cols: usize,
        re: Vec<f64>,
        im: Vec<f64>,
    }

    pub fn to_repr(m: &CMat) -> Repr {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Repr { rows: m.nrows(), cols: m.ncols(), re, im }
    }

    pub fn from_repr(r: Repr) -> Result<CMat, String> {
        if r.re.len() != r.rows * r.cols || r.im.len() != r.rows * r.cols {
            return Err("matrix entry count does not match its shape".into());
        }
        Ok(CMat::from_fn(r.rows, r.cols, |i, j| Complex64::new(r.re[i * r.cols + j], r.im[i * r.cols + j])))
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        to_repr(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        from_repr(Repr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

mod cmat_vec_serde {
    use super::cmat_serde::{from_repr, to_repr, Repr};
    use super::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(to_repr).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| from_repr(r).map_err(serde::de::Error::custom))
            .collect()
    }
}
