//! Brute-force oracles on the full GNS space of a faithful state: explicit left and right
//! representations, the modular operator and conjugation, Lindblad generators with their
//! free-energy rates, and direct checks of the stability characterizations. Everything is
//! dense and favours obviousness over speed, so it is limited to a handful of qubits.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{anti_hermitian_norm, c, herm_eigen, herm_fn, hermitian_part, CMat};
use crate::models::random_k_local;
use crate::moments::{build_delta, commutator_matrix_raw, delta_matrix_raw, gram_matrix, orthonormalize};
use crate::pauli::{all_strings, PauliOperator, PauliString};
use crate::state::{build_table, gibbs_density, mix_seed, DensityMatrix};

pub type CVec = DVector<Complex64>;

/// Largest site count for static GNS checks (`4^n`-dimensional space).
pub const GNS_MAX_SITES: usize = 4;
/// Largest site count for checks that exponentiate the `16^n` Lindblad superoperator.
pub const DYNAMICS_MAX_SITES: usize = 3;
/// Smallest eigenvalue a state may have and still count as faithful.
pub const FAITHFUL_FLOOR: f64 = 1e-12;
/// Residual tolerance of the static identities (relative to the natural scale of each check).
pub const STATIC_TOL: f64 = 1e-9;
/// Relative tolerance of the finite-difference comparisons.
pub const FINITE_DIFFERENCE_TOL: f64 = 1e-5;
/// Central-difference step in `t`.
pub const FINITE_DIFFERENCE_STEP: f64 = 1e-5;

fn vec_col(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

fn unvec(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

fn dense_all(ops: &[PauliOperator]) -> Result<Vec<CMat>> {
    ops.iter().map(PauliOperator::dense_matrix).collect()
}

fn spectral_norm(m: &CMat) -> f64 {
    m.clone().singular_values().max()
}

/// The GNS space of a faithful state on `n` qubits, realized as `C^{4^n}` through
/// `|a> = vec(a ρ^{1/2})` (column-major), so that `<a|b> = ω(a* b)` is the standard inner
/// product.
#[derive(Debug, Clone)]
pub struct GnsSpace {
    pub n: usize,
    /// `4^n`.
    pub dim: usize,
    /// Every Pauli string in canonical order, identity first.
    pub strings: Vec<PauliString>,
    pub rho: CMat,
    pub sqrt_rho: CMat,
    pub inv_sqrt_rho: CMat,
    pub log_rho: CMat,
    /// Column `k` is `|P_k>` for the `k`-th string.
    pub frame: CMat,
    /// `ω(P_k* P_l)`: Gram matrix of the full operator basis.
    pub inner_product: CMat,
    /// Modular operator, built from the form `(a, b) ↦ ω(b a*)` alone.
    pub delta: CMat,
    pub log_delta: CMat,
    /// Linear part of the modular conjugation: `J v = j_linear · conj(v)`.
    pub j_linear: CMat,
}

/// Explicit GNS construction for a faithful state with `n <= 4`.
pub fn build_gns(rho: &DensityMatrix) -> Result<GnsSpace> {
    let n = rho.n();
    if n > GNS_MAX_SITES {
        return Err(Error::Resource(format!("GNS oracle supports n <= {GNS_MAX_SITES}, got {n}")));
    }
    rho.validate(1e-10)?;
    let eig = rho.eigen();
    if eig.min() <= FAITHFUL_FLOOR {
        return Err(Error::NotFaithful(eig.min()));
    }
    let d = rho.dim();
    let dim = d * d;
    let rho_m = hermitian_part(rho.matrix());
    let sqrt_rho = eig.apply(f64::sqrt);
    let inv_sqrt_rho = eig.apply(|x| 1.0 / x.sqrt());
    let log_rho = eig.apply(f64::ln);
    let strings = all_strings(n, true)?;
    let dense: Vec<CMat> = strings.iter().map(PauliString::dense_matrix).collect::<Result<_>>()?;

    let mut frame = CMat::zeros(dim, dim);
    for (k, p) in dense.iter().enumerate() {
        frame.set_column(k, &vec_col(&(p * &sqrt_rho)));
    }
    let inner_product = hermitian_part(&(frame.adjoint() * &frame));

    // <P_k|Δ|P_l> = ω(P_l P_k*) = tr(ρ P_l P_k)
    let rho_paulis: Vec<CMat> = dense.iter().map(|p| &rho_m * p).collect();
    let form = CMat::from_fn(dim, dim, |k, l| crate::linalg::trace_product(&rho_paulis[l], &dense[k]));
    let frame_inv = frame
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Contract("GNS frame is singular".into()))?;
    let delta = hermitian_part(&(frame_inv.adjoint() * form * &frame_inv));
    let log_delta = herm_fn(&delta, f64::ln);

    let mut j_linear = CMat::zeros(dim, dim);
    for i in 0..d {
        for j in 0..d {
            j_linear[(i + j * d, j + i * d)] = c(1.0);
        }
    }

    Ok(GnsSpace {
        n,
        dim,
        strings,
        rho: rho_m,
        sqrt_rho,
        inv_sqrt_rho,
        log_rho,
        frame,
        inner_product,
        delta,
        log_delta,
        j_linear,
    })
}

impl GnsSpace {
    fn d(&self) -> usize {
        self.rho.nrows()
    }

    /// `ω(x) = tr(ρ x)`.
    pub fn omega(&self, x: &CMat) -> Complex64 {
        crate::linalg::trace_product(&self.rho, x)
    }

    /// `|a>`.
    pub fn vector(&self, a: &CMat) -> CVec {
        vec_col(&(a * &self.sqrt_rho))
    }

    /// The operator `a` with `|a> = v`.
    pub fn operator(&self, v: &CVec) -> CMat {
        unvec(v, self.d()) * &self.inv_sqrt_rho
    }

    /// `π_ℓ(x) : |a> ↦ |x a>`.
    pub fn left_dense(&self, x: &CMat) -> CMat {
        CMat::identity(self.d(), self.d()).kronecker(x)
    }

    /// `π_r(x) : |a> ↦ |a x*>`.
    pub fn right_dense(&self, x: &CMat) -> CMat {
        let inner = &self.inv_sqrt_rho * x.adjoint() * &self.sqrt_rho;
        inner.transpose().kronecker(&CMat::identity(self.d(), self.d()))
    }

    pub fn left_rep(&self, x: &PauliOperator) -> Result<CMat> {
        Ok(self.left_dense(&x.dense_matrix()?))
    }

    pub fn right_rep(&self, x: &PauliOperator) -> Result<CMat> {
        Ok(self.right_dense(&x.dense_matrix()?))
    }

    /// GNS Hamiltonian `π_ℓ(h) − π_r(h)`, i.e. `|a> ↦ |[h, a]>`.
    pub fn hamiltonian_dense(&self, h: &CMat) -> CMat {
        self.left_dense(h) - self.right_dense(h)
    }

    pub fn hamiltonian(&self, h: &PauliOperator) -> Result<CMat> {
        Ok(self.hamiltonian_dense(&h.dense_matrix()?))
    }

    /// Modular conjugation `J|a> = |ρ^{1/2} a* ρ^{-1/2}>`, antilinear.
    pub fn apply_j(&self, v: &CVec) -> CVec {
        &self.j_linear * v.conjugate()
    }

    /// Columns are the vectors `|b_k>`.
    pub fn frame_of(&self, b: &[CMat]) -> CMat {
        let mut f = CMat::zeros(self.dim, b.len());
        for (k, bk) in b.iter().enumerate() {
            f.set_column(k, &self.vector(bk));
        }
        f
    }

    /// Orthonormal basis (as columns) of `span{|b_k>}`; `Q†` is the projection `P` onto it.
    pub fn orthonormal_span(&self, b: &[CMat]) -> Result<CMat> {
        let f = self.frame_of(b);
        let eig = herm_eigen(&(f.adjoint() * &f));
        let floor = 1e-12 * eig.max().max(0.0);
        let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > floor).collect();
        if keep.is_empty() {
            return Err(Error::Contract("perturbing operators span the zero vector".into()));
        }
        let u = CMat::from_fn(b.len(), keep.len(), |i, k| eig.vectors[(i, keep[k])] / eig.values[keep[k]].sqrt());
        Ok(f * u)
    }
}

/// Coefficients of a Lindbladian: perturbing operators `b_i`, anti-Hermitian `M` and
/// positive semidefinite `Λ`.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    b_ops: Vec<PauliOperator>,
    m: CMat,
    lambda: CMat,
}

impl LindbladSpec {
    pub fn new(b_ops: Vec<PauliOperator>, m: CMat, lambda: CMat) -> Result<Self> {
        let r = b_ops.len();
        if r == 0 || m.shape() != (r, r) || lambda.shape() != (r, r) {
            return Err(Error::Contract(format!(
                "{r} operators need {r}x{r} coefficient matrices, got M {:?} and Λ {:?}",
                m.shape(),
                lambda.shape()
            )));
        }
        let n = b_ops[0].n();
        if let Some(b) = b_ops.iter().find(|b| b.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: b.n() });
        }
        let scale = 1.0 + m.norm() + lambda.norm();
        if (&m + m.adjoint()).norm() > 1e-12 * scale {
            return Err(Error::Contract("M must be anti-Hermitian".into()));
        }
        if anti_hermitian_norm(&lambda) > 1e-12 * scale {
            return Err(Error::Contract("Λ must be Hermitian".into()));
        }
        let min = herm_eigen(&lambda).min();
        if min < -1e-12 * scale {
            return Err(Error::Contract(format!("Λ must be positive semidefinite (eigenvalue {min:e})")));
        }
        Ok(LindbladSpec { b_ops, m, lambda })
    }

    /// Random coefficients: `M = A − A†` and `Λ = B B†` with entries uniform in the unit square.
    pub fn random(b_ops: Vec<PauliOperator>, rng: &mut impl Rng) -> Result<Self> {
        let r = b_ops.len();
        let mut draw = || CMat::from_fn(r, r, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a = draw();
        let b = draw();
        let m = (&a - a.adjoint()).scale(0.5);
        let lambda = hermitian_part(&(&b * b.adjoint())).scale(1.0 / r as f64);
        Self::new(b_ops, m, lambda)
    }

    pub fn n(&self) -> usize {
        self.b_ops[0].n()
    }

    pub fn b_ops(&self) -> &[PauliOperator] {
        &self.b_ops
    }

    pub fn m(&self) -> &CMat {
        &self.m
    }

    pub fn lambda(&self) -> &CMat {
        &self.lambda
    }

    /// Same operators and `M`, with `Λ` replaced.
    pub fn with_lambda(&self, lambda: CMat) -> Result<Self> {
        Self::new(self.b_ops.clone(), self.m.clone(), lambda)
    }

    /// Same operators and `Λ`, with `M` replaced.
    pub fn with_m(&self, m: CMat) -> Result<Self> {
        Self::new(self.b_ops.clone(), m, self.lambda.clone())
    }
}

/// `L(a) = Σ_ij −½ M_ij [b_i* b_j, a] + Λ_ij (b_i* a b_j − ½ (b_i* b_j a + a b_i* b_j))`.
pub fn lindblad_apply_dense(spec: &LindbladSpec, b: &[CMat], a: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), a.ncols());
    for (i, bi) in b.iter().enumerate() {
        let bi_adj = bi.adjoint();
        for (j, bj) in b.iter().enumerate() {
            let (mij, lij) = (spec.m[(i, j)], spec.lambda[(i, j)]);
            if mij == Complex64::new(0.0, 0.0) && lij == Complex64::new(0.0, 0.0) {
                continue;
            }
            let bb = &bi_adj * bj;
            let comm = &bb * a - a * &bb;
            let anti = &bb * a + a * &bb;
            out += comm.scale(-0.5) * mij + (&bi_adj * a * bj - anti.scale(0.5)) * lij;
        }
    }
    out
}

/// `L(a)` on Pauli operators, evaluated through dense matrices.
pub fn lindblad_apply(spec: &LindbladSpec, a: &PauliOperator) -> Result<PauliOperator> {
    if a.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), found: a.n() });
    }
    let b = dense_all(&spec.b_ops)?;
    let out = lindblad_apply_dense(spec, &b, &a.dense_matrix()?);
    PauliOperator::from_dense(a.n(), &out, 1e-14)
}

/// Matrix of `L` acting on column-major `vec(a)` (`4^n x 4^n`).
pub fn lindblad_superoperator(spec: &LindbladSpec) -> Result<CMat> {
    let b = dense_all(&spec.b_ops)?;
    let d = 1usize << spec.n();
    let mut sup = CMat::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = c(1.0);
            sup.set_column(i + j * d, &vec_col(&lindblad_apply_dense(spec, &b, &e)));
        }
    }
    Ok(sup)
}

/// Density matrix of `ω ∘ e^{tL}`, given `exp(tL)` as a superoperator matrix.
pub fn evolve_density(rho: &CMat, propagator: &CMat) -> CMat {
    // tr(ρ_t a) = tr(ρ E(a))  ⇔  vec(ρ_t^T) = E^T vec(ρ^T)
    let d = rho.nrows();
    let v = propagator.transpose() * vec_col(&rho.transpose());
    hermitian_part(&unvec(&v, d).transpose())
}

fn entropy_of(rho: &CMat) -> f64 {
    herm_eigen(rho).values.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// `Σ_ij w_ij <b_i|X|b_j>`.
fn weighted_elements(weights: &CMat, frame: &CMat, x: &CMat) -> Complex64 {
    let elems = frame.adjoint() * x * frame;
    weights.iter().zip(elems.iter()).map(|(w, e)| w * e).sum()
}

/// Rates of change at `t = 0` along `ω ∘ e^{tL}`, from GNS matrix elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyRate {
    /// `d/dt ω_t(h) = ½ Σ M_ij <b_i|H − H†|b_j> + Λ_ij <b_i|H + H†|b_j>`.
    pub energy: f64,
    /// `d/dt S(ω_t) = −Σ Λ_ij <b_i|log Δ|b_j>`.
    pub entropy: f64,
    /// `d/dt F(ω_t) = energy − T · entropy`.
    pub free_energy: f64,
}

/// Free-energy rate of `F(ω) = −T S(ω) + ω(h)` under the Lindbladian `spec`.
///
/// The `M` part of the energy rate is kept: it vanishes only when `h` is a quasi-symmetry
/// in the span of the `b_i`, and the finite-difference oracle sees it otherwise.
pub fn free_energy_derivative(gns: &GnsSpace, h: &PauliOperator, temperature: f64, spec: &LindbladSpec) -> Result<FreeEnergyRate> {
    for found in [spec.n(), h.n()] {
        if found != gns.n {
            return Err(Error::DimensionMismatch { expected: gns.n, found });
        }
    }
    let frame = gns.frame_of(&dense_all(&spec.b_ops)?);
    let big_h = gns.hamiltonian(h)?;
    let diff = &big_h - big_h.adjoint();
    let sum = &big_h + big_h.adjoint();
    let energy = (weighted_elements(&spec.m, &frame, &diff) + weighted_elements(&spec.lambda, &frame, &sum)) * 0.5;
    let entropy = -weighted_elements(&spec.lambda, &frame, &gns.log_delta);
    Ok(FreeEnergyRate { energy: energy.re, entropy: entropy.re, free_energy: energy.re - temperature * entropy.re })
}

/// `ω(L(h))` evaluated directly on dense matrices.
pub fn energy_derivative_direct(gns: &GnsSpace, h: &PauliOperator, spec: &LindbladSpec) -> Result<f64> {
    let b = dense_all(&spec.b_ops)?;
    Ok(gns.omega(&lindblad_apply_dense(spec, &b, &h.dense_matrix()?)).re)
}

/// Central finite differences of `S(ω_t)` and `F(ω_t)` along `e^{tL}`, with
/// `ω_t` from the exponentiated superoperator.
pub fn finite_difference_rates(
    gns: &GnsSpace,
    h: &PauliOperator,
    temperature: f64,
    spec: &LindbladSpec,
    step: f64,
) -> Result<FreeEnergyRate> {
    if gns.n > DYNAMICS_MAX_SITES {
        return Err(Error::Resource(format!("dynamics oracle supports n <= {DYNAMICS_MAX_SITES}, got {}", gns.n)));
    }
    let sup = lindblad_superoperator(spec)?;
    let h_dense = h.dense_matrix()?;
    let at = |t: f64| {
        let rho_t = evolve_density(&gns.rho, &sup.scale(t).exp());
        (entropy_of(&rho_t), crate::linalg::trace_product(&rho_t, &h_dense).re)
    };
    let (s_plus, e_plus) = at(step);
    let (s_minus, e_minus) = at(-step);
    let energy = (e_plus - e_minus) / (2.0 * step);
    let entropy = (s_plus - s_minus) / (2.0 * step);
    Ok(FreeEnergyRate { energy, entropy, free_energy: energy - temperature * entropy })
}

fn dense_ops(b: &[PauliOperator], n: usize) -> Result<Vec<CMat>> {
    if b.is_empty() {
        return Err(Error::Contract("at least one perturbing operator is required".into()));
    }
    if let Some(x) = b.iter().find(|x| x.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: x.n() });
    }
    dense_all(b)
}

/// Outcome of the restricted-stability check `P(T log Δ + H)P† ⪰ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtsCheck {
    pub holds: bool,
    /// Smallest eigenvalue of the Hermitian part of `P(T log Δ + H)P†`.
    pub min_eigenvalue: f64,
    /// Norm of its anti-Hermitian part.
    pub hermiticity_residual: f64,
    pub tolerance: f64,
}

pub fn check_rts(gns: &GnsSpace, h: &PauliOperator, temperature: f64, b: &[PauliOperator]) -> Result<RtsCheck> {
    let q = gns.orthonormal_span(&dense_ops(b, gns.n)?)?;
    let op = gns.log_delta.scale(temperature) + gns.hamiltonian(h)?;
    let m = q.adjoint() * op * &q;
    let tolerance = STATIC_TOL * (1.0 + spectral_norm(&m));
    let min_eigenvalue = herm_eigen(&m).min();
    let hermiticity_residual = anti_hermitian_norm(&m);
    let holds = hermiticity_residual <= tolerance && min_eigenvalue >= -tolerance;
    Ok(RtsCheck { holds, min_eigenvalue, hermiticity_residual, tolerance })
}

/// Both sides of the compressed inequality and the operator-Jensen gap between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EebCheck {
    /// `λ_min(T log(PΔP†) + PHP†)`, Hermitian part.
    pub lhs_min_eig: f64,
    /// `λ_min(P(T log Δ + H)P†)`, Hermitian part.
    pub rhs_min_eig: f64,
    /// `λ_min` and norm of `T (log(PΔP†) − P log Δ P†)`.
    pub gap_min_eig: f64,
    pub gap_norm: f64,
    pub jensen_gap_psd: bool,
    /// `‖(1 − P†P) Δ P†‖` relative to `‖Δ‖`: zero when the span is invariant under the modular flow.
    pub invariance_residual: f64,
    pub tolerance: f64,
}

impl EebCheck {
    pub fn modular_invariant(&self) -> bool {
        self.invariance_residual <= STATIC_TOL
    }

    /// Equality case of the Jensen inequality.
    pub fn gap_vanishes(&self) -> bool {
        self.gap_norm <= self.tolerance
    }
}

pub fn check_matrix_eeb(gns: &GnsSpace, h: &PauliOperator, temperature: f64, b: &[PauliOperator]) -> Result<EebCheck> {
    let q = gns.orthonormal_span(&dense_ops(b, gns.n)?)?;
    let qa = q.adjoint();
    let compressed_delta = hermitian_part(&(&qa * &gns.delta * &q));
    let log_compressed = herm_fn(&compressed_delta, f64::ln);
    let compressed_log = hermitian_part(&(&qa * &gns.log_delta * &q));
    let h_c = &qa * gns.hamiltonian(h)? * &q;
    let lhs = log_compressed.scale(temperature) + &h_c;
    let rhs = compressed_log.scale(temperature) + &h_c;
    let gap = (&log_compressed - &compressed_log).scale(temperature);
    let tolerance = STATIC_TOL * (1.0 + temperature * spectral_norm(&gns.log_delta));
    let gap_min_eig = herm_eigen(&gap).min();
    let leak = (CMat::identity(gns.dim, gns.dim) - &q * &qa) * &gns.delta * &q;
    Ok(EebCheck {
        lhs_min_eig: herm_eigen(&lhs).min(),
        rhs_min_eig: herm_eigen(&rhs).min(),
        gap_min_eig,
        gap_norm: spectral_norm(&gap),
        jensen_gap_psd: gap_min_eig >= -tolerance,
        invariance_residual: spectral_norm(&leak) / spectral_norm(&gns.delta),
        tolerance,
    })
}

/// The two characterizations of quasi-symmetry: `ω([b*b, h]) = 0` on the span, and
/// self-adjointness of `PHP†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSymmetryCheck {
    /// `‖ω([b_k* b_l, h])‖` relative to `‖G‖ ‖h‖`.
    pub direct_residual: f64,
    /// `‖P(H − H†)P†‖` relative to `‖h‖`.
    pub gns_residual: f64,
    pub direct: bool,
    pub gns: bool,
}

impl QuasiSymmetryCheck {
    pub fn agree(&self) -> bool {
        self.direct == self.gns
    }
}

pub fn check_quasisymmetry(gns: &GnsSpace, h: &PauliOperator, b: &[PauliOperator]) -> Result<QuasiSymmetryCheck> {
    let bd = dense_ops(b, gns.n)?;
    let hd = h.dense_matrix()?;
    let h_norm = spectral_norm(&hd).max(f64::MIN_POSITIVE);
    let r = bd.len();
    let mut form = CMat::zeros(r, r);
    let mut gram = CMat::zeros(r, r);
    for k in 0..r {
        let bk_adj = bd[k].adjoint();
        for l in 0..r {
            let bb = &bk_adj * &bd[l];
            form[(k, l)] = gns.omega(&(&bb * &hd - &hd * &bb));
            gram[(k, l)] = gns.omega(&bb);
        }
    }
    let direct_residual = form.norm() / (spectral_norm(&gram) * h_norm);
    let q = gns.orthonormal_span(&bd)?;
    let big_h = gns.hamiltonian_dense(&hd);
    let gns_residual = spectral_norm(&(q.adjoint() * (&big_h - big_h.adjoint()) * &q)) / h_norm;
    Ok(QuasiSymmetryCheck {
        direct_residual,
        gns_residual,
        direct: direct_residual <= STATIC_TOL,
        gns: gns_residual <= STATIC_TOL,
    })
}

/// `max_i |λ_i + λ_{N−1−i}|` over the sorted spectrum of `T log Δ + H`, relative to its
/// spectral radius. Requires `[ρ, h] = 0`, where the spectrum is symmetric about zero.
pub fn spectrum_symmetry_residual(gns: &GnsSpace, h: &PauliOperator, temperature: f64) -> Result<f64> {
    let hd = h.dense_matrix()?;
    let comm = &gns.rho * &hd - &hd * &gns.rho;
    if comm.norm() > STATIC_TOL * (1.0 + hd.norm()) {
        return Err(Error::Contract("spectrum symmetry needs h commuting with the state".into()));
    }
    let op = gns.log_delta.scale(temperature) + gns.hamiltonian_dense(&hd);
    let values = herm_eigen(&op).values;
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = (0..values.len()).map(|i| (values[i] + values[values.len() - 1 - i]).abs()).fold(0.0, f64::max);
    Ok(worst / (1.0 + radius))
}

/// One line of the battery: worst residual of a check over all instances.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub instances: usize,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} worst={:.3e} tol={:.1e} instances={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst_residual,
            self.tolerance,
            self.instances
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub n: usize,
    pub seed: u64,
    pub instances: usize,
    pub checks: Vec<CheckOutcome>,
}

impl BatteryReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for BatteryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verification battery: n = {}, seed = {}, {} instances", self.n, self.seed, self.instances)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} of {} checks passed", self.checks.len() - failed, self.checks.len())
    }
}

/// Accumulates residuals per named check. A residual is a pass when `<= tolerance`.
#[derive(Default)]
struct Tally {
    checks: Vec<CheckOutcome>,
}

impl Tally {
    fn record(&mut self, name: &'static str, residual: f64, tolerance: f64) {
        let ok = residual <= tolerance && residual.is_finite();
        let slot = match self.checks.iter_mut().position(|c| c.name == name) {
            Some(i) => &mut self.checks[i],
            None => {
                self.checks.push(CheckOutcome { name, passed: true, worst_residual: 0.0, tolerance, instances: 0 });
                self.checks.last_mut().expect("just pushed")
            }
        };
        slot.instances += 1;
        slot.passed &= ok;
        if !(residual <= slot.worst_residual) {
            slot.worst_residual = residual;
        }
    }

    fn flag(&mut self, name: &'static str, ok: bool) {
        self.record(name, if ok { 0.0 } else { 1.0 }, 0.5);
    }
}

fn random_dense(d: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random instances keep `ln cond(ρ)` in `[0.5, MAX_LOG_CONDITION]`: the central-difference
/// oracle at step `1e-5` needs `ρ_min` well above the step times `‖L‖`, and double precision
/// resolves `log Δ` (condition `cond(ρ)²`) to the static tolerance only for moderate spreads.
pub const MAX_LOG_CONDITION: f64 = 4.0;

/// A faithful state with a Hamiltonian and temperature it is the Gibbs state of: either a
/// random 2-local Gibbs state at a temperature fixed by the drawn condition number, or a
/// state with random eigenbasis and log-uniform spectrum together with `−log ρ` at `T = 1`.
fn random_instance(n: usize, index: usize, rng: &mut impl Rng) -> Result<(DensityMatrix, PauliOperator, f64)> {
    let log_cond = rng.random_range(0.5..MAX_LOG_CONDITION);
    if index % 2 == 0 {
        let h = random_k_local(n, 2.min(n), rng)?;
        let spectrum = herm_eigen(&h.dense_matrix()?);
        let t = (spectrum.max() - spectrum.min()) / log_cond;
        Ok((gibbs_density(&h, t)?, h, t))
    } else {
        let d = 1usize << n;
        let basis = herm_eigen(&hermitian_part(&random_dense(d, rng))).vectors;
        let mut weights: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        weights[0] = 0.0;
        weights[d - 1] = 1.0;
        let diag = CVec::from_iterator(d, weights.iter().map(|w| c((-w * log_cond).exp())));
        let m = hermitian_part(&(&basis * CMat::from_diagonal(&diag) * basis.adjoint()));
        let tr = m.trace().re;
        let rho = DensityMatrix::new(n, m.unscale(tr))?;
        let h = PauliOperator::from_dense(n, &hermitian_part(&(-rho.log())), 0.0)?;
        Ok((rho, h, 1.0))
    }
}

fn random_subset(strings: &[PauliString], count: usize, rng: &mut impl Rng) -> Vec<PauliOperator> {
    let mut pool: Vec<PauliString> = strings.iter().filter(|p| !p.is_identity()).cloned().collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count.min(pool.len()) {
        let k = rng.random_range(0..pool.len());
        out.push(PauliOperator::from(pool.swap_remove(k)));
    }
    out
}

/// Parameters of [`run_battery_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    pub n: usize,
    pub seed: u64,
    pub instances: usize,
    /// Multiplies every drawn density matrix before the GNS construction; anything but 1
    /// corrupts the trace and must surface as a construction failure.
    pub trace_scale: f64,
}

/// Every identity and proposition check on `instances` random faithful states of `n` qubits.
/// Dynamics checks run only for `n <= 3`.
pub fn run_battery(n: usize, seed: u64, instances: usize) -> Result<BatteryReport> {
    run_battery_with(&BatteryOptions { n, seed, instances, trace_scale: 1.0 })
}

pub fn run_battery_with(opts: &BatteryOptions) -> Result<BatteryReport> {
    let n = opts.n;
    if n == 0 || n > GNS_MAX_SITES {
        return Err(Error::Resource(format!("verification battery supports 1 <= n <= {GNS_MAX_SITES}, got {n}")));
    }
    let mut tally = Tally::default();
    for index in 0..opts.instances {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[opts.seed, n as u64, index as u64]));
        instance_checks(n, index, opts.trace_scale, &mut rng, &mut tally)?;
    }
    Ok(BatteryReport { n, seed: opts.seed, instances: opts.instances, checks: tally.checks })
}

fn instance_checks(n: usize, index: usize, trace_scale: f64, rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<()> {
    let (mut rho, h_sym, t_sym) = random_instance(n, index, rng)?;
    if trace_scale != 1.0 {
        rho = DensityMatrix::new_unchecked(n, rho.matrix().scale(trace_scale))?;
    }
    let gns = build_gns(&rho)?;
    let d = gns.d();
    let delta_norm = spectral_norm(&gns.delta);
    let h_gen = random_k_local(n, 2.min(n), rng)?;

    // representations and inner product
    let (a, b) = (random_dense(d, rng), random_dense(d, rng));
    let (la, rb) = (gns.left_dense(&a), gns.right_dense(&b));
    let comm = (&la * &rb - &rb * &la).norm() / (la.norm() * rb.norm());
    tally.record("gns_representations_commute", comm, STATIC_TOL);
    let ip = (gns.vector(&a).dotc(&gns.vector(&b)) - gns.omega(&(a.adjoint() * &b))).norm() / (a.norm() * b.norm());
    tally.record("gns_inner_product", ip, STATIC_TOL);
    let paulis: Vec<CMat> = gns.strings.iter().map(PauliString::dense_matrix).collect::<Result<_>>()?;
    let gram_direct = CMat::from_fn(gns.dim, gns.dim, |k, l| gns.omega(&(&paulis[k] * &paulis[l])));
    tally.record("gns_gram", (&gram_direct - &gns.inner_product).norm() / gns.dim as f64, STATIC_TOL);
    let rep_hom = {
        let lhs = gns.right_dense(&(&a * &b));
        let rhs = gns.right_dense(&a) * gns.right_dense(&b);
        (lhs - &rhs).norm() / (1.0 + rhs.norm())
    };
    tally.record("gns_right_representation", rep_hom, STATIC_TOL);

    // modular operator
    let rho_inv = &gns.inv_sqrt_rho * &gns.inv_sqrt_rho;
    let product = gns.left_dense(&gns.rho) * gns.right_dense(&rho_inv);
    tally.record("modular_operator_product", (&gns.delta - product).norm() / delta_norm, STATIC_TOL);
    let form = (gns.vector(&a).dotc(&(&gns.delta * gns.vector(&b))) - gns.omega(&(&b * a.adjoint()))).norm()
        / (a.norm() * b.norm() * delta_norm);
    tally.record("modular_operator_form", form, STATIC_TOL);
    let log_expr = gns.left_dense(&gns.log_rho) - gns.right_dense(&gns.log_rho);
    tally.record("log_modular_expression", (&gns.log_delta - log_expr).norm() / (1.0 + gns.log_delta.norm()), STATIC_TOL);

    // modular conjugation
    let v = gns.vector(&a);
    let w = gns.vector(&b);
    tally.record("conjugation_involution", (gns.apply_j(&gns.apply_j(&v)) - &v).norm() / v.norm(), STATIC_TOL);
    let anti = (gns.apply_j(&v).dotc(&gns.apply_j(&w)) - w.dotc(&v)).norm() / (v.norm() * w.norm());
    tally.record("conjugation_antiunitary", anti, STATIC_TOL);
    let jv = gns.vector(&(&gns.sqrt_rho * a.adjoint() * &gns.inv_sqrt_rho));
    tally.record("conjugation_action", (gns.apply_j(&v) - jv).norm() / v.norm(), STATIC_TOL);
    let big_h_sym = gns.hamiltonian(&h_sym)?;
    let jv = gns.apply_j(&v);
    let flip = (jv.dotc(&(&big_h_sym * &jv)) + v.dotc(&(&big_h_sym * &v))).norm()
        / (v.norm_squared() * (1.0 + spectral_norm(&big_h_sym)));
    tally.record("conjugation_flips_symmetry", flip, STATIC_TOL);

    // spectrum of T log Δ + H for a symmetry, at its own and at a foreign temperature
    let t_other = rng.random_range(0.3..3.0);
    tally.record("spectrum_symmetry", spectrum_symmetry_residual(&gns, &h_sym, t_other)?, STATIC_TOL);
    let zero = (gns.log_delta.scale(t_sym) + &big_h_sym).norm() / (1.0 + big_h_sym.norm());
    tally.record("gibbs_cancellation", zero, STATIC_TOL);

    // Lindblad rates
    let r = rng.random_range(1..=3usize);
    let spec = LindbladSpec::random(random_subset(&gns.strings, r, rng), rng)?;
    let rates = free_energy_derivative(&gns, &h_gen, t_other, &spec)?;
    let direct = energy_derivative_direct(&gns, &h_gen, &spec)?;
    tally.record("energy_rate_identity", (rates.energy - direct).abs() / (1.0 + direct.abs()), STATIC_TOL);
    let gibbs_rate = free_energy_derivative(&gns, &h_sym, t_sym, &spec)?;
    tally.record("gibbs_free_energy_stationary", gibbs_rate.free_energy.abs() / (1.0 + spec.lambda.norm() * spectral_norm(&big_h_sym)), STATIC_TOL);
    let m_only = spec.with_lambda(CMat::zeros(r, r))?;
    tally.record("entropy_rate_m_only", free_energy_derivative(&gns, &h_gen, 1.0, &m_only)?.entropy.abs(), 0.0);
    if n <= DYNAMICS_MAX_SITES {
        let fd = finite_difference_rates(&gns, &h_gen, t_other, &spec, FINITE_DIFFERENCE_STEP)?;
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-3);
        tally.record("entropy_rate_finite_difference", rel(rates.entropy, fd.entropy), FINITE_DIFFERENCE_TOL);
        tally.record("free_energy_rate_finite_difference", rel(rates.free_energy, fd.free_energy), FINITE_DIFFERENCE_TOL);
        let fd_m = finite_difference_rates(&gns, &h_gen, t_other, &m_only, FINITE_DIFFERENCE_STEP)?;
        tally.record("entropy_conserved_m_only", fd_m.entropy.abs(), FINITE_DIFFERENCE_TOL);
    }

    // restricted stability and the compressed inequality
    let count = rng.random_range(2..=(gns.dim / 2).min(12));
    let b_restricted = random_subset(&gns.strings, count, rng);
    let rts = check_rts(&gns, &h_sym, t_sym, &b_restricted)?;
    tally.record("rts_gibbs_pair", rts.min_eigenvalue.abs().max(if rts.holds { 0.0 } else { f64::INFINITY }), rts.tolerance);
    let full: Vec<PauliOperator> = gns.strings.iter().skip(1).cloned().map(PauliOperator::from).collect();
    let converse = check_rts(&gns, &h_sym, 2.0 * t_sym, &full)?;
    tally.flag("rts_full_span_converse", !converse.holds);
    let mix = random_dense(count, rng) + CMat::identity(count, count).scale(count as f64);
    let mixed: Vec<PauliOperator> = (0..count)
        .map(|j| {
            let mut op = PauliOperator::zero(n);
            for (k, bk) in b_restricted.iter().enumerate() {
                op = op.add(&bk.scale(mix[(k, j)]))?;
            }
            Ok(op)
        })
        .collect::<Result<_>>()?;
    let plain = check_rts(&gns, &h_gen, t_other, &b_restricted)?;
    let recombined = check_rts(&gns, &h_gen, t_other, &mixed)?;
    tally.record(
        "rts_span_dependence",
        (plain.min_eigenvalue - recombined.min_eigenvalue).abs() + if plain.holds == recombined.holds { 0.0 } else { 1.0 },
        plain.tolerance.max(recombined.tolerance) * 10.0,
    );

    let eeb = check_matrix_eeb(&gns, &h_gen, t_other, &b_restricted)?;
    tally.record("jensen_gap_psd", (-eeb.gap_min_eig).max(0.0), eeb.tolerance);
    let eeb_full = check_matrix_eeb(&gns, &h_gen, t_other, &full)?;
    tally.record("jensen_gap_full_span", eeb_full.gap_norm, eeb_full.tolerance);
    let eeb_gibbs = check_matrix_eeb(&gns, &h_sym, t_sym, &b_restricted)?;
    tally.record("matrix_inequality_gibbs", (-eeb_gibbs.lhs_min_eig).max(0.0), eeb_gibbs.tolerance);
    let eig = herm_eigen(&gns.delta);
    let invariant: Vec<PauliOperator> = (0..3)
        .map(|_| {
            let k = rng.random_range(0..gns.dim);
            PauliOperator::from_dense(n, &gns.operator(&eig.vectors.column(k).into_owned()), 0.0)
        })
        .collect::<Result<_>>()?;
    let eeb_inv = check_matrix_eeb(&gns, &h_gen, t_other, &invariant)?;
    tally.record("jensen_gap_modular_invariant", eeb_inv.gap_norm, eeb_inv.tolerance);

    // quasi-symmetry, both characterizations
    let qs_sym = check_quasisymmetry(&gns, &h_sym, &b_restricted)?;
    tally.flag("quasisymmetry_of_symmetry", qs_sym.direct && qs_sym.gns);
    let qs_gen = check_quasisymmetry(&gns, &h_gen, &b_restricted)?;
    tally.flag("quasisymmetry_dual_characterization", qs_gen.agree() && qs_sym.agree());
    // b commuting with h makes every ω([b*b, h]) vanish, whatever the state
    let single = random_subset(&gns.strings, 1, rng).remove(0);
    let pool: Vec<PauliString> = gns
        .strings
        .iter()
        .filter(|p| PauliOperator::from((*p).clone()).commutator(&single).map(|c| c.is_zero()).unwrap_or(false))
        .cloned()
        .collect();
    let commuting = random_subset(&pool, 3, rng);
    let qs = check_quasisymmetry(&gns, &single, &commuting)?;
    tally.flag("quasisymmetry_commuting_span", qs.direct && qs.gns);

    // moment matrices of the pipeline against the explicit construction
    let strings: Vec<PauliString> = b_restricted.iter().map(|op| op.terms().next().expect("single string").0.clone()).collect();
    let table = build_table(&rho, &gns.strings)?;
    let fb = gns.frame_of(&dense_all(&b_restricted)?);
    let g = gram_matrix(&table, &strings)?;
    let dm = delta_matrix_raw(&table, &strings)?;
    let km = commutator_matrix_raw(&table, &strings, &h_gen)?;
    let scale = 1.0 + delta_norm;
    let raw = (&g - fb.adjoint() * &fb).norm() + (&dm - fb.adjoint() * &gns.delta * &fb).norm();
    let h_raw = (&km - fb.adjoint() * gns.hamiltonian(&h_gen)? * &fb).norm();
    tally.record("moment_matrices_raw", (raw + h_raw) / scale, STATIC_TOL);
    let ortho = orthonormalize(&g, 1e-12)?;
    let q = &fb * &ortho.coeffs;
    let compressed = (build_delta(&dm, &ortho) - q.adjoint() * &gns.delta * &q).norm() / scale;
    tally.record("moment_matrices_compressed", compressed, STATIC_TOL);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    fn single(p: Pauli) -> PauliOperator {
        PauliOperator::from(PauliString::single(1, 0, p).unwrap())
    }

    fn diag_state(p: f64) -> DensityMatrix {
        DensityMatrix::new(1, CMat::from_diagonal(&CVec::from_vec(vec![c(p), c(1.0 - p)]))).unwrap()
    }

    #[test]
    fn tracial_state_has_trivial_modular_operator() {
        let gns = build_gns(&DensityMatrix::maximally_mixed(1).unwrap()).unwrap();
        assert!((&gns.delta - CMat::identity(4, 4)).norm() < 1e-12);
        assert!(gns.log_delta.norm() < 1e-12);
    }

    #[test]
    fn diagonal_qubit_spectrum() {
        let p = 0.2;
        let gns = build_gns(&diag_state(p)).unwrap();
        let got = herm_eigen(&gns.delta).values;
        let mut want = vec![1.0, 1.0, p / (1.0 - p), (1.0 - p) / p];
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn conjugation_is_an_involution_flipping_symmetries() {
        let h = PauliOperator::from_real_terms(1, [(PauliString::single(1, 0, Pauli::Z).unwrap(), -1.0)]).unwrap();
        let gns = build_gns(&gibbs_density(&h, 1.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let big_h = gns.hamiltonian(&h).unwrap();
        for _ in 0..5 {
            let v = gns.vector(&random_dense(2, &mut rng));
            assert!((gns.apply_j(&gns.apply_j(&v)) - &v).norm() < 1e-12);
            let jv = gns.apply_j(&v);
            let lhs = jv.dotc(&(&big_h * &jv));
            let rhs = v.dotc(&(&big_h * &v));
            assert!((lhs + rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_states() {
        let pure = DensityMatrix::new(1, CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]))).unwrap();
        assert!(matches!(build_gns(&pure), Err(Error::NotFaithful(_))));
        let bad_trace = DensityMatrix::new_unchecked(1, CMat::identity(2, 2).scale(0.7)).unwrap();
        assert!(matches!(build_gns(&bad_trace), Err(Error::Contract(_))));
        let big = DensityMatrix::maximally_mixed(5).unwrap();
        assert!(matches!(build_gns(&big), Err(Error::Resource(_))));
    }

    #[test]
    fn lindblad_examples() {
        let x = single(Pauli::X);
        let zero = LindbladSpec::new(vec![x.clone()], CMat::zeros(1, 1), CMat::zeros(1, 1)).unwrap();
        assert!(lindblad_apply(&zero, &single(Pauli::Z)).unwrap().is_zero());

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = LindbladSpec::random(vec![x, single(Pauli::Y)], &mut rng).unwrap();
        let id = PauliOperator::from(PauliString::identity(1));
        assert!(lindblad_apply(&spec, &id).unwrap().is_zero());

        // amplitude damping with b = |0><1| = (X + iY)/2: L(Z) = 1 − Z, L(X) = −X/2
        let lowering = PauliOperator::from_terms(
            1,
            [
                (PauliString::single(1, 0, Pauli::X).unwrap(), c(0.5)),
                (PauliString::single(1, 0, Pauli::Y).unwrap(), Complex64::new(0.0, 0.5)),
            ],
        )
        .unwrap();
        let damping = LindbladSpec::new(vec![lowering], CMat::zeros(1, 1), CMat::identity(1, 1)).unwrap();
        let lz = lindblad_apply(&damping, &single(Pauli::Z)).unwrap();
        let want = id.sub(&single(Pauli::Z)).unwrap();
        assert!(lz.sub(&want).unwrap().terms().all(|(_, v)| v.norm() < 1e-14));
        let lx = lindblad_apply(&damping, &single(Pauli::X)).unwrap();
        assert!(lx.sub(&single(Pauli::X).scale(c(-0.5))).unwrap().terms().all(|(_, v)| v.norm() < 1e-14));
    }

    #[test]
    fn lindblad_spec_validation() {
        let x = single(Pauli::X);
        let herm_m = CMat::identity(1, 1);
        assert!(LindbladSpec::new(vec![x.clone()], herm_m, CMat::zeros(1, 1)).is_err());
        assert!(LindbladSpec::new(vec![x.clone()], CMat::zeros(1, 1), CMat::identity(1, 1).scale(-1.0)).is_err());
        assert!(LindbladSpec::new(vec![x], CMat::zeros(2, 2), CMat::zeros(2, 2)).is_err());
    }

    #[test]
    fn free_energy_rate_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (rho, _, _) = random_instance(2, 1, &mut rng).unwrap();
        let gns = build_gns(&rho).unwrap();
        let h = random_k_local(2, 2, &mut rng).unwrap();
        let spec = LindbladSpec::random(random_subset(&gns.strings, 3, &mut rng), &mut rng).unwrap();
        let rate = free_energy_derivative(&gns, &h, 0.8, &spec).unwrap();
        let fd = finite_difference_rates(&gns, &h, 0.8, &spec, FINITE_DIFFERENCE_STEP).unwrap();
        assert!((rate.free_energy - fd.free_energy).abs() <= 1e-5 * fd.free_energy.abs(), "{rate:?} {fd:?}");
        assert!((rate.energy - energy_derivative_direct(&gns, &h, &spec).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gibbs_state_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_k_local(2, 2, &mut rng).unwrap();
        let gns = build_gns(&gibbs_density(&h, 1.3).unwrap()).unwrap();
        let spec = LindbladSpec::random(random_subset(&gns.strings, 2, &mut rng), &mut rng).unwrap();
        assert!(free_energy_derivative(&gns, &h, 1.3, &spec).unwrap().free_energy.abs() < 1e-11);
        let m_only = spec.with_lambda(CMat::zeros(2, 2)).unwrap();
        assert_eq!(free_energy_derivative(&gns, &h, 1.3, &m_only).unwrap().entropy, 0.0);
    }

    #[test]
    fn rts_examples() {
        let z = PauliOperator::from_real_terms(1, [(PauliString::single(1, 0, Pauli::Z).unwrap(), 1.0)]).unwrap();
        let gns = build_gns(&gibbs_density(&z, 1.0).unwrap()).unwrap();
        let full = vec![single(Pauli::X), single(Pauli::Y), single(Pauli::Z)];
        let own = check_rts(&gns, &z, 1.0, &full).unwrap();
        assert!(own.holds && own.min_eigenvalue.abs() < 1e-12);
        let foreign = check_rts(&gns, &z, 2.0, &full).unwrap();
        assert!(!foreign.holds);
        // T log Δ + H = (1 − T) H at T = 2 has eigenvalues ±2
        assert!((foreign.min_eigenvalue + 2.0).abs() < 1e-10);
    }

    #[test]
    fn jensen_gap_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (rho, _, _) = random_instance(2, 1, &mut rng).unwrap();
        let gns = build_gns(&rho).unwrap();
        let h = random_k_local(2, 2, &mut rng).unwrap();
        let full: Vec<PauliOperator> = gns.strings.iter().cloned().map(PauliOperator::from).collect();
        let eeb = check_matrix_eeb(&gns, &h, 1.0, &full).unwrap();
        assert!(eeb.gap_vanishes() && eeb.modular_invariant());
        let some = random_subset(&gns.strings, 4, &mut rng);
        let eeb = check_matrix_eeb(&gns, &h, 1.0, &some).unwrap();
        assert!(eeb.jensen_gap_psd && !eeb.modular_invariant() && !eeb.gap_vanishes());
    }

    #[test]
    fn quasisymmetry_examples() {
        let z = PauliOperator::from_real_terms(1, [(PauliString::single(1, 0, Pauli::Z).unwrap(), 1.0)]).unwrap();
        let gns = build_gns(&gibbs_density(&z, 1.0).unwrap()).unwrap();
        let full = vec![single(Pauli::X), single(Pauli::Y), single(Pauli::Z)];
        let sym = check_quasisymmetry(&gns, &z, &full).unwrap();
        assert!(sym.direct && sym.gns);
        let x = check_quasisymmetry(&gns, &single(Pauli::X), &full).unwrap();
        assert!(!x.direct && !x.gns);
    }

    #[test]
    fn corrupted_trace_is_reported() {
        let opts = BatteryOptions { n: 2, seed: 1, instances: 1, trace_scale: 1.5 };
        assert!(matches!(run_battery_with(&opts), Err(Error::Contract(_))));
        assert!(matches!(run_battery(5, 1, 1), Err(Error::Resource(_))));
    }

    #[test]
    fn small_battery_passes() {
        for n in 1..=2 {
            let report = run_battery(n, 7, 6).unwrap();
            assert!(report.all_passed(), "{report}");
        }
    }
}
