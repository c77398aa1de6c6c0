//! Moment matrices of the state in the span of the perturbing operators: Gram form,
//! orthonormalization, compressed modular operator, commutator matrices, the
//! quasi-symmetry matrix `W` and its low-lying kernel.
//!
//! Everything downstream of [`RawMoments`] works on matrices in the raw `b` basis, so any
//! basis (not only Pauli strings) can be fed in through [`RawMoments::recombine`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, herm_eigen, hermitian_part, CMat, RMat};
use crate::pauli::{PauliOperator, PauliString};
use crate::state::ExpectationTable;

/// `G_kl = ω(b_k* b_l)`, Hermitian-symmetrized.
pub fn gram_matrix(table: &ExpectationTable, b: &[PauliString]) -> Result<CMat> {
    let r = b.len();
    let mut g = CMat::zeros(r, r);
    for k in 0..r {
        for l in 0..r {
            g[(k, l)] = table.product(&b[k], &b[l])?;
        }
    }
    Ok(hermitian_part(&g))
}

/// `D_kl = ω(b_l b_k*) = <b_k|Δ|b_l>`, Hermitian-symmetrized.
pub fn delta_matrix_raw(table: &ExpectationTable, b: &[PauliString]) -> Result<CMat> {
    let r = b.len();
    let mut d = CMat::zeros(r, r);
    for k in 0..r {
        for l in 0..r {
            d[(k, l)] = table.product(&b[l], &b[k])?;
        }
    }
    Ok(hermitian_part(&d))
}

/// `K_kl = ω(b_k* [h, b_l]) = <b_k|H|b_l>` (not symmetrized).
pub fn commutator_matrix_raw(table: &ExpectationTable, b: &[PauliString], h: &PauliOperator) -> Result<CMat> {
    let r = b.len();
    let mut k_mat = CMat::zeros(r, r);
    for (p, &coef) in h.terms() {
        for (l, bl) in b.iter().enumerate() {
            if p.commutes_with(bl) {
                continue;
            }
            // [p, b_l] = 2 p b_l when they anticommute
            let (pb, ph1) = p.multiply(bl)?;
            let scale = coef * ph1.to_complex() * 2.0;
            for (k, bk) in b.iter().enumerate() {
                let (s, ph2) = bk.multiply(&pb)?;
                k_mat[(k, l)] += scale * ph2.to_complex() * table.get(&s)?;
            }
        }
    }
    Ok(k_mat)
}

/// Number of triples `(i, α, j)` over the raw basis with `[h_α, b_j] != 0`, decided
/// structurally from the Pauli supports.
pub fn structural_term_count(b: &[PauliString], h_terms: &[PauliOperator]) -> Result<usize> {
    let mut pairs = 0usize;
    for h in h_terms {
        for bj in b {
            if !h.commutator(&PauliOperator::from(bj.clone()))?.is_zero() {
                pairs += 1;
            }
        }
    }
    Ok(pairs * b.len())
}

/// Moment data in the raw perturbing basis, before orthonormalization.
#[derive(Debug, Clone)]
pub struct RawMoments {
    pub gram: CMat,
    pub delta: CMat,
    pub commutators: Vec<CMat>,
    pub h_expectations: Vec<f64>,
    /// Structural term count used by the `ε_W` formula.
    pub term_count: usize,
}

impl RawMoments {
    pub fn assemble(table: &ExpectationTable, b: &[PauliString], h_terms: &[PauliOperator]) -> Result<Self> {
        for p in b {
            if p.n() != table.n() {
                return Err(Error::DimensionMismatch { expected: table.n(), found: p.n() });
            }
        }
        let gram = gram_matrix(table, b)?;
        let delta = delta_matrix_raw(table, b)?;
        let commutators = h_terms
            .par_iter()
            .map(|h| commutator_matrix_raw(table, b, h))
            .collect::<Result<Vec<_>>>()?;
        let h_expectations = h_terms
            .iter()
            .map(|h| table.operator_value(h).map(|v| v.re))
            .collect::<Result<Vec<_>>>()?;
        let term_count = structural_term_count(b, h_terms)?;
        Ok(RawMoments { gram, delta, commutators, h_expectations, term_count })
    }

    /// Moments of the recombined basis `b'_j = Σ_k mix_kj b_k`.
    pub fn recombine(&self, mix: &CMat) -> RawMoments {
        let t = |m: &CMat| mix.adjoint() * m * mix;
        RawMoments {
            gram: hermitian_part(&t(&self.gram)),
            delta: hermitian_part(&t(&self.delta)),
            commutators: self.commutators.iter().map(t).collect(),
            h_expectations: self.h_expectations.clone(),
            term_count: self.term_count,
        }
    }

    pub fn r(&self) -> usize {
        self.gram.nrows()
    }

    pub fn s(&self) -> usize {
        self.commutators.len()
    }
}

/// Orthonormalizing recombination `a_j = Σ_k coeffs[(k, j)] b_k` with `coeffs† G coeffs = I`.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    /// Column `j` holds the coefficients of `a_j` in the `b` basis (`r x r'`).
    pub coeffs: CMat,
    /// Gram eigenvalues, descending.
    pub gram_eigenvalues: Vec<f64>,
}

/// Inverse square root of the Gram matrix. Eigenvalues at or below
/// `floor_rel · λ_max` are reported as [`Error::GramDegenerate`].
pub fn orthonormalize(gram: &CMat, floor_rel: f64) -> Result<OrthoBasis> {
    let eig = herm_eigen(gram);
    let top = eig.max().max(0.0);
    let floor = floor_rel * top;
    let bad: Vec<f64> = eig.values.iter().copied().filter(|&v| v <= floor).collect();
    if !bad.is_empty() || eig.values.is_empty() {
        return Err(Error::GramDegenerate { eigenvalues: bad });
    }
    let coeffs = eig.apply(|v| v.powf(-0.5));
    let mut gram_eigenvalues = eig.values.clone();
    gram_eigenvalues.reverse();
    Ok(OrthoBasis { coeffs, gram_eigenvalues })
}

/// Like [`orthonormalize`] but drops the eigenvectors at or below the floor instead of
/// failing, so the orthonormal family spans only the positive part of the Gram form.
pub fn orthonormalize_projected(gram: &CMat, floor_rel: f64) -> Result<OrthoBasis> {
    let eig = herm_eigen(gram);
    let floor = floor_rel * eig.max().max(0.0);
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > floor).collect();
    if keep.is_empty() {
        return Err(Error::GramDegenerate { eigenvalues: eig.values });
    }
    let r = gram.nrows();
    let coeffs = CMat::from_fn(r, keep.len(), |i, k| eig.vectors[(i, keep[k])] * eig.values[keep[k]].powf(-0.5));
    let mut gram_eigenvalues = eig.values.clone();
    gram_eigenvalues.reverse();
    Ok(OrthoBasis { coeffs, gram_eigenvalues })
}

/// `𝚫_ij = ω(a_j a_i*)`.
pub fn build_delta(raw_delta: &CMat, ortho: &OrthoBasis) -> CMat {
    let v = &ortho.coeffs;
    hermitian_part(&(v.adjoint() * raw_delta * v))
}

/// Commutator matrix in the orthonormal basis, raw and symmetrized.
#[derive(Debug, Clone)]
pub struct HMatrix {
    /// `ω(a_i* [h, a_j])`.
    pub raw: CMat,
    /// `(raw_ij + conj(raw_ji)) / 2`.
    pub symmetrized: CMat,
}

pub fn build_h_matrix(raw_commutator: &CMat, ortho: &OrthoBasis) -> HMatrix {
    let v = &ortho.coeffs;
    let raw = v.adjoint() * raw_commutator * v;
    let symmetrized = hermitian_part(&raw);
    HMatrix { raw, symmetrized }
}

/// `W_αβ = tr((H_α† − H_α)(H_β − H_β†))` and the ascending spectrum of its real part
/// (dust above `−1e-12` clipped to zero).
pub fn build_w(raw_h: &[CMat]) -> (CMat, Vec<f64>) {
    let s = raw_h.len();
    let anti: Vec<CMat> = raw_h.iter().map(|h| h - h.adjoint()).collect();
    let mut w = CMat::zeros(s, s);
    for a in 0..s {
        for b in a..s {
            // tr((H_a† − H_a)(H_b − H_b†)) = tr(A_a† A_b) with A = H − H†
            let v: Complex64 = anti[a].iter().zip(anti[b].iter()).map(|(x, y)| x.conj() * y).sum();
            w[(a, b)] = v;
            w[(b, a)] = v.conj();
        }
    }
    let spectrum = real_part_eigen(&w).0.into_iter().map(clip_dust).collect();
    (w, spectrum)
}

pub(crate) fn clip_dust(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        0.0
    } else {
        v
    }
}

/// Ascending eigenpairs of `Re W`.
fn real_part_eigen(w: &CMat) -> (Vec<f64>, RMat) {
    let s = w.nrows();
    if s == 0 {
        return (vec![], RMat::zeros(0, 0));
    }
    let re = RMat::from_fn(s, s, |i, j| 0.5 * (w[(i, j)].re + w[(j, i)].re));
    let eig = re.symmetric_eigen();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = RMat::from_fn(s, s, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// `ε_W = 400 · max(σ² √m, 1e-11)`, distributed as `max(400 √m σ σ, 4e-9)` so that round
/// grid values come out exactly (`400 · 1e-11` alone rounds to `3.9999999999999994e-9`).
pub fn epsilon_w(sigma_noise: f64, term_count: usize) -> f64 {
    (400.0 * (term_count as f64).sqrt() * sigma_noise * sigma_noise).max(4e-9)
}

/// Low-lying eigenspace of `W` and the Hamiltonian data restricted to it.
#[derive(Debug, Clone)]
pub struct Kernel {
    /// `q × s`; row α holds the real coefficients of `h̃_α` in the `h` basis.
    pub coeffs: RMat,
    pub h_tilde_mats: Vec<CMat>,
    pub h_tilde_expectations: Vec<f64>,
}

impl Kernel {
    pub fn q(&self) -> usize {
        self.coeffs.nrows()
    }
}

/// Eigenvectors of `Re W` with eigenvalue below `eps`, applied to the symmetrized matrices
/// and to the term expectations.
pub fn kernel_basis(w: &CMat, eps: f64, sym_h: &[CMat], h_expectations: &[f64]) -> Kernel {
    let (values, vectors) = real_part_eigen(w);
    kernel_from_spectrum(&values, &vectors, eps, sym_h, h_expectations)
}

/// [`kernel_basis`] from an already computed ascending eigendecomposition of `Re W`.
pub fn kernel_from_spectrum(values: &[f64], vectors: &RMat, eps: f64, sym_h: &[CMat], h_expectations: &[f64]) -> Kernel {
    let s = values.len();
    let picked: Vec<usize> = (0..s).filter(|&k| values[k] < eps).collect();
    let q = picked.len();
    let coeffs = RMat::from_fn(q, s, |a, b| vectors[(b, picked[a])]);
    let r = sym_h.first().map_or(0, |m| m.nrows());
    let h_tilde_mats = (0..q)
        .map(|a| {
            let mut acc = CMat::zeros(r, r);
            for (b, m) in sym_h.iter().enumerate() {
                let k = coeffs[(a, b)];
                if k != 0.0 {
                    acc += m * c(k);
                }
            }
            hermitian_part(&acc)
        })
        .collect();
    let h_tilde_expectations = (0..q)
        .map(|a| (0..s).map(|b| coeffs[(a, b)] * h_expectations[b]).sum())
        .collect();
    Kernel { coeffs, h_tilde_mats, h_tilde_expectations }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    /// Relative Gram floor: eigenvalues `<= floor · λ_max` are degenerate.
    pub gram_floor: f64,
    /// Noise standard deviation fed to the `ε_W` formula.
    pub noise_sigma: f64,
    pub epsilon_w_override: Option<f64>,
    /// Drop degenerate Gram directions instead of failing.
    pub project_degenerate: bool,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions { gram_floor: 1e-10, noise_sigma: 0.0, epsilon_w_override: None, project_degenerate: false }
    }
}

/// All moment matrices entering the semidefinite program.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub ortho: OrthoBasis,
    pub delta: CMat,
    pub h_mats: Vec<HMatrix>,
    pub w: CMat,
    pub w_spectrum: Vec<f64>,
    pub epsilon_w: f64,
    pub kernel: Kernel,
}

impl MomentSet {
    pub fn compute(raw: &RawMoments, opts: &MomentOptions) -> Result<Self> {
        let ortho = if opts.project_degenerate {
            orthonormalize_projected(&raw.gram, opts.gram_floor)?
        } else {
            orthonormalize(&raw.gram, opts.gram_floor)?
        };
        let delta = build_delta(&raw.delta, &ortho);
        let h_mats: Vec<HMatrix> = raw.commutators.iter().map(|k| build_h_matrix(k, &ortho)).collect();
        let raw_h: Vec<CMat> = h_mats.iter().map(|h| h.raw.clone()).collect();
        let (w, w_spectrum) = build_w(&raw_h);
        let eps = opts.epsilon_w_override.unwrap_or_else(|| epsilon_w(opts.noise_sigma, raw.term_count));
        let sym: Vec<CMat> = h_mats.iter().map(|h| h.symmetrized.clone()).collect();
        let kernel = kernel_basis(&w, eps, &sym, &raw.h_expectations);
        Ok(MomentSet { ortho, delta, h_mats, w, w_spectrum, epsilon_w: eps, kernel })
    }

    pub fn q(&self) -> usize {
        self.kernel.q()
    }
}

/// `index,eigenvalue` rows for threshold tuning.
pub fn spectrum_csv(values: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v:e}\n"));
    }
    out
}

/// Real coefficient vector `Σ_α y_α h̃_α` pulled back to the original `h` basis.
pub fn pull_back(kernel: &Kernel, y: &[f64]) -> Vec<f64> {
    let s = kernel.coeffs.ncols();
    (0..s).map(|b| (0..kernel.q()).map(|a| y[a] * kernel.coeffs[(a, b)]).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{all_strings, enumerate_geometric_k_local};
    use crate::state::{build_table, gibbs_density, required_strings, DensityMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(text: &str, n: usize) -> PauliString {
        PauliString::parse(text, n).unwrap()
    }

    fn exact_table(rho: &DensityMatrix, b: &[PauliString], h: &[PauliOperator]) -> ExpectationTable {
        let req = required_strings(b, h).unwrap();
        build_table(rho, &req).unwrap()
    }

    fn minus_z_state() -> DensityMatrix {
        gibbs_density(&PauliOperator::from_real_terms(1, [(s("Z0", 1), -1.0)]).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn gram_of_tracial_state_is_identity() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let b = all_strings(2, false).unwrap();
        let t = exact_table(&rho, &b, &[]);
        let g = gram_matrix(&t, &b).unwrap();
        assert!((g - CMat::identity(15, 15)).norm() < 1e-14);
    }

    #[test]
    fn gram_single_qubit() {
        let rho = minus_z_state();
        let b = vec![s("X0", 1), s("Y0", 1)];
        let t = exact_table(&rho, &b, &[]);
        let g = gram_matrix(&t, &b).unwrap();
        let th = 1f64.tanh();
        // ω(XY) = i ω(Z)
        assert!((g[(0, 1)] - Complex64::new(0.0, th)).norm() < 1e-14);
        assert!((g[(1, 0)] - Complex64::new(0.0, -th)).norm() < 1e-14);
        assert!((g[(0, 0)] - c(1.0)).norm() < 1e-14);
        assert!(herm_eigen(&g).min() > 0.0);
    }

    #[test]
    fn missing_string_is_reported() {
        let t = ExpectationTable::new(1, []).unwrap();
        let err = gram_matrix(&t, &[s("X0", 1), s("Y0", 1)]).unwrap_err();
        assert_eq!(err, Error::IncompleteData("Z0".into()));
    }

    #[test]
    fn orthonormalize_examples() {
        let id = orthonormalize(&CMat::identity(3, 3), 1e-10).unwrap();
        assert!((id.coeffs - CMat::identity(3, 3)).norm() < 1e-14);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4.0), c(1.0)]));
        let o = orthonormalize(&d, 1e-10).unwrap();
        assert!((o.coeffs[(0, 0)] - c(0.5)).norm() < 1e-14);
        assert!((o.coeffs[(1, 1)] - c(1.0)).norm() < 1e-14);
        assert_eq!(o.gram_eigenvalues, vec![4.0, 1.0]);

        let bad = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1e-3)]));
        match orthonormalize(&bad, 1e-10) {
            Err(Error::GramDegenerate { eigenvalues }) => assert_eq!(eigenvalues.len(), 1),
            other => panic!("expected GramDegenerate, got {other:?}"),
        }
    }

    #[test]
    fn orthonormalize_random_pd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = 20;
        let a = CMat::from_fn(r, r, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let g = &a * a.adjoint() + CMat::identity(r, r) * c(0.1);
        let o = orthonormalize(&g, 1e-10).unwrap();
        let check = o.coeffs.adjoint() * &g * &o.coeffs;
        assert!((check - CMat::identity(r, r)).norm() < 1e-10);
    }

    #[test]
    fn delta_of_tracial_state_is_identity() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let b = all_strings(2, false).unwrap();
        let t = exact_table(&rho, &b, &[]);
        let o = orthonormalize(&gram_matrix(&t, &b).unwrap(), 1e-10).unwrap();
        let d = build_delta(&delta_matrix_raw(&t, &b).unwrap(), &o);
        assert!((d - CMat::identity(15, 15)).norm() < 1e-13);
    }

    #[test]
    fn commuting_term_gives_zero_matrix() {
        let rho = minus_z_state();
        let b = vec![s("Z0", 1)];
        let h = PauliOperator::from(s("Z0", 1));
        let t = exact_table(&rho, &b, std::slice::from_ref(&h));
        let k = commutator_matrix_raw(&t, &b, &h).unwrap();
        assert_eq!(k.norm(), 0.0);
    }

    #[test]
    fn tracial_commutator_matches_dense_trace() {
        let n = 2;
        let rho = DensityMatrix::maximally_mixed(n).unwrap();
        let b = enumerate_geometric_k_local(n, 2, false).unwrap();
        let h = PauliOperator::from_real_terms(n, [(s("X0 Z1", n), 0.7), (s("Y1", n), -0.2)]).unwrap();
        let t = exact_table(&rho, &b, std::slice::from_ref(&h));
        let o = orthonormalize(&gram_matrix(&t, &b).unwrap(), 1e-10).unwrap();
        let hm = build_h_matrix(&commutator_matrix_raw(&t, &b, &h).unwrap(), &o);
        let hd = h.dense_matrix().unwrap();
        for (i, bi) in b.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                let bi_d = bi.dense_matrix().unwrap();
                let bj_d = bj.dense_matrix().unwrap();
                let comm = &hd * &bj_d - &bj_d * &hd;
                let want = (bi_d * comm).trace() / 4.0;
                assert!((hm.raw[(i, j)] - want).norm() < 1e-13);
            }
        }
        // tracial state: every term is a symmetry, raw matrix already Hermitian
        assert!((&hm.raw - &hm.symmetrized).norm() < 1e-13);
    }

    #[test]
    fn w_examples() {
        // diagonal term on a diagonal state
        let rho = minus_z_state();
        let b = vec![s("X0", 1), s("Y0", 1), s("Z0", 1)];
        let h = vec![PauliOperator::from(s("Z0", 1))];
        let t = exact_table(&rho, &b, &h);
        let raw = RawMoments::assemble(&t, &b, &h).unwrap();
        let m = MomentSet::compute(&raw, &MomentOptions::default()).unwrap();
        assert!(m.w.norm() < 1e-14);
        assert_eq!(m.q(), 1);

        // s = 1 with anti-Hermitian part A: W = 2 tr(A† A)
        let hm = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(3.0)]);
        let anti = (&hm - hm.adjoint()).scale(0.5);
        let (w, spec) = build_w(std::slice::from_ref(&hm));
        let want = 4.0 * (anti.adjoint() * &anti).trace().re;
        assert!((w[(0, 0)].re - want).abs() < 1e-14);
        assert!(spec[0] >= 0.0);
    }

    #[test]
    fn epsilon_w_formula() {
        assert_eq!(epsilon_w(0.0, 12345), 4e-9);
        assert_eq!(epsilon_w(0.0, 0), 4e-9);
        assert_eq!(epsilon_w(1e-4, 10_000), 4e-4);
        assert!((epsilon_w(1e-6, 10_000) - 4e-8).abs() < 1e-22);
    }

    #[test]
    fn kernel_examples() {
        let s_dim = 3;
        let w = CMat::zeros(s_dim, s_dim);
        let sym: Vec<CMat> = (0..s_dim).map(|_| CMat::identity(2, 2)).collect();
        let k = kernel_basis(&w, 4e-9, &sym, &[1.0, 2.0, 3.0]);
        assert_eq!(k.q(), 3);
        // an orthonormal basis of R^3
        let gram = &k.coeffs * k.coeffs.transpose();
        assert!((gram - RMat::identity(3, 3)).norm() < 1e-12);

        let w = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1e-15), c(1.0)]));
        let sym: Vec<CMat> = (0..2).map(|_| CMat::identity(2, 2)).collect();
        let k = kernel_basis(&w, 4e-9, &sym, &[0.5, 2.0]);
        assert_eq!(k.q(), 1);
        assert!((k.coeffs[(0, 0)].abs() - 1.0).abs() < 1e-14);
        assert!(k.coeffs[(0, 1)].abs() < 1e-14);
        assert!((k.h_tilde_expectations[0].abs() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn true_hamiltonian_lies_in_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 3;
        let basis = enumerate_geometric_k_local(n, 2, false).unwrap();
        let z: Vec<f64> = basis.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = PauliOperator::from_real_terms(n, basis.iter().cloned().zip(z.iter().copied())).unwrap();
        let rho = gibbs_density(&h, 1.3).unwrap();
        let terms: Vec<PauliOperator> = basis.iter().cloned().map(PauliOperator::from).collect();
        let t = exact_table(&rho, &basis, &terms);
        let raw = RawMoments::assemble(&t, &basis, &terms).unwrap();
        let m = MomentSet::compute(&raw, &MomentOptions::default()).unwrap();
        let zn: f64 = z.iter().map(|x| x * x).sum();
        let wz: f64 = (0..z.len())
            .flat_map(|a| (0..z.len()).map(move |b| (a, b)))
            .map(|(a, b)| z[a] * m.w[(a, b)].re * z[b])
            .sum();
        assert!(wz.abs() <= 1e-16 * m.w.norm() * zn + 1e-24, "{wz}");
        assert!(m.q() >= 1);
        // overlap of z with the kernel subspace
        let proj: Vec<f64> = (0..m.q()).map(|a| (0..z.len()).map(|b| m.kernel.coeffs[(a, b)] * z[b]).sum()).collect();
        let overlap = proj.iter().map(|x| x * x).sum::<f64>() / zn;
        assert!(overlap > 0.999_999);
    }

    #[test]
    fn spectrum_csv_format() {
        assert_eq!(spectrum_csv(&[1.0, 0.5]), "index,eigenvalue\n0,1e0\n1,5e-1\n");
    }
}
