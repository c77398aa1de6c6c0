//! Dense preparation of Gibbs states, evaluation of Pauli expectations and the
//! Gaussian measurement-noise model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, CMat, HermEigen};
use crate::pauli::{check_dense_limit, PauliOperator, PauliString, Phase};

/// A density matrix on `n` qubits, optionally carrying its eigendecomposition.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    matrix: CMat,
    eigen: Option<HermEigen>,
}

impl DensityMatrix {
    /// Wraps `matrix` after checking Hermiticity, unit trace and positivity.
    pub fn new(n: usize, matrix: CMat) -> Result<Self> {
        let rho = Self::new_unchecked(n, matrix)?;
        rho.validate(1e-12)?;
        Ok(rho)
    }

    /// Wraps `matrix` checking only its shape.
    pub fn new_unchecked(n: usize, matrix: CMat) -> Result<Self> {
        check_dense_limit(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Contract(format!("density matrix must be {dim}x{dim}")));
        }
        Ok(DensityMatrix { n, matrix, eigen: None })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        Self::new(n, CMat::identity(dim, dim).unscale(dim as f64))
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = &self.matrix;
        let herm = (m - m.adjoint()).norm();
        if herm > tol * (1.0 + m.norm()) {
            return Err(Error::Contract(format!("density matrix not Hermitian (residual {herm:e})")));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol * (m.nrows() as f64).max(1.0) {
            return Err(Error::Contract(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = self.eigen().min();
        if min < -tol {
            return Err(Error::Contract(format!("density matrix has negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigendecomposition of ρ (cached when the state was built from one).
    pub fn eigen(&self) -> HermEigen {
        match &self.eigen {
            Some(e) => e.clone(),
            None => herm_eigen(&self.matrix),
        }
    }

    /// Matrix function of ρ through its eigendecomposition.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> CMat {
        self.eigen().apply(f)
    }

    pub fn log(&self) -> CMat {
        self.function(f64::ln)
    }

    pub fn entropy(&self) -> f64 {
        self.eigen().values.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
    }
}

/// `e^{-h/T} / tr e^{-h/T}` by Hermitian diagonalization of the dense Hamiltonian.
pub fn gibbs_density(h: &PauliOperator, temperature: f64) -> Result<DensityMatrix> {
    if !h.is_selfadjoint() {
        return Err(Error::Contract("Hamiltonian must be selfadjoint".into()));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Contract(format!("temperature must be positive, got {temperature}")));
    }
    let hm = h.dense_matrix()?;
    let eig = herm_eigen(&hm);
    let e0 = eig.min();
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let dim = weights.len();
    // ascending order of ρ's eigenvalues is descending energy
    let values: Vec<f64> = weights.iter().rev().map(|w| w / z).collect();
    let vectors = CMat::from_fn(dim, dim, |r, k| eig.vectors[(r, dim - 1 - k)]);
    let cache = HermEigen { values, vectors };
    let matrix = cache.apply(|x| x);
    let matrix = (&matrix + matrix.adjoint()).scale(0.5);
    Ok(DensityMatrix { n: h.n(), matrix, eigen: Some(cache) })
}

/// `tr(ρ p)`, complex in general (real for selfadjoint strings up to rounding).
pub fn expectation_complex(rho: &DensityMatrix, p: &PauliString) -> Result<Complex64> {
    if p.n() != rho.n {
        return Err(Error::DimensionMismatch { expected: rho.n, found: p.n() });
    }
    let (xm, zm, ny) = p.masks();
    let base = Phase::from_power(ny).to_complex();
    let m = &rho.matrix;
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..rho.dim() {
        let y = x ^ xm;
        let sign = if (x & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        // p|x> = base·sign |y>, so p[y, x] pairs with ρ[x, y]
        acc += m[(x, y)] * base * sign;
    }
    Ok(acc)
}

pub fn expectation(rho: &DensityMatrix, p: &PauliString) -> Result<f64> {
    Ok(expectation_complex(rho, p)?.re)
}

/// Every Pauli string whose expectation is needed to assemble the Gram, Delta and
/// commutator matrices, plus the strings of each Hamiltonian term and the identity.
pub fn required_strings(b_basis: &[PauliString], h_terms: &[PauliOperator]) -> Result<BTreeSet<PauliString>> {
    let n = match (b_basis.first(), h_terms.first()) {
        (Some(b), _) => b.n(),
        (None, Some(h)) => h.n(),
        (None, None) => return Ok(BTreeSet::new()),
    };
    for b in b_basis {
        if b.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.n() });
        }
    }
    for h in h_terms {
        if h.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h.n() });
        }
    }
    let mut out = BTreeSet::new();
    out.insert(PauliString::identity(n));
    for bi in b_basis {
        for bj in b_basis {
            out.insert(bi.multiply_unchecked(bj).0);
        }
    }
    for h in h_terms {
        for (p, _) in h.terms() {
            out.insert(p.clone());
            for bj in b_basis {
                if p.commutes_with(bj) {
                    continue;
                }
                let (pb, _) = p.multiply_unchecked(bj);
                for bi in b_basis {
                    out.insert(bi.multiply_unchecked(&pb).0);
                }
            }
        }
    }
    Ok(out)
}

/// Map from Pauli string to a (possibly noisy) expectation value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTable {
    n: usize,
    values: BTreeMap<PauliString, f64>,
    noise_sigma: f64,
    seed: Option<u64>,
}

impl ExpectationTable {
    /// An exact table; the identity entry is forced to 1.
    pub fn new(n: usize, values: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (p, v) in values {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n() });
            }
            map.insert(p, v);
        }
        map.insert(PauliString::identity(n), 1.0);
        Ok(ExpectationTable { n, values: map, noise_sigma: 0.0, seed: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.values.iter().map(|(p, &v)| (p, v))
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.values.contains_key(p)
    }

    pub fn get(&self, p: &PauliString) -> Result<f64> {
        self.values.get(p).copied().ok_or_else(|| Error::IncompleteData(p.to_string()))
    }

    /// `ω(p_1 p_2)` for strings, including the product phase.
    pub fn product(&self, p: &PauliString, q: &PauliString) -> Result<Complex64> {
        let (r, ph) = p.multiply(q)?;
        Ok(ph.to_complex() * self.get(&r)?)
    }

    /// `ω(op)` for a sparse operator.
    pub fn operator_value(&self, op: &PauliOperator) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &c) in op.terms() {
            acc += c * self.get(p)?;
        }
        Ok(acc)
    }

    /// Line format: `# n = ..`, `# sigma_noise = ..`, `# seed = ..|none` headers, then
    /// `PAULI<tab>value` rows in canonical order. Floats print in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# n = {}", self.n);
        let _ = writeln!(out, "# sigma_noise = {}", self.noise_sigma);
        match self.seed {
            Some(s) => {
                let _ = writeln!(out, "# seed = {s}");
            }
            None => {
                let _ = writeln!(out, "# seed = none");
            }
        }
        for (p, v) in &self.values {
            let _ = writeln!(out, "{p}\t{v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut sigma = 0.0;
        let mut seed = None;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let perr = |message: String| Error::Parse { line: line_no, message };
            let line = raw.trim_end();
            if line.trim().is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let Some((key, value)) = header.split_once('=') else {
                    continue;
                };
                let value = value.trim();
                match key.trim() {
                    "n" => n = Some(value.parse().map_err(|_| perr(format!("bad n `{value}`")))?),
                    "sigma_noise" => {
                        sigma = value.parse().map_err(|_| perr(format!("bad sigma_noise `{value}`")))?
                    }
                    "seed" => {
                        seed = match value {
                            "none" => None,
                            v => Some(v.parse().map_err(|_| perr(format!("bad seed `{v}`")))?),
                        }
                    }
                    _ => {}
                }
                continue;
            }
            let n = n.ok_or_else(|| perr("`# n = ...` header must precede data rows".into()))?;
            let (pauli, value) = line
                .split_once('\t')
                .ok_or_else(|| perr("expected `PAULI<tab>value`".into()))?;
            let p = PauliString::parse(pauli, n).map_err(|e| match e {
                Error::Parse { message, .. } => perr(message),
                other => other,
            })?;
            let v: f64 = value.trim().parse().map_err(|_| perr(format!("bad value `{value}`")))?;
            values.insert(p, v);
        }
        let n = n.ok_or(Error::Parse { line: 0, message: "missing `# n = ...` header".into() })?;
        Ok(ExpectationTable { n, values, noise_sigma: sigma, seed })
    }
}

/// Exact table of `tr(ρ p)` over `strings`.
pub fn build_table<'a>(rho: &DensityMatrix, strings: impl IntoIterator<Item = &'a PauliString>) -> Result<ExpectationTable> {
    let strings: Vec<&PauliString> = strings.into_iter().collect();
    let values: Vec<(PauliString, f64)> = strings
        .par_iter()
        .map(|p| expectation(rho, p).map(|v| ((*p).clone(), v)))
        .collect::<Result<_>>()?;
    ExpectationTable::new(rho.n(), values)
}

/// SplitMix64 finalizer folded over `parts`; stable across platforms and releases.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Adds an independent `N(0, σ²)` draw to every non-identity entry. Each draw is keyed by
/// `(seed, index of the string in canonical order)`, so results never depend on scheduling.
pub fn add_noise(table: &ExpectationTable, sigma: f64, seed: u64) -> Result<ExpectationTable> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Contract(format!("noise standard deviation must be >= 0, got {sigma}")));
    }
    let mut out = table.clone();
    out.noise_sigma = (table.noise_sigma.powi(2) + sigma.powi(2)).sqrt();
    out.seed = Some(seed);
    if sigma == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Contract(e.to_string()))?;
    for (idx, (p, v)) in out.values.iter_mut().enumerate() {
        if p.is_identity() {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, idx as u64]));
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::xxz_chain;
    use crate::pauli::{all_strings, enumerate_geometric_k_local, Pauli};

    fn s(text: &str, n: usize) -> PauliString {
        PauliString::parse(text, n).unwrap()
    }

    fn minus_z() -> PauliOperator {
        PauliOperator::from_real_terms(1, [(s("Z0", 1), -1.0)]).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_maximally_mixed() {
        for t in [0.3, 1.0, 7.0] {
            let rho = gibbs_density(&PauliOperator::zero(2), t).unwrap();
            let want = CMat::identity(4, 4).unscale(4.0);
            assert!((rho.matrix() - want).norm() < 1e-14);
        }
    }

    #[test]
    fn two_level_closed_form() {
        let rho = gibbs_density(&minus_z(), 1.0).unwrap();
        let z = expectation(&rho, &s("Z0", 1)).unwrap();
        assert!((z - 1f64.tanh()).abs() < 1e-14);
        assert!((z - 0.76159).abs() < 1e-5);
        assert!(expectation(&rho, &s("X0", 1)).unwrap().abs() < 1e-15);
        rho.validate(1e-12).unwrap();
    }

    #[test]
    fn gibbs_matches_scaling_and_squaring() {
        let h = xxz_chain(4, 0.5, false);
        let t = 2.0;
        let rho = gibbs_density(&h, t).unwrap();
        let hm = h.dense_matrix().unwrap();
        let e = (hm.unscale(-t)).exp();
        let z = e.trace();
        let rho2 = e.map(|x| x / z);
        assert!((rho.matrix() - &rho2).norm() < 1e-12);
        // commutes with h
        let comm = rho.matrix() * &hm - &hm * rho.matrix();
        assert!(comm.norm() < 1e-10);
        for p in enumerate_geometric_k_local(4, 2, false).unwrap() {
            let pm = p.dense_matrix().unwrap();
            let dense = (rho2.clone() * pm).trace().re;
            assert!((expectation(&rho, &p).unwrap() - dense).abs() < 1e-12);
        }
        // ferromagnetic XX correlation
        assert!(expectation(&rho, &s("X0 X1", 4)).unwrap() > 0.0);
    }

    #[test]
    fn scaling_gauge() {
        let h = xxz_chain(3, 0.5, false);
        let a = gibbs_density(&h, 1.5).unwrap();
        let b = gibbs_density(&h.scale(Complex64::new(3.0, 0.0)), 4.5).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-13);
    }

    #[test]
    fn rejects_bad_inputs() {
        let nonherm = PauliOperator::from_terms(1, [(s("Z0", 1), Complex64::new(0.0, 1.0))]).unwrap();
        assert!(gibbs_density(&nonherm, 1.0).is_err());
        assert!(gibbs_density(&minus_z(), 0.0).is_err());
        assert!(gibbs_density(&minus_z(), -1.0).is_err());
    }

    #[test]
    fn maximally_mixed_expectations_vanish() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        let strings = all_strings(3, true).unwrap();
        let t = build_table(&rho, &strings).unwrap();
        for (p, v) in t.iter() {
            if p.is_identity() {
                assert_eq!(v, 1.0);
            } else {
                assert!(v.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gibbs_minimizes_free_energy() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            let basis = enumerate_geometric_k_local(n, n.min(2), false).unwrap();
            let h = PauliOperator::from_real_terms(
                n,
                basis.iter().map(|p| (p.clone(), rng.random_range(-1.0..1.0))),
            )
            .unwrap();
            let t = 0.8;
            let rho = gibbs_density(&h, t).unwrap();
            let hm = h.dense_matrix().unwrap();
            let free = |r: &DensityMatrix| -t * r.entropy() + (r.matrix() * &hm).trace().re;
            let f0 = free(&rho);
            let eig = rho.eigen();
            for _ in 0..100 {
                // perturb the populations in h's eigenbasis
                let mut w: Vec<f64> = eig.values.iter().map(|&p| p * (1.0 + 0.5 * rng.random_range(-1.0..1.0))).collect();
                let z: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= z);
                let pert = HermEigen { values: w, vectors: eig.vectors.clone() }.apply(|x| x);
                let other = DensityMatrix::new(n, (&pert + pert.adjoint()).scale(0.5)).unwrap();
                assert!(free(&other) >= f0 - 1e-12);
            }
        }
    }

    #[test]
    fn required_strings_examples() {
        let b = vec![s("X0", 1)];
        let h = vec![PauliOperator::from_string(s("Z0", 1))];
        let req = required_strings(&b, &h).unwrap();
        let all: BTreeSet<_> = all_strings(1, true).unwrap().into_iter().collect();
        assert!(req.is_subset(&all));
        // X·X = I, Z itself, X·[Z, X] ∝ X·Y ∝ Z
        assert!(req.contains(&s("Z0", 1)));
        assert!(req.contains(&PauliString::identity(1)));

        let only_id = required_strings(&[PauliString::identity(2)], &[]).unwrap();
        assert_eq!(only_id.len(), 1);

        // at n = 4 products of two disjoint 2-local strings already reach every string
        let basis = enumerate_geometric_k_local(4, 2, false).unwrap();
        let terms: Vec<PauliOperator> = basis.iter().cloned().map(PauliOperator::from).collect();
        assert_eq!(required_strings(&basis, &terms).unwrap().len(), 256);
        let basis = enumerate_geometric_k_local(6, 2, false).unwrap();
        let terms: Vec<PauliOperator> = basis.iter().cloned().map(PauliOperator::from).collect();
        let req = required_strings(&basis, &terms).unwrap();
        assert!(req.len() < 4096);
        assert!(!req.contains(&s("X0 X2 X4", 6)));
        // b_i [h, b_j] with 2-local pieces: the commutator part stays inside a 3-site window
        for hp in &basis {
            for bj in &basis {
                if !hp.commutes_with(bj) {
                    assert!(hp.multiply(bj).unwrap().0.window().1 <= 3);
                }
            }
        }
    }

    #[test]
    fn table_round_trip_and_noise() {
        let h = xxz_chain(3, 0.5, false);
        let rho = gibbs_density(&h, 1.0).unwrap();
        let strings = all_strings(3, true).unwrap();
        let exact = build_table(&rho, &strings).unwrap();
        assert_eq!(ExpectationTable::from_text(&exact.to_text()).unwrap(), exact);

        let same = add_noise(&exact, 0.0, 99).unwrap();
        assert!(exact.iter().zip(same.iter()).all(|(a, b)| a == b));

        let a = add_noise(&exact, 1e-3, 5).unwrap();
        let b = add_noise(&exact, 1e-3, 5).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(ExpectationTable::from_text(&a.to_text()).unwrap(), a);
        assert_eq!(a.get(&PauliString::identity(3)).unwrap(), 1.0);
        assert!(add_noise(&exact, -1.0, 0).is_err());
    }

    #[test]
    fn noise_statistics() {
        let strings = all_strings(7, false).unwrap();
        assert!(strings.len() >= 10_000);
        let exact = ExpectationTable::new(7, strings.into_iter().map(|p| (p, 0.0))).unwrap();
        let sigma = 1e-3;
        let noisy = add_noise(&exact, sigma, 2024).unwrap();
        let diffs: Vec<f64> = noisy.iter().filter(|(p, _)| !p.is_identity()).map(|(_, v)| v).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
        assert!((var.sqrt() / sigma - 1.0).abs() < 0.05);
    }

    #[test]
    fn incomplete_table_names_string() {
        let t = ExpectationTable::new(2, []).unwrap();
        let err = t.get(&PauliString::single(2, 1, Pauli::Y).unwrap()).unwrap_err();
        assert_eq!(err, Error::IncompleteData("Y1".into()));
    }

    #[test]
    fn parse_errors_are_line_precise() {
        let err = ExpectationTable::from_text("# n = 2\nI\t1\nX5\t0.1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
