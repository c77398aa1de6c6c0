//! Model Hamiltonians used by the experiments and tests.

use rand::Rng;

use crate::error::Result;
use crate::pauli::{enumerate_geometric_k_local, Pauli, PauliOperator, PauliString};

/// Open XXZ ferromagnet `-Σ (X_i X_{i+1} + Y_i Y_{i+1} + δ Z_i Z_{i+1})`.
///
/// With `literal_form` the anisotropic term is `δ Y_i Y_{i+1}` instead of `δ Z_i Z_{i+1}`.
pub fn xxz_chain(n: usize, anisotropy: f64, literal_form: bool) -> PauliOperator {
    let mut h = PauliOperator::zero(n);
    let pair = |i: usize, p: Pauli| PauliString::new(n, [(i, p), (i + 1, p)]).expect("sites in range");
    let third = if literal_form { Pauli::Y } else { Pauli::Z };
    for i in 0..n.saturating_sub(1) {
        h.add_term(pair(i, Pauli::X), (-1.0).into());
        h.add_term(pair(i, Pauli::Y), (-1.0).into());
        h.add_term(pair(i, third), (-anisotropy).into());
    }
    h
}

/// Uniform random coefficients in `[-1, 1)` on every geometrically `k`-local string.
pub fn random_k_local(n: usize, k: usize, rng: &mut impl Rng) -> Result<PauliOperator> {
    let basis = enumerate_geometric_k_local(n, k, false)?;
    PauliOperator::from_real_terms(n, basis.into_iter().map(|p| (p, rng.random_range(-1.0..1.0))))
}
