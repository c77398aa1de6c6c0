//! Pauli strings with exact phases, operator products and commutators, checked
//! against their dense matrices.
//!
//! ```text
//! cargo run --example pauli_algebra
//! ```

use hamlearn::models::xxz_chain;
use hamlearn::pauli::{enumerate_geometric_k_local, PauliOperator, PauliString};

fn main() -> hamlearn::Result<()> {
    let n = 3;
    let a = PauliString::parse("X0 Y1", n)?;
    let b = PauliString::parse("Y0 Z2", n)?;
    let (ab, phase) = a.multiply(&b)?;
    println!("({a}) * ({b}) = i^{} {ab}", phase.power());
    println!("commute: {}", a.commutes_with(&b));

    let dense = a.dense_matrix()? * b.dense_matrix()?;
    let exact = ab.dense_matrix()? * phase.to_complex();
    println!("dense product residual {:e}", (dense - exact).norm());

    let h = xxz_chain(n, 0.5, false);
    println!("H = {h}");
    let sz = PauliOperator::from_real_terms(n, (0..n).map(|i| (PauliString::parse(&format!("Z{i}"), n).unwrap(), 1.0)))?;
    let comm = h.commutator(&sz)?;
    println!("[H, sum Z] has {} terms", comm.len());
    let hx = PauliOperator::from(PauliString::parse("X1", n)?);
    println!("[H, X1] = {}", h.commutator(&hx)?);

    for k in 1..=3 {
        let basis = enumerate_geometric_k_local(n, k, false)?;
        println!("{k}-local strings on {n} sites: {}", basis.len());
    }
    Ok(())
}
