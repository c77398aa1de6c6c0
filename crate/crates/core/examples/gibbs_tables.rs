//! Exact Gibbs states of the XXZ chain and the expectation tables the learner reads,
//! with and without Gaussian measurement noise.
//!
//! ```text
//! cargo run --release --example gibbs_tables -- 4 1.0
//! ```

use hamlearn::models::xxz_chain;
use hamlearn::pauli::{enumerate_geometric_k_local, PauliOperator};
use hamlearn::state::{add_noise, build_table, gibbs_density, required_strings};

fn main() -> hamlearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let temperature: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1.0);

    let h = xxz_chain(n, 0.5, false);
    let rho = gibbs_density(&h, temperature)?;
    println!("n = {n}, T = {temperature}, entropy = {:.6}", rho.entropy());

    let b = enumerate_geometric_k_local(n, 2, false)?;
    let h_terms: Vec<PauliOperator> = b.iter().cloned().map(PauliOperator::from).collect();
    let required = required_strings(&b, &h_terms)?;
    println!("{} perturbing operators need {} expectation values", b.len(), required.len());

    let exact = build_table(&rho, &required)?;
    let noisy = add_noise(&exact, 1e-4, 7)?;
    let text = noisy.to_text();
    for line in text.lines().take(8) {
        println!("{line}");
    }
    println!("... {} lines", text.lines().count());

    let energy = exact.operator_value(&h)?.re;
    println!("energy exact {energy:.10} noisy {:.10}", noisy.operator_value(&h)?.re);
    Ok(())
}
