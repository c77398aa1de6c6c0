//! Recover a Hamiltonian and its temperature from Gibbs-state expectation values.
//!
//! First a random 2-local Hamiltonian on three qubits with the full operator algebra
//! as perturbations, then the six-site XXZ chain with only 2-local perturbations.
//!
//! ```text
//! cargo run --release --example reconstruct
//! ```

use hamlearn::learner::{reconstruct, recovery_report, ReconstructOptions};
use hamlearn::models::{random_k_local, xxz_chain};
use hamlearn::pauli::{all_strings, enumerate_geometric_k_local, PauliOperator, PauliString};
use hamlearn::state::{build_table, gibbs_density, required_strings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(h: &PauliOperator, b: &[PauliString], temperature: f64) -> hamlearn::Result<()> {
    let n = h.n();
    let h_strings = enumerate_geometric_k_local(n, 2, false)?;
    let h_terms: Vec<PauliOperator> = h_strings.iter().cloned().map(PauliOperator::from).collect();
    let rho = gibbs_density(h, temperature)?;
    let table = build_table(&rho, &required_strings(b, &h_terms)?)?;

    let result = reconstruct(&table, b, &h_terms, &ReconstructOptions::default())?;
    print!("{}", result.summary());
    let z = h.real_coefficients(&h_strings);
    if let Some(t_star) = result.t_star {
        let rep = recovery_report(&result.y_star, t_star, &z, temperature)?;
        println!("theta = {:e}, T*/T = {:.6}", rep.theta, rep.temperature_ratio);
    }
    Ok(())
}

fn main() -> hamlearn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_k_local(3, 2, &mut rng)?;
    println!("random 2-local H on 3 sites, full algebra, T = 1");
    run(&h, &all_strings(3, false)?, 1.0)?;

    println!();
    println!("XXZ chain on 6 sites, 2-local perturbations, T = 1");
    run(&xxz_chain(6, 0.5, false), &enumerate_geometric_k_local(6, 2, false)?, 1.0)
}
