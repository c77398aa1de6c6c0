//! The temperature/Hamiltonian program on a small hand-built instance, with its dual
//! certificate and recomputed optimality residuals.
//!
//! ```text
//! cargo run --example sdp_solve
//! ```

use hamlearn::linalg::CMat;
use hamlearn::sdp::{check_solution, solve, SdpOptions, SdpProblem};
use nalgebra::DVector;
use num_complex::Complex64;

fn diag(v: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0))))
}

fn main() -> hamlearn::Result<()> {
    // μ(T) = min(1 − T, 2 − 2T) once the normalization pins y = 1, so the optimum sits at T = 0
    let problem = SdpProblem::new(diag(&[-1.0, -2.0]), vec![diag(&[1.0, 2.0])], vec![-1.0], SdpOptions::default())?;
    let sol = solve(&problem)?;
    println!("status {:?} after {} iterations", sol.status, sol.iterations);
    println!("mu* = {:.9}, T* = {:e}, y* = {:?}", sol.mu_star, sol.t_star, sol.y_star);
    println!("temperature at zero: {}", sol.temperature_at_zero);
    println!("dual certificate:\n{}", sol.dual_certificate.map(|z| z.re));

    let rep = check_solution(&problem, &sol);
    println!("primal {:e} dual {:e} gap {:e}", rep.primal(), rep.dual(), rep.gap);

    println!("{}", problem.to_json());
    Ok(())
}
