//! Best Gaussian energy against the exact top eigenvalue.

use syklab::ensembles::sample_syk;
use syklab::gaussian::{approx_factor, explicit_witness, gaussian_maximize, GaussianOptions};
use syklab::spectral::{lambda_max, Method, SolverOptions};

fn main() -> syklab::Result<()> {
    for (n, p) in [(4, 1.0), (6, 0.5), (6, 1.0), (8, 0.3)] {
        let h = sample_syk(n, 4, p, 5)?;
        let top = lambda_max(&h.hamiltonian(), Method::Dense, &SolverOptions::default())?.lambda_max;
        let opt = gaussian_maximize(&h, &GaussianOptions::default())?;
        let witness = explicit_witness(&h)?;
        println!(
            "n = {n}, p = {p}: λ_max {top:.4}, Gaussian {:.4} (ratio {:.3}, {} stalled), witness {:.4}",
            opt.energy,
            approx_factor(top, opt.energy)?,
            opt.stalled_runs,
            witness.energy
        );
    }
    Ok(())
}
