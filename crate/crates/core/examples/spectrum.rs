//! Largest eigenvalue by dense diagonalization and restarted Lanczos.

use std::time::Instant;

use syklab::ensembles::sample_syk;
use syklab::spectral::{lambda_max, Method, SolverOptions};

fn main() -> syklab::Result<()> {
    let opts = SolverOptions {
        tol: 1e-10,
        ..SolverOptions::default()
    };
    for n in [6, 8, 10, 12] {
        let h = sample_syk(n, 4, 0.5, 1)?.hamiltonian();
        let t = Instant::now();
        let lanczos = lambda_max(&h, Method::Lanczos, &opts)?;
        let lt = t.elapsed();
        let t = Instant::now();
        let dense = lambda_max(&h, Method::Dense, &opts)?;
        println!(
            "n = {n:>2}: lanczos {:.12} ({} it, {lt:.1?}), dense {:.12} ({:.1?})",
            lanczos.lambda_max,
            lanczos.iterations,
            dense.lambda_max,
            t.elapsed()
        );
    }
    Ok(())
}
