//! Mean energy of the explicit Gaussian witness across sizes and sparsities.

use syklab::ensembles::sample_syk;
use syklab::gaussian::explicit_witness;
use syklab::spectral::mean_std;

fn main() -> syklab::Result<()> {
    let seeds = 200;
    for n in [6, 8, 10] {
        for p in [0.3, 1.0] {
            let energies = (0..seeds)
                .map(|s| Ok(explicit_witness(&sample_syk(n, 4, p, s)?)?.energy))
                .collect::<syklab::Result<Vec<f64>>>()?;
            let (mean, std) = mean_std(&energies);
            println!("n={n:<2} p={p:<3} witness energy {mean:.4} ± {:.4}", std / (seeds as f64).sqrt());
        }
    }
    Ok(())
}
