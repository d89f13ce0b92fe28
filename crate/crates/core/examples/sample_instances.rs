//! Seeded sampling: nested sparsifications, two-color instances and JSON files.

use syklab::ensembles::{binomial, sample_syk, sample_two_color};
use syklab::io::{load_syk, save_instance, InstanceFile};

fn main() -> syklab::Result<()> {
    let n = 6;
    println!("{} quartic index sets at n = {n}", binomial(2 * n, 4));
    for p in [0.1, 0.3, 1.0] {
        let h = sample_syk(n, 4, p, 42)?;
        let sum_sq: f64 = h.terms.iter().map(|t| t.coeff * t.coeff).sum();
        println!("p = {p}: {:>3} terms, Σ coeff² = {sum_sq:.3}", h.terms.len());
    }

    let tc = sample_two_color(6, 3, 0.5, 42)?;
    println!(
        "two-color n1 = 6, n2 = 3: {} terms on {} qubits",
        tc.term_count(),
        tc.register.n_qubits()
    );

    let path = std::env::temp_dir().join("syklab_example_instance.json");
    let h = sample_syk(4, 4, 0.5, 7)?;
    save_instance(&InstanceFile::from(&h), &path)?;
    let back = load_syk(&path)?;
    println!("round trip through {}: {}", path.display(), back.terms == h.terms);
    Ok(())
}
