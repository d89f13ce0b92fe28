//! Energy of the rotated two-color state along θ, with its quadratic lower bound.

use syklab::ensembles::{default_split, sample_syk, sample_two_color};
use syklab::ho::{reduction_consistency, theta_grid, theta_sweep};

fn main() -> syklab::Result<()> {
    let inst = sample_two_color(6, 3, 1.0, 2)?;
    let r = theta_sweep(&inst, &theta_grid(1.0, 0.05)?)?;
    println!("S = {:.4}, D = {:.4}", r.single_commutator, r.double_commutator_norm);
    for (t, e) in r.grid.iter().zip(&r.energies).step_by(2) {
        println!("θ = {t:.2}  E = {e:.5}  bound {:.5}", r.lower_bound(*t));
    }
    println!("best θ = {:.2}, E* = {:.5}", r.best_theta, r.best_energy);

    let h = sample_syk(5, 4, 1.0, 2)?;
    let check = reduction_consistency(&h, default_split(5), r.best_theta)?;
    println!(
        "full instance: Tr ρH = {:.5} = C3·{:.5} + {:.5} (C3 = {:.4}, error {:.1e})",
        check.total,
        check.two_color_part,
        check.remainder_part,
        check.c3,
        check.error()
    );
    Ok(())
}
