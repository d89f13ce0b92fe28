//! Lovász theta of randomly sparsified quartic commutation graphs and the √p fit.

use std::time::Instant;

use syklab::lovasz::{full_degree_graph, scaling_points, sparsified_thetas, sqrt_scaling_fit, ThetaOptions};

fn main() -> syklab::Result<()> {
    let g = full_degree_graph(5, 4)?;
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let start = Instant::now();
    let rows = sparsified_thetas(&g, &grid, 10, 9, &ThetaOptions::sweep())?;
    let fit = sqrt_scaling_fit(&scaling_points(&rows))?;
    for p in &fit.points {
        println!("p={:.1} theta = {:.4} ± {:.4}", p.p, p.mean, p.std);
    }
    println!("c1√p + c2: c1 = {:.4}, c2 = {:.4}, residual {:.4e}", fit.c1, fit.c2, fit.residual_sqrt);
    println!("linear   : a1 = {:.4}, a2 = {:.4}, residual {:.4e}", fit.linear_c1, fit.linear_c2, fit.residual_linear);
    println!("unconverged solves: {}", rows.iter().filter(|r| !r.converged).count());
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
