//! Theta of full quartic commutation graphs and sampled commutation-index bounds.

use syklab::lovasz::{commutation_index_bounds, full_degree_graph, lovasz_theta, StateSampling, ThetaOptions};

fn main() -> syklab::Result<()> {
    for n in 3..=6 {
        let g = full_degree_graph(n, 4)?;
        let r = lovasz_theta(&g.graph, &ThetaOptions::default(), None)?;
        let b = commutation_index_bounds(&g, r.theta, &StateSampling::default())?;
        println!(
            "n = {n}: {:>3} vertices, {:>5} edges, θ = {:.4} (gap {:.1e}), θ/n² = {:.4}, Δ in [{:.4}, {:.4}]",
            g.vertex_count(),
            g.graph.edge_count(),
            r.theta,
            r.gap(),
            r.theta / (n * n) as f64,
            b.lower,
            b.upper
        );
    }
    Ok(())
}
