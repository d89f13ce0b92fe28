//! Property tests across modules.

use proptest::prelude::*;

use syklab::algebra::{anticommutes, multiply, MajoranaMonomial};
use syklab::ensembles::{binomial, sample_syk, sample_two_color};
use syklab::experiment::{run_experiment, ExperimentConfig, MANIFEST_FILE};
use syklab::gaussian::{covariance_of, explicit_witness, materialize_gaussian, CovarianceMatrix, WITNESS_C0};
use syklab::ho::{HoSystem, HO_QUBIT_CAP};
use syklab::io::{load_syk, save_instance, InstanceFile};
use syklab::lovasz::{full_degree_graph, lovasz_theta, sparsify_vertices, Graph, ThetaOptions};
use syklab::spectral::{dense_lambda_max, mean_std};
use syklab::Error;

fn monomial(n_majoranas: usize) -> impl Strategy<Value = MajoranaMonomial> {
    (proptest::collection::vec(any::<bool>(), n_majoranas), 0u8..4).prop_map(move |(mask, phase)| {
        let idx: Vec<usize> = (1..=n_majoranas).filter(|&i| mask[i - 1]).collect();
        MajoranaMonomial::new(n_majoranas, &idx, phase).unwrap()
    })
}

fn triple() -> impl Strategy<Value = (MajoranaMonomial, MajoranaMonomial, MajoranaMonomial)> {
    (1usize..=32).prop_flat_map(|n| (monomial(2 * n), monomial(2 * n), monomial(2 * n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn products_are_associative((a, b, c) in triple()) {
        let left = multiply(&multiply(&a, &b).unwrap(), &c).unwrap();
        let right = multiply(&a, &multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn swap_sign_matches_anticommutation((a, b, _) in triple()) {
        let ab = multiply(&a, &b).unwrap();
        let ba = multiply(&b, &a).unwrap();
        prop_assert_eq!(ab.support_bits(), ba.support_bits());
        let flipped = ab.phase_quarter() == (ba.phase_quarter() + 2) % 4;
        prop_assert_eq!(flipped, anticommutes(&a, &b).unwrap());
        prop_assert!(flipped || ab.phase_quarter() == ba.phase_quarter());
    }

    #[test]
    fn hermitian_monomials_square_to_identity((a, _, _) in triple()) {
        let h = MajoranaMonomial::hermitian(a.n_majoranas(), &a.indices()).unwrap();
        let sq = multiply(&h, &h).unwrap();
        prop_assert!(sq.is_identity());
        prop_assert_eq!(sq.phase_quarter(), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sparsification_nests(n in 2usize..=7, seed in any::<u64>(), p1 in 0.01f64..1.0, p2 in 0.01f64..1.0) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let small = sample_syk(n, 4, lo, seed).unwrap();
        let big = sample_syk(n, 4, hi, seed).unwrap();
        for t in &small.terms {
            let parent = big.terms.iter().find(|u| u.monomial == t.monomial);
            prop_assert!(parent.is_some());
            prop_assert_eq!(parent.unwrap().coupling.to_bits(), t.coupling.to_bits());
        }
    }

    #[test]
    fn sampling_is_deterministic(n in 2usize..=6, seed in any::<u64>(), p in 0.05f64..=1.0) {
        let a = sample_syk(n, 4, p, seed).unwrap();
        let b = sample_syk(n, 4, p, seed).unwrap();
        prop_assert_eq!(a.terms, b.terms);
        let x = sample_two_color(6, 3, p, seed).unwrap();
        let y = sample_two_color(6, 3, p, seed).unwrap();
        prop_assert_eq!(x.tau_terms, y.tau_terms);
    }

    #[test]
    fn instance_files_roundtrip(n in 2usize..=6, seed in any::<u64>(), p in 0.05f64..=1.0) {
        let h = sample_syk(n, 4, p, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.json");
        save_instance(&InstanceFile::from(&h), &path).unwrap();
        let back = load_syk(&path).unwrap();
        prop_assert_eq!(back.terms, h.terms);
        prop_assert_eq!(back.p.to_bits(), h.p.to_bits());
    }

    #[test]
    fn random_pure_states_are_pure_and_reconstructible(modes in 1usize..=4, seed in any::<u64>()) {
        let g = CovarianceMatrix::random_pure(2 * modes, seed).unwrap();
        prop_assert!(g.is_pure());
        let rho = materialize_gaussian(&g, 8).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
        let back = covariance_of(&rho).unwrap();
        for i in 0..2 * modes {
            for j in 0..2 * modes {
                prop_assert!((back.get(i, j) - g.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn propagator_is_unitary(seed in 0u64..1000, theta in -2.0f64..2.0, p in 0.2f64..=1.0) {
        let inst = sample_two_color(4, 2, p, seed).unwrap();
        let sys = HoSystem::new(&inst, HO_QUBIT_CAP).unwrap();
        let u = sys.propagator(theta);
        let eye = syklab::algebra::DenseOperator::identity(u.dim());
        prop_assert!(u.matmul(&u.adjoint()).max_abs_diff(&eye) < 1e-10);
        let rho = sys.rho_theta(theta);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(rho.is_hermitian(1e-10));
        prop_assert!(sys.energy(0.0).abs() < 1e-12);
    }

    #[test]
    fn theta_product_with_complement_is_at_least_vertex_count(
        v in 2usize..=9,
        mask in proptest::collection::vec(any::<bool>(), 36),
    ) {
        let edges: Vec<(usize, usize)> = (0..v)
            .flat_map(|a| (a + 1..v).map(move |b| (a, b)))
            .zip(&mask)
            .filter(|(_, &keep)| keep)
            .map(|(e, _)| e)
            .collect();
        let g = Graph::from_edges(v, &edges).unwrap();
        let opts = ThetaOptions::default();
        let t = lovasz_theta(&g, &opts, None).unwrap();
        let tc = lovasz_theta(&g.complement(), &opts, None).unwrap();
        prop_assert!(t.upper * tc.upper >= v as f64 - 1e-6);
        prop_assert!(t.theta <= t.upper + 1e-9);
        prop_assert!(t.theta >= 1.0 - 1e-9 && t.theta <= v as f64 + 1e-9);
    }

    #[test]
    fn sparsified_graphs_replay(seed in any::<u64>(), p in 0.05f64..=1.0) {
        let g = full_degree_graph(3, 4).unwrap();
        let a = sparsify_vertices(&g, p, seed).unwrap();
        let b = sparsify_vertices(&g, p, seed).unwrap();
        prop_assert_eq!(a.graph, b.graph);
        prop_assert_eq!(a.lineage, b.lineage);
    }

    #[test]
    fn invalid_configs_never_run(
        n in prop_oneof![Just(0usize), Just(3), Just(25), Just(40)],
        p in prop_oneof![Just(0.0f64), Just(-0.5), Just(1.5), Just(f64::NAN)],
        trials in 0usize..3,
        kind in 0usize..4,
    ) {
        let json = match kind {
            0 => serde_json::json!({"experiment": "universality", "n": [n], "p": [p], "trials": trials}),
            1 => serde_json::json!({"experiment": "gap", "n": [n], "p": [p], "trials": trials}),
            2 => serde_json::json!({"experiment": "witness", "n": [n], "p": [p], "trials": trials}),
            _ => serde_json::json!({"experiment": "lovasz-scaling", "n": n, "p": [p], "trials": trials}),
        };
        // NaN serializes as null, which must itself be rejected
        let parsed = ExperimentConfig::from_json(&json.to_string());
        if let Ok(cfg) = parsed {
            prop_assert!(!cfg.validate().is_empty());
            let dir = tempfile::tempdir().unwrap();
            let err = run_experiment(&cfg, dir.path()).unwrap_err();
            prop_assert!(matches!(err, Error::Config(_)));
            prop_assert!(!dir.path().join(MANIFEST_FILE).exists());
        }
    }
}

#[test]
fn term_count_and_coefficient_scale_match_the_ensemble() {
    for (n, p) in [(4usize, 0.3f64), (5, 0.5), (6, 0.1)] {
        let total = binomial(2 * n, 4);
        let counts: Vec<f64> = (0..200u64).map(|s| sample_syk(n, 4, p, s).unwrap().terms.len() as f64).collect();
        let (mean, _) = mean_std(&counts);
        let sigma = (total * p * (1.0 - p) / 200.0).sqrt();
        assert!((mean - total * p).abs() < 5.0 * sigma, "n={n} p={p}: mean count {mean} vs {}", total * p);

        // Σ coeff² has expectation 1 under the p^{-1/2} binom^{-1/2} normalization
        let sq: Vec<f64> = (0..200u64)
            .map(|s| sample_syk(n, 4, p, s).unwrap().terms.iter().map(|t| t.coeff * t.coeff).sum())
            .collect();
        let (m2, s2) = mean_std(&sq);
        assert!((m2 - 1.0).abs() < 5.0 * s2 / 200f64.sqrt(), "n={n} p={p}: mean Σcoeff² {m2}");
    }
}

#[test]
fn spectrum_is_symmetric_in_distribution() {
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for s in 0..200u64 {
        let h = sample_syk(4, 4, 0.5, s).unwrap().hamiltonian();
        top.push(dense_lambda_max(&h, 8).unwrap().lambda_max);
        bottom.push(dense_lambda_max(&h.negated(), 8).unwrap().lambda_max);
    }
    let (mt, st) = mean_std(&top);
    let (mb, sb) = mean_std(&bottom);
    let se = ((st * st + sb * sb) / 200.0).sqrt();
    assert!((mt - mb).abs() < 5.0 * se, "λ(H) mean {mt} vs λ(−H) mean {mb}");
}

#[test]
fn witnesses_are_valid_states() {
    let mut k = 0u64;
    for n in [4usize, 6, 8, 10] {
        for p in [0.1, 0.3, 0.6, 1.0] {
            for _ in 0..32 {
                let h = sample_syk(n, 4, p, 9000 + k).unwrap();
                k += 1;
                let w = explicit_witness(&h).unwrap();
                assert!(w.sigma.max_singular_value().unwrap() <= 1.0 + 1e-9);
                assert!(w.sigma.antisymmetry_error() == 0.0);
                assert!(w.scale <= WITNESS_C0 / (n as f64 * p.sqrt()) + 1e-15);
                assert!(w.energy.is_finite());
            }
        }
    }
    assert!(k >= 500);
}

#[test]
fn theta_solver_scales_to_495_vertices() {
    let g = full_degree_graph(6, 4).unwrap();
    assert_eq!(g.vertex_count(), 495);
    let opts = ThetaOptions {
        tol: 1e-4,
        ..ThetaOptions::default()
    };
    let r = lovasz_theta(&g.graph, &opts, None).unwrap();
    assert!(r.converged, "{} iterations, gap {}", r.iterations, r.gap());
    assert!(r.gap() <= 1e-4 * r.theta.max(1.0));
}
