//! Structural invariants checked over randomized instances.

use proptest::prelude::*;

use sqw_core::graph::{EdgeBasis, FunctionalGraph, Graph};
use sqw_core::induced::{chi_vectors, evolve_induced, induced_channel};
use sqw_core::numerics::{
    cesaro_mean, haar_unitary, perron_analysis, random_density, rng_from_seed, C64, CMat,
    StochMat,
};
use sqw_core::open_walk::{
    edge_channel, phi_diag, von_neumann_entropy, DensityMatrix,
};
use sqw_core::scattering::{OmegaFamily, ScatteringFamily};
use sqw_core::walk::build_unitary;

use rand::Rng;

fn arb_graph() -> impl Strategy<Value = Graph> {
    (3usize..9, 0usize..5, any::<u64>()).prop_map(|(n, extra, seed)| {
        let mut rng = rng_from_seed(seed);
        Graph::random_connected(n, extra, &mut rng).expect("random graph is valid")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn degree_sum_and_edge_basis_partition(g in arb_graph()) {
        prop_assert_eq!(g.degree_sum(), 2 * g.edge_count());
        let basis = EdgeBasis::new(&g);
        prop_assert_eq!(basis.dim(), g.degree_sum());
        for i in 0..basis.dim() {
            let (t, s) = basis.edge(i);
            prop_assert_eq!(basis.index_of(t, s), Some(i));
        }
        let mut seen_in = vec![false; basis.dim()];
        let mut seen_out = vec![false; basis.dim()];
        for x in 0..g.vertex_count() {
            for i in basis.in_block(x) {
                prop_assert!(!seen_in[i], "in-blocks must not overlap");
                seen_in[i] = true;
            }
            for &i in basis.out_block(x) {
                prop_assert!(!seen_out[i], "out-blocks must not overlap");
                seen_out[i] = true;
            }
        }
        prop_assert!(seen_in.iter().all(|&b| b));
        prop_assert!(seen_out.iter().all(|&b| b));
    }

    #[test]
    fn functional_graph_orbits_reach_cycles(g in arb_graph(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let successor: Vec<usize> = (0..g.vertex_count())
            .map(|x| {
                let nb = g.neighbors(x);
                nb[rng.random_range(0..nb.len())]
            })
            .collect();
        let fg = FunctionalGraph::new(&g, &successor).unwrap();
        for v in 0..g.vertex_count() {
            let mut p = v;
            for _ in 0..g.vertex_count() {
                p = successor[p];
            }
            prop_assert!(fg.cycle_of(fg.component_of(v)).contains(&p));
        }
    }

    #[test]
    fn walk_is_unitary_and_haar_is_orthonormal(g in arb_graph(), seed in any::<u64>()) {
        let f = ScatteringFamily::haar(&g, seed);
        let u = build_unitary(&g, &f).unwrap();
        let n = u.dim();
        prop_assert!(u.matrix().adjoint().mul(u.matrix()).sub(&CMat::identity(n)).max_norm() < 1e-9);
        let h = haar_unitary(1 + (seed % 7) as usize, seed);
        prop_assert!(h.adjoint().mul(&h).sub(&CMat::identity(h.rows())).max_norm() < 1e-12);
    }

    #[test]
    fn phi_diag_is_bistochastic(g in arb_graph(), seed in any::<u64>()) {
        let f = ScatteringFamily::haar(&g, seed);
        let diag = phi_diag(&g, &f).unwrap();
        prop_assert!(diag.is_bistochastic(1e-12));
        // rows of the transition matrix always sum to one by construction,
        // columns only because every S(x) is unitary
    }

    #[test]
    fn channel_preserves_trace_and_entropy(g in arb_graph(), seed in any::<u64>()) {
        let f = ScatteringFamily::haar(&g, seed);
        let phi = edge_channel(&g, &f).unwrap();
        let mut rng = rng_from_seed(seed ^ 0x5a5a);
        let rho = DensityMatrix::new(random_density(phi.dim(), &mut rng)).unwrap();
        let out = phi.apply(&rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        // unital channels cannot decrease von Neumann entropy
        prop_assert!(von_neumann_entropy(&out) >= von_neumann_entropy(&rho) - 1e-9);
    }

    #[test]
    fn quantum_classical_consistency(g in arb_graph(), seed in any::<u64>()) {
        // the diagonal of Psi^n(rho0) is exactly r0 P^n, for every n
        let f = ScatteringFamily::haar(&g, seed);
        let omega = OmegaFamily::uniform(&g);
        let chi = chi_vectors(&g, &f, &omega, None).unwrap();
        let psi = induced_channel(&chi).unwrap();
        let mut rng = rng_from_seed(seed ^ 0xff);
        let rho0 = DensityMatrix::new(random_density(g.vertex_count(), &mut rng)).unwrap();
        let mut iterate = rho0.clone();
        for n in 1..=6usize {
            iterate = psi.apply(&iterate).unwrap();
            let (_, q) = evolve_induced(&chi, &rho0, n).unwrap();
            let diag = iterate.diagonal();
            for (a, b) in q.iter().zip(diag.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_laws_are_stationary(seed in any::<u64>(), n in 2usize..7) {
        // random row-stochastic matrix via normalized uniforms
        let mut rng = rng_from_seed(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let p = StochMat::from_rows(&rows).unwrap();
        let analysis = perron_analysis(&p).unwrap();
        for pi in &analysis.stationary {
            let moved = p.row_mul(pi);
            let l1: f64 = moved.iter().zip(pi.iter()).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(l1 < 1e-10, "stationarity violated by {l1}");
            prop_assert!(pi.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn cesaro_mean_converges_for_aperiodic_chains(seed in any::<u64>()) {
        // strictly positive 3x3 chains are irreducible and aperiodic;
        // the Cesaro mean approaches the rank-one projector at rate O(1/N)
        let mut rng = rng_from_seed(seed);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let raw: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 0.1).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let p = StochMat::from_rows(&rows).unwrap();
        let analysis = perron_analysis(&p).unwrap();
        let pi = &analysis.stationary[0];
        let n_terms = 4000;
        let mean = cesaro_mean(&p.to_cmat(), n_terms);
        for r in 0..3 {
            for c in 0..3 {
                let err = (mean[(r, c)].re - pi[c]).abs();
                prop_assert!(err < 30.0 / n_terms as f64, "entry error {err}");
            }
        }
    }

    #[test]
    fn perturbation_bound_dominates_operator_distance(g in arb_graph(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let f1 = ScatteringFamily::haar(&g, s1);
        let f2 = ScatteringFamily::haar(&g, s2);
        let bound = sqw_core::walk::perturbation_bound(&f1, &f2).unwrap();
        let u1 = build_unitary(&g, &f1).unwrap();
        let u2 = build_unitary(&g, &f2).unwrap();
        let dist = sqw_core::numerics::operator_norm(&u1.matrix().sub(u2.matrix()));
        prop_assert!(dist <= bound + 1e-9, "{dist} > {bound}");
    }

    #[test]
    fn grover_family_spectrum(g in arb_graph(), alpha in 0.2f64..3.0) {
        // sigma(S(x)) = {1, e^{i alpha}} with multiplicities {1, d_x - 1}
        let f = ScatteringFamily::grover_alpha(&g, alpha, None).unwrap();
        for x in 0..g.vertex_count() {
            let d = g.degree(x);
            if d == 1 {
                continue;
            }
            let dec = sqw_core::numerics::eig_normal(f.matrix(x), 1e-8).unwrap();
            prop_assert_eq!(dec.multiplicity_of(C64::new(1.0, 0.0), 1e-8), 1);
            prop_assert_eq!(dec.multiplicity_of(C64::from_polar(1.0, alpha), 1e-8), d - 1);
        }
    }
}
