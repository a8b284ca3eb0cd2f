//! Exploratory search for entropy-decreasing steps of the induced vertex
//! channel. The edge channel is unital and cannot decrease von Neumann
//! entropy; the induced channel has no such constraint, and this scan looks
//! for explicit instances where a single application lowers the entropy.
//!
//! Run with: cargo run --example entropy_search [seed] [trials]

use sqw_core::induced::{chi_vectors, induced_channel};
use sqw_core::numerics::{random_density, rng_from_seed};
use sqw_core::open_walk::{von_neumann_entropy, DensityMatrix};
use sqw_core::scattering::{OmegaFamily, ScatteringFamily};
use sqw_core::Graph;

use rand::Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let trials: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let mut rng = rng_from_seed(seed);
    let mut drops = 0usize;
    let mut worst_drop = 0.0f64;
    let mut worst_desc = String::new();
    for t in 0..trials {
        let n = rng.random_range(3..=7);
        let g = match Graph::random_connected(n, rng.random_range(0..=3), &mut rng) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let f = ScatteringFamily::haar(&g, rng.random());
        let omega = OmegaFamily::uniform(&g);
        let chi = chi_vectors(&g, &f, &omega, None).expect("chi family");
        let psi = induced_channel(&chi).expect("induced channel");
        let rho = DensityMatrix::new(random_density(n, &mut rng)).expect("state");
        let before = von_neumann_entropy(&rho);
        let after = von_neumann_entropy(&psi.apply(&rho).expect("apply"));
        if after < before - 1e-12 {
            drops += 1;
            let drop = before - after;
            if drop > worst_drop {
                worst_drop = drop;
                worst_desc = format!(
                    "trial {t}: |V| = {n}, S(rho) = {before:.6}, S(Psi(rho)) = {after:.6}"
                );
            }
        }
    }
    println!("{drops} / {trials} sampled steps decreased the entropy");
    if drops > 0 {
        println!("largest drop {worst_drop:.6} at {worst_desc}");
    } else {
        println!("no entropy-decreasing step found in this sample");
    }
}
