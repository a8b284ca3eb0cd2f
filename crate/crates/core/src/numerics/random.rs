use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::cmat::{C64, CMat};
use crate::numerics::linalg::orthonormalize;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix. Gram-Schmidt
/// produces the factor with positive diagonal R, which is exactly the Haar
/// normalization. Deterministic per seed.
pub fn haar_unitary(d: usize, seed: u64) -> CMat {
    assert!(d >= 1);
    let mut rng = rng_from_seed(seed);
    haar_unitary_with(d, &mut rng)
}

pub fn haar_unitary_with(d: usize, rng: &mut impl Rng) -> CMat {
    loop {
        let g = gaussian_matrix(d, d, rng);
        let cols: Vec<Vec<C64>> = (0..d).map(|j| g.column(j)).collect();
        // a Ginibre matrix is singular with probability zero; retry on the
        // measure-zero numerical event instead of failing
        if let Ok(q) = orthonormalize(&cols) {
            return q;
        }
    }
}

pub fn random_unit_vector(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Random full-rank density matrix (Hilbert-Schmidt ensemble), for tests.
pub fn random_density(d: usize, rng: &mut impl Rng) -> CMat {
    let g = gaussian_matrix(d, d, rng);
    let rho = g.mul(&g.adjoint());
    let t = rho.trace().re;
    rho.scale(C64::new(1.0 / t, 0.0))
}
