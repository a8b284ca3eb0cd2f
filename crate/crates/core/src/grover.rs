//! Spectral mapping machinery for the generalized Grover walk: the omega
//! projector Pi, the flip compressions F11/F22, the unit-circle-to-interval
//! map and its inverse, the boundary operator R with the discriminant
//! T = R F R*, and Feshbach-Schur complements as a second verification route.

use crate::error::{Result, SqwError};
use crate::graph::Graph;
use crate::numerics::{
    cluster_values, eig_normal, hermitian_eig, largest_principal_angle, lu_solve, orthonormalize,
    singular_values, C64, CMat, CLUSTER_TOL,
};
use crate::scattering::OmegaFamily;
use crate::walk::flip_operator;

/// Matching tolerance for eigenvalue-to-eigenvalue comparisons.
pub const MATCH_TOL: f64 = 1e-7;
/// Exclusion zone around the special values {+-1, +-e^{i alpha}}.
const EDGE_EXCLUSION: f64 = 1e-6;

/// The map degenerates when e^{i alpha} = 1, i.e. alpha = 0 mod 2 pi.
fn alpha_is_zero(alpha: f64) -> bool {
    (C64::from_polar(1.0, alpha) - C64::new(1.0, 0.0)).norm() < 1e-12
}

/// alpha = pi mod 2 pi merges the special values {+-1} and {+-e^{i alpha}}.
fn alpha_is_pi(alpha: f64) -> bool {
    (C64::from_polar(1.0, alpha) + C64::new(1.0, 0.0)).norm() < 1e-9
}

/// The coisometry R = sum_x |x><omega(x)| from l2(D) to l2(V).
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    pub r: CMat,
}

pub fn boundary_operator(g: &Graph, omega: &OmegaFamily) -> Result<BoundaryOperator> {
    omega.check(g)?;
    let basis = crate::graph::EdgeBasis::new(g);
    let mut r = CMat::zeros(g.vertex_count(), basis.dim());
    for x in 0..g.vertex_count() {
        for (slot, &i) in basis.in_block(x).iter().enumerate() {
            r[(x, i)] = omega.vector(x)[slot].conj();
        }
    }
    Ok(BoundaryOperator { r })
}

#[derive(Debug, Clone)]
pub struct OmegaProjector {
    pub pi: CMat,
    /// rank Pi = |V|
    pub rank: usize,
    /// rank (I - Pi) = |D| - |V|
    pub corank: usize,
}

/// Pi = (+)_x |omega(x)><omega(x)|, block diagonal over in-blocks.
pub fn omega_projector(g: &Graph, omega: &OmegaFamily) -> Result<OmegaProjector> {
    let b = boundary_operator(g, omega)?;
    let pi = b.r.adjoint().mul(&b.r);
    let dim = pi.rows();
    Ok(OmegaProjector { pi, rank: g.vertex_count(), corank: dim - g.vertex_count() })
}

/// Compressions of the flip to range(Pi) and range(I - Pi), each expressed in
/// an explicit orthonormal basis embedded in l2(D) (columns of h1/h2_basis).
#[derive(Debug, Clone)]
pub struct CompressionPair {
    pub f11: CMat,
    pub f22: CMat,
    pub h1_basis: CMat,
    pub h2_basis: CMat,
}

/// Compress `f_mat` along an isometric basis pair.
pub fn compress(f_mat: &CMat, h1_basis: &CMat, h2_basis: &CMat) -> CompressionPair {
    let f11 = h1_basis.adjoint().mul(f_mat).mul(h1_basis);
    let f22 = h2_basis.adjoint().mul(f_mat).mul(h2_basis);
    CompressionPair { f11, f22, h1_basis: h1_basis.clone(), h2_basis: h2_basis.clone() }
}

/// Flip compressions on a graph: H1 is spanned by the omega(x) themselves,
/// H2 by per-vertex orthonormal complements of omega(x) inside H_x^I.
pub fn graph_compressions(g: &Graph, omega: &OmegaFamily) -> Result<(CMat, CompressionPair)> {
    omega.check(g)?;
    let basis = crate::graph::EdgeBasis::new(g);
    let dim = basis.dim();
    let f = flip_operator(g, None)?;
    let mut h1_cols: Vec<Vec<C64>> = Vec::with_capacity(g.vertex_count());
    let mut h2_cols: Vec<Vec<C64>> = Vec::new();
    for x in 0..g.vertex_count() {
        let d = g.degree(x);
        let block = basis.in_block(x);
        let w = omega.vector(x);
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for (slot, &i) in block.iter().enumerate() {
            col[i] = w[slot];
        }
        h1_cols.push(col);
        if d > 1 {
            // complete omega(x) to an orthonormal basis of C^d, skipping the
            // coordinate where omega is largest to keep Gram-Schmidt stable
            let imax = (0..d)
                .max_by(|&a, &b| w[a].norm().total_cmp(&w[b].norm()))
                .unwrap();
            let mut local: Vec<Vec<C64>> = vec![w.to_vec()];
            for j in 0..d {
                if j == imax {
                    continue;
                }
                let mut e = vec![C64::new(0.0, 0.0); d];
                e[j] = C64::new(1.0, 0.0);
                local.push(e);
            }
            let q = orthonormalize(&local)?;
            for j in 1..d {
                let mut col = vec![C64::new(0.0, 0.0); dim];
                for (slot, &i) in block.iter().enumerate() {
                    col[i] = q[(slot, j)];
                }
                h2_cols.push(col);
            }
        }
    }
    let h1 = CMat::from_columns(&h1_cols);
    let h2 = if h2_cols.is_empty() {
        CMat::zeros(dim, 0)
    } else {
        CMat::from_columns(&h2_cols)
    };
    Ok((f.matrix().clone(), compress(f.matrix(), &h1, &h2)))
}

/// The spectral map phi_alpha(e^{i theta}) = sin(alpha/2 - theta)/sin(alpha/2),
/// evaluated through the rational form; the imaginary part must vanish for
/// unit-modulus input.
pub fn phi_alpha(lambda: C64, alpha: f64) -> Result<f64> {
    if alpha_is_zero(alpha) {
        return Err(SqwError::AlphaZero);
    }
    if (lambda.norm() - 1.0).abs() > 1e-8 {
        return Err(SqwError::InvalidInput(format!(
            "phi_alpha needs |lambda| = 1, got {}",
            lambda.norm()
        )));
    }
    let ea = C64::from_polar(1.0, alpha);
    let mu = (lambda * lambda - ea) / (lambda * (C64::new(1.0, 0.0) - ea));
    if mu.im.abs() > 1e-12 {
        return Err(SqwError::InvalidInput(format!(
            "phi_alpha produced imaginary part {:.3e}",
            mu.im
        )));
    }
    Ok(mu.re)
}

/// Both preimages of mu under phi_alpha: the roots of
/// lambda^2 - mu (1 - e^{i alpha}) lambda - e^{i alpha} = 0.
/// Their product is -e^{i alpha}; for alpha = pi and mu = +-1 the two roots
/// coincide at +-1.
pub fn inverse_phi_alpha(mu: f64, alpha: f64) -> Result<(C64, C64)> {
    if alpha_is_zero(alpha) {
        return Err(SqwError::AlphaZero);
    }
    let bound = 1.0 / (alpha / 2.0).sin().abs();
    if mu.abs() > bound + 1e-9 {
        return Err(SqwError::OutOfRange(mu));
    }
    let ea = C64::from_polar(1.0, alpha);
    let nu = C64::new(1.0, 0.0) - ea;
    let b = nu * mu;
    let disc = (b * b + ea * 4.0).sqrt();
    let l1 = (b + disc) * 0.5;
    let l2 = (b - disc) * 0.5;
    // deterministic order: larger imaginary part first, then larger real part
    if (l1.im, l1.re) >= (l2.im, l2.re) {
        Ok((l1, l2))
    } else {
        Ok((l2, l1))
    }
}

#[derive(Debug, Clone)]
pub struct SpectralMappingReport {
    pub sigma_u: Vec<C64>,
    pub sigma_f11: Vec<f64>,
    pub sigma_f22: Vec<f64>,
    /// forward map: every eigenvalue of U off {+-e^{ia}} lands in sigma(F11)
    pub forward_violations: Vec<String>,
    /// lift: every mu in sigma(F11) strictly inside (-1,1) lifts to both
    /// lambda_+ and lambda_- with matched multiplicities
    pub lift_violations: Vec<String>,
    /// kernel identities at the special values
    pub kernel_violations: Vec<String>,
    /// worst principal angle observed in the kernel comparisons
    pub max_kernel_angle: f64,
    /// worst distance from a mapped eigenvalue to sigma(F11)
    pub max_forward_error: f64,
}

impl SpectralMappingReport {
    pub fn passed(&self) -> bool {
        self.forward_violations.is_empty()
            && self.lift_violations.is_empty()
            && self.kernel_violations.is_empty()
    }
}

/// Verify the spectral mapping for an abstract pair (F, Pi): F a unitary
/// involution, Pi an orthogonal projector, U = F (Pi + e^{ia} (I - Pi)).
pub fn spectral_mapping_report_abstract(
    f_mat: &CMat,
    pi: &CMat,
    alpha: f64,
) -> Result<SpectralMappingReport> {
    let n = f_mat.rows();
    let scale = 1.0f64.max(f_mat.max_norm());
    if f_mat.sub(&f_mat.adjoint()).max_norm() > 1e-10 * scale
        || f_mat.mul(f_mat).sub(&CMat::identity(n)).max_norm() > 1e-10 * scale
    {
        return Err(SqwError::InvalidInput("F must be a unitary involution".into()));
    }
    if pi.sub(&pi.adjoint()).max_norm() > 1e-10 || pi.mul(pi).sub(pi).max_norm() > 1e-10 {
        return Err(SqwError::InvalidInput("Pi must be an orthogonal projector".into()));
    }
    let (vals, vecs) = hermitian_eig(pi)?;
    let mut h1 = Vec::new();
    let mut h2 = Vec::new();
    for (j, &v) in vals.iter().enumerate() {
        if v > 0.5 {
            h1.push(vecs.column(j));
        } else {
            h2.push(vecs.column(j));
        }
    }
    let h1m = CMat::from_columns(&h1);
    let h2m = if h2.is_empty() { CMat::zeros(n, 0) } else { CMat::from_columns(&h2) };
    let pair = compress(f_mat, &h1m, &h2m);
    spectral_mapping_report(f_mat, &pair, alpha)
}

/// Verify the spectral mapping for a graph walk with the given omega family.
pub fn verify_spectral_mapping(
    g: &Graph,
    alpha: f64,
    omega: &OmegaFamily,
) -> Result<SpectralMappingReport> {
    let (f_mat, pair) = graph_compressions(g, omega)?;
    spectral_mapping_report(&f_mat, &pair, alpha)
}

/// Core clause checker; `pair` must compress the involution `f_mat`.
pub fn spectral_mapping_report(
    f_mat: &CMat,
    pair: &CompressionPair,
    alpha: f64,
) -> Result<SpectralMappingReport> {
    if alpha_is_zero(alpha) {
        return Err(SqwError::AlphaZero);
    }
    let n = f_mat.rows();
    let ea = C64::from_polar(1.0, alpha);
    // U = F (Pi + e^{ia} (I - Pi)) with Pi = B1 B1†
    let pi = pair.h1_basis.mul(&pair.h1_basis.adjoint());
    let mut inner = CMat::identity(n).sub(&pi).scale(ea);
    inner.add_scaled(C64::new(1.0, 0.0), &pi);
    let u = f_mat.mul(&inner);
    let dec_u = eig_normal(&u, CLUSTER_TOL)?;
    let (mu1, v1) = hermitian_eig(&pair.f11)?;
    let (mu2, v2) = if pair.f22.rows() > 0 {
        hermitian_eig(&pair.f22)?
    } else {
        (Vec::new(), CMat::zeros(0, 0))
    };

    let is_pi = alpha_is_pi(alpha);
    let mut forward_violations = Vec::new();
    let mut lift_violations = Vec::new();
    let mut kernel_violations = Vec::new();
    let mut max_forward_error: f64 = 0.0;

    // (a) forward inclusion
    for cl in &dec_u.clusters {
        let lam = cl.value;
        if (lam - ea).norm() < EDGE_EXCLUSION || (lam + ea).norm() < EDGE_EXCLUSION {
            continue;
        }
        let mu = phi_alpha(lam / lam.norm(), alpha)?;
        let dist = mu1.iter().map(|&m| (m - mu).abs()).fold(f64::INFINITY, f64::min);
        max_forward_error = max_forward_error.max(dist);
        if dist > MATCH_TOL {
            forward_violations.push(format!(
                "lambda = {lam} maps to mu = {mu}, nearest F11 eigenvalue at distance {dist:.3e}"
            ));
        }
    }

    // (b) + (d) lift with multiplicities
    let mu1_c: Vec<C64> = mu1.iter().map(|&m| C64::new(m, 0.0)).collect();
    for group in cluster_values(&mu1_c, CLUSTER_TOL) {
        let mu = mu1[group[0]];
        if mu.abs() >= 1.0 - EDGE_EXCLUSION {
            continue;
        }
        let mult_f11 = group.len();
        let (lp, lm) = inverse_phi_alpha(mu, alpha)?;
        for lam in [lp, lm] {
            let mult_u = dec_u.multiplicity_of(lam, MATCH_TOL);
            if mult_u != mult_f11 {
                lift_violations.push(format!(
                    "mu = {mu}: lift {lam} has U-multiplicity {mult_u}, F11-multiplicity {mult_f11}"
                ));
            }
        }
        // dim ker(F22 + mu) agrees with dim ker(F11 - mu)
        let mult_f22 = mu2.iter().filter(|&&m| (m + mu).abs() <= MATCH_TOL).count();
        if mult_f22 != mult_f11 {
            lift_violations.push(format!(
                "mu = {mu}: F22 multiplicity at -mu is {mult_f22}, F11 multiplicity {mult_f11}"
            ));
        }
    }

    // (c) kernel identities at the special values, as subspace-angle checks
    let embedded = |basis: &CMat, vecs: &CMat, vals: &[f64], at: f64| -> Vec<Vec<C64>> {
        vals.iter()
            .enumerate()
            .filter(|(_, &m)| (m - at).abs() <= MATCH_TOL)
            .map(|(j, _)| basis.matvec(&vecs.column(j)))
            .collect()
    };
    let mut max_kernel_angle: f64 = 0.0;
    {
        let mut check_pair = |label: &str, u_space: CMat, ref_cols: Vec<Vec<C64>>| {
            let ref_space = if ref_cols.is_empty() {
                CMat::zeros(n, 0)
            } else {
                CMat::from_columns(&ref_cols)
            };
            if u_space.cols() != ref_space.cols() {
                kernel_violations.push(format!(
                    "{label}: dim {} on the U side, {} on the compression side",
                    u_space.cols(),
                    ref_space.cols()
                ));
                return;
            }
            if u_space.cols() == 0 {
                return;
            }
            match largest_principal_angle(&u_space, &ref_space) {
                Ok(angle) => {
                    max_kernel_angle = max_kernel_angle.max(angle);
                    if angle > MATCH_TOL {
                        kernel_violations.push(format!("{label}: principal angle {angle:.3e}"));
                    }
                }
                Err(e) => kernel_violations.push(format!("{label}: {e}")),
            }
        };
        for s in [1.0f64, -1.0] {
            let u_space = dec_u.eigenspace(C64::new(s, 0.0), MATCH_TOL);
            if !is_pi {
                let f11_space = embedded(&pair.h1_basis, &v1, &mu1, s);
                check_pair(&format!("ker(U - ({s}))"), u_space, f11_space);
                let ue_space = dec_u.eigenspace(ea * s, MATCH_TOL);
                let f22_space = embedded(&pair.h2_basis, &v2, &mu2, s);
                check_pair(&format!("ker(U - ({s}) e^(i a))"), ue_space, f22_space);
            } else {
                // alpha = pi: ker(U - s) = ker(F11 - s) + ker(F22 + s)
                let mut cols = embedded(&pair.h1_basis, &v1, &mu1, s);
                cols.extend(embedded(&pair.h2_basis, &v2, &mu2, -s));
                check_pair(&format!("ker(U_pi - ({s}))"), u_space, cols);
            }
        }
    }

    Ok(SpectralMappingReport {
        sigma_u: dec_u.clusters.iter().map(|c| c.value).collect(),
        sigma_f11: mu1,
        sigma_f22: mu2,
        forward_violations,
        lift_violations,
        kernel_violations,
        max_kernel_angle,
        max_forward_error,
    })
}

/// Discriminant analysis: T = R F R* on l2(V) is isospectral to F11 with
/// projector correspondence P^lambda_1 = R* P^lambda_T R.
#[derive(Debug, Clone)]
pub struct DiscriminantReport {
    pub t: CMat,
    /// max |sigma(T)_i - sigma(F11)_i| over the sorted spectra
    pub spectrum_match: f64,
    /// worst residual of Pi F (R* phi) = mu (R* phi) over T-eigenvectors
    pub eigenvector_residual: f64,
    /// worst || P^lambda_1 - R* P^lambda_T R ||_max over eigenvalue clusters
    pub projector_match: f64,
    /// per-cluster (lambda, dim P^lambda_T, dim P^lambda_1)
    pub cluster_dims: Vec<(f64, usize, usize)>,
}

pub fn discriminant_analysis(g: &Graph, omega: &OmegaFamily) -> Result<DiscriminantReport> {
    let b = boundary_operator(g, omega)?;
    let (f_mat, pair) = graph_compressions(g, omega)?;
    let t = b.r.mul(&f_mat).mul(&b.r.adjoint());
    let (t_vals, t_vecs) = hermitian_eig(&t)?;
    let (f_vals, f_vecs) = hermitian_eig(&pair.f11)?;
    let spectrum_match = t_vals
        .iter()
        .zip(f_vals.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let pi = pair.h1_basis.mul(&pair.h1_basis.adjoint());
    let mut eigenvector_residual: f64 = 0.0;
    for j in 0..t_vals.len() {
        let phi = t_vecs.column(j);
        let psi1 = b.r.adjoint().matvec(&phi);
        let fpsi = pi.matvec(&f_mat.matvec(&psi1));
        let res: f64 = fpsi
            .iter()
            .zip(psi1.iter())
            .map(|(a, b)| (a - b * t_vals[j]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        eigenvector_residual = eigenvector_residual.max(res);
    }

    let t_vals_c: Vec<C64> = t_vals.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut projector_match: f64 = 0.0;
    let mut cluster_dims = Vec::new();
    for group in cluster_values(&t_vals_c, CLUSTER_TOL) {
        let lam = t_vals[group[0]];
        let mut p_t = CMat::zeros(t.rows(), t.rows());
        for &j in &group {
            let col = CMat::from_columns(&[t_vecs.column(j)]);
            p_t.add_scaled(C64::new(1.0, 0.0), &col.mul(&col.adjoint()));
        }
        // F11-side projector embedded in l2(D)
        let members: Vec<usize> = f_vals
            .iter()
            .enumerate()
            .filter(|(_, &m)| (m - lam).abs() <= MATCH_TOL)
            .map(|(j, _)| j)
            .collect();
        let mut p_1 = CMat::zeros(f_mat.rows(), f_mat.rows());
        for &j in &members {
            let emb = pair.h1_basis.mul(&CMat::from_columns(&[f_vecs.column(j)]));
            p_1.add_scaled(C64::new(1.0, 0.0), &emb.mul(&emb.adjoint()));
        }
        let lifted = b.r.adjoint().mul(&p_t).mul(&b.r);
        projector_match = projector_match.max(p_1.sub(&lifted).max_norm());
        cluster_dims.push((lam, group.len(), members.len()));
    }
    Ok(DiscriminantReport { t, spectrum_match, eigenvector_residual, projector_match, cluster_dims })
}

/// Feshbach-Schur complements of U - z at a sample point, with their smallest
/// singular values: z in the resolvent set of U corresponds exactly to a
/// boundedly invertible complement.
#[derive(Debug, Clone)]
pub struct FeshbachSample {
    pub z: C64,
    pub min_sv_s1: Option<f64>,
    pub min_sv_s2: Option<f64>,
    pub dist_to_spectrum: f64,
}

pub fn feshbach_schur_check(
    g: &Graph,
    alpha: f64,
    omega: &OmegaFamily,
    samples: &[C64],
) -> Result<Vec<FeshbachSample>> {
    if alpha_is_zero(alpha) {
        return Err(SqwError::AlphaZero);
    }
    let (f_mat, pair) = graph_compressions(g, omega)?;
    let ea = C64::from_polar(1.0, alpha);
    let b1 = &pair.h1_basis;
    let b2 = &pair.h2_basis;
    let f12 = b1.adjoint().mul(&f_mat).mul(b2);
    let f21 = b2.adjoint().mul(&f_mat).mul(b1);
    let pi = b1.mul(&b1.adjoint());
    let mut inner = CMat::identity(f_mat.rows()).sub(&pi).scale(ea);
    inner.add_scaled(C64::new(1.0, 0.0), &pi);
    let u = f_mat.mul(&inner);
    let sigma_u = eig_normal(&u, CLUSTER_TOL)?.eigenvalues;
    let (n1, n2) = (pair.f11.rows(), pair.f22.rows());
    let mut out = Vec::with_capacity(samples.len());
    for &z in samples {
        let dist_to_spectrum =
            sigma_u.iter().map(|&l| (l - z).norm()).fold(f64::INFINITY, f64::min);
        // S1(z) = (F11 - z) - e^{ia} F12 (e^{ia} F22 - z)^{-1} F21
        let min_sv_s1 = (|| {
            let mut a22 = pair.f22.scale(ea);
            a22.add_scaled(-z, &CMat::identity(n2));
            let inv_f21 = lu_solve(&a22, &f21).ok()?;
            let mut s1 = pair.f11.clone();
            s1.add_scaled(-z, &CMat::identity(n1));
            s1.add_scaled(-ea, &f12.mul(&inv_f21));
            singular_values(&s1).first().copied()
        })();
        // S2(z) = (e^{ia} F22 - z) - e^{ia} F21 (F11 - z)^{-1} F12
        let min_sv_s2 = (|| {
            let mut a11 = pair.f11.clone();
            a11.add_scaled(-z, &CMat::identity(n1));
            let inv_f12 = lu_solve(&a11, &f12).ok()?;
            let mut s2 = pair.f22.scale(ea);
            s2.add_scaled(-z, &CMat::identity(n2));
            s2.add_scaled(-ea, &f21.mul(&inv_f12));
            singular_values(&s2).first().copied()
        })();
        out.push(FeshbachSample { z, min_sv_s1, min_sv_s2, dist_to_spectrum });
    }
    Ok(out)
}
