use num_complex::Complex64;

use crate::error::{Result, SqwError};
use crate::numerics::cmat::{C64, CMat};

/// Eigendecomposition of a normal matrix with multiplicity bookkeeping.
///
/// `vectors` holds orthonormal eigenvectors as columns, ordered to match
/// `eigenvalues`. `clusters` groups eigenvalue indices within the clustering
/// tolerance; `projectors[c]` is the orthogonal projector onto the span of
/// cluster `c`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub vectors: CMat,
    pub clusters: Vec<EigenCluster>,
    pub projectors: Vec<CMat>,
}

#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub value: C64,
    pub members: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn multiplicity_of(&self, value: C64, tol: f64) -> usize {
        self.clusters
            .iter()
            .filter(|c| (c.value - value).norm() <= tol)
            .map(|c| c.members.len())
            .sum()
    }

    /// Orthonormal basis of the eigenspace attached to `value` (all clusters
    /// within `tol`), as matrix columns.
    pub fn eigenspace(&self, value: C64, tol: f64) -> CMat {
        let members: Vec<usize> = self
            .clusters
            .iter()
            .filter(|c| (c.value - value).norm() <= tol)
            .flat_map(|c| c.members.iter().copied())
            .collect();
        let cols: Vec<Vec<C64>> = members.iter().map(|&j| self.vectors.column(j)).collect();
        CMat::from_columns(&cols)
    }
}

fn givens(f: C64, g: C64) -> (f64, C64) {
    if g.norm_sqr() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if f.norm_sqr() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / d;
    let s = (f / f.norm()) * g.conj() / d;
    (c, s)
}

/// Eigenvalue of [[a, b], [c, d]] closest to d, computed without cancellation.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let den = if (p + disc).norm() >= (p - disc).norm() { p + disc } else { p - disc };
    if den.norm() == 0.0 {
        d
    } else {
        d - bc / den
    }
}

/// Reduce to upper Hessenberg form by Householder reflections.
/// Returns (h, z) with m = z h z† and z unitary.
fn hessenberg(m: &CMat) -> (CMat, CMat) {
    let n = m.rows();
    let mut h = m.clone();
    let mut z = CMat::identity(n);
    if n < 3 {
        return (h, z);
    }
    for k in 0..n - 2 {
        let mut v: Vec<C64> = (k + 1..n).map(|r| h[(r, k)]).collect();
        let xnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vn2 = v.iter().map(|x| x.norm_sqr()).sum::<f64>();
        if vn2 == 0.0 {
            continue;
        }
        let w = 2.0 / vn2;
        // h <- P h, rows k+1..n
        for col in k..n {
            let mut s = C64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + i, col)];
            }
            s *= w;
            for (i, vi) in v.iter().enumerate() {
                let entry = h[(k + 1 + i, col)];
                h[(k + 1 + i, col)] = entry - s * vi;
            }
        }
        // h <- h P, cols k+1..n
        for row in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (j, vj) in v.iter().enumerate() {
                s += h[(row, k + 1 + j)] * vj;
            }
            s *= w;
            for (j, vj) in v.iter().enumerate() {
                let entry = h[(row, k + 1 + j)];
                h[(row, k + 1 + j)] = entry - s * vj.conj();
            }
        }
        // z <- z P
        for row in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (j, vj) in v.iter().enumerate() {
                s += z[(row, k + 1 + j)] * vj;
            }
            s *= w;
            for (j, vj) in v.iter().enumerate() {
                let entry = z[(row, k + 1 + j)];
                z[(row, k + 1 + j)] = entry - s * vj.conj();
            }
        }
        h[(k + 1, k)] = alpha;
        for r in k + 2..n {
            h[(r, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, z)
}

/// Complex Schur decomposition m = z t z† with t upper triangular and z
/// unitary, by single-shift QR iteration on the Hessenberg form.
pub fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    if !m.is_square() {
        return Err(SqwError::DimensionMismatch(format!(
            "schur needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let (mut h, mut z) = hessenberg(m);
    if n == 1 {
        return Ok((h, z));
    }
    let eps = f64::EPSILON;
    let hnorm = h.max_norm().max(f64::MIN_POSITIVE);
    let max_total = 120 * n.max(4);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    loop {
        // deflate fully converged trailing 1x1 blocks
        while hi > 0 {
            let s = h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(hi, hi - 1)].norm() <= eps * s {
                h[(hi, hi - 1)] = C64::new(0.0, 0.0);
                hi -= 1;
                since_deflation = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        total += 1;
        since_deflation += 1;
        if total > max_total {
            return Err(SqwError::ConvergenceFailure(total));
        }
        // active block [lo..=hi]
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        let shift = if since_deflation > 0 && since_deflation % 10 == 0 {
            // exceptional shift to break symmetry-induced cycling; rotate the
            // direction on repeated stagnation
            let mut s = h[(hi, hi - 1)].norm();
            if hi >= 2 {
                s += h[(hi - 1, hi - 2)].norm();
            }
            let angle = 0.7 * (since_deflation / 10) as f64;
            h[(hi, hi)] + C64::from_polar(0.75 * s.max(eps * hnorm), angle)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in lo..=hi {
            let d = h[(i, i)];
            h[(i, i)] = d - shift;
        }
        // left Givens pass: R = G_{hi-1} ... G_lo (H - shift)
        let mut rot: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            rot.push((c, s));
            for col in i..n {
                let a = h[(i, col)];
                let b = h[(i + 1, col)];
                h[(i, col)] = a * c + b * s;
                h[(i + 1, col)] = -a * s.conj() + b * c;
            }
        }
        // right pass: H = R G_lo† G_{lo+1}† ... + shift, Z accumulates the same
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let i = lo + idx;
            for row in 0..=i + 1 {
                let a = h[(row, i)];
                let b = h[(row, i + 1)];
                h[(row, i)] = a * c + b * s.conj();
                h[(row, i + 1)] = -a * s + b * c;
            }
            for row in 0..n {
                let a = z[(row, i)];
                let b = z[(row, i + 1)];
                z[(row, i)] = a * c + b * s.conj();
                z[(row, i + 1)] = -a * s + b * c;
            }
        }
        for i in lo..=hi {
            let d = h[(i, i)];
            h[(i, i)] = d + shift;
        }
    }
    // clean the strict lower triangle
    for r in 0..n {
        for c in 0..r {
            h[(r, c)] = C64::new(0.0, 0.0);
        }
    }
    Ok((h, z))
}

/// Eigenvalues of a general square complex matrix, unordered multiset.
pub fn general_eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let (t, _) = schur(m)?;
    Ok((0..t.rows()).map(|i| t[(i, i)]).collect())
}

/// Group values by chaining: indices i, j land in one cluster whenever
/// |v_i - v_j| <= tol somewhere along a chain.
pub fn cluster_values(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups.sort_by(|a, b| a[0].cmp(&b[0]));
    groups
}

/// Default clustering tolerance for O(1)-normalized operators.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Full eigendecomposition of a normal matrix (unitary or Hermitian inputs).
///
/// Fails with `NotNormal` when the commutator [M, M†] is not negligible.
pub fn eig_normal(m: &CMat, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(SqwError::DimensionMismatch(format!(
            "eig_normal needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.max_norm().max(1.0);
    let comm = m.mul(&m.adjoint()).sub(&m.adjoint().mul(m)).max_norm();
    if comm > 1e-8 * scale * scale {
        return Err(SqwError::NotNormal(comm));
    }
    let (t, z) = schur(m)?;
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (t[(a, a)], t[(b, b)]);
        la.re.total_cmp(&lb.re).then(la.im.total_cmp(&lb.im))
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&j| t[(j, j)]).collect();
    let cols: Vec<Vec<C64>> = order.iter().map(|&j| z.column(j)).collect();
    let vectors = CMat::from_columns(&cols);
    let groups = cluster_values(&eigenvalues, cluster_tol);
    let mut clusters = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for members in groups {
        let mean = members.iter().map(|&j| eigenvalues[j]).sum::<Complex64>()
            / members.len() as f64;
        let mut proj = CMat::zeros(n, n);
        for &j in &members {
            let v = vectors.column(j);
            for r in 0..n {
                for c in 0..n {
                    let add = v[r] * v[c].conj();
                    let entry = proj[(r, c)];
                    proj[(r, c)] = entry + add;
                }
            }
        }
        clusters.push(EigenCluster { value: mean, members });
        projectors.push(proj);
    }
    Ok(SpectralDecomposition { eigenvalues, vectors, clusters, projectors })
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues ascending,
/// orthonormal eigenvector columns.
pub fn hermitian_eig(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let scale = m.max_norm().max(1.0);
    if !m.is_hermitian(1e-8 * scale) {
        return Err(SqwError::DimensionMismatch("matrix is not Hermitian".into()));
    }
    // Hermitize exactly so the Schur route keeps imaginary parts at roundoff.
    let hm = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
    let (t, z) = schur(&hm)?;
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| t[(a, a)].re.total_cmp(&t[(b, b)].re));
    let values: Vec<f64> = order.iter().map(|&j| t[(j, j)].re).collect();
    let cols: Vec<Vec<C64>> = order.iter().map(|&j| z.column(j)).collect();
    Ok((values, CMat::from_columns(&cols)))
}

/// Spectral (operator 2-) norm via the largest eigenvalue of M†M.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let g = m.adjoint().mul(m);
    let (vals, _) = hermitian_eig(&g).expect("gram matrix is Hermitian");
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}
