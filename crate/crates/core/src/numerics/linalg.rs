use crate::error::{Result, SqwError};
use crate::numerics::cmat::{vdot, vnorm, C64, CMat};
use crate::numerics::eig::hermitian_eig;

/// Solve A X = B by LU with partial pivoting.
pub fn lu_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(SqwError::DimensionMismatch(format!(
            "lu_solve: A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for r in k + 1..n {
            if lu[(r, k)].norm() > best {
                best = lu[(r, k)].norm();
                piv = r;
            }
        }
        if best < 1e-300 {
            return Err(SqwError::SingularMatrix(k));
        }
        if piv != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(piv, c)];
                lu[(piv, c)] = tmp;
            }
            for c in 0..x.cols() {
                let tmp = x[(k, c)];
                x[(k, c)] = x[(piv, c)];
                x[(piv, c)] = tmp;
            }
        }
        let d = lu[(k, k)];
        for r in k + 1..n {
            let f = lu[(r, k)] / d;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in k..n {
                let sub = f * lu[(k, c)];
                let entry = lu[(r, c)];
                lu[(r, c)] = entry - sub;
            }
            for c in 0..x.cols() {
                let sub = f * x[(k, c)];
                let entry = x[(r, c)];
                x[(r, c)] = entry - sub;
            }
        }
    }
    for k in (0..n).rev() {
        for c in 0..x.cols() {
            let mut s = x[(k, c)];
            for j in k + 1..n {
                s -= lu[(k, j)] * x[(j, c)];
            }
            x[(k, c)] = s / lu[(k, k)];
        }
    }
    Ok(x)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    lu_solve(a, &CMat::identity(a.rows()))
}

/// Singular values via the Hermitian eigenvalues of A†A, ascending.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let g = a.adjoint().mul(a);
    let (vals, _) = hermitian_eig(&g).expect("gram matrix is Hermitian");
    vals.iter().map(|&l| l.max(0.0).sqrt()).collect()
}

/// Going through the Gram matrix squares the conditioning, so singular values
/// below sqrt(eps) * s_max are numerically zero regardless of the requested
/// tolerance. The effective threshold is max(sv_tol, resolution floor).
fn sv_threshold(svals: &[f64], sv_tol: f64, dim: usize) -> f64 {
    let smax = svals.last().copied().unwrap_or(0.0);
    let floor = smax * (f64::EPSILON * dim.max(1) as f64).sqrt();
    sv_tol.max(floor)
}

/// Numerical rank: number of singular values above `sv_tol` (subject to the
/// Gram-matrix resolution floor).
pub fn rank(a: &CMat, sv_tol: f64) -> usize {
    let s = singular_values(a);
    let thr = sv_threshold(&s, sv_tol, a.rows().max(a.cols()));
    s.iter().filter(|&&x| x > thr).count()
}

/// Orthonormal basis of the (numerical) null space as matrix columns.
pub fn null_space(a: &CMat, sv_tol: f64) -> CMat {
    if a.cols() == 0 {
        return CMat::zeros(a.rows(), 0);
    }
    let g = a.adjoint().mul(a);
    let (vals, vecs) = hermitian_eig(&g).expect("gram matrix is Hermitian");
    let svals: Vec<f64> = vals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let thr = sv_threshold(&svals, sv_tol, a.rows().max(a.cols()));
    let cols: Vec<Vec<C64>> = svals
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= thr)
        .map(|(j, _)| vecs.column(j))
        .collect();
    CMat::from_columns(&cols)
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
/// Errors if the columns are numerically dependent.
pub fn orthonormalize(cols: &[Vec<C64>]) -> Result<CMat> {
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols.len());
    for (j, col) in cols.iter().enumerate() {
        let mut v = col.clone();
        for _ in 0..2 {
            for u in &q {
                let c = vdot(u, &v);
                for (vi, ui) in v.iter_mut().zip(u.iter()) {
                    *vi -= c * ui;
                }
            }
        }
        let n = vnorm(&v);
        if n < 1e-10 {
            return Err(SqwError::InvalidInput(format!(
                "orthonormalize: column {j} is dependent on the previous ones"
            )));
        }
        for vi in v.iter_mut() {
            *vi /= n;
        }
        q.push(v);
    }
    Ok(CMat::from_columns(&q))
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal frames with the same column count.
pub fn largest_principal_angle(q1: &CMat, q2: &CMat) -> Result<f64> {
    if q1.cols() != q2.cols() || q1.rows() != q2.rows() {
        return Err(SqwError::DimensionMismatch(format!(
            "principal angle between a {}x{} and a {}x{} frame",
            q1.rows(),
            q1.cols(),
            q2.rows(),
            q2.cols()
        )));
    }
    if q1.cols() == 0 {
        return Ok(0.0);
    }
    let overlap = q1.adjoint().mul(q2);
    let s = singular_values(&overlap);
    let smin = s.first().copied().unwrap_or(0.0).clamp(0.0, 1.0);
    Ok(smin.acos())
}
