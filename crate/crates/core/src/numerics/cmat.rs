use std::ops::{Index, IndexMut};

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        let mut m = CMat::zeros(nr, nc);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), nc, "ragged rows");
            for (c, &v) in row.iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let as_complex: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        CMat::from_rows(&as_complex)
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let nc = cols.len();
        let nr = if nc == 0 { 0 } else { cols[0].len() };
        let mut m = CMat::zeros(nr, nc);
        for (c, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nr, "ragged columns");
            for (r, &v) in col.iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = CMat::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (r, &x) in v.iter().enumerate() {
            self[(r, c)] = x;
        }
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let lhs_row = i * rhs.cols;
                let rhs_row = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[lhs_row + j] += a * rhs.data[rhs_row + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..self.cols {
                s += self.data[r * self.cols + c] * v[c];
            }
            out[r] = s;
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conjugate(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| self[(r, c)].conj())
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// self += s * rhs
    pub fn add_scaled(&mut self, s: C64, rhs: &CMat) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn pow(&self, n: usize) -> CMat {
        assert!(self.is_square());
        let mut out = CMat::identity(self.rows);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CMat {
        CMat::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.adjoint().mul(self).sub(&CMat::identity(self.rows)).max_norm() < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.sub(&self.adjoint()).max_norm() < tol
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vscale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|&z| s * z).collect()
}

/// a + s * b
pub fn vaxpy(a: &[C64], s: C64, b: &[C64]) -> Vec<C64> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(&x, &y)| x + s * y).collect()
}

pub fn normalize(a: &[C64]) -> Vec<C64> {
    let n = vnorm(a);
    assert!(n > 0.0, "cannot normalize the zero vector");
    vscale(a, C64::new(1.0 / n, 0.0))
}

/// |v><w| as a matrix.
pub fn outer(v: &[C64], w: &[C64]) -> CMat {
    CMat::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_identity() {
        let m = CMat::from_rows(&[
            vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)],
            vec![C64::new(3.0, 0.0), C64::new(2.0, 2.0)],
        ]);
        assert_eq!(m.mul(&CMat::identity(2)), m);
        assert_eq!(CMat::identity(2).mul(&m), m);
    }

    #[test]
    fn adjoint_twice_is_identity_map() {
        let m = CMat::from_fn(3, 2, |r, c| C64::new(r as f64, c as f64 + 1.0));
        assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn trace_and_norms() {
        let m = CMat::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)],
            vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        ]);
        assert_eq!(m.trace(), C64::new(0.0, 0.0));
        assert!((m.hs_norm() - 6.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.max_norm(), 2.0);
    }
}
