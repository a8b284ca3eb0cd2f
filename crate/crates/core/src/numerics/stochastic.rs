use std::ops::Index;

use crate::error::{Result, SqwError};
use crate::numerics::cmat::{C64, CMat};
use crate::numerics::eig::general_eigenvalues;
use crate::numerics::linalg::lu_solve;

/// Support threshold: entries above this count as arcs of the support digraph.
pub const SUPPORT_EPS: f64 = 1e-12;

const ROW_SUM_TOL: f64 = 1e-8;

/// Real nonnegative row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochMat {
    n: usize,
    data: Vec<f64>,
}

impl StochMat {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(SqwError::BadStochastic(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        for (i, &x) in data.iter().enumerate() {
            if !x.is_finite() || x < -SUPPORT_EPS {
                return Err(SqwError::BadStochastic(format!(
                    "entry ({}, {}) = {x} is negative",
                    i / n,
                    i % n
                )));
            }
        }
        for r in 0..n {
            let s: f64 = data[r * n..(r + 1) * n].iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(SqwError::BadStochastic(format!("row {r} sums to {s}")));
            }
        }
        Ok(StochMat { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(SqwError::BadStochastic("ragged rows".into()));
            }
            data.extend_from_slice(row);
        }
        StochMat::new(n, data)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    /// v P for a row vector v.
    pub fn row_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for r in 0..self.n {
            let vr = v[r];
            if vr == 0.0 {
                continue;
            }
            for c in 0..self.n {
                out[c] += vr * self.data[r * self.n + c];
            }
        }
        out
    }

    pub fn mul(&self, rhs: &StochMat) -> StochMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        StochMat { n, data }
    }

    pub fn pow(&self, e: usize) -> StochMat {
        let mut out = StochMat::identity(self.n);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn identity(n: usize) -> StochMat {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        StochMat { n, data }
    }

    pub fn transpose(&self) -> StochMat {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c];
            }
        }
        StochMat { n, data }
    }

    pub fn is_bistochastic(&self, tol: f64) -> bool {
        (0..self.n).all(|c| {
            let s: f64 = (0..self.n).map(|r| self.data[r * self.n + c]).sum();
            (s - 1.0).abs() <= tol
        })
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |r, c| C64::new(self.data[r * self.n + c], 0.0))
    }

    /// (1/N) sum of P^k, k < N, entrywise.
    pub fn cesaro(&self, n_terms: usize) -> Vec<f64> {
        assert!(n_terms > 0);
        let n = self.n;
        let mut acc = StochMat::identity(n);
        let mut sum = vec![0.0; n * n];
        for _ in 0..n_terms {
            for (s, a) in sum.iter_mut().zip(acc.data.iter()) {
                *s += a;
            }
            acc = acc.mul(self);
        }
        for s in sum.iter_mut() {
            *s /= n_terms as f64;
        }
        sum
    }

    fn support_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|r| {
                (0..self.n)
                    .filter(|&c| self.data[r * self.n + c] > SUPPORT_EPS)
                    .collect()
            })
            .collect()
    }
}

impl Index<(usize, usize)> for StochMat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.n + c]
    }
}

/// Strongly connected components (Kosaraju, iterative), in arbitrary order.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // iterative post-order
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        seen[start] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &v in order.iter().rev() {
        if comp[v] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![v];
        comp[v] = id;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &w in &radj[u] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Period of one strongly connected component: gcd of closed-walk lengths,
/// computed as gcd of level differences along intra-component arcs.
fn component_period(adj: &[Vec<usize>], members: &[usize]) -> usize {
    let in_comp: std::collections::HashSet<usize> = members.iter().copied().collect();
    let root = members[0];
    let mut level: std::collections::HashMap<usize, i64> = std::collections::HashMap::new();
    level.insert(root, 0);
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        let lu = level[&u];
        for &w in &adj[u] {
            if !in_comp.contains(&w) {
                continue;
            }
            match level.get(&w) {
                None => {
                    level.insert(w, lu + 1);
                    queue.push_back(w);
                }
                Some(&lw) => {
                    let diff = (lu + 1 - lw).unsigned_abs();
                    if diff != 0 {
                        g = gcd(g, diff);
                    } else if g == 0 {
                        // a closed walk of even/odd structure will fix g later;
                        // diff 0 alone says nothing
                    }
                }
            }
        }
    }
    // diff 0 arcs mean two walks of equal length; the gcd over nonzero
    // differences is the period. All-zero differences cannot happen in a
    // nontrivial SCC; a single vertex with a self-loop has period 1.
    if g == 0 {
        if members.len() == 1 && adj[members[0]].contains(&members[0]) {
            1
        } else {
            0
        }
    } else {
        g as usize
    }
}

/// Perron-Frobenius analysis of a row-stochastic matrix.
#[derive(Debug, Clone)]
pub struct PerronAnalysis {
    pub irreducible: bool,
    pub period: usize,
    /// One stationary row vector per recurrent class, each supported on its class.
    pub stationary: Vec<Vec<f64>>,
    /// Recurrent classes (closed communicating classes), sorted by first member.
    pub recurrent_classes: Vec<Vec<usize>>,
    /// Full eigenvalue multiset of P.
    pub eigenvalues: Vec<C64>,
    /// Eigenvalues of modulus within 1e-8 of 1.
    pub modulus_one_spectrum: Vec<C64>,
}

pub fn perron_analysis(p: &StochMat) -> Result<PerronAnalysis> {
    let n = p.size();
    let adj = p.support_adjacency();
    let comps = strongly_connected_components(&adj);
    let irreducible = comps.len() == 1;
    let mut comp_of = vec![0usize; n];
    for (id, members) in comps.iter().enumerate() {
        for &v in members {
            comp_of[v] = id;
        }
    }
    let mut recurrent: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(id, members)| {
            members
                .iter()
                .all(|&v| adj[v].iter().all(|&w| comp_of[w] == *id))
        })
        .map(|(_, members)| members.clone())
        .collect();
    recurrent.sort_by_key(|m| m[0]);

    let period = {
        let periods: Vec<usize> = recurrent
            .iter()
            .map(|members| component_period(&adj, members))
            .filter(|&p| p != 0)
            .collect();
        if periods.is_empty() {
            1
        } else {
            periods.iter().fold(0u64, |acc, &p| gcd(acc, p as u64)).max(1) as usize
        }
    };

    let mut stationary = Vec::with_capacity(recurrent.len());
    for members in &recurrent {
        let m = members.len();
        let pi = if m == 1 {
            vec![1.0]
        } else {
            // solve pi (P_c - I) = 0 with sum(pi) = 1 on the class block:
            // rows of the transposed system, last equation replaced by the
            // normalization.
            let mut a = CMat::zeros(m, m);
            for (ri, &vr) in members.iter().enumerate() {
                for (ci, &vc) in members.iter().enumerate() {
                    // (P^T - I)[ri][ci] = P[vc][vr] - delta
                    let mut val = p[(vc, vr)];
                    if ri == ci {
                        val -= 1.0;
                    }
                    a[(ri, ci)] = C64::new(val, 0.0);
                }
            }
            for ci in 0..m {
                a[(m - 1, ci)] = C64::new(1.0, 0.0);
            }
            let mut b = CMat::zeros(m, 1);
            b[(m - 1, 0)] = C64::new(1.0, 0.0);
            let sol = lu_solve(&a, &b)?;
            (0..m).map(|i| sol[(i, 0)].re).collect()
        };
        let mut full = vec![0.0; n];
        for (i, &v) in members.iter().enumerate() {
            full[v] = pi[i].max(0.0);
        }
        let s: f64 = full.iter().sum();
        for x in full.iter_mut() {
            *x /= s;
        }
        stationary.push(full);
    }

    let eigenvalues = general_eigenvalues(&p.to_cmat())?;
    let modulus_one_spectrum: Vec<C64> = eigenvalues
        .iter()
        .copied()
        .filter(|l| (l.norm() - 1.0).abs() < 1e-8)
        .collect();

    Ok(PerronAnalysis {
        irreducible,
        period,
        stationary,
        recurrent_classes: recurrent,
        eigenvalues,
        modulus_one_spectrum,
    })
}

/// (1/N) sum_{k<N} M^k by iterated multiplication.
pub fn cesaro_mean(m: &CMat, n_terms: usize) -> CMat {
    assert!(m.is_square());
    assert!(n_terms > 0);
    let dim = m.rows();
    let mut acc = CMat::identity(dim);
    let mut sum = CMat::zeros(dim, dim);
    for _ in 0..n_terms {
        sum.add_scaled(C64::new(1.0, 0.0), &acc);
        acc = acc.mul(m);
    }
    sum.scale(C64::new(1.0 / n_terms as f64, 0.0))
}
