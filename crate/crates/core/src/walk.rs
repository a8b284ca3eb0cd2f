//! The unitary walk operator U_S on l2(D), flips and permuted flips, the
//! special-case realizations (star graph, Chalker-Coddington torus, coined
//! equivalence on lattice tori, complete-graph embedding), and probability
//! observables of the unitary dynamics.

use crate::error::{Result, SqwError};
use crate::graph::{EdgeBasis, Graph};
use crate::numerics::{eig_normal, vnorm, C64, CMat, SpectralDecomposition, CLUSTER_TOL};
use crate::scattering::{validate_family, ScatteringFamily, UNITARITY_TOL};

/// A unitary operator on l2(D) together with its edge-basis index map.
#[derive(Debug, Clone)]
pub struct WalkOperator {
    basis: EdgeBasis,
    matrix: CMat,
}

impl WalkOperator {
    pub fn basis(&self) -> &EdgeBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, psi: &PureState) -> PureState {
        PureState { amplitudes: self.matrix.matvec(&psi.amplitudes) }
    }

    /// The operator matrix re-expressed in a caller-supplied directed-edge
    /// order, for entrywise comparison against printed fixtures.
    pub fn matrix_in_edge_order(&self, order: &[(usize, usize)]) -> Result<CMat> {
        if order.len() != self.dim() {
            return Err(SqwError::DimensionMismatch(format!(
                "edge order lists {} edges, operator has {}",
                order.len(),
                self.dim()
            )));
        }
        let perm: Result<Vec<usize>> = order
            .iter()
            .map(|&(t, s)| {
                self.basis.index_of(t, s).ok_or_else(|| {
                    SqwError::InvalidInput(format!("({t}, {s}) is not a directed edge"))
                })
            })
            .collect();
        let perm = perm?;
        Ok(CMat::from_fn(self.dim(), self.dim(), |r, c| {
            self.matrix[(perm[r], perm[c])]
        }))
    }
}

/// Normalized vector on l2(D).
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<PureState> {
        let n = vnorm(&amplitudes);
        if (n - 1.0).abs() > 1e-12 {
            return Err(SqwError::BadState(format!("norm {n}, expected 1")));
        }
        Ok(PureState { amplitudes })
    }

    /// Basis state concentrated on one directed edge.
    pub fn basis_state(dim: usize, edge_index: usize) -> PureState {
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[edge_index] = C64::new(1.0, 0.0);
        PureState { amplitudes }
    }

    pub fn uniform(dim: usize) -> PureState {
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        PureState { amplitudes: vec![a; dim] }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// Build U_S: the entry at (index(z, x), index(x, y)) is S_{zy}(x).
pub fn build_unitary(g: &Graph, f: &ScatteringFamily) -> Result<WalkOperator> {
    let violations = validate_family(g, f);
    if !violations.is_empty() {
        return Err(SqwError::FamilyMismatch(format!("{:?}", violations[0])));
    }
    let basis = EdgeBasis::new(g);
    let mut matrix = CMat::zeros(basis.dim(), basis.dim());
    for x in 0..g.vertex_count() {
        let s = f.matrix(x);
        let in_block = basis.in_block(x);
        let out_block = basis.out_block(x);
        for (yi, &col) in in_block.iter().enumerate() {
            for (zi, &row) in out_block.iter().enumerate() {
                matrix[(row, col)] = s[(zi, yi)];
            }
        }
    }
    Ok(WalkOperator { basis, matrix })
}

/// The flip F |xy> = |yx> (theta = None), or the permuted flip
/// F_theta |x x_j> = |x_{theta(j)} x> on a d-regular graph.
pub fn flip_operator(g: &Graph, theta: Option<&[usize]>) -> Result<WalkOperator> {
    let basis = EdgeBasis::new(g);
    let mut matrix = CMat::zeros(basis.dim(), basis.dim());
    match theta {
        None => {
            for i in 0..basis.dim() {
                let (t, s) = basis.edge(i);
                let j = basis.index_of(s, t).expect("reverse edge exists");
                matrix[(j, i)] = C64::new(1.0, 0.0);
            }
        }
        Some(perm) => {
            let d = g.degree(0);
            if (0..g.vertex_count()).any(|x| g.degree(x) != d) {
                return Err(SqwError::NotRegular);
            }
            let mut sorted = perm.to_vec();
            sorted.sort_unstable();
            if sorted != (0..d).collect::<Vec<_>>() {
                return Err(SqwError::InvalidInput(format!("theta must permute 0..{d}")));
            }
            for x in 0..g.vertex_count() {
                for (j, &y) in g.neighbors(x).iter().enumerate() {
                    let col = basis.index_of(x, y).unwrap();
                    let target = g.neighbors(x)[perm[j]];
                    let row = basis.index_of(target, x).unwrap();
                    matrix[(row, col)] = C64::new(1.0, 0.0);
                }
            }
        }
    }
    Ok(WalkOperator { basis, matrix })
}

/// Edge and vertex occupation probabilities of U^n psi0.
pub fn evolve_and_observe(
    u: &WalkOperator,
    psi0: &PureState,
    steps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if psi0.amplitudes.len() != u.dim() {
        return Err(SqwError::DimensionMismatch(format!(
            "state has {} amplitudes, operator dimension is {}",
            psi0.amplitudes.len(),
            u.dim()
        )));
    }
    let mut psi = psi0.clone();
    for _ in 0..steps {
        psi = u.apply(&psi);
    }
    Ok(observe(u.basis(), &psi))
}

/// (edge probabilities, vertex probabilities) of a state.
pub fn observe(basis: &EdgeBasis, psi: &PureState) -> (Vec<f64>, Vec<f64>) {
    let edge: Vec<f64> = psi.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let nv = basis.edges().iter().map(|&(t, _)| t + 1).max().unwrap_or(0);
    let mut vertex = vec![0.0; nv];
    for (i, p) in edge.iter().enumerate() {
        vertex[basis.target_of(i)] += p;
    }
    (edge, vertex)
}

/// Vertex probability series Q_n(x) for n = 0..=steps.
pub fn vertex_probability_series(
    u: &WalkOperator,
    psi0: &PureState,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    if psi0.amplitudes.len() != u.dim() {
        return Err(SqwError::DimensionMismatch("state/operator size".into()));
    }
    let mut psi = psi0.clone();
    let mut series = Vec::with_capacity(steps + 1);
    series.push(observe(u.basis(), &psi).1);
    for _ in 0..steps {
        psi = u.apply(&psi);
        series.push(observe(u.basis(), &psi).1);
    }
    Ok(series)
}

/// Exact Cesaro-mean limit of Q_n(x): the sum over eigenvalue clusters of
/// ||P_x^I E({theta}) psi0||^2.
pub fn cesaro_vertex_limit(u: &WalkOperator, psi0: &PureState, x: usize) -> Result<f64> {
    let dec = eig_normal(u.matrix(), CLUSTER_TOL)?;
    Ok(cesaro_vertex_limit_from(&dec, u.basis(), psi0, x))
}

pub fn cesaro_vertex_limit_from(
    dec: &SpectralDecomposition,
    basis: &EdgeBasis,
    psi0: &PureState,
    x: usize,
) -> f64 {
    let in_block = basis.in_block(x);
    dec.projectors
        .iter()
        .map(|p| {
            let w = p.matvec(psi0.amplitudes());
            in_block.iter().map(|&i| w[i].norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// Finite-N Cesaro average of Q_n(x), for cross-checks against the exact limit.
pub fn cesaro_vertex_average(
    u: &WalkOperator,
    psi0: &PureState,
    x: usize,
    n_terms: usize,
) -> Result<f64> {
    let series = vertex_probability_series(u, psi0, n_terms - 1)?;
    Ok(series.iter().map(|q| q[x]).sum::<f64>() / n_terms as f64)
}

/// sup_x ||S1(x) - S2(x)||_HS; dominates ||U_{S1} - U_{S2}||_op.
pub fn perturbation_bound(f1: &ScatteringFamily, f2: &ScatteringFamily) -> Result<f64> {
    f1.max_hs_distance(f2)
}

// ---------------------------------------------------------------------------
// Star graph
// ---------------------------------------------------------------------------

/// Spectral data of the star-graph walk U = [[0, D(theta)], [S0, 0]]:
/// eigenvalue pairs +-e^{i alpha/2} lifted from sigma(D S0), with their block
/// spectral projectors.
#[derive(Debug, Clone)]
pub struct StarAnalysis {
    /// The 2N x 2N walk matrix in the basis {|0j>}, {|j0>}.
    pub u: CMat,
    /// One entry per eigenvalue cluster of D(theta) S0.
    pub pairs: Vec<StarEigenPair>,
    /// max over pairs of || U E - lambda E ||_max.
    pub eigen_residual: f64,
    /// || sum of all projectors - I ||_max.
    pub completeness_residual: f64,
}

#[derive(Debug, Clone)]
pub struct StarEigenPair {
    /// e^{i alpha} in sigma(D S0).
    pub ds_eigenvalue: C64,
    pub multiplicity: usize,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub projector_plus: CMat,
    pub projector_minus: CMat,
}

/// Block spectral analysis of the star-graph walk.
pub fn star_graph_analysis(s0: &CMat, theta: &[f64]) -> Result<StarAnalysis> {
    let n = theta.len();
    if s0.rows() != n || s0.cols() != n {
        return Err(SqwError::BadSize { expected: n, got: s0.rows() });
    }
    if !s0.is_unitary(UNITARITY_TOL) {
        return Err(SqwError::NotUnitary {
            vertex: 0,
            residual: s0.adjoint().mul(s0).sub(&CMat::identity(n)).max_norm(),
        });
    }
    let phases: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let d = CMat::diagonal(&phases);
    let d_inv = d.adjoint();
    let mut u = CMat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            u[(r, n + c)] = d[(r, c)];
            u[(n + r, c)] = s0[(r, c)];
        }
    }
    let ds = d.mul(s0);
    let dec = eig_normal(&ds, CLUSTER_TOL)?;
    let mut pairs: Vec<StarEigenPair> = Vec::with_capacity(dec.clusters.len());
    let mut eigen_residual: f64 = 0.0;
    let mut total = CMat::zeros(2 * n, 2 * n);
    for (cluster, p) in dec.clusters.iter().zip(dec.projectors.iter()) {
        let alpha = cluster.value.arg();
        let q = d_inv.mul(p).mul(&d);
        for sign in [1.0f64, -1.0] {
            let lam = C64::from_polar(1.0, alpha / 2.0) * sign;
            let half = C64::new(0.5, 0.0);
            let upper = d.mul(&q).scale(half * sign * C64::from_polar(1.0, -alpha / 2.0));
            let lower = d_inv.mul(p).scale(half * sign * C64::from_polar(1.0, alpha / 2.0));
            let mut e = CMat::zeros(2 * n, 2 * n);
            for r in 0..n {
                for c in 0..n {
                    e[(r, c)] = half * p[(r, c)];
                    e[(r, n + c)] = upper[(r, c)];
                    e[(n + r, c)] = lower[(r, c)];
                    e[(n + r, n + c)] = half * q[(r, c)];
                }
            }
            eigen_residual = eigen_residual.max(u.mul(&e).sub(&e.scale(lam)).max_norm());
            total.add_scaled(C64::new(1.0, 0.0), &e);
            if sign > 0.0 {
                pairs.push(StarEigenPair {
                    ds_eigenvalue: cluster.value,
                    multiplicity: cluster.members.len(),
                    lambda_plus: lam,
                    lambda_minus: -lam,
                    projector_plus: e,
                    projector_minus: CMat::zeros(0, 0),
                });
            } else {
                pairs.last_mut().expect("plus branch first").projector_minus = e;
            }
        }
    }
    let completeness_residual = total.sub(&CMat::identity(2 * n)).max_norm();
    Ok(StarAnalysis { u, pairs, eigen_residual, completeness_residual })
}

// ---------------------------------------------------------------------------
// Coined equivalence on lattice tori
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CoinedEquivalence {
    pub dim: usize,
    /// max entry discrepancy between U_S and the conjugated coined walk T C.
    pub max_discrepancy: f64,
}

/// Check that the walk on a periodic Z^d torus equals the coined walk T C
/// under the identification |x x_tau> ~ |x> (x) |tau>.
pub fn coined_equivalence_check(
    dims: &[usize],
    f: &ScatteringFamily,
) -> Result<CoinedEquivalence> {
    let g = Graph::torus(dims)?;
    let d = dims.len();
    let two_d = 2 * d;
    let n = g.vertex_count();
    let u = build_unitary(&g, f)?;

    // coined side: basis |x> (x) |tau>, index x * 2d + slot. The torus
    // neighbor order puts tau = +k at slot k-1 (neighbor x - e_k) and
    // tau = -k at slot d+k-1 (neighbor x + e_k).
    let full = n * two_d;
    let mut coin = CMat::zeros(full, full);
    for x in 0..n {
        let s = f.matrix(x);
        for j in 0..two_d {
            for k in 0..two_d {
                // C = S_theta(x) with theta(slot) = conjugate slot
                let theta_k = (k + d) % two_d;
                coin[(x * two_d + k, x * two_d + j)] = s[(theta_k, j)];
            }
        }
    }
    let mut shift = CMat::zeros(full, full);
    for x in 0..n {
        for slot in 0..two_d {
            // T moves x by +e_k for tau = +k and -e_k for tau = -k; that
            // destination is the neighbor stored at the conjugate slot.
            let opp = (slot + d) % two_d;
            let target = g.neighbors(x)[opp];
            shift[(target * two_d + slot, x * two_d + slot)] = C64::new(1.0, 0.0);
        }
    }
    let coined = shift.mul(&coin);

    // identification: edge (x, y) at slot j of x maps to coined index x*2d + j
    let basis = u.basis();
    let mut perm = vec![0usize; full];
    for i in 0..basis.dim() {
        let (x, y) = basis.edge(i);
        let j = g.neighbor_slot(x, y).unwrap();
        perm[i] = x * two_d + j;
    }
    let mut max_discrepancy: f64 = 0.0;
    for r in 0..full {
        for c in 0..full {
            let diff = (u.matrix()[(r, c)] - coined[(perm[r], perm[c])]).norm();
            max_discrepancy = max_discrepancy.max(diff);
        }
    }
    Ok(CoinedEquivalence { dim: full, max_discrepancy })
}

// ---------------------------------------------------------------------------
// Chalker-Coddington torus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ChalkerCoddington {
    pub walk: WalkOperator,
    /// coupling between the two orientation subspaces; zero by construction.
    pub off_block_norm: f64,
    /// max entry difference between the forward block and the directly
    /// constructed network operator.
    pub forward_match: f64,
    /// same for the reversed-orientation copy with exchanged matrices.
    pub reversed_match: f64,
}

/// Realize the Chalker-Coddington network on a J x K periodic torus (J, K
/// even, at least 4) as a scattering walk with 4x4 vertex matrices in the
/// compass slot order {NW, SE, NE, SW}, and verify the two orientation
/// subspaces are invariant and reproduce the network operator.
pub fn chalker_coddington_torus(
    j_size: usize,
    k_size: usize,
    s_even: &[Vec<CMat>],
    s_odd: &[Vec<CMat>],
) -> Result<ChalkerCoddington> {
    if j_size % 2 != 0 || k_size % 2 != 0 || j_size < 4 || k_size < 4 {
        return Err(SqwError::OddSize(j_size, k_size));
    }
    let (j2, k2) = (j_size / 2, k_size / 2);
    let check = |mats: &[Vec<CMat>], name: &str| -> Result<()> {
        if mats.len() != j2 || mats.iter().any(|row| row.len() != k2) {
            return Err(SqwError::InvalidInput(format!(
                "{name} must be a {j2} x {k2} grid of 2x2 unitaries"
            )));
        }
        for row in mats {
            for m in row {
                if m.rows() != 2 || !m.is_unitary(UNITARITY_TOL) {
                    return Err(SqwError::NotUnitary { vertex: 0, residual: f64::NAN });
                }
            }
        }
        Ok(())
    };
    check(s_even, "s_even")?;
    check(s_odd, "s_odd")?;

    let wrap = |v: isize, m: usize| -> usize {
        (((v % m as isize) + m as isize) % m as isize) as usize
    };
    // vertex ids: even grid first, then odd grid
    let evert = |j: isize, k: isize| wrap(j, j2) * k2 + wrap(k, k2);
    let overt = |j: isize, k: isize| j2 * k2 + wrap(j, j2) * k2 + wrap(k, k2);
    let nv = 2 * j2 * k2;

    // neighbor order is the compass slot order {NW, SE, NE, SW}
    let mut order: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut edges = Vec::new();
    for j in 0..j2 as isize {
        for k in 0..k2 as isize {
            let e = evert(j, k);
            order[e] = vec![
                overt(j - 1, k),
                overt(j, k - 1),
                overt(j, k),
                overt(j - 1, k - 1),
            ];
            let o = overt(j, k);
            order[o] = vec![
                evert(j, k + 1),
                evert(j + 1, k),
                evert(j + 1, k + 1),
                evert(j, k),
            ];
        }
    }
    for (v, ord) in order.iter().enumerate() {
        for &w in ord {
            if v < w {
                edges.push((v, w));
            }
        }
    }
    let g = Graph::new(nv, &edges, Some(order), None)?;

    // 4x4 vertex matrix [[0, S_odd], [S_even, 0]] at both parities
    let mut mats = Vec::with_capacity(nv);
    for v in 0..nv {
        let (j, k) = ((v % (j2 * k2)) / k2, v % k2);
        let se = &s_even[j][k];
        let so = &s_odd[j][k];
        let mut m = CMat::zeros(4, 4);
        for r in 0..2 {
            for c in 0..2 {
                m[(r, 2 + c)] = so[(r, c)];
                m[(2 + r, c)] = se[(r, c)];
            }
        }
        mats.push(m);
    }
    let family = ScatteringFamily::explicit(&g, mats)?;
    let walk = build_unitary(&g, &family)?;

    // forward-orientation edge labels (a, b) on the J x K grid -> walk pairs
    let lab = |a: isize, b: isize| wrap(a, j_size) * k_size + wrap(b, k_size);
    let ne = j_size * k_size;
    let mut fwd_pair = vec![(0usize, 0usize); ne];
    for a in 0..j_size as isize {
        for b in 0..k_size as isize {
            let pair = match (a % 2, b % 2) {
                (0, 0) => (evert(a / 2, b / 2), overt(a / 2 - 1, b / 2)),
                (1, 1) => (
                    evert((a - 1) / 2, (b + 1) / 2),
                    overt((a - 1) / 2, (b - 1) / 2),
                ),
                (0, 1) => (overt(a / 2 - 1, (b - 1) / 2), evert(a / 2, (b + 1) / 2)),
                (1, 0) => (overt((a - 1) / 2, b / 2), evert((a - 1) / 2, b / 2)),
                _ => unreachable!(),
            };
            fwd_pair[lab(a, b)] = pair;
        }
    }
    let basis = walk.basis();
    let fwd_index: Vec<usize> = fwd_pair
        .iter()
        .map(|&(t, s)| basis.index_of(t, s).expect("forward edge exists"))
        .collect();
    let rev_index: Vec<usize> = fwd_pair
        .iter()
        .map(|&(t, s)| basis.index_of(s, t).expect("reverse edge exists"))
        .collect();

    // direct network operator on the forward labels, and the reversed copy
    let mut ucc = CMat::zeros(ne, ne);
    let mut ucc_rev = CMat::zeros(ne, ne);
    for j in 0..j2 as isize {
        for k in 0..k2 as isize {
            let se = &s_even[j as usize][k as usize];
            let so = &s_odd[j as usize][k as usize];
            let (a, b) = (2 * j, 2 * k);
            // even node: inputs (2j,2k), (2j+1,2k-1); outputs (2j+1,2k), (2j,2k-1)
            ucc[(lab(a + 1, b), lab(a, b))] = se[(0, 0)];
            ucc[(lab(a, b - 1), lab(a, b))] = se[(1, 0)];
            ucc[(lab(a + 1, b), lab(a + 1, b - 1))] = se[(0, 1)];
            ucc[(lab(a, b - 1), lab(a + 1, b - 1))] = se[(1, 1)];
            // odd node: inputs (2j+2,2k+1), (2j+1,2k); outputs (2j+1,2k+1), (2j+2,2k)
            ucc[(lab(a + 1, b + 1), lab(a + 2, b + 1))] = so[(0, 0)];
            ucc[(lab(a + 2, b), lab(a + 2, b + 1))] = so[(1, 0)];
            ucc[(lab(a + 1, b + 1), lab(a + 1, b))] = so[(0, 1)];
            ucc[(lab(a + 2, b), lab(a + 1, b))] = so[(1, 1)];
            // reversed copy: orientations flipped, matrices exchanged
            ucc_rev[(lab(a, b), lab(a + 1, b))] = so[(0, 0)];
            ucc_rev[(lab(a + 1, b - 1), lab(a + 1, b))] = so[(1, 0)];
            ucc_rev[(lab(a, b), lab(a, b - 1))] = so[(0, 1)];
            ucc_rev[(lab(a + 1, b - 1), lab(a, b - 1))] = so[(1, 1)];
            ucc_rev[(lab(a + 2, b + 1), lab(a + 1, b + 1))] = se[(0, 0)];
            ucc_rev[(lab(a + 1, b), lab(a + 1, b + 1))] = se[(1, 0)];
            ucc_rev[(lab(a + 2, b + 1), lab(a + 2, b))] = se[(0, 1)];
            ucc_rev[(lab(a + 1, b), lab(a + 2, b))] = se[(1, 1)];
        }
    }

    let m = walk.matrix();
    let mut off_block_norm: f64 = 0.0;
    let mut forward_match: f64 = 0.0;
    let mut reversed_match: f64 = 0.0;
    for r in 0..ne {
        for c in 0..ne {
            off_block_norm = off_block_norm
                .max(m[(rev_index[r], fwd_index[c])].norm())
                .max(m[(fwd_index[r], rev_index[c])].norm());
            forward_match =
                forward_match.max((m[(fwd_index[r], fwd_index[c])] - ucc[(r, c)]).norm());
            reversed_match =
                reversed_match.max((m[(rev_index[r], rev_index[c])] - ucc_rev[(r, c)]).norm());
        }
    }
    Ok(ChalkerCoddington { walk, off_block_norm, forward_match, reversed_match })
}

// ---------------------------------------------------------------------------
// Complete-graph embedding
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CompleteEmbedding {
    pub walk_on_complete: WalkOperator,
    /// max entry difference between the l2(D) block of U_K and U_S.
    pub block_match: f64,
    /// coupling between the l2(D) block and its complement; zero by construction.
    pub off_block_norm: f64,
    /// coupling between different connected components of the complement graph.
    pub complement_component_coupling: f64,
}

/// Embed U_S into a walk on the complete graph over the same vertices, with
/// direct-sum scattering S(x) (+) S_hat(x), and verify U_{S_K} = U_S (+) U_hat.
/// `f_hat[x]` must be unitary of the complement degree (0x0 where the
/// complement degree vanishes).
pub fn complete_embedding(
    g: &Graph,
    f: &ScatteringFamily,
    f_hat: &[CMat],
) -> Result<CompleteEmbedding> {
    let n = g.vertex_count();
    let comp_adj = g.complement_adjacency();
    if comp_adj.iter().all(|a| a.is_empty()) {
        return Err(SqwError::ComplementEmpty);
    }
    if f_hat.len() != n {
        return Err(SqwError::FamilyMismatch(format!(
            "{} complement matrices for {} vertices",
            f_hat.len(),
            n
        )));
    }
    let mut order: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut mats: Vec<CMat> = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for x in 0..n {
        let d = g.degree(x);
        let dh = comp_adj[x].len();
        if f_hat[x].rows() != dh || f_hat[x].cols() != dh {
            return Err(SqwError::BadSize { expected: dh, got: f_hat[x].rows() });
        }
        let mut ord: Vec<usize> = g.neighbors(x).to_vec();
        ord.extend_from_slice(&comp_adj[x]);
        for &w in &ord {
            if x < w {
                edges.push((x, w));
            }
        }
        order.push(ord);
        let mut m = CMat::zeros(d + dh, d + dh);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = f.matrix(x)[(r, c)];
            }
        }
        for r in 0..dh {
            for c in 0..dh {
                m[(d + r, d + c)] = f_hat[x][(r, c)];
            }
        }
        mats.push(m);
    }
    let k_graph = Graph::new(n, &edges, Some(order), None)?;
    let family = ScatteringFamily::explicit(&k_graph, mats)?;
    let walk = build_unitary(&k_graph, &family)?;

    let g_basis = EdgeBasis::new(g);
    let k_basis = walk.basis();
    let g_in_k: Vec<usize> = (0..g_basis.dim())
        .map(|i| {
            let (t, s) = g_basis.edge(i);
            k_basis.index_of(t, s).expect("G edge exists in K")
        })
        .collect();
    let in_g = {
        let mut flag = vec![false; k_basis.dim()];
        for &i in &g_in_k {
            flag[i] = true;
        }
        flag
    };
    let us = build_unitary(g, f)?;
    let m = walk.matrix();
    let mut block_match: f64 = 0.0;
    for r in 0..g_basis.dim() {
        for c in 0..g_basis.dim() {
            block_match =
                block_match.max((m[(g_in_k[r], g_in_k[c])] - us.matrix()[(r, c)]).norm());
        }
    }
    let mut off_block_norm: f64 = 0.0;
    for r in 0..k_basis.dim() {
        for c in 0..k_basis.dim() {
            if in_g[r] != in_g[c] {
                off_block_norm = off_block_norm.max(m[(r, c)].norm());
            }
        }
    }
    // connected components of the complement graph, to exhibit the
    // direct-sum structure of the complement walk
    let mut comp_id = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp_adj[start].is_empty() || comp_id[start] != usize::MAX {
            continue;
        }
        let id = next;
        next += 1;
        let mut stack = vec![start];
        comp_id[start] = id;
        while let Some(v) = stack.pop() {
            for &w in &comp_adj[v] {
                if comp_id[w] == usize::MAX {
                    comp_id[w] = id;
                    stack.push(w);
                }
            }
        }
    }
    let mut complement_component_coupling: f64 = 0.0;
    for r in 0..k_basis.dim() {
        if in_g[r] {
            continue;
        }
        let (rt, _) = k_basis.edge(r);
        for c in 0..k_basis.dim() {
            if in_g[c] {
                continue;
            }
            let (ct, _) = k_basis.edge(c);
            if comp_id[rt] != comp_id[ct] {
                complement_component_coupling =
                    complement_component_coupling.max(m[(r, c)].norm());
            }
        }
    }
    Ok(CompleteEmbedding {
        walk_on_complete: walk,
        block_match,
        off_block_norm,
        complement_component_coupling,
    })
}
