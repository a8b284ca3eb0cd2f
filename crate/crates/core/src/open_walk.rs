//! The edge-space quantum channel Phi_S: Kraus blocks K(x), decoherence
//! pinchings, the bistochastic matrix Phi^Diag driving the diagonal dynamics,
//! channel spectrum via the partial-isometry structure, asymptotic states,
//! quantum-trajectory sampling, and the Hadamard-line closed forms.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::error::{Result, SqwError};
use crate::graph::{EdgeBasis, Graph};
use crate::numerics::{
    general_eigenvalues, hermitian_eig, perron_analysis, rank, C64, CMat, PerronAnalysis,
    StochMat,
};
use crate::scattering::ScatteringFamily;
use crate::walk::{build_unitary, WalkOperator};

/// Probability below which a measurement branch is pruned and the remaining
/// weights renormalized.
pub const BRANCH_EPS: f64 = 1e-14;
/// Largest |D| for which the |D|^2-dimensional superoperator is materialized.
pub const SUPEROP_LIMIT: usize = 64;
/// Moduli below this are treated as the (possibly defective) zero eigenvalue
/// of a channel; Jordan structure spreads numerical zeros to ~eps^(1/3).
const ZERO_EIG_TOL: f64 = 1e-5;

/// Density matrix on l2(D) or l2(V).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<DensityMatrix> {
        if !matrix.is_square() {
            return Err(SqwError::BadState("density matrix must be square".into()));
        }
        if matrix.sub(&matrix.adjoint()).max_norm() > 1e-10 {
            return Err(SqwError::BadState("density matrix must be Hermitian".into()));
        }
        if (matrix.trace().re - 1.0).abs() > 1e-10 {
            return Err(SqwError::BadState(format!("trace {} != 1", matrix.trace().re)));
        }
        let (vals, _) = hermitian_eig(&matrix)?;
        if vals.first().copied().unwrap_or(0.0) < -1e-10 {
            return Err(SqwError::BadState(format!("negative eigenvalue {}", vals[0])));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn pure(psi: &[C64]) -> Result<DensityMatrix> {
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-10 {
            return Err(SqwError::BadState(format!("pure state norm^2 {n} != 1")));
        }
        Ok(DensityMatrix { matrix: crate::numerics::outer(psi, psi) })
    }

    pub fn basis_state(dim: usize, i: usize) -> DensityMatrix {
        let mut m = CMat::zeros(dim, dim);
        m[(i, i)] = C64::new(1.0, 0.0);
        DensityMatrix { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> DensityMatrix {
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { matrix: m }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Diagonal in the canonical basis, as a real probability-like vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }
}

/// Von Neumann entropy -tr(rho ln rho).
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (vals, _) = hermitian_eig(rho.matrix()).expect("density matrices are Hermitian");
    -vals.iter().filter(|&&l| l > 1e-14).map(|&l| l * l.ln()).sum::<f64>()
}

/// A finite Kraus family {K_j} with sum K_j† K_j = I.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    dim: usize,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<KrausChannel> {
        let dim = kraus.first().map(|k| k.rows()).unwrap_or(0);
        if dim == 0 {
            return Err(SqwError::InvalidInput("empty Kraus family".into()));
        }
        let mut sum = CMat::zeros(dim, dim);
        for k in &kraus {
            if k.rows() != dim || k.cols() != dim {
                return Err(SqwError::DimensionMismatch("Kraus operator size".into()));
            }
            sum.add_scaled(C64::new(1.0, 0.0), &k.adjoint().mul(k));
        }
        let residual = sum.sub(&CMat::identity(dim)).max_norm();
        if residual > 1e-9 {
            return Err(SqwError::InvalidInput(format!(
                "Kraus family is not trace preserving: residual {residual:.3e}"
            )));
        }
        Ok(KrausChannel { kraus, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_list(&self) -> &[CMat] {
        &self.kraus
    }

    /// sum_j K_j A K_j† on a raw matrix.
    pub fn apply_raw(&self, a: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out.add_scaled(C64::new(1.0, 0.0), &k.mul(a).mul(&k.adjoint()));
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(SqwError::DimensionMismatch(format!(
                "state dimension {} vs channel dimension {}",
                rho.dim(),
                self.dim
            )));
        }
        // CPTP maps preserve the state set; skip revalidation
        Ok(DensityMatrix { matrix: self.apply_raw(rho.matrix()) })
    }

    pub fn apply_n(&self, rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
        let mut out = rho.clone();
        for _ in 0..n {
            out = self.apply(&out)?;
        }
        Ok(out)
    }

    /// Heisenberg-picture adjoint sum_j K_j† B K_j.
    pub fn apply_adjoint_raw(&self, b: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out.add_scaled(C64::new(1.0, 0.0), &k.adjoint().mul(b).mul(k));
        }
        out
    }

    /// Choi matrix sum_{ij} E_ij (x) Phi(E_ij); positive semidefinite iff the
    /// map is completely positive.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut c = CMat::zeros(d * d, d * d);
        for k in &self.kraus {
            // Choi = sum_k vec(K) vec(K)† with vec stacking columns of blocks:
            // block (i, j) of Choi is K E_ij K† ... built directly instead
            for i in 0..d {
                for j in 0..d {
                    // Phi(E_ij) = K e_i (K e_j)†
                    for r in 0..d {
                        for s in 0..d {
                            let add = k[(r, i)] * k[(s, j)].conj();
                            let entry = c[(i * d + r, j * d + s)];
                            c[(i * d + r, j * d + s)] = entry + add;
                        }
                    }
                }
            }
        }
        c
    }

    /// Dense superoperator in the row-major vectorization: (Phi rho)_vec =
    /// `S rho_vec` with `S[(i,j),(k,l)] = sum K[i][k] conj(K[j][l])`. Only
    /// materialized up to SUPEROP_LIMIT.
    pub fn superoperator(&self) -> Result<CMat> {
        let d = self.dim;
        if d > SUPEROP_LIMIT {
            return Err(SqwError::TooLarge(d * d, SUPEROP_LIMIT * SUPEROP_LIMIT));
        }
        let mut s = CMat::zeros(d * d, d * d);
        for k in &self.kraus {
            // accumulate over the nonzero pattern of K
            let nz: Vec<(usize, usize, C64)> = (0..d)
                .flat_map(|r| {
                    (0..d).filter_map(move |c| {
                        let v = k[(r, c)];
                        (v.norm_sqr() > 0.0).then_some((r, c, v))
                    })
                })
                .collect();
            for &(i, kk, a) in &nz {
                for &(j, l, b) in &nz {
                    let entry = s[(i * d + j, kk * d + l)];
                    s[(i * d + j, kk * d + l)] = entry + a * b.conj();
                }
            }
        }
        Ok(s)
    }
}

/// Kraus blocks K(x) = P_x^O U_S P_x^I of the edge channel, labelled by vertex.
pub fn kraus_operators(g: &Graph, f: &ScatteringFamily) -> Result<Vec<CMat>> {
    let u = build_unitary(g, f)?;
    Ok(kraus_from_walk(g, &u))
}

fn kraus_from_walk(g: &Graph, u: &WalkOperator) -> Vec<CMat> {
    let basis = u.basis();
    let dim = basis.dim();
    (0..g.vertex_count())
        .map(|x| {
            let mut k = CMat::zeros(dim, dim);
            for &col in &basis.in_block(x) {
                for &row in basis.out_block(x) {
                    k[(row, col)] = u.matrix()[(row, col)];
                }
            }
            k
        })
        .collect()
}

/// The edge channel Phi_S with its vertex-labelled Kraus family.
pub fn edge_channel(g: &Graph, f: &ScatteringFamily) -> Result<KrausChannel> {
    KrausChannel::new(kraus_operators(g, f)?)
}

/// The three pinchings: D^I, D^O, and Diag = D^O after D^I.
pub fn decoherence_maps(g: &Graph) -> Result<(KrausChannel, KrausChannel, KrausChannel)> {
    let basis = EdgeBasis::new(g);
    let dim = basis.dim();
    let projector = |idx: &[usize]| -> CMat {
        let mut p = CMat::zeros(dim, dim);
        for &i in idx {
            p[(i, i)] = C64::new(1.0, 0.0);
        }
        p
    };
    let d_in =
        KrausChannel::new((0..g.vertex_count()).map(|x| projector(&basis.in_block(x))).collect())?;
    let d_out =
        KrausChannel::new((0..g.vertex_count()).map(|x| projector(basis.out_block(x))).collect())?;
    let diag = KrausChannel::new((0..dim).map(|i| projector(&[i])).collect())?;
    Ok((d_in, d_out, diag))
}

/// The restriction Diag o Phi_S on diagonal edge operators, stored as the
/// classical Markov transition matrix over directed edges (row convention:
/// row = source edge). Its transpose is the column-action matrix printed in
/// operator form.
#[derive(Debug, Clone)]
pub struct DiagChannel {
    transition: StochMat,
    basis: EdgeBasis,
}

impl DiagChannel {
    /// Row-stochastic transition matrix `P[(xy)][(zx)] = |S_zy(x)|^2`.
    pub fn transition(&self) -> &StochMat {
        &self.transition
    }

    /// Column-action matrix `M[(zx)][(xy)] = |S_zy(x)|^2`, acting on diagonal
    /// vectors by v -> M v.
    pub fn column_action(&self) -> CMat {
        self.transition.transpose().to_cmat()
    }

    /// Column-action matrix re-indexed to a caller-supplied edge order.
    pub fn column_action_in_edge_order(&self, order: &[(usize, usize)]) -> Result<CMat> {
        let m = self.transition.transpose();
        let perm: Result<Vec<usize>> = order
            .iter()
            .map(|&(t, s)| {
                self.basis.index_of(t, s).ok_or_else(|| {
                    SqwError::InvalidInput(format!("({t}, {s}) is not a directed edge"))
                })
            })
            .collect();
        let perm = perm?;
        Ok(CMat::from_fn(order.len(), order.len(), |r, c| {
            C64::new(m[(perm[r], perm[c])], 0.0)
        }))
    }

    pub fn basis(&self) -> &EdgeBasis {
        &self.basis
    }

    pub fn perron(&self) -> Result<PerronAnalysis> {
        perron_analysis(&self.transition)
    }

    pub fn is_bistochastic(&self, tol: f64) -> bool {
        self.transition.is_bistochastic(tol)
    }
}

/// Build Phi^Diag: the edge (x, y) scatters to (z, x) with weight |S_zy(x)|^2.
pub fn phi_diag(g: &Graph, f: &ScatteringFamily) -> Result<DiagChannel> {
    let violations = crate::scattering::validate_family(g, f);
    if !violations.is_empty() {
        return Err(SqwError::FamilyMismatch(format!("{:?}", violations[0])));
    }
    let basis = EdgeBasis::new(g);
    let dim = basis.dim();
    let mut rows = vec![vec![0.0; dim]; dim];
    for x in 0..g.vertex_count() {
        let s = f.matrix(x);
        let in_block = basis.in_block(x);
        let out_block = basis.out_block(x);
        for (yi, &src) in in_block.iter().enumerate() {
            for (zi, &dst) in out_block.iter().enumerate() {
                rows[src][dst] = s[(zi, yi)].norm_sqr();
            }
        }
    }
    let transition = StochMat::from_rows(&rows)?;
    Ok(DiagChannel { transition, basis })
}

/// Spectral report for the edge channel.
#[derive(Debug, Clone)]
pub struct ChannelSpectrum {
    /// dim ker Phi_S computed from the superoperator
    pub kernel_dim: usize,
    /// (sum d_x)^2 - sum d_x^2
    pub expected_kernel_dim: usize,
    /// worst norm of Phi applied to a basis element of range(I - D^I)
    pub kernel_range_residual: f64,
    /// distinct nonzero eigenvalues of the superoperator with geometric multiplicities
    pub nonzero_spectrum: Vec<(C64, usize)>,
    /// distinct nonzero eigenvalues of Phi^Diag with geometric multiplicities
    pub diag_nonzero_spectrum: Vec<(C64, usize)>,
    /// worst residual of the eigenvector lift Phi(B) = lambda B
    pub lift_residual: f64,
    pub diagonalizable: bool,
}

fn basis_targets_match(basis: &EdgeBasis, vectorized: usize, dim: usize) -> bool {
    basis.target_of(vectorized / dim) == basis.target_of(vectorized % dim)
}

fn distinct_nonzero_with_geometric(
    m: &CMat,
    eigenvalues: &[C64],
) -> Vec<(C64, usize)> {
    let groups = crate::numerics::cluster_values(eigenvalues, 1e-6);
    let mut out = Vec::new();
    for g in groups {
        let lam: C64 = g.iter().map(|&j| eigenvalues[j]).sum::<C64>() / g.len() as f64;
        if lam.norm() <= ZERO_EIG_TOL {
            continue;
        }
        let mut shifted = m.clone();
        shifted.add_scaled(-lam, &CMat::identity(m.rows()));
        let geo = m.rows() - rank(&shifted, 1e-7);
        out.push((lam, geo));
    }
    out.sort_by(|a, b| {
        b.0.norm()
            .total_cmp(&a.0.norm())
            .then(b.0.re.total_cmp(&a.0.re))
            .then(b.0.im.total_cmp(&a.0.im))
    });
    out
}

/// Full spectral verification of Phi_S against Phi^Diag. Materializes the
/// superoperator, so |D| must not exceed SUPEROP_LIMIT.
pub fn channel_spectrum(g: &Graph, f: &ScatteringFamily) -> Result<ChannelSpectrum> {
    let channel = edge_channel(g, f)?;
    let dim = channel.dim();
    let sup = channel.superoperator()?;
    let degree_sum: usize = g.degree_sum();
    let degree_sq_sum: usize = (0..g.vertex_count()).map(|x| g.degree(x) * g.degree(x)).sum();
    let expected_kernel_dim = degree_sum * degree_sum - degree_sq_sum;
    let kernel_dim = dim * dim - rank(&sup, 1e-7);

    // ker Phi_S contains range(I - D^I): matrix units E_ab with edges a, b
    // pointing into different vertices are annihilated
    let basis = EdgeBasis::new(g);
    let mut kernel_range_residual: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            if basis.target_of(a) == basis.target_of(b) {
                continue;
            }
            let mut e = CMat::zeros(dim, dim);
            e[(a, b)] = C64::new(1.0, 0.0);
            kernel_range_residual = kernel_range_residual.max(channel.apply_raw(&e).max_norm());
        }
    }

    // Phi acts through D^I: superoperator columns outside range(D^I) vanish
    // exactly, so the nonzero spectrum with algebraic multiplicities is that
    // of the compression onto the (sum of d_x^2)-dimensional range of D^I.
    // This keeps the QR iteration away from the huge defective kernel.
    let in_pairs: Vec<usize> = (0..dim * dim)
        .filter(|&v| basis_targets_match(&basis, v, dim))
        .collect();
    let compressed = sup.submatrix(&in_pairs, &in_pairs);
    let comp_eigs = general_eigenvalues(&compressed)?;
    let nonzero_spectrum = distinct_nonzero_with_geometric(&sup, &comp_eigs);
    let diag = phi_diag(g, f)?;
    let m_diag = diag.column_action();
    let diag_eigs = general_eigenvalues(&m_diag)?;
    let diag_nonzero_spectrum = distinct_nonzero_with_geometric(&m_diag, &diag_eigs);

    // eigenvector lift: from a Phi^Diag eigenvector w at lambda != 0,
    // B = Diag(w) + (1/lambda) (I - D^I)(Phi(Diag(w))) satisfies Phi(B) = lambda B
    let (d_in, _, _) = decoherence_maps(g)?;
    let mut lift_residual: f64 = 0.0;
    for &(lam, _) in &diag_nonzero_spectrum {
        let mut shifted = m_diag.clone();
        shifted.add_scaled(-lam, &CMat::identity(dim));
        let ns = crate::numerics::null_space(&shifted, 1e-7);
        for j in 0..ns.cols() {
            let w = ns.column(j);
            let diag_w = CMat::diagonal(&w);
            let phi_dw = channel.apply_raw(&diag_w);
            let mut b = phi_dw.sub(&d_in.apply_raw(&phi_dw)).scale(C64::new(1.0, 0.0) / lam);
            b.add_scaled(C64::new(1.0, 0.0), &diag_w);
            let res = channel.apply_raw(&b).sub(&b.scale(lam)).max_norm();
            lift_residual = lift_residual.max(res);
        }
    }

    // diagonalizable iff every nonzero cluster has geometric = algebraic
    // multiplicity and the zero eigenvalue fills exactly the kernel
    let zero_algebraic = dim * dim - comp_eigs.len()
        + comp_eigs.iter().filter(|l| l.norm() <= ZERO_EIG_TOL).count();
    let groups = crate::numerics::cluster_values(&comp_eigs, 1e-6);
    let mut diagonalizable = zero_algebraic == kernel_dim;
    for grp in groups {
        let lam: C64 = grp.iter().map(|&j| comp_eigs[j]).sum::<C64>() / grp.len() as f64;
        if lam.norm() <= ZERO_EIG_TOL {
            continue;
        }
        if let Some(&(_, geo)) =
            nonzero_spectrum.iter().find(|(l, _)| (l - lam).norm() < 1e-6)
        {
            if geo != grp.len() {
                diagonalizable = false;
            }
        }
    }

    Ok(ChannelSpectrum {
        kernel_dim,
        expected_kernel_dim,
        kernel_range_residual,
        nonzero_spectrum,
        diag_nonzero_spectrum,
        lift_residual,
        diagonalizable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticMode {
    /// odd cycle present: Phi^n converges exponentially
    Exponential,
    /// bipartite graph: period-2 peripheral spectrum, Cesaro convergence
    Cesaro,
    /// some scattering entry vanishes; no classification claimed
    Unclassified,
}

#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    pub mode: AsymptoticMode,
    /// the flat invariant state I / sum d_x
    pub limit_state: CMat,
    /// Cesaro-limit vertex law d_x / sum d_y
    pub vertex_limit: Vec<f64>,
    /// largest eigenvalue modulus strictly inside the unit disk
    pub subdominant_modulus: Option<f64>,
    /// -ln(subdominant): the computed exponential rate, no claim attached
    pub decay_rate: Option<f64>,
    /// full Phi^Diag spectrum for reference
    pub diag_spectrum: Vec<C64>,
}

/// Classify the asymptotics of Phi_S^n from the spectrum of Phi^Diag.
pub fn asymptotic_state(g: &Graph, f: &ScatteringFamily) -> Result<AsymptoticReport> {
    let diag = phi_diag(g, f)?;
    let spec = general_eigenvalues(&diag.column_action())?;
    let degree_sum = g.degree_sum();
    let dim = diag.basis().dim();
    let mut limit_state = CMat::zeros(dim, dim);
    for i in 0..dim {
        limit_state[(i, i)] = C64::new(1.0 / degree_sum as f64, 0.0);
    }
    let vertex_limit: Vec<f64> =
        (0..g.vertex_count()).map(|x| g.degree(x) as f64 / degree_sum as f64).collect();
    let subdominant = spec
        .iter()
        .map(|l| l.norm())
        .filter(|&m| m < 1.0 - 1e-8)
        .fold(0.0f64, f64::max);
    let subdominant_modulus = (subdominant > 0.0).then_some(subdominant);
    let mode = if f.has_zero_entry(BRANCH_EPS) {
        AsymptoticMode::Unclassified
    } else if g.has_odd_cycle() {
        AsymptoticMode::Exponential
    } else {
        AsymptoticMode::Cesaro
    };
    Ok(AsymptoticReport {
        mode,
        limit_state,
        vertex_limit,
        subdominant_modulus,
        decay_rate: subdominant_modulus.map(|m| -m.ln()),
        diag_spectrum: spec,
    })
}

#[derive(Debug, Clone)]
pub struct Trajectories {
    /// measured vertex outcomes, one row per trajectory, `steps` entries each
    pub outcomes: Vec<Vec<u32>>,
    /// empirical mean of the post-evolution states at time `steps`
    pub mean_state: CMat,
}

/// Sample quantum trajectories of the repeated measure-then-evolve protocol.
/// One root seed; trajectory i uses an independent counter-indexed substream,
/// so results do not depend on the number of worker threads.
pub fn sample_trajectories(
    g: &Graph,
    f: &ScatteringFamily,
    rho0: &DensityMatrix,
    steps: usize,
    count: usize,
    seed: u64,
) -> Result<Trajectories> {
    if count == 0 {
        return Err(SqwError::InvalidInput("trajectory count must be positive".into()));
    }
    let u = build_unitary(g, f)?;
    let basis = EdgeBasis::new(g);
    if rho0.dim() != basis.dim() {
        return Err(SqwError::BadState(format!(
            "state dimension {} does not match |D| = {}",
            rho0.dim(),
            basis.dim()
        )));
    }
    let blocks: Vec<Vec<usize>> = (0..g.vertex_count()).map(|x| basis.in_block(x)).collect();
    let dim = basis.dim();
    let umat = u.matrix();
    let results: Vec<(Vec<u32>, CMat)> = (0..count)
        .into_par_iter()
        .map(|traj| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(traj as u64);
            let mut rho = rho0.matrix().clone();
            let mut outcomes = Vec::with_capacity(steps);
            for _ in 0..steps {
                let mut probs: Vec<f64> = blocks
                    .iter()
                    .map(|b| b.iter().map(|&i| rho[(i, i)].re).sum::<f64>().max(0.0))
                    .collect();
                for p in probs.iter_mut() {
                    if *p < BRANCH_EPS {
                        *p = 0.0;
                    }
                }
                let total: f64 = probs.iter().sum();
                let draw: f64 = rng.random::<f64>() * total;
                let mut acc = 0.0;
                // fall back to the last surviving branch if rounding pushes
                // the draw past the accumulated total
                let mut x = probs.iter().rposition(|&p| p > 0.0).expect("state has mass");
                for (v, &p) in probs.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    acc += p;
                    if draw < acc {
                        x = v;
                        break;
                    }
                }
                let p_x = probs[x];
                outcomes.push(x as u32);
                // project onto the in-block of x and renormalize
                let block = &blocks[x];
                let mut reduced = CMat::zeros(dim, dim);
                let scale = C64::new(1.0 / p_x, 0.0);
                for &r in block {
                    for &c in block {
                        reduced[(r, c)] = rho[(r, c)] * scale;
                    }
                }
                rho = umat.mul(&reduced).mul(&umat.adjoint());
            }
            (outcomes, rho)
        })
        .collect();
    let mut mean_state = CMat::zeros(dim, dim);
    let weight = C64::new(1.0 / count as f64, 0.0);
    let mut outcomes = Vec::with_capacity(count);
    for (o, rho) in results {
        mean_state.add_scaled(weight, &rho);
        outcomes.push(o);
    }
    Ok(Trajectories { outcomes, mean_state })
}

// ---------------------------------------------------------------------------
// The Hadamard line
// ---------------------------------------------------------------------------

/// Exact binomial coefficient as f64 (exact in IEEE range), 0 outside range.
fn binomial_exact(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return 0.0;
    }
    let k = (k as u64).min(n - k as u64);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as f64
}

fn log_binomial(n: u64, k: i64) -> Option<f64> {
    if k < 0 || k as u64 > n {
        return None;
    }
    let k = k as u64;
    let ln_fact = |m: u64| -> f64 { (1..=m).map(|i| (i as f64).ln()).sum() };
    Some(ln_fact(n) - ln_fact(k) - ln_fact(n - k))
}

/// Closed-form entry of (Phi^Diag)^n on the Hadamard line. Edge labels:
/// label 2x-1 is the edge entering vertex x from the left,
/// label 2x the edge leaving x to the left. Entry convention is column
/// action: `to` indexes the result, `from` the source.
pub fn z_hadamard_closed_form(n: usize, to: i64, from: i64) -> f64 {
    if n == 0 {
        return if to == from { 1.0 } else { 0.0 };
    }
    // columns of odd source label equal columns of source + 3 (both feed the
    // same vertex scattering): reduce to an even source
    let (x, shift) = if from.rem_euclid(2) == 0 {
        (from / 2, 0)
    } else {
        ((from - 1) / 2, -1)
    };
    let y = to.div_euclid(2);
    let num = n as i64 + y - x;
    if num.rem_euclid(2) != 0 {
        return 0.0;
    }
    let k = num / 2 + shift;
    let n_minus_1 = (n - 1) as u64;
    if n <= 60 {
        binomial_exact(n_minus_1, k) / 2f64.powi(n as i32)
    } else {
        match log_binomial(n_minus_1, k) {
            None => 0.0,
            Some(lb) => (lb - n as f64 * 2f64.ln()).exp(),
        }
    }
}

/// Sparse column of the width-`window` truncation of (Phi^Diag)^n on the
/// Hadamard line, with absorbing boundaries: labels outside [-window, window]
/// are dropped. Returns the map label -> entry of column `from`.
pub fn z_hadamard_truncated_column(
    window: i64,
    n: usize,
    from: i64,
) -> std::collections::HashMap<i64, f64> {
    use std::collections::HashMap;
    let mut v: HashMap<i64, f64> = HashMap::new();
    if from.abs() <= window {
        v.insert(from, 1.0);
    }
    for _ in 0..n {
        let mut next: HashMap<i64, f64> = HashMap::with_capacity(v.len() + 2);
        for (&label, &weight) in &v {
            // label 2x scatters to {2(x-1), 2(x-1)+1}; label 2x+1 to
            // {2(x+1), 2(x+1)+1}, each with weight 1/2
            let targets = if label.rem_euclid(2) == 0 {
                [label - 2, label - 1]
            } else {
                [label + 1, label + 2]
            };
            for t in targets {
                if t.abs() <= window {
                    *next.entry(t).or_insert(0.0) += 0.5 * weight;
                }
            }
        }
        v = next;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_density, rng_from_seed, CLUSTER_TOL};

    fn t3() -> Graph {
        Graph::path(3).unwrap()
    }

    fn t3_hadamard() -> (Graph, ScatteringFamily) {
        let g = t3();
        let f = ScatteringFamily::hadamard_center(&g).unwrap();
        (g, f)
    }

    #[test]
    fn kraus_block_identities() {
        let (g, f) = t3_hadamard();
        let ks = kraus_operators(&g, &f).unwrap();
        let u = build_unitary(&g, &f).unwrap();
        let basis = EdgeBasis::new(&g);
        // sum_x K(x) = U_S
        let mut sum = CMat::zeros(4, 4);
        for k in &ks {
            sum.add_scaled(C64::new(1.0, 0.0), k);
        }
        assert!(sum.sub(u.matrix()).max_norm() < 1e-12);
        // K*(x) K(x) = P_x^I and K(x) K*(x) = P_x^O
        for (x, k) in ks.iter().enumerate() {
            let mut p_in = CMat::zeros(4, 4);
            for &i in &basis.in_block(x) {
                p_in[(i, i)] = C64::new(1.0, 0.0);
            }
            let mut p_out = CMat::zeros(4, 4);
            for &i in basis.out_block(x) {
                p_out[(i, i)] = C64::new(1.0, 0.0);
            }
            assert!(k.adjoint().mul(k).sub(&p_in).max_norm() < 1e-12);
            assert!(k.mul(&k.adjoint()).sub(&p_out).max_norm() < 1e-12);
        }
        // ranks 1, 2, 1 on T3
        assert_eq!(rank(&ks[0], 1e-10), 1);
        assert_eq!(rank(&ks[1], 1e-10), 2);
        assert_eq!(rank(&ks[2], 1e-10), 1);
    }

    #[test]
    fn identity_family_kraus_flips_blockwise() {
        let g = t3();
        let f = ScatteringFamily::identity(&g);
        let ks = kraus_operators(&g, &f).unwrap();
        let basis = EdgeBasis::new(&g);
        // K(x) |xy> = |yx>
        for x in 0..3 {
            for &i in &basis.in_block(x) {
                let (t, s) = basis.edge(i);
                let j = basis.index_of(s, t).unwrap();
                assert!((ks[x][(j, i)] - C64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn channel_is_unital_and_trace_preserving() {
        let (g, f) = t3_hadamard();
        let phi = edge_channel(&g, &f).unwrap();
        let id = CMat::identity(4);
        assert!(phi.apply_raw(&id).sub(&id).max_norm() < 1e-12);
        let mut rng = rng_from_seed(3);
        let rho = random_density(4, &mut rng);
        let out = phi.apply_raw(&rho);
        assert!((out.trace().re - 1.0).abs() < 1e-10);
        // maximally mixed is invariant
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!(phi.apply(&mixed).unwrap().matrix().sub(mixed.matrix()).max_norm() < 1e-12);
    }

    #[test]
    fn rank_one_action_matches_scattering() {
        // Phi(|xy><xy|) = sum_{z,t} S_zy(x) conj(S_ty(x)) |zx><tx|
        let g = t3();
        let f = ScatteringFamily::haar(&g, 77);
        let phi = edge_channel(&g, &f).unwrap();
        let basis = EdgeBasis::new(&g);
        let e = basis.index_of(1, 0).unwrap(); // |yx>, scattering at y
        let rho = DensityMatrix::basis_state(4, e);
        let out = phi.apply(&rho).unwrap();
        for (zi, &row) in basis.out_block(1).iter().enumerate() {
            for (ti, &col) in basis.out_block(1).iter().enumerate() {
                // neighbor order at y=1 is [0, 2]; source slot of x=0 is 0
                let expect = f.matrix(1)[(zi, 0)] * f.matrix(1)[(ti, 0)].conj();
                assert!((out.matrix()[(row, col)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn decoherence_pinchings() {
        let (g, _) = t3_hadamard();
        let (d_in, d_out, diag) = decoherence_maps(&g).unwrap();
        let mut rng = rng_from_seed(5);
        let rho = random_density(4, &mut rng);
        // idempotence
        let once = d_in.apply_raw(&rho);
        assert!(d_in.apply_raw(&once).sub(&once).max_norm() < 1e-12);
        let od = diag.apply_raw(&rho);
        assert!(diag.apply_raw(&od).sub(&od).max_norm() < 1e-12);
        // Diag = D^O o D^I keeps only |xy><xy| entries
        let composed = d_out.apply_raw(&d_in.apply_raw(&rho));
        assert!(composed.sub(&od).max_norm() < 1e-12);
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert!(od[(r, c)].norm() < 1e-15);
                }
            }
        }
        assert!((od.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_factorizations() {
        // Phi = D^O(U . U*) = U D^I(.) U* and Phi^n = Phi o Diag-powers o Phi
        let (g, f) = t3_hadamard();
        let phi = edge_channel(&g, &f).unwrap();
        let (d_in, d_out, diag) = decoherence_maps(&g).unwrap();
        let u = build_unitary(&g, &f).unwrap();
        let mut rng = rng_from_seed(7);
        let rho = random_density(4, &mut rng);
        let route_a = phi.apply_raw(&rho);
        let route_b = {
            let conj = u.matrix().mul(&rho).mul(&u.matrix().adjoint());
            d_out.apply_raw(&conj)
        };
        let route_c = {
            let pinched = d_in.apply_raw(&rho);
            u.matrix().mul(&pinched).mul(&u.matrix().adjoint())
        };
        assert!(route_a.sub(&route_b).max_norm() < 1e-12);
        assert!(route_a.sub(&route_c).max_norm() < 1e-12);
        // factorization through the diagonal for n >= 2
        for n in 2..6 {
            let direct = {
                let mut out = rho.clone();
                for _ in 0..n {
                    out = phi.apply_raw(&out);
                }
                out
            };
            let mut mid = diag.apply_raw(&phi.apply_raw(&rho));
            for _ in 0..n - 2 {
                mid = diag.apply_raw(&phi.apply_raw(&mid));
            }
            let via_diag = phi.apply_raw(&mid);
            assert!(direct.sub(&via_diag).max_norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn partial_isometry_identity() {
        // ||Phi(A)||_HS = ||D^I(A)||_HS on random A
        let (g, f) = t3_hadamard();
        let phi = edge_channel(&g, &f).unwrap();
        let (d_in, _, _) = decoherence_maps(&g).unwrap();
        let mut rng = rng_from_seed(11);
        for _ in 0..5 {
            let a = crate::numerics::gaussian_matrix(4, 4, &mut rng);
            assert!((phi.apply_raw(&a).hs_norm() - d_in.apply_raw(&a).hs_norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn choi_positive_and_entropy_nondecreasing() {
        let (g, f) = t3_hadamard();
        let phi = edge_channel(&g, &f).unwrap();
        let choi = phi.choi();
        let (vals, _) = hermitian_eig(&choi).unwrap();
        assert!(vals[0] > -1e-8, "Choi minimum eigenvalue {}", vals[0]);
        let mut rng = rng_from_seed(13);
        for _ in 0..5 {
            let rho = DensityMatrix::new(random_density(4, &mut rng)).unwrap();
            let out = phi.apply(&rho).unwrap();
            assert!(von_neumann_entropy(&out) >= von_neumann_entropy(&rho) - 1e-9);
        }
    }

    #[test]
    fn apss_invariant_set_violated() {
        // Phi(|xy><xy|) leaves the vertex-block-diagonal set unless S(x) = I:
        // the output lives on |zx><tx| with z != t present
        let g = Graph::cycle(4).unwrap();
        let f = ScatteringFamily::hadamard_center(&g).unwrap();
        let phi = edge_channel(&g, &f).unwrap();
        let basis = EdgeBasis::new(&g);
        let e = basis.index_of(0, 1).unwrap();
        let out = phi.apply(&DensityMatrix::basis_state(basis.dim(), e)).unwrap();
        let mut off_block = 0.0f64;
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                if r == c {
                    continue;
                }
                // entries |zx><tx| with z != t sit outside the invariant set
                let (zt, _) = basis.edge(r);
                let (tt, _) = basis.edge(c);
                if zt != tt {
                    off_block = off_block.max(out.matrix()[(r, c)].norm());
                }
            }
        }
        assert!(off_block > 0.1, "expected genuine coherence across blocks");
        // with S(x) = I the output stays diagonal
        let fid = ScatteringFamily::identity(&g);
        let phi_id = edge_channel(&g, &fid).unwrap();
        let out_id = phi_id.apply(&DensityMatrix::basis_state(basis.dim(), e)).unwrap();
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                if r != c {
                    assert!(out_id.matrix()[(r, c)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn t3_phi_diag_fixture() {
        let (g, f) = t3_hadamard();
        let diag = phi_diag(&g, &f).unwrap();
        assert!(diag.is_bistochastic(1e-12));
        // the printed 4x4 matrix in the basis {e_xy, e_zy, e_yx, e_yz}
        let printed = diag
            .column_action_in_edge_order(&[(0, 1), (2, 1), (1, 0), (1, 2)])
            .unwrap();
        let expect = CMat::from_real_rows(&[
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ]);
        assert!(printed.sub(&expect).max_norm() < 1e-12);
        // identity family: the edge-reversal permutation
        let id_diag = phi_diag(&g, &ScatteringFamily::identity(&g)).unwrap();
        let m = id_diag.column_action();
        let basis = id_diag.basis();
        for i in 0..4 {
            let (t, s) = basis.edge(i);
            let j = basis.index_of(s, t).unwrap();
            assert!((m[(j, i)].re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn t3_perron_cases() {
        // Hadamard center: irreducible, period 2, spectrum {1, -1, 0}
        let (g, f) = t3_hadamard();
        let diag = phi_diag(&g, &f).unwrap();
        let perron = diag.perron().unwrap();
        assert!(perron.irreducible);
        assert_eq!(perron.period, 2);
        // swap center: irreducible with period 4, spectrum {1, -1, i, -i}
        let fs = ScatteringFamily::swap_center(&g).unwrap();
        let diag_s = phi_diag(&g, &fs).unwrap();
        let perron_s = diag_s.perron().unwrap();
        assert!(perron_s.irreducible);
        assert_eq!(perron_s.period, 4);
        for target in [
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
        ] {
            assert!(
                perron_s.eigenvalues.iter().any(|l| (l - target).norm() < 1e-9),
                "missing {target}"
            );
        }
        // identity family: reducible, eigenvalues 1, -1 with multiplicity 2
        let fid = ScatteringFamily::identity(&g);
        let perron_id = phi_diag(&g, &fid).unwrap().perron().unwrap();
        assert!(!perron_id.irreducible);
        let ones = perron_id.eigenvalues.iter().filter(|l| (*l - C64::new(1.0, 0.0)).norm() < 1e-9).count();
        let minus = perron_id.eigenvalues.iter().filter(|l| (*l + C64::new(1.0, 0.0)).norm() < 1e-9).count();
        assert_eq!((ones, minus), (2, 2));
    }

    #[test]
    fn t3_channel_spectrum() {
        let (g, f) = t3_hadamard();
        let rep = channel_spectrum(&g, &f).unwrap();
        assert_eq!(rep.expected_kernel_dim, 10);
        assert_eq!(rep.kernel_dim, 10);
        assert!(rep.kernel_range_residual < 1e-12);
        // nonzero spectrum {1, -1} with matching geometric multiplicities
        assert_eq!(rep.nonzero_spectrum.len(), 2);
        assert_eq!(rep.diag_nonzero_spectrum.len(), 2);
        for (l1, g1) in &rep.nonzero_spectrum {
            let (_, g2) = rep
                .diag_nonzero_spectrum
                .iter()
                .find(|(l2, _)| (l1 - l2).norm() < 1e-6)
                .expect("matching Phi^Diag eigenvalue");
            assert_eq!(g1, g2);
        }
        assert!(rep.lift_residual < 1e-8);
        // d_y = 2 >= 2: not diagonalizable
        assert!(!rep.diagonalizable);
    }

    #[test]
    fn single_edge_channel_is_diagonalizable() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let f = ScatteringFamily::haar(&g, 4);
        let rep = channel_spectrum(&g, &f).unwrap();
        assert_eq!(rep.expected_kernel_dim, 2);
        assert_eq!(rep.kernel_dim, 2);
        assert!(rep.diagonalizable);
    }

    #[test]
    fn asymptotics_classification() {
        // triangle with haar family: exponential mode
        let tri = Graph::cycle(3).unwrap();
        let f = ScatteringFamily::haar(&tri, 40);
        let rep = asymptotic_state(&tri, &f).unwrap();
        assert_eq!(rep.mode, AsymptoticMode::Exponential);
        let phi = edge_channel(&tri, &f).unwrap();
        let mut rng = rng_from_seed(2);
        let rho = random_density(6, &mut rng);
        // run long enough for the computed subdominant mode to decay below 1e-9
        let sub = rep.subdominant_modulus.unwrap();
        let steps = ((-9.0 * 10f64.ln()) / sub.ln()).ceil() as usize;
        let mut out = rho.clone();
        for _ in 0..steps.min(5000) {
            out = phi.apply_raw(&out);
        }
        assert!(out.sub(&rep.limit_state).max_norm() < 1e-8);

        // T3 Hadamard: cesaro mode, vertex law (1/4, 1/2, 1/4)
        let (g, fh) = t3_hadamard();
        let rep_t3 = asymptotic_state(&g, &fh).unwrap();
        assert_eq!(rep_t3.mode, AsymptoticMode::Cesaro);
        assert_eq!(rep_t3.vertex_limit, vec![0.25, 0.5, 0.25]);

        // identity family on T3 has zero entries: unclassified
        let rep_id = asymptotic_state(&g, &ScatteringFamily::identity(&g)).unwrap();
        assert_eq!(rep_id.mode, AsymptoticMode::Unclassified);
        assert_eq!(rep_id.diag_spectrum.len(), 4);
    }

    #[test]
    fn cesaro_branch_of_channel_asymptotics() {
        // bipartite graph, nonvanishing entries: period 2, so only the
        // Cesaro mean of Phi^n converges to I tr(.) / sum d_x, at rate O(1/N)
        let (g, f) = t3_hadamard();
        let rep = asymptotic_state(&g, &f).unwrap();
        assert_eq!(rep.mode, AsymptoticMode::Cesaro);
        let phi = edge_channel(&g, &f).unwrap();
        let mut rng = rng_from_seed(31);
        let rho0 = random_density(4, &mut rng);
        let n_terms = 2000;
        let mut acc = CMat::zeros(4, 4);
        let mut cur = rho0.clone();
        for _ in 0..n_terms {
            acc.add_scaled(C64::new(1.0, 0.0), &cur);
            cur = phi.apply_raw(&cur);
        }
        let mean = acc.scale(C64::new(1.0 / n_terms as f64, 0.0));
        let err = mean.sub(&rep.limit_state).max_norm();
        assert!(err < 10.0 / n_terms as f64, "Cesaro error {err}");
        // plain powers oscillate: Phi^n does not converge entrywise
        let a = phi.apply_n(&DensityMatrix::new(rho0.clone()).unwrap(), 400).unwrap();
        let b = phi.apply_n(&DensityMatrix::new(rho0).unwrap(), 401).unwrap();
        assert!(a.matrix().sub(b.matrix()).max_norm() > 1e-3);
    }

    #[test]
    fn trajectory_probabilities_and_mean() {
        let (g, f) = t3_hadamard();
        let basis = EdgeBasis::new(&g);
        let e = basis.index_of(1, 0).unwrap();
        let rho0 = DensityMatrix::basis_state(4, e);
        // n = 0: mean is rho0 unchanged
        let t0 = sample_trajectories(&g, &f, &rho0, 0, 10, 7).unwrap();
        assert!(t0.mean_state.sub(rho0.matrix()).max_norm() < 1e-15);
        // the empirical mean estimates Phi^n(rho0)
        let m = 20000;
        let n = 4;
        let t = sample_trajectories(&g, &f, &rho0, n, m, 99).unwrap();
        let phi = edge_channel(&g, &f).unwrap();
        let exact = phi.apply_n(&rho0, n).unwrap();
        let dev = t.mean_state.sub(exact.matrix()).max_norm();
        assert!(dev < 5.0 / (m as f64).sqrt(), "deviation {dev}");
        assert_eq!(t.outcomes.len(), m);
        assert!(t.outcomes.iter().all(|o| o.len() == n));
        // deterministic per seed, regardless of thread scheduling
        let t2 = sample_trajectories(&g, &f, &rho0, n, 100, 99).unwrap();
        let t3_ = sample_trajectories(&g, &f, &rho0, n, 100, 99).unwrap();
        assert_eq!(t2.outcomes, t3_.outcomes);
        assert!(t2.mean_state.sub(&t3_.mean_state).max_norm() == 0.0);
    }

    #[test]
    fn zero_probability_branches_never_sampled() {
        // from a basis state on T3 the first outcome is deterministic
        let (g, f) = t3_hadamard();
        let basis = EdgeBasis::new(&g);
        let e = basis.index_of(0, 1).unwrap(); // in-block of vertex 0
        let rho0 = DensityMatrix::basis_state(4, e);
        let t = sample_trajectories(&g, &f, &rho0, 1, 50, 3).unwrap();
        assert!(t.outcomes.iter().all(|o| o[0] == 0));
    }

    #[test]
    fn hadamard_line_closed_form() {
        // n = 1 entries with matching parity: 1/2
        assert_eq!(z_hadamard_closed_form(1, -2, 0), 0.5);
        assert_eq!(z_hadamard_closed_form(1, -1, 0), 0.5);
        assert_eq!(z_hadamard_closed_form(1, 2, 1), 0.5);
        assert_eq!(z_hadamard_closed_form(1, 3, 1), 0.5);
        assert_eq!(z_hadamard_closed_form(1, 0, 0), 0.0);
        // columns of odd source equal columns of source + 3
        for n in [1usize, 2, 5, 9] {
            for to in -12i64..12 {
                let a = z_hadamard_closed_form(n, to, 1);
                let b = z_hadamard_closed_form(n, to, 4);
                assert!((a - b).abs() < 1e-15);
            }
        }
        // truncated power matches exactly inside the light cone
        for n in [1usize, 3, 8, 15] {
            for from in [-3i64, 0, 1, 6] {
                let col = z_hadamard_truncated_column(200, n, from);
                for to in -60i64..60 {
                    let exact = z_hadamard_closed_form(n, to, from);
                    let truncated = col.get(&to).copied().unwrap_or(0.0);
                    assert!(
                        (exact - truncated).abs() < 1e-15,
                        "n={n} to={to} from={from}: {exact} vs {truncated}"
                    );
                }
            }
        }
        // column sums are 1 (bistochastic columns)
        let col = z_hadamard_truncated_column(300, 20, 0);
        let sum: f64 = col.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // the 1/sqrt(n) law: max_entry(n) * sqrt(n) approaches sqrt(2/pi)/2
        // from below, so a single-point fit at n = 400 predicts n = 1600 to
        // well under a percent
        let max_at = |n: usize| -> f64 {
            (-(2 * n as i64 + 2)..2 * n as i64 + 2)
                .map(|to| z_hadamard_closed_form(n, to, 0))
                .fold(0.0, f64::max)
        };
        let c400 = max_at(400) * 400f64.sqrt();
        let predicted = c400 / 1600f64.sqrt();
        let actual = max_at(1600);
        assert!((actual / predicted - 1.0).abs() < 1e-2, "{actual} vs {predicted}");
        assert!(c400 < 0.5 * (2.0 / std::f64::consts::PI).sqrt() + 1e-12);
        // large-n log route is consistent with the exact route at n = 60
        for to in [-8i64, 0, 4] {
            let exact = binomial_exact(59, (60 + to / 2) / 2) / 2f64.powi(60);
            let _ = exact; // spot value via both branches
            let a = z_hadamard_closed_form(60, to, 0);
            let b = {
                // force the log branch by calling with n = 61 and comparing
                // against the truncated oracle instead
                let col = z_hadamard_truncated_column(400, 61, 0);
                (z_hadamard_closed_form(61, to, 0), col.get(&to).copied().unwrap_or(0.0))
            };
            assert!((b.0 - b.1).abs() < 1e-12, "log-route mismatch at to={to}");
            let col60 = z_hadamard_truncated_column(400, 60, 0);
            assert!((a - col60.get(&to).copied().unwrap_or(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn irreducibility_classifier_matches_brute_force() {
        // nonvanishing scatterers make Phi^Diag irreducible; aperiodic
        // exactly when the graph has an odd cycle, period 2 otherwise. The
        // perron analysis recomputes both from the support digraph, so the
        // classifier is checked against strong connectivity directly.
        use rand::Rng;
        let mut rng = rng_from_seed(19);
        let mut seen_odd = false;
        let mut seen_even = false;
        for _ in 0..12 {
            let n = rng.random_range(3..=7);
            let g = Graph::random_connected(n, rng.random_range(0..=3), &mut rng).unwrap();
            let f = ScatteringFamily::haar(&g, rng.random());
            if f.has_zero_entry(1e-12) {
                continue;
            }
            let perron = phi_diag(&g, &f).unwrap().perron().unwrap();
            assert!(perron.irreducible);
            if g.has_odd_cycle() {
                assert_eq!(perron.period, 1);
                seen_odd = true;
            } else {
                assert_eq!(perron.period, 2);
                seen_even = true;
            }
        }
        assert!(seen_odd && seen_even, "both parities must occur in the sample");
    }

    #[test]
    fn diag_spectrum_matches_eig_normal_on_unitary_conjugation() {
        // sanity: the transition matrix of a haar family on C4 is bistochastic
        let g = Graph::cycle(4).unwrap();
        let f = ScatteringFamily::haar(&g, 15);
        let diag = phi_diag(&g, &f).unwrap();
        assert!(diag.is_bistochastic(1e-12));
        let per = diag.perron().unwrap();
        assert!(per.irreducible);
        assert_eq!(per.period, 2);
        let _ = crate::numerics::eig_normal(&CMat::identity(2), CLUSTER_TOL).unwrap();
    }
}
