//! The induced vertex channel Psi_S: chi-vector construction, the rank-one
//! Kraus family G(x) = |chi(x)><x|, the vertex Markov matrix P, closed-form
//! evolution, asymptotics per recurrent class, the alpha-Grover and DFT
//! specializations, and the half-line truncation.

use crate::error::{Result, SqwError};
use crate::graph::{FunctionalGraph, Graph};
use crate::numerics::{lu_solve, perron_analysis, vnorm, C64, CMat, PerronAnalysis, StochMat};
use crate::open_walk::{DensityMatrix, KrausChannel};
use crate::scattering::{OmegaFamily, ScatteringFamily};

/// Per-vertex vectors v(x), theta(x), chi(x) on l2(V) with the phases beta_x.
#[derive(Debug, Clone)]
pub struct ChiFamily {
    v: Vec<Vec<C64>>,
    theta: Vec<Vec<C64>>,
    chi: Vec<Vec<C64>>,
    beta: Vec<f64>,
    theta_norms: Vec<f64>,
}

impl ChiFamily {
    pub fn vertex_count(&self) -> usize {
        self.chi.len()
    }

    pub fn v(&self, x: usize) -> &[C64] {
        &self.v[x]
    }

    pub fn theta(&self, x: usize) -> &[C64] {
        &self.theta[x]
    }

    pub fn chi(&self, x: usize) -> &[C64] {
        &self.chi[x]
    }

    pub fn beta(&self, x: usize) -> f64 {
        self.beta[x]
    }

    pub fn theta_norm(&self, x: usize) -> f64 {
        self.theta_norms[x]
    }
}

/// Build v(x) = S(x) omega(x), theta_z(x) = conj(omega_x(z)) v_z(x), and
/// chi(x) = theta(x) + e^{i beta_x} sqrt(1 - ||theta(x)||^2) |x>.
/// beta defaults to zero everywhere.
pub fn chi_vectors(
    g: &Graph,
    f: &ScatteringFamily,
    omega: &OmegaFamily,
    beta: Option<&[f64]>,
) -> Result<ChiFamily> {
    omega.check(g)?;
    let n = g.vertex_count();
    let beta: Vec<f64> = match beta {
        Some(b) => {
            if b.len() != n {
                return Err(SqwError::InvalidInput("beta must cover every vertex".into()));
            }
            b.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut vs = Vec::with_capacity(n);
    let mut thetas = Vec::with_capacity(n);
    let mut chis = Vec::with_capacity(n);
    let mut theta_norms = Vec::with_capacity(n);
    for x in 0..n {
        let local = f.matrix(x).matvec(omega.vector(x));
        let mut v = vec![C64::new(0.0, 0.0); n];
        let mut theta = vec![C64::new(0.0, 0.0); n];
        for (slot, &z) in g.neighbors(x).iter().enumerate() {
            v[z] = local[slot];
            // omega_x(z): the component of omega(z) pointing back at x
            theta[z] = omega.component(g, z, x).conj() * local[slot];
        }
        let tn = vnorm(&theta);
        if tn > 1.0 + 1e-10 {
            return Err(SqwError::BadState(format!("||theta({x})|| = {tn} > 1")));
        }
        let mut chi = theta.clone();
        let residual = (1.0 - tn * tn).max(0.0).sqrt();
        chi[x] += C64::from_polar(residual, beta[x]);
        vs.push(v);
        thetas.push(theta);
        chis.push(chi);
        theta_norms.push(tn);
    }
    Ok(ChiFamily { v: vs, theta: thetas, chi: chis, beta, theta_norms })
}

/// The CPTP map Psi_S with rank-one Kraus family G(x) = |chi(x)><x|.
pub fn induced_channel(chi: &ChiFamily) -> Result<KrausChannel> {
    let n = chi.vertex_count();
    let kraus: Vec<CMat> = (0..n)
        .map(|x| {
            let mut k = CMat::zeros(n, n);
            for (r, &a) in chi.chi(x).iter().enumerate() {
                k[(r, x)] = a;
            }
            k
        })
        .collect();
    KrausChannel::new(kraus)
}

/// The pre-completion Kraus family {|theta(x)><x|} of the quantum operation
/// R Phi_S(R* . R) R*; its normalization sums to diag(||theta(x)||^2) <= I.
pub fn pre_completion_operation(chi: &ChiFamily) -> Vec<CMat> {
    let n = chi.vertex_count();
    (0..n)
        .map(|x| {
            let mut k = CMat::zeros(n, n);
            for (r, &a) in chi.theta(x).iter().enumerate() {
                k[(r, x)] = a;
            }
            k
        })
        .collect()
}

/// The alternative CPTP completion: the theta family plus the positive
/// operator (I - sum ||theta||^2 |x><x|)^(1/2). No asymptotic theory is
/// attached to this variant.
pub fn completed_variant_channel(chi: &ChiFamily) -> Result<KrausChannel> {
    let n = chi.vertex_count();
    let mut kraus = pre_completion_operation(chi);
    let mut extra = CMat::zeros(n, n);
    for x in 0..n {
        let t = chi.theta_norm(x);
        extra[(x, x)] = C64::new((1.0 - t * t).max(0.0).sqrt(), 0.0);
    }
    kraus.push(extra);
    KrausChannel::new(kraus)
}

/// Row-stochastic vertex matrix P_xy = |<y|chi(x)>|^2, sparse off x ~ y.
pub fn vertex_stochastic(chi: &ChiFamily) -> Result<StochMat> {
    let n = chi.vertex_count();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|x| chi.chi(x).iter().map(|a| a.norm_sqr()).collect())
        .collect();
    StochMat::from_rows(&rows)
}

/// Closed-form evolution: for n >= 1,
/// Psi^n(rho0) = sum_y (r0 P^{n-1})_y |chi(y)><chi(y)| and Q_n = r0 P^n.
pub fn evolve_induced(
    chi: &ChiFamily,
    rho0: &DensityMatrix,
    steps: usize,
) -> Result<(DensityMatrix, Vec<f64>)> {
    let n = chi.vertex_count();
    if rho0.dim() != n {
        return Err(SqwError::BadState(format!(
            "state dimension {} does not match |V| = {n}",
            rho0.dim()
        )));
    }
    if steps == 0 {
        return Ok((rho0.clone(), rho0.diagonal()));
    }
    let p = vertex_stochastic(chi)?;
    let r0 = rho0.diagonal();
    let mut weights = r0.clone();
    for _ in 0..steps - 1 {
        weights = p.row_mul(&weights);
    }
    let mut rho = CMat::zeros(n, n);
    for (y, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        rho.add_scaled(C64::new(w, 0.0), &crate::numerics::outer(chi.chi(y), chi.chi(y)));
    }
    let q = p.row_mul(&weights);
    Ok((DensityMatrix::new(rho)?, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InducedMode {
    Exponential,
    Cesaro,
    /// reducible P: limits depend on the initial state through the
    /// per-recurrent-class absorption weights
    PerClass,
}

#[derive(Debug, Clone)]
pub struct InducedAsymptotics {
    pub mode: InducedMode,
    pub perron: PerronAnalysis,
    /// Cesaro-limit state map rho -> sum_y pi_eff(y) |chi(y)><chi(y)| tr(rho):
    /// the effective weights for the supplied initial state (or the unique
    /// stationary law when P is irreducible).
    pub effective_weights: Vec<f64>,
    pub limit_state: CMat,
    /// Cesaro limit of Q_n for the supplied initial state
    pub q_limit: Vec<f64>,
    /// spectral gap surrogate: largest modulus strictly inside the disk
    pub subdominant_modulus: Option<f64>,
}

/// Asymptotics of Psi^n for the initial state `rho0` (any valid state when P
/// is irreducible; the answer is then state independent).
pub fn induced_asymptotics(
    chi: &ChiFamily,
    rho0: &DensityMatrix,
) -> Result<InducedAsymptotics> {
    let n = chi.vertex_count();
    if rho0.dim() != n {
        return Err(SqwError::BadState("state dimension mismatch".into()));
    }
    let p = vertex_stochastic(chi)?;
    let perron = perron_analysis(&p)?;
    let r0 = rho0.diagonal();
    let effective_weights = if perron.irreducible {
        perron.stationary[0].clone()
    } else {
        // absorption-weighted mixture of the per-class stationary laws
        let weights = absorption_weights(&p, &perron, &r0)?;
        let mut w = vec![0.0; n];
        for (class_weight, pi) in weights.iter().zip(&perron.stationary) {
            for (wi, &pii) in w.iter_mut().zip(pi.iter()) {
                *wi += class_weight * pii;
            }
        }
        w
    };
    let mut limit_state = CMat::zeros(n, n);
    for (y, &wy) in effective_weights.iter().enumerate() {
        if wy > 0.0 {
            limit_state
                .add_scaled(C64::new(wy, 0.0), &crate::numerics::outer(chi.chi(y), chi.chi(y)));
        }
    }
    let q_limit = p.row_mul(&effective_weights);
    let subdominant = perron
        .eigenvalues
        .iter()
        .map(|l| l.norm())
        .filter(|&m| m < 1.0 - 1e-8)
        .fold(0.0f64, f64::max);
    let mode = if perron.irreducible {
        if perron.period == 1 {
            InducedMode::Exponential
        } else {
            InducedMode::Cesaro
        }
    } else {
        InducedMode::PerClass
    };
    Ok(InducedAsymptotics {
        mode,
        perron,
        effective_weights,
        limit_state,
        q_limit,
        subdominant_modulus: (subdominant > 0.0).then_some(subdominant),
    })
}

/// Probability mass each recurrent class eventually absorbs, starting from
/// the law r0. Transient states are resolved through the linear system
/// (I - P_TT) a = P_{T -> class} 1.
fn absorption_weights(p: &StochMat, perron: &PerronAnalysis, r0: &[f64]) -> Result<Vec<f64>> {
    let n = p.size();
    let mut class_of = vec![usize::MAX; n];
    for (i, class) in perron.recurrent_classes.iter().enumerate() {
        for &v in class {
            class_of[v] = i;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&v| class_of[v] == usize::MAX).collect();
    let t_index: std::collections::HashMap<usize, usize> =
        transient.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nt = transient.len();
    let mut weights = vec![0.0; perron.recurrent_classes.len()];
    for (i, class) in perron.recurrent_classes.iter().enumerate() {
        for &v in class {
            weights[i] += r0[v];
        }
    }
    if nt == 0 {
        return Ok(weights);
    }
    // a_i = (I - P_TT)^{-1} b_i, solved for all classes at once
    let mut lhs = CMat::zeros(nt, nt);
    for (ri, &v) in transient.iter().enumerate() {
        for (ci, &w) in transient.iter().enumerate() {
            let mut val = -p[(v, w)];
            if ri == ci {
                val += 1.0;
            }
            lhs[(ri, ci)] = C64::new(val, 0.0);
        }
    }
    let mut rhs = CMat::zeros(nt, perron.recurrent_classes.len());
    for (ri, &v) in transient.iter().enumerate() {
        for (i, class) in perron.recurrent_classes.iter().enumerate() {
            let b: f64 = class.iter().map(|&w| p[(v, w)]).sum();
            rhs[(ri, i)] = C64::new(b, 0.0);
        }
    }
    let absorb = lu_solve(&lhs, &rhs)?;
    for (ri, &v) in transient.iter().enumerate() {
        for i in 0..perron.recurrent_classes.len() {
            weights[i] += r0[v] * absorb[(ri, i)].re;
        }
    }
    let _ = t_index;
    Ok(weights)
}

/// DFT-specialization report: the successor map x -> x_1, its functional
/// graph, the per-component stationary laws of the closed form, and the
/// asymptotic vertex law for a given initial state.
#[derive(Debug, Clone)]
pub struct DftInducedAnalysis {
    pub functional_graph: FunctionalGraph,
    /// one stationary law per component, supported on its cycle, by the
    /// degree formula pi_x = d_N(x) / sum_{y in Cyc} d_y
    pub component_pi: Vec<Vec<f64>>,
    /// component masses of the initial law (the weights of the mixture)
    pub component_mass: Vec<f64>,
    /// Cesaro limit of Q_n for the supplied initial state
    pub q_limit: Vec<f64>,
    pub stochastic: StochMat,
}

/// Analyze the induced walk of the DFT family with uniform omega; the
/// neighbor order of `g` fixes the successor x_1 at every vertex.
pub fn dft_induced_analysis(g: &Graph, rho0: &DensityMatrix) -> Result<DftInducedAnalysis> {
    let f = ScatteringFamily::dft(g);
    let omega = OmegaFamily::uniform(g);
    let chi = chi_vectors(g, &f, &omega, None)?;
    let p = vertex_stochastic(&chi)?;
    let successor: Vec<usize> = (0..g.vertex_count()).map(|x| g.neighbors(x)[0]).collect();
    let fg = FunctionalGraph::new(g, &successor)?;
    let n = g.vertex_count();
    let mut component_pi = Vec::with_capacity(fg.component_count());
    for i in 0..fg.component_count() {
        let cyc = fg.cycle_of(i);
        let total: f64 = cyc.iter().map(|&y| g.degree(y) as f64).sum();
        let mut pi = vec![0.0; n];
        for &x in cyc {
            pi[x] = g.degree(successor[x]) as f64 / total;
        }
        component_pi.push(pi);
    }
    let r0 = rho0.diagonal();
    let component_mass: Vec<f64> = (0..fg.component_count())
        .map(|i| fg.components()[i].iter().map(|&x| r0[x]).sum())
        .collect();
    let mut q_limit = vec![0.0; n];
    for (mass, pi) in component_mass.iter().zip(&component_pi) {
        for (q, &p_val) in q_limit.iter_mut().zip(pi.iter()) {
            *q += mass * p_val;
        }
    }
    Ok(DftInducedAnalysis {
        functional_graph: fg,
        component_pi,
        component_mass,
        q_limit,
        stochastic: p,
    })
}

/// Truncation of the half-line example: the two-sided integer line with a
/// doubled edge between 0 and 1 collapses, under DFT scattering and inward
/// successor labelling, to this vertex chain. Labels run -window..=window+1.
#[derive(Debug, Clone)]
pub struct HalflineExample {
    pub window: usize,
    pub p: StochMat,
    offset: i64,
}

impl HalflineExample {
    pub fn new(window: usize) -> Result<HalflineExample> {
        if window < 6 {
            return Err(SqwError::WindowTooSmall(window));
        }
        let w = window as i64;
        let size = (2 * w + 2) as usize;
        let degree = |x: i64| -> f64 {
            if x == 0 || x == 1 {
                3.0
            } else {
                2.0
            }
        };
        let successor = |x: i64| -> i64 {
            if x <= 0 {
                x + 1
            } else {
                x - 1
            }
        };
        let mut rows = vec![vec![0.0; size]; size];
        for idx in 0..size as i64 {
            let x = idx - w;
            let s = successor(x);
            let d = degree(s);
            if s >= -w && s <= w + 1 {
                rows[idx as usize][(s + w) as usize] = 1.0 / d;
                // (d-1)/d rather than 1 - 1/d: the rounding of 2/3 itself,
                // so the light-cone entries are exactly geometric
                rows[idx as usize][idx as usize] = (d - 1.0) / d;
            } else {
                // boundary policy: residual mass stays put (never triggers
                // here since successors point inward)
                rows[idx as usize][idx as usize] = 1.0;
            }
        }
        Ok(HalflineExample { window, p: StochMat::from_rows(&rows)?, offset: w })
    }

    pub fn index_of(&self, label: i64) -> usize {
        (label + self.offset) as usize
    }

    pub fn label_of(&self, index: usize) -> i64 {
        index as i64 - self.offset
    }

    pub fn size(&self) -> usize {
        self.p.size()
    }

    /// P^n entries by label.
    pub fn power_entry(&self, n: usize, from: i64, to: i64) -> f64 {
        let mut v = vec![0.0; self.size()];
        v[self.index_of(from)] = 1.0;
        for _ in 0..n {
            v = self.p.row_mul(&v);
        }
        v[self.index_of(to)]
    }

    /// Stationary law: the unique summable invariant law sits at 1/2 on each
    /// of the two central vertices.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let perron = perron_analysis(&self.p)?;
        if perron.stationary.len() != 1 {
            return Err(SqwError::BadStochastic(format!(
                "expected a unique recurrent class, found {}",
                perron.stationary.len()
            )));
        }
        Ok(perron.stationary[0].clone())
    }

    /// Least-squares slope of -ln(max deviation from pi) over n in
    /// [n_min, n_max], across start states within `radius` of the center.
    pub fn fitted_gamma(&self, n_min: usize, n_max: usize, radius: i64) -> Result<f64> {
        let pi = self.stationary()?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for x in -radius..=radius + 1 {
            let mut v = vec![0.0; self.size()];
            v[self.index_of(x)] = 1.0;
            rows.push(v);
        }
        let mut points = Vec::new();
        for n in 1..=n_max {
            for v in rows.iter_mut() {
                *v = self.p.row_mul(v);
            }
            if n < n_min {
                continue;
            }
            let mut dev = 0.0f64;
            for v in &rows {
                for (q, &p_inf) in v.iter().zip(pi.iter()) {
                    dev = dev.max((q - p_inf).abs());
                }
            }
            if dev > 0.0 {
                points.push((n as f64, dev.ln()));
            }
        }
        if points.len() < 2 {
            return Err(SqwError::InvalidInput("not enough points for a fit".into()));
        }
        let m = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        Ok(-slope)
    }
}
