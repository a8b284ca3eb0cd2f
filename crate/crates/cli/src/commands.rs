use sqw_core::graph::EdgeBasis;
use sqw_core::grover::MATCH_TOL;
use sqw_core::induced::{chi_vectors, induced_asymptotics, vertex_stochastic, InducedMode};
use sqw_core::numerics::{cluster_values, eig_normal, general_eigenvalues, C64, CMat, CLUSTER_TOL};
use sqw_core::open_walk::{
    asymptotic_state, edge_channel, phi_diag, sample_trajectories, AsymptoticMode, DensityMatrix,
};
use sqw_core::walk::{build_unitary, vertex_probability_series, PureState};
use sqw_core::{OmegaFamily, Result, SqwError};

use crate::args::*;
use crate::inputs::{resolve_family, resolve_graph};
use crate::output::*;

pub fn run_build(args: &BuildArgs) -> Result<()> {
    let g = resolve_graph(&args.input.graph, args.input.seed)?;
    let f = resolve_family(&g, &args.input.family)?;
    let u = build_unitary(&g, &f)?;
    let residual = u
        .matrix()
        .adjoint()
        .mul(u.matrix())
        .sub(&CMat::identity(u.dim()))
        .max_norm();
    let edges: Vec<String> = u
        .basis()
        .edges()
        .iter()
        .map(|&(t, s)| format!("[{t}, {s}]"))
        .collect();
    let mut body = format!(
        "{{\"dim\": {}, \"unitarity_residual\": {}, \"edges\": [{}]",
        u.dim(),
        fnum(residual),
        edges.join(", ")
    );
    if args.matrix {
        body.push_str(&format!(", \"matrix\": {}", matrix_json(u.matrix())));
    }
    body.push_str("}\n");
    emit(args.out.as_deref(), &body)
}

fn clustered(values: &[C64]) -> Vec<(C64, usize)> {
    cluster_values(values, CLUSTER_TOL)
        .into_iter()
        .map(|members| {
            let mean = members.iter().map(|&j| values[j]).sum::<C64>() / members.len() as f64;
            (mean, members.len())
        })
        .collect()
}

pub fn run_spectrum(args: &SpectrumArgs) -> Result<()> {
    let g = resolve_graph(&args.input.graph, args.input.seed)?;
    let f = resolve_family(&g, &args.input.family)?;
    let u = build_unitary(&g, &f)?;
    let dec = eig_normal(u.matrix(), CLUSTER_TOL)?;
    let u_clusters: Vec<(C64, usize)> =
        dec.clusters.iter().map(|c| (c.value, c.members.len())).collect();
    let diag = phi_diag(&g, &f)?;
    let diag_eigs = general_eigenvalues(&diag.column_action())?;
    let body = format!(
        "{{\"unitary\": {}, \"phi_diag\": {}}}\n",
        spectrum_json(&u_clusters),
        spectrum_json(&clustered(&diag_eigs))
    );
    emit(args.out.as_deref(), &body)
}

fn format_series(series: &[Vec<f64>], format: Format, out: Option<&str>) -> Result<()> {
    let body = match format {
        Format::Csv => q_series_csv(series),
        Format::Json => q_series_json(series),
    };
    emit(out, &body)
}

pub fn run_evolve(args: &EvolveArgs) -> Result<()> {
    let g = resolve_graph(&args.input.graph, args.input.seed)?;
    let f = resolve_family(&g, &args.input.family)?;
    let u = build_unitary(&g, &f)?;
    if args.initial_edge >= u.dim() {
        return Err(SqwError::InvalidInput(format!(
            "initial edge {} out of range (|D| = {})",
            args.initial_edge,
            u.dim()
        )));
    }
    let psi0 = PureState::basis_state(u.dim(), args.initial_edge);
    let series = vertex_probability_series(&u, &psi0, args.steps)?;
    format_series(&series, args.format, args.out.as_deref())
}

pub fn run_open_evolve(args: &EvolveArgs) -> Result<()> {
    let g = resolve_graph(&args.input.graph, args.input.seed)?;
    let f = resolve_family(&g, &args.input.family)?;
    let phi = edge_channel(&g, &f)?;
    let basis = EdgeBasis::new(&g);
    if args.initial_edge >= basis.dim() {
        return Err(SqwError::InvalidInput(format!(
            "initial edge {} out of range (|D| = {})",
            args.initial_edge,
            basis.dim()
        )));
    }
    let mut rho = DensityMatrix::basis_state(basis.dim(), args.initial_edge);
    let vertex_q = |rho: &DensityMatrix| -> Vec<f64> {
        let d = rho.diagonal();
        (0..g.vertex_count())
            .map(|x| basis.in_block(x).iter().map(|&i| d[i]).sum())
            .collect()
    };
    let mut series = vec![vertex_q(&rho)];
    for _ in 0..args.steps {
        rho = phi.apply(&rho)?;
        series.push(vertex_q(&rho));
    }
    format_series(&series, args.format, args.out.as_deref())
}

pub fn run_induced(args: &InducedArgs) -> Result<()> {
    let g = resolve_graph(&args.input.graph, args.input.seed)?;
    let f = resolve_family(&g, &args.input.family)?;
    if args.initial_vertex >= g.vertex_count() {
        return Err(SqwError::InvalidInput(format!(
            "initial vertex {} out of range (|V| = {})",
            args.initial_vertex,
            g.vertex_count()
        )));
    }
    let chi = chi_vectors(&g, &f, &OmegaFamily::uniform(&g), None)?;
    let p = vertex_stochastic(&chi)?;
    let mut r = vec![0.0; g.vertex_count()];
    r[args.initial_vertex] = 1.0;
    let mut series = vec![r.clone()];
    for _ in 0..args.steps {
        r = p.row_mul(&r);
        series.push(r.clone());
    }
    format_series(&series, args.format, args.out.as_deref())
}

pub fn run_trajectories(args: &TrajectoriesArgs) -> Result<()> {
    let g = resolve_graph(&args.input.graph, args.input.seed)?;
    let f = resolve_family(&g, &args.input.family)?;
    let basis = EdgeBasis::new(&g);
    if args.initial_edge >= basis.dim() {
        return Err(SqwError::InvalidInput("initial edge out of range".into()));
    }
    let rho0 = DensityMatrix::basis_state(basis.dim(), args.initial_edge);
    let t = sample_trajectories(&g, &f, &rho0, args.steps, args.count, args.traj_seed)?;
    match args.format {
        Format::Csv => emit(args.out.as_deref(), &outcomes_csv(&t.outcomes)),
        Format::Json => {
            let phi = edge_channel(&g, &f)?;
            let exact = phi.apply_n(&rho0, args.steps)?;
            let deviation = t.mean_state.sub(exact.matrix()).max_norm();
            let body = format!(
                "{{\"count\": {}, \"steps\": {}, \"seed\": {}, \"max_deviation_from_exact\": {}, \"monte_carlo_bound\": {}}}\n",
                args.count,
                args.steps,
                args.traj_seed,
                fnum(deviation),
                fnum(5.0 / (args.count as f64).sqrt())
            );
            emit(args.out.as_deref(), &body)
        }
    }
}

pub fn run_asymptotics(args: &AsymptoticsArgs) -> Result<()> {
    let g = resolve_graph(&args.input.graph, args.input.seed)?;
    let f = resolve_family(&g, &args.input.family)?;
    let body = match args.channel {
        Channel::Edge => {
            let rep = asymptotic_state(&g, &f)?;
            let mode = match rep.mode {
                AsymptoticMode::Exponential => "exponential",
                AsymptoticMode::Cesaro => "cesaro",
                AsymptoticMode::Unclassified => "unclassified",
            };
            format!(
                "{{\"mode\": \"{mode}\", \"vertex_limit\": {}, \"subdominant_modulus\": {}, \"decay_rate\": {}}}\n",
                real_vec_json(&rep.vertex_limit),
                rep.subdominant_modulus.map(fnum).unwrap_or_else(|| "null".into()),
                rep.decay_rate.map(fnum).unwrap_or_else(|| "null".into()),
            )
        }
        Channel::Induced => {
            let chi = chi_vectors(&g, &f, &OmegaFamily::uniform(&g), None)?;
            let rho0 = DensityMatrix::maximally_mixed(g.vertex_count());
            let rep = induced_asymptotics(&chi, &rho0)?;
            let mode = match rep.mode {
                InducedMode::Exponential => "exponential",
                InducedMode::Cesaro => "cesaro",
                InducedMode::PerClass => "per-class",
            };
            let stationary: Vec<String> =
                rep.perron.stationary.iter().map(|pi| real_vec_json(pi)).collect();
            let mut body = format!(
                "{{\"mode\": \"{mode}\", \"irreducible\": {}, \"period\": {}, \"stationary\": [{}], \"q_limit\": {}",
                rep.perron.irreducible,
                rep.perron.period,
                stationary.join(", "),
                real_vec_json(&rep.q_limit),
            );
            // chains driven by a successor map (one off-diagonal target per
            // vertex) carry a functional graph; export its structure
            if let Some(fg) = functional_graph_of_chain(&g, &chi)? {
                let succ: Vec<String> =
                    (0..g.vertex_count()).map(|x| fg.successor(x).to_string()).collect();
                let comps: Vec<String> = fg
                    .components()
                    .iter()
                    .map(|c| {
                        format!(
                            "[{}]",
                            c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
                        )
                    })
                    .collect();
                let cycles: Vec<String> = (0..fg.component_count())
                    .map(|i| {
                        format!(
                            "[{}]",
                            fg.cycle_of(i)
                                .iter()
                                .map(|v| v.to_string())
                                .collect::<Vec<_>>()
                                .join(", ")
                        )
                    })
                    .collect();
                body.push_str(&format!(
                    ", \"functional_graph\": {{\"successor\": [{}], \"components\": [{}], \"cycles\": [{}]}}",
                    succ.join(", "),
                    comps.join(", "),
                    cycles.join(", ")
                ));
            }
            body.push_str("}\n");
            body
        }
    };
    emit(args.out.as_deref(), &body)
}

/// The vertex chain defines a functional graph when every vertex has exactly
/// one off-diagonal transition target.
fn functional_graph_of_chain(
    g: &sqw_core::Graph,
    chi: &sqw_core::induced::ChiFamily,
) -> Result<Option<sqw_core::FunctionalGraph>> {
    let p = vertex_stochastic(chi)?;
    let mut successor = Vec::with_capacity(g.vertex_count());
    for x in 0..g.vertex_count() {
        let targets: Vec<usize> = (0..g.vertex_count())
            .filter(|&y| y != x && p[(x, y)] > 1e-12)
            .collect();
        match targets.as_slice() {
            [y] => successor.push(*y),
            _ => return Ok(None),
        }
    }
    Ok(sqw_core::FunctionalGraph::new(g, &successor).ok())
}

/// Spot check used by the verify command: the mapped spectrum must land on
/// sigma(F11) within the matching tolerance.
pub fn spectral_mapping_passes(
    g: &sqw_core::Graph,
    alpha: f64,
    omega: &OmegaFamily,
) -> Result<bool> {
    let rep = sqw_core::grover::verify_spectral_mapping(g, alpha, omega)?;
    Ok(rep.passed() && rep.max_forward_error <= MATCH_TOL)
}
