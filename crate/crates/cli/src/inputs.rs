use sqw_core::numerics::rng_from_seed;
use sqw_core::{Graph, Result, ScatteringFamily, SqwError};

/// Resolve a graph descriptor: an existing JSON file path, or shorthand.
pub fn resolve_graph(desc: &str, seed: u64) -> Result<Graph> {
    if std::path::Path::new(desc).is_file() {
        let text = std::fs::read_to_string(desc)
            .map_err(|e| SqwError::InvalidInput(format!("cannot read {desc}: {e}")))?;
        return Graph::from_json(&text);
    }
    let (kind, param) = match desc.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (desc, None),
    };
    let parse_n = |p: Option<&str>, default: usize| -> Result<usize> {
        match p {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| SqwError::InvalidInput(format!("bad graph size {s:?}"))),
        }
    };
    match kind {
        "t3" => Graph::path(3),
        "path" => Graph::path(parse_n(param, 3)?),
        "cycle" => Graph::cycle(parse_n(param, 4)?),
        "star" => Graph::star(parse_n(param, 3)?),
        "complete" => Graph::complete(parse_n(param, 4)?),
        "torus" => {
            let spec = param.ok_or_else(|| {
                SqwError::InvalidInput("torus needs side lengths, e.g. torus:4x4".into())
            })?;
            let dims: Result<Vec<usize>> = spec
                .split('x')
                .map(|s| {
                    s.parse()
                        .map_err(|_| SqwError::InvalidInput(format!("bad torus side {s:?}")))
                })
                .collect();
            Graph::torus(&dims?)
        }
        "random" => {
            let n = parse_n(param, 8)?;
            let mut rng = rng_from_seed(seed);
            Graph::random_connected(n, n / 2 + 1, &mut rng)
        }
        other => Err(SqwError::InvalidInput(format!(
            "unknown graph {other:?}: not a file and not a shorthand"
        ))),
    }
}

/// Resolve a family descriptor: an existing JSON file path, or shorthand.
pub fn resolve_family(g: &Graph, desc: &str) -> Result<ScatteringFamily> {
    if std::path::Path::new(desc).is_file() {
        let text = std::fs::read_to_string(desc)
            .map_err(|e| SqwError::InvalidInput(format!("cannot read {desc}: {e}")))?;
        return ScatteringFamily::from_json(g, &text);
    }
    let (kind, param) = match desc.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (desc, None),
    };
    match kind {
        "identity" => Ok(ScatteringFamily::identity(g)),
        "dft" => Ok(ScatteringFamily::dft(g)),
        "hadamard-center" => ScatteringFamily::hadamard_center(g),
        "swap-center" => ScatteringFamily::swap_center(g),
        "grover" => {
            let alpha: f64 = param
                .ok_or_else(|| SqwError::InvalidInput("grover needs an angle: grover:3.14".into()))?
                .parse()
                .map_err(|_| SqwError::InvalidInput("bad grover angle".into()))?;
            ScatteringFamily::grover_alpha(g, alpha, None)
        }
        "haar" => {
            let seed: u64 = param
                .ok_or_else(|| SqwError::InvalidInput("haar needs a seed: haar:42".into()))?
                .parse()
                .map_err(|_| SqwError::InvalidInput("bad haar seed".into()))?;
            Ok(ScatteringFamily::haar(g, seed))
        }
        other => Err(SqwError::InvalidInput(format!(
            "unknown family {other:?}: not a file and not a shorthand"
        ))),
    }
}
