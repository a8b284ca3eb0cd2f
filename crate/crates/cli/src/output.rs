use sqw_core::numerics::{C64, CMat};
use sqw_core::{Result, SqwError};

/// Fixed 17-significant-digit float rendering, so identical inputs produce
/// byte-identical output files.
pub fn fnum(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn real_vec_json(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| fnum(x)).collect();
    format!("[{}]", items.join(", "))
}

/// Nested [re, im] array rendering of a matrix.
pub fn matrix_json(m: &CMat) -> String {
    let mut rows = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let cells: Vec<String> = (0..m.cols())
            .map(|c| format!("[{}, {}]", fnum(m[(r, c)].re), fnum(m[(r, c)].im)))
            .collect();
        rows.push(format!("[{}]", cells.join(", ")));
    }
    format!("[{}]", rows.join(", "))
}

/// Eigenvalue clusters as {"re", "im", "multiplicity"} records.
pub fn spectrum_json(clusters: &[(C64, usize)]) -> String {
    let items: Vec<String> = clusters
        .iter()
        .map(|&(l, m)| {
            format!(
                "{{\"re\": {}, \"im\": {}, \"multiplicity\": {m}}}",
                fnum(l.re),
                fnum(l.im)
            )
        })
        .collect();
    format!("[{}]", items.join(", "))
}

/// The "n,vertex,probability" series format.
pub fn q_series_csv(series: &[Vec<f64>]) -> String {
    let mut out = String::from("n,vertex,probability\n");
    for (n, q) in series.iter().enumerate() {
        for (v, &p) in q.iter().enumerate() {
            out.push_str(&format!("{n},{v},{}\n", fnum(p)));
        }
    }
    out
}

pub fn q_series_json(series: &[Vec<f64>]) -> String {
    let items: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(n, q)| format!("{{\"n\": {n}, \"q\": {}}}", real_vec_json(q)))
        .collect();
    format!("{{\"series\": [{}]}}\n", items.join(", "))
}

/// The "trajectory,step,vertex" outcomes format.
pub fn outcomes_csv(outcomes: &[Vec<u32>]) -> String {
    let mut out = String::from("trajectory,step,vertex\n");
    for (t, row) in outcomes.iter().enumerate() {
        for (s, &v) in row.iter().enumerate() {
            out.push_str(&format!("{t},{s},{v}\n"));
        }
    }
    out
}

/// Emit to stdout or to a file; the content is fully built before any write,
/// so no partial file is left behind on failure.
pub fn emit(out: Option<&str>, content: &str) -> Result<()> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, content)
            .map_err(|e| SqwError::InvalidInput(format!("cannot write {path}: {e}"))),
    }
}
