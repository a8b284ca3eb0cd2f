//! Per-vertex unitary scattering matrices S(x), the families used throughout
//! (generalized Grover, DFT, constant-by-degree, Haar random, explicit), and
//! the unit-vector families omega(x) they pair with.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqwError};
use crate::graph::Graph;
use crate::numerics::{haar_unitary_with, outer, rng_from_seed, vnorm, C64, CMat};

pub const UNITARITY_TOL: f64 = 1e-10;

/// One unitary matrix per vertex, sized by the vertex degree and bound to the
/// graph's neighbor order at build time.
#[derive(Debug, Clone)]
pub struct ScatteringFamily {
    matrices: Vec<CMat>,
}

/// Validation findings for a candidate family.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyViolation {
    WrongSize { vertex: usize, expected: usize, got: usize },
    NotUnitary { vertex: usize, residual: f64 },
}

impl ScatteringFamily {
    /// Wrap explicit matrices; sizes must match degrees and each matrix must
    /// be unitary within tolerance.
    pub fn explicit(g: &Graph, matrices: Vec<CMat>) -> Result<ScatteringFamily> {
        if matrices.len() != g.vertex_count() {
            return Err(SqwError::FamilyMismatch(format!(
                "{} matrices for {} vertices",
                matrices.len(),
                g.vertex_count()
            )));
        }
        let family = ScatteringFamily { matrices };
        match validate_family(g, &family) {
            v if v.is_empty() => Ok(family),
            v => match &v[0] {
                FamilyViolation::WrongSize { vertex, expected, got } => {
                    Err(SqwError::FamilyMismatch(format!(
                        "matrix at vertex {vertex} is {got}x{got}, degree is {expected}"
                    )))
                }
                FamilyViolation::NotUnitary { vertex, residual } => {
                    Err(SqwError::NotUnitary { vertex: *vertex, residual: *residual })
                }
            },
        }
    }

    pub fn identity(g: &Graph) -> ScatteringFamily {
        ScatteringFamily {
            matrices: (0..g.vertex_count()).map(|x| CMat::identity(g.degree(x))).collect(),
        }
    }

    /// Generalized Grover family: S(x) = |w(x)><w(x)| + e^{ia} (I - |w><w|).
    /// Omega defaults to the uniform unit vector at every vertex.
    pub fn grover_alpha(g: &Graph, alpha: f64, omega: Option<&OmegaFamily>) -> Result<ScatteringFamily> {
        let uniform;
        let om = match omega {
            Some(o) => {
                o.check(g)?;
                o
            }
            None => {
                uniform = OmegaFamily::uniform(g);
                &uniform
            }
        };
        let phase = C64::from_polar(1.0, alpha);
        let matrices = (0..g.vertex_count())
            .map(|x| {
                let d = g.degree(x);
                let p = outer(om.vector(x), om.vector(x));
                let mut s = CMat::identity(d).sub(&p).scale(phase);
                s.add_scaled(C64::new(1.0, 0.0), &p);
                s
            })
            .collect();
        Ok(ScatteringFamily { matrices })
    }

    /// Discrete Fourier transform family in the vertex's neighbor order:
    /// S(x)_{jk} = Omega_x^{jk} / sqrt(d_x) with Omega_x = e^{-2 pi i / d_x}.
    pub fn dft(g: &Graph) -> ScatteringFamily {
        let matrices = (0..g.vertex_count())
            .map(|x| {
                let d = g.degree(x);
                let scale = 1.0 / (d as f64).sqrt();
                CMat::from_fn(d, d, |j, k| {
                    C64::from_polar(scale, -2.0 * PI * (j * k) as f64 / d as f64)
                })
            })
            .collect();
        ScatteringFamily { matrices }
    }

    /// Same unitary at every vertex of equal degree.
    pub fn constant(g: &Graph, by_degree: &BTreeMap<usize, CMat>) -> Result<ScatteringFamily> {
        let mut matrices = Vec::with_capacity(g.vertex_count());
        for x in 0..g.vertex_count() {
            let d = g.degree(x);
            let m = by_degree.get(&d).ok_or(SqwError::MissingDegree(d))?;
            if m.rows() != d || m.cols() != d {
                return Err(SqwError::BadSize { expected: d, got: m.rows() });
            }
            let residual = m.adjoint().mul(m).sub(&CMat::identity(d)).max_norm();
            if residual > UNITARITY_TOL {
                return Err(SqwError::NotUnitary { vertex: x, residual });
            }
            matrices.push(m.clone());
        }
        Ok(ScatteringFamily { matrices })
    }

    /// Independent Haar-random unitaries at every vertex; deterministic per seed.
    pub fn haar(g: &Graph, seed: u64) -> ScatteringFamily {
        let mut rng = rng_from_seed(seed);
        let matrices = (0..g.vertex_count())
            .map(|x| haar_unitary_with(g.degree(x), &mut rng))
            .collect();
        ScatteringFamily { matrices }
    }

    /// Hadamard at every degree-2 vertex, scalar 1 at every degree-1 vertex.
    /// Covers the T3 center fixture and the Z-line truncations.
    pub fn hadamard_center(g: &Graph) -> Result<ScatteringFamily> {
        let s = 1.0 / 2.0f64.sqrt();
        let hadamard = CMat::from_real_rows(&[vec![s, s], vec![-s, s]]);
        let mut by_degree = BTreeMap::new();
        by_degree.insert(1, CMat::identity(1));
        by_degree.insert(2, hadamard);
        ScatteringFamily::constant(g, &by_degree)
    }

    /// Swap at every degree-2 vertex, scalar 1 at degree-1 vertices.
    pub fn swap_center(g: &Graph) -> Result<ScatteringFamily> {
        let swap = CMat::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let mut by_degree = BTreeMap::new();
        by_degree.insert(1, CMat::identity(1));
        by_degree.insert(2, swap);
        ScatteringFamily::constant(g, &by_degree)
    }

    pub fn matrix(&self, x: usize) -> &CMat {
        &self.matrices[x]
    }

    pub fn vertex_count(&self) -> usize {
        self.matrices.len()
    }

    /// S_{zy}(x) by vertex ids; z and y must be neighbors of x.
    pub fn entry(&self, g: &Graph, x: usize, z: usize, y: usize) -> C64 {
        let zi = g.neighbor_slot(x, z).expect("z must neighbor x");
        let yi = g.neighbor_slot(x, y).expect("y must neighbor x");
        self.matrices[x][(zi, yi)]
    }

    /// True when some matrix element S_{zy}(x) vanishes (within eps); the
    /// channel irreducibility hypothesis fails in that case.
    pub fn has_zero_entry(&self, eps: f64) -> bool {
        self.matrices
            .iter()
            .any(|m| m.data().iter().any(|z| z.norm() <= eps))
    }

    /// sup_x HS-distance between the two families; an upper bound on the
    /// operator-norm distance of the walk operators.
    pub fn max_hs_distance(&self, other: &ScatteringFamily) -> Result<f64> {
        if self.matrices.len() != other.matrices.len() {
            return Err(SqwError::GraphMismatch);
        }
        let mut sup: f64 = 0.0;
        for (a, b) in self.matrices.iter().zip(other.matrices.iter()) {
            if a.rows() != b.rows() {
                return Err(SqwError::GraphMismatch);
            }
            sup = sup.max(a.sub(b).hs_norm());
        }
        Ok(sup)
    }

    pub fn from_json(g: &Graph, text: &str) -> Result<ScatteringFamily> {
        let dto: FamilyJson = serde_json::from_str(text)
            .map_err(|e| SqwError::InvalidInput(format!("family JSON: {e}")))?;
        family_from_dto(g, &dto)
    }
}

/// Per-vertex unit vectors in the incoming coordinates, shared between the
/// Grover family, the boundary operator and the induced channel.
#[derive(Debug, Clone)]
pub struct OmegaFamily {
    vectors: Vec<Vec<C64>>,
}

impl OmegaFamily {
    pub fn uniform(g: &Graph) -> OmegaFamily {
        let vectors = (0..g.vertex_count())
            .map(|x| {
                let d = g.degree(x);
                vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d]
            })
            .collect();
        OmegaFamily { vectors }
    }

    pub fn new(g: &Graph, vectors: Vec<Vec<C64>>) -> Result<OmegaFamily> {
        let fam = OmegaFamily { vectors };
        fam.check(g)?;
        Ok(fam)
    }

    pub fn check(&self, g: &Graph) -> Result<()> {
        if self.vectors.len() != g.vertex_count() {
            return Err(SqwError::InvalidInput("omega family must cover every vertex".into()));
        }
        for (x, v) in self.vectors.iter().enumerate() {
            if v.len() != g.degree(x) {
                return Err(SqwError::NonUnitOmega { vertex: x, norm: f64::NAN });
            }
            let n = vnorm(v);
            if (n - 1.0).abs() > UNITARITY_TOL {
                return Err(SqwError::NonUnitOmega { vertex: x, norm: n });
            }
        }
        Ok(())
    }

    pub fn vector(&self, x: usize) -> &[C64] {
        &self.vectors[x]
    }

    /// Component of omega(x) in the direction of neighbor y, by vertex id.
    pub fn component(&self, g: &Graph, x: usize, y: usize) -> C64 {
        let slot = g.neighbor_slot(x, y).expect("y must neighbor x");
        self.vectors[x][slot]
    }

    pub fn random(g: &Graph, seed: u64) -> OmegaFamily {
        let mut rng = rng_from_seed(seed);
        let vectors = (0..g.vertex_count())
            .map(|x| crate::numerics::random_unit_vector(g.degree(x), &mut rng))
            .collect();
        OmegaFamily { vectors }
    }
}

/// Check sizes and unitarity of every S(x); empty report means ok.
pub fn validate_family(g: &Graph, f: &ScatteringFamily) -> Vec<FamilyViolation> {
    let mut report = Vec::new();
    for x in 0..g.vertex_count() {
        if x >= f.matrices.len() {
            report.push(FamilyViolation::WrongSize { vertex: x, expected: g.degree(x), got: 0 });
            continue;
        }
        let m = &f.matrices[x];
        let d = g.degree(x);
        if m.rows() != d || m.cols() != d {
            report.push(FamilyViolation::WrongSize { vertex: x, expected: d, got: m.rows() });
            continue;
        }
        let residual = m.adjoint().mul(m).sub(&CMat::identity(d)).max_norm();
        if residual > UNITARITY_TOL {
            report.push(FamilyViolation::NotUnitary { vertex: x, residual });
        }
    }
    report
}

/// Wire format for scattering families.
#[derive(Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Nested [re, im] entries; keyed by vertex id for "explicit", by degree
    /// for "constant".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<BTreeMap<String, Vec<Vec<[f64; 2]>>>>,
}

fn parse_matrix(raw: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = raw.len();
    let mut m = CMat::zeros(n, n);
    for (r, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(SqwError::InvalidInput("family matrix is not square".into()));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

pub fn family_from_dto(g: &Graph, dto: &FamilyJson) -> Result<ScatteringFamily> {
    match dto.kind.as_str() {
        "identity" => Ok(ScatteringFamily::identity(g)),
        "dft" => Ok(ScatteringFamily::dft(g)),
        "grover" => {
            let alpha = dto
                .alpha
                .ok_or_else(|| SqwError::InvalidInput("grover family needs \"alpha\"".into()))?;
            ScatteringFamily::grover_alpha(g, alpha, None)
        }
        "haar" => {
            let seed = dto
                .seed
                .ok_or_else(|| SqwError::InvalidInput("haar family needs \"seed\"".into()))?;
            Ok(ScatteringFamily::haar(g, seed))
        }
        "constant" => {
            let raw = dto
                .matrices
                .as_ref()
                .ok_or_else(|| SqwError::InvalidInput("constant family needs \"matrices\"".into()))?;
            let mut by_degree = BTreeMap::new();
            for (key, m) in raw {
                let d: usize = key
                    .parse()
                    .map_err(|_| SqwError::InvalidInput(format!("bad degree key {key:?}")))?;
                by_degree.insert(d, parse_matrix(m)?);
            }
            ScatteringFamily::constant(g, &by_degree)
        }
        "explicit" => {
            let raw = dto
                .matrices
                .as_ref()
                .ok_or_else(|| SqwError::InvalidInput("explicit family needs \"matrices\"".into()))?;
            let mut matrices = vec![None; g.vertex_count()];
            for (key, m) in raw {
                let x: usize = key
                    .parse()
                    .map_err(|_| SqwError::InvalidInput(format!("bad vertex key {key:?}")))?;
                if x >= g.vertex_count() {
                    return Err(SqwError::VertexOutOfRange(x, g.vertex_count()));
                }
                matrices[x] = Some(parse_matrix(m)?);
            }
            let matrices: Result<Vec<CMat>> = matrices
                .into_iter()
                .enumerate()
                .map(|(x, m)| {
                    m.ok_or_else(|| {
                        SqwError::InvalidInput(format!("explicit family misses vertex {x}"))
                    })
                })
                .collect();
            ScatteringFamily::explicit(g, matrices?)
        }
        other => Err(SqwError::InvalidInput(format!("unknown family kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eig_normal, CLUSTER_TOL};

    #[test]
    fn identity_family_validates() {
        let g = Graph::star(4).unwrap();
        let f = ScatteringFamily::identity(&g);
        assert!(validate_family(&g, &f).is_empty());
    }

    #[test]
    fn zeroed_row_is_flagged() {
        let g = Graph::path(3).unwrap();
        let mut mats: Vec<CMat> =
            (0..3).map(|x| CMat::identity(g.degree(x))).collect();
        mats[1] = CMat::zeros(2, 2);
        let f = ScatteringFamily { matrices: mats };
        let report = validate_family(&g, &f);
        assert_eq!(report.len(), 1);
        assert!(matches!(report[0], FamilyViolation::NotUnitary { vertex: 1, .. }));
    }

    #[test]
    fn haar_family_validates_any_seed() {
        let g = Graph::complete(5).unwrap();
        for seed in [0, 1, 99] {
            assert!(validate_family(&g, &ScatteringFamily::haar(&g, seed)).is_empty());
        }
    }

    #[test]
    fn grover_pi_is_classic_grover() {
        // alpha = pi with uniform omega gives (2/d) A - I
        let g = Graph::complete(4).unwrap();
        let f = ScatteringFamily::grover_alpha(&g, PI, None).unwrap();
        let d = 3.0;
        for x in 0..4 {
            let m = f.matrix(x);
            for r in 0..3 {
                for c in 0..3 {
                    let expect = 2.0 / d - if r == c { 1.0 } else { 0.0 };
                    assert!((m[(r, c)] - C64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn grover_zero_is_identity_and_degree_one_is_trivial() {
        let g = Graph::star(3).unwrap();
        let f0 = ScatteringFamily::grover_alpha(&g, 0.0, None).unwrap();
        for x in 0..4 {
            assert!(f0.matrix(x).sub(&CMat::identity(g.degree(x))).max_norm() < 1e-12);
        }
        let f = ScatteringFamily::grover_alpha(&g, 1.3, None).unwrap();
        for leaf in 1..=3 {
            assert!((f.matrix(leaf)[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn grover_spectrum_is_one_and_phase() {
        let g = Graph::complete(4).unwrap();
        let alpha = 2.1;
        let f = ScatteringFamily::grover_alpha(&g, alpha, None).unwrap();
        let d = eig_normal(f.matrix(0), CLUSTER_TOL).unwrap();
        assert_eq!(d.multiplicity_of(C64::new(1.0, 0.0), 1e-9), 1);
        assert_eq!(d.multiplicity_of(C64::from_polar(1.0, alpha), 1e-9), 2);
    }

    #[test]
    fn dft_degree_two_and_row_sums() {
        let g = Graph::path(3).unwrap();
        let f = ScatteringFamily::dft(&g);
        let m = f.matrix(1);
        let s = 1.0 / 2.0f64.sqrt();
        let expect = CMat::from_real_rows(&[vec![s, s], vec![s, -s]]);
        assert!(m.sub(&expect).max_norm() < 1e-12);
        assert!(validate_family(&g, &f).is_empty());

        // row sums: sum_k S_{jk} = sqrt(d) delta_{j0}
        let star = Graph::star(5).unwrap();
        let fs = ScatteringFamily::dft(&star);
        let c = fs.matrix(0);
        for j in 0..5 {
            let sum: C64 = (0..5).map(|k| c[(j, k)]).sum();
            let expect = if j == 0 { (5.0f64).sqrt() } else { 0.0 };
            assert!((sum - C64::new(expect, 0.0)).norm() < 1e-10, "row {j}");
        }
    }

    #[test]
    fn constant_by_degree_checks() {
        let g = Graph::path(3).unwrap();
        let mut by_degree = BTreeMap::new();
        by_degree.insert(1, CMat::identity(1));
        assert!(matches!(
            ScatteringFamily::constant(&g, &by_degree),
            Err(SqwError::MissingDegree(2))
        ));
        by_degree.insert(2, CMat::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]));
        assert!(matches!(
            ScatteringFamily::constant(&g, &by_degree),
            Err(SqwError::NotUnitary { .. })
        ));
        assert!(ScatteringFamily::swap_center(&g).is_ok());
        assert!(ScatteringFamily::hadamard_center(&g).is_ok());
    }

    #[test]
    fn family_json_kinds() {
        let g = Graph::path(3).unwrap();
        for (text, ok) in [
            (r#"{"kind":"identity"}"#, true),
            (r#"{"kind":"dft"}"#, true),
            (r#"{"kind":"grover","alpha":3.1}"#, true),
            (r#"{"kind":"haar","seed":5}"#, true),
            (r#"{"kind":"grover"}"#, false),
            (r#"{"kind":"wat"}"#, false),
        ] {
            assert_eq!(ScatteringFamily::from_json(&g, text).is_ok(), ok, "{text}");
        }
        let explicit = r#"{"kind":"explicit","matrices":{
            "0":[[[1.0,0.0]]],
            "1":[[[0.0,0.0],[1.0,0.0]],[[1.0,0.0],[0.0,0.0]]],
            "2":[[[1.0,0.0]]]}}"#;
        let f = ScatteringFamily::from_json(&g, explicit).unwrap();
        assert!((f.matrix(1)[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn omega_checks() {
        let g = Graph::path(3).unwrap();
        assert!(OmegaFamily::uniform(&g).check(&g).is_ok());
        let bad = OmegaFamily::new(
            &g,
            vec![
                vec![C64::new(2.0, 0.0)],
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                vec![C64::new(1.0, 0.0)],
            ],
        );
        assert!(matches!(bad, Err(SqwError::NonUnitOmega { vertex: 0, .. })));
    }
}
