//! Dense complex matrix algebra, spectral decompositions for normal and
//! general matrices, Cesaro means, and Perron-Frobenius analysis of
//! stochastic matrices.

pub mod cmat;
pub mod eig;
pub mod linalg;
pub mod random;
pub mod stochastic;

pub use cmat::{normalize, outer, vaxpy, vdot, vnorm, vscale, C64, CMat};
pub use eig::{
    cluster_values, eig_normal, general_eigenvalues, hermitian_eig, operator_norm, schur,
    EigenCluster, SpectralDecomposition, CLUSTER_TOL,
};
pub use linalg::{
    inverse, largest_principal_angle, lu_solve, null_space, orthonormalize, rank, singular_values,
};
pub use random::{
    complex_gaussian, gaussian_matrix, haar_unitary, haar_unitary_with, random_density,
    random_unit_vector, rng_from_seed,
};
pub use stochastic::{
    cesaro_mean, perron_analysis, strongly_connected_components, PerronAnalysis, StochMat,
    SUPPORT_EPS,
};
