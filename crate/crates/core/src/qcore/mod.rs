//! Dense complex linear algebra for bipartite states: dimensions, pure states,
//! density matrices, partial transpose, Schmidt decomposition and Haar sampling.

mod dims;
mod linalg;
mod random;
mod state;

pub use dims::BipartiteDims;
pub use linalg::{
    add_kron_scaled, frobenius_distance, hermitian_eigenvalues, hermitian_top_eigpair,
    hermitian_top_eigpair_with, hs_inner, is_hermitian, kron, kron_vec, max_hermitian_defect,
    partial_transpose_b, partial_transpose_b_matrix, projector, schmidt_top, EigenStrategy,
};
pub use random::{
    haar_random_pure, haar_unitary, haar_vector, mixture_matrix, random_density_mixture,
    random_separable, random_separable_with, simplex_weights, FactorRank,
};
pub use state::{DensityMatrix, PureState, SchmidtTop};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance on `max |M - M†|` for density matrices and witnesses.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `|tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a PSD matrix. Absorbs rounding in 49x49 mixtures.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance on unit norm of state vectors.
pub const NORM_TOL: f64 = 1e-12;
