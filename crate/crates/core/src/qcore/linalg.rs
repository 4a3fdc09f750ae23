use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{BipartiteDims, CMatrix, CVector, DensityMatrix, PureState, SchmidtTop};
use crate::error::{QsepError, Result};

/// Hermiticity tolerance accepted by the eigen routines.
const EIG_HERMITIAN_TOL: f64 = 1e-10;

/// Strategy for the top eigenpair of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenStrategy {
    /// Full dense Hermitian eigendecomposition.
    Dense,
    /// Shifted power iteration on `M + cI`.
    Power { tol: f64, max_iters: usize },
}

impl Default for EigenStrategy {
    fn default() -> Self {
        EigenStrategy::Dense
    }
}

impl EigenStrategy {
    pub fn power() -> Self {
        EigenStrategy::Power {
            tol: 1e-10,
            max_iters: 10_000,
        }
    }
}

pub fn max_hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_hermitian_defect(m) <= tol
}

/// Real Hilbert-Schmidt inner product `Re tr(A† B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Algebraically largest eigenvalue and a unit eigenvector, via the dense solver.
pub fn hermitian_top_eigpair(m: &CMatrix) -> Result<(f64, CVector)> {
    hermitian_top_eigpair_with(m, EigenStrategy::Dense)
}

pub fn hermitian_top_eigpair_with(m: &CMatrix, strategy: EigenStrategy) -> Result<(f64, CVector)> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(QsepError::invalid("eigenpair requires a non-empty square matrix"));
    }
    let defect = max_hermitian_defect(m);
    if defect > EIG_HERMITIAN_TOL {
        return Err(QsepError::invalid(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    match strategy {
        EigenStrategy::Dense => Ok(dense_top(m)),
        EigenStrategy::Power { tol, max_iters } => Ok(power_top(m, tol, max_iters)),
    }
}

fn dense_top(m: &CMatrix) -> (f64, CVector) {
    let eig = SymmetricEigen::new(m.clone());
    // Lowest index among the maximal eigenvalues.
    let mut best = 0;
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v > eig.eigenvalues[best] {
            best = i;
        }
    }
    let mut v = eig.eigenvectors.column(best).into_owned();
    let n = v.norm();
    v /= Complex64::new(n, 0.0);
    (eig.eigenvalues[best], v)
}

fn power_top(m: &CMatrix, tol: f64, max_iters: usize) -> (f64, CVector) {
    let n = m.nrows();
    // Gershgorin bound makes M + cI positive semidefinite.
    let gersh = (0..n)
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let shift = (n as f64).max(gersh);
    let shifted = m + CMatrix::identity(n, n) * Complex64::new(shift, 0.0);

    // Deterministic start with no special alignment to the standard basis.
    let mut v = CVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 0.1 * (i as f64 + 1.0).sqrt(), 0.05 * i as f64)
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = rayleigh(m, &v);
    for _ in 0..max_iters {
        let mut w = &shifted * &v;
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        w /= Complex64::new(norm, 0.0);
        let next = rayleigh(m, &w);
        v = w;
        let residual = (m * &v - &v * Complex64::new(next, 0.0)).norm();
        let settled = (next - lambda).abs() <= tol * next.abs().max(1.0);
        lambda = next;
        if settled && residual <= 10.0 * tol {
            break;
        }
    }
    (lambda, v)
}

fn rayleigh(m: &CMatrix, v: &CVector) -> f64 {
    v.dotc(&(m * v)).re
}

/// Blockwise partial transpose on subsystem B of a raw `p x p` matrix.
pub fn partial_transpose_b_matrix(m: &CMatrix, dims: BipartiteDims) -> CMatrix {
    let pa = dims.p_a();
    let pb = dims.p_b();
    let p = dims.p();
    assert_eq!(m.nrows(), p, "matrix does not match bipartite dimensions");
    let mut out = CMatrix::zeros(p, p);
    for i in 0..pa {
        for j in 0..pa {
            for k in 0..pb {
                for l in 0..pb {
                    out[(i * pb + k, j * pb + l)] = m[(i * pb + l, j * pb + k)];
                }
            }
        }
    }
    out
}

/// `ρ^{T_B}`: every `p_b x p_b` block transposed in place (no conjugation).
pub fn partial_transpose_b(rho: &DensityMatrix) -> CMatrix {
    partial_transpose_b_matrix(rho.entries(), rho.dims())
}

/// Dominant Schmidt triple of a bipartite pure state.
pub fn schmidt_top(state: &PureState) -> SchmidtTop {
    let dims = state.dims();
    let (pa, pb) = (dims.p_a(), dims.p_b());
    let amps = state.amplitudes();
    let reshaped = CMatrix::from_fn(pa, pb, |i, j| amps[i * pb + j]);
    let svd = reshaped.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut best = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > svd.singular_values[best] {
            best = i;
        }
    }
    // M = U Σ V†, so |s> = Σ_k σ_k |u_k> ⊗ |(V†)_k,:>.
    let mut a = u.column(best).into_owned();
    let mut b = v_t.row(best).transpose();
    a /= Complex64::new(a.norm(), 0.0);
    b /= Complex64::new(b.norm(), 0.0);
    SchmidtTop {
        lambda1: svd.singular_values[best].min(1.0),
        a1: a,
        b1: b,
    }
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let nb = b.len();
    CVector::from_fn(a.len() * nb, |i, _| a[i / nb] * b[i % nb])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `out += q (A ⊗ B)` without allocating the product.
pub fn add_kron_scaled(out: &mut CMatrix, q: f64, a: &CMatrix, b: &CMatrix) {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    debug_assert_eq!(out.shape(), (ra * rb, ca * cb));
    for j in 0..ca {
        for i in 0..ra {
            let s = a[(i, j)] * q;
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for l in 0..cb {
                for k in 0..rb {
                    out[(i * rb + k, j * cb + l)] += s * b[(k, l)];
                }
            }
        }
    }
}

/// `|v><v|`.
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}
