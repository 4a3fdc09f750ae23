use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::linalg::add_kron_scaled;
use super::{BipartiteDims, CMatrix, CVector, DensityMatrix, PureState};
use crate::error::{QsepError, Result};

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-uniform unit vector on `C^n` (normalized complex Gaussian).
pub fn haar_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| complex_normal(rng));
        let norm = v.norm();
        if norm > 1e-300 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

pub fn haar_random_pure<R: Rng + ?Sized>(dims: BipartiteDims, rng: &mut R) -> PureState {
    PureState::new(haar_vector(dims.p(), rng), dims).expect("normalized by construction")
}

/// Haar-random `n x n` unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `(1/k) Σ |ψ_i><ψ_i|` over `k` Haar vectors on `C^p`, as a raw matrix.
pub fn mixture_matrix<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> CMatrix {
    let mut g = CMatrix::zeros(p, k);
    for j in 0..k {
        let v = haar_vector(p, rng);
        g.set_column(j, &v);
    }
    let mut rho = &g * g.adjoint();
    rho /= Complex64::new(k as f64, 0.0);
    rho
}

/// Uniform mixture of `k` Haar-random pure states on the full space.
pub fn random_density_mixture<R: Rng + ?Sized>(
    dims: BipartiteDims,
    k: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if k == 0 {
        return Err(QsepError::invalid("mixture needs k >= 1 pure states"));
    }
    Ok(DensityMatrix::from_construction(mixture_matrix(dims.p(), k, rng), dims))
}

/// Weights drawn uniformly from the probability simplex (normalized exponentials).
pub fn simplex_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut q: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = q.iter().sum();
    if total > 0.0 {
        q.iter_mut().for_each(|x| *x /= total);
    } else {
        q.iter_mut().for_each(|x| *x = 1.0 / n as f64);
    }
    q
}

/// Rank of each local factor in a product term of a separable mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorRank {
    /// Rank-one factors (pure product terms).
    Pure,
    /// Rank uniform in `1..=p_local` for each factor.
    #[default]
    UpToLocalDim,
}

impl FactorRank {
    fn draw<R: Rng + ?Sized>(self, p_local: usize, rng: &mut R) -> usize {
        match self {
            FactorRank::Pure => 1,
            FactorRank::UpToLocalDim => rng.random_range(1..=p_local),
        }
    }
}

/// `Σ_j q_j σ_{A,j} ⊗ σ_{B,j}` with `r` terms; separable by construction.
pub fn random_separable<R: Rng + ?Sized>(
    dims: BipartiteDims,
    r: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    random_separable_with(dims, r, FactorRank::default(), rng)
}

pub fn random_separable_with<R: Rng + ?Sized>(
    dims: BipartiteDims,
    r: usize,
    factors: FactorRank,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if r == 0 {
        return Err(QsepError::invalid("separable mixture needs r >= 1 terms"));
    }
    let (pa, pb) = (dims.p_a(), dims.p_b());
    let q = simplex_weights(r, rng);
    let mut out = CMatrix::zeros(dims.p(), dims.p());
    for &w in &q {
        let ka = factors.draw(pa, rng);
        let kb = factors.draw(pb, rng);
        let sa = mixture_matrix(pa, ka, rng);
        let sb = mixture_matrix(pb, kb, rng);
        add_kron_scaled(&mut out, w, &sa, &sb);
    }
    Ok(DensityMatrix::from_construction(out, dims))
}
