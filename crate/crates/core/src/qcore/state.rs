use num_complex::Complex64;

use super::linalg::{frobenius_distance, hermitian_eigenvalues, kron_vec, max_hermitian_defect, projector};
use super::{BipartiteDims, CMatrix, CVector, HERMITIAN_TOL, NORM_TOL, PSD_TOL, TRACE_TOL};
use crate::error::{QsepError, Result};

/// Unit-norm vector on `C^{p_a} ⊗ C^{p_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    dims: BipartiteDims,
}

impl PureState {
    pub fn new(amplitudes: CVector, dims: BipartiteDims) -> Result<Self> {
        if amplitudes.len() != dims.p() {
            return Err(QsepError::invalid(format!(
                "state has {} amplitudes, dims {dims} need {}",
                amplitudes.len(),
                dims.p()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QsepError::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { amplitudes, dims })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(amplitudes: CVector, dims: BipartiteDims) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QsepError::invalid("cannot normalize a zero or non-finite vector"));
        }
        PureState::new(amplitudes / Complex64::new(norm, 0.0), dims)
    }

    /// `|a> ⊗ |b>` for unit vectors on each factor.
    pub fn product(a: &CVector, b: &CVector) -> Result<Self> {
        let dims = BipartiteDims::new(a.len(), b.len())?;
        PureState::normalized(kron_vec(a, b), dims)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }
}

/// Hermitian, PSD, unit-trace `p x p` matrix on a bipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    dims: BipartiteDims,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(entries: CMatrix, dims: BipartiteDims) -> Result<Self> {
        Self::check_shape_and_trace(&entries, dims)?;
        let min_ev = hermitian_eigenvalues(&entries)[0];
        if min_ev < -PSD_TOL {
            return Err(QsepError::invalid(format!(
                "density matrix has negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(DensityMatrix { entries, dims })
    }

    fn check_shape_and_trace(entries: &CMatrix, dims: BipartiteDims) -> Result<()> {
        let p = dims.p();
        if entries.shape() != (p, p) {
            return Err(QsepError::invalid(format!(
                "matrix shape {:?} does not match dims {dims}",
                entries.shape()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QsepError::invalid("matrix has non-finite entries"));
        }
        let defect = max_hermitian_defect(entries);
        if defect > HERMITIAN_TOL {
            return Err(QsepError::invalid(format!(
                "matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QsepError::invalid(format!("trace {tr} is not 1")));
        }
        Ok(())
    }

    /// For matrices that are density matrices by construction (mixtures of
    /// projectors, unitary conjugations, convex combinations). The matrix is
    /// symmetrized to remove rounding asymmetry; positivity is checked only in
    /// debug builds.
    pub(crate) fn from_construction(entries: CMatrix, dims: BipartiteDims) -> Self {
        let entries = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        debug_assert!(Self::check_shape_and_trace(&entries, dims).is_ok());
        DensityMatrix { entries, dims }
    }

    pub fn from_pure(state: &PureState) -> Self {
        DensityMatrix::from_construction(projector(state.amplitudes()), state.dims())
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let p = dims.p();
        DensityMatrix {
            entries: CMatrix::identity(p, p) * Complex64::new(1.0 / p as f64, 0.0),
            dims,
        }
    }

    /// `(1 - t) self + t other`, for `t` in [0, 1].
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(QsepError::invalid("cannot mix states of different dims"));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(QsepError::invalid(format!("mixing weight {t} outside [0, 1]")));
        }
        Ok(DensityMatrix::from_construction(
            &self.entries * Complex64::new(1.0 - t, 0.0) + &other.entries * Complex64::new(t, 0.0),
            self.dims,
        ))
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn p(&self) -> usize {
        self.dims.p()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        frobenius_distance(&self.entries, &other.entries)
    }
}

/// Dominant Schmidt coefficient and vectors of a bipartite pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTop {
    pub lambda1: f64,
    pub a1: CVector,
    pub b1: CVector,
}

impl SchmidtTop {
    /// `|a1> ⊗ |b1>`, the closest product state.
    pub fn product_vector(&self) -> CVector {
        kron_vec(&self.a1, &self.b1)
    }
}
