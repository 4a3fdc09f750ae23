//! Separability criteria: PPT test, separable ball, entanglement witnesses.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::SepDefaults;
use crate::error::{QsepError, Result};
use crate::par::Exec;
use crate::qcore::{
    hermitian_eigenvalues, hs_inner, max_hermitian_defect, partial_transpose_b,
    BipartiteDims, CMatrix, DensityMatrix, HERMITIAN_TOL,
};
use crate::seed::derive_rng;

/// Default threshold on the smallest partial-transpose eigenvalue.
pub const PPT_TOL: f64 = 1e-10;
/// Below this distance no separating hyperplane can be built.
pub const MIN_WITNESS_DISTANCE: f64 = 1e-8;
/// Imaginary part of a trace pairing accepted as rounding.
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Entangled,
    Separable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Criterion {
    Ppt,
    Ball,
    Witness,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionVerdict {
    pub verdict: Verdict,
    /// Minimum PT eigenvalue for PPT, purity for BALL, `tr(Wρ)` for WITNESS.
    pub evidence: f64,
    pub criterion: Criterion,
}

/// Hermitian operator `W` with `tr(Wσ) >= 0` on separable states.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    matrix: CMatrix,
    dims: BipartiteDims,
    source_distance: f64,
}

impl Witness {
    pub fn new(matrix: CMatrix, dims: BipartiteDims, source_distance: f64) -> Result<Self> {
        let p = dims.p();
        if matrix.shape() != (p, p) {
            return Err(QsepError::invalid(format!(
                "witness shape {:?} does not match dims {dims}",
                matrix.shape()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QsepError::invalid("witness has non-finite entries"));
        }
        let defect = max_hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(QsepError::invalid(format!(
                "witness is not Hermitian (defect {defect:.3e})"
            )));
        }
        if !(source_distance >= 0.0 && source_distance.is_finite()) {
            return Err(QsepError::invalid("source distance must be finite and >= 0"));
        }
        Ok(Witness {
            matrix,
            dims,
            source_distance,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// `‖ρ̃_S − ρ‖` used to build the witness, 0 when supplied externally.
    pub fn source_distance(&self) -> f64 {
        self.source_distance
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `U W U†`, which detects `U ρ U†` exactly when `W` detects `ρ`.
    pub fn conjugated(&self, unitary: &CMatrix) -> Witness {
        let m = unitary * &self.matrix * unitary.adjoint();
        Witness {
            matrix: hermitize(m),
            dims: self.dims,
            source_distance: self.source_distance,
        }
    }

    /// Positive rescaling, still a witness for the same states.
    pub fn scaled(&self, factor: f64) -> Result<Witness> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(QsepError::invalid("witness scale must be positive"));
        }
        Ok(Witness {
            matrix: &self.matrix * Complex64::new(factor, 0.0),
            dims: self.dims,
            source_distance: self.source_distance,
        })
    }
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Peres-Horodecki test on the B-partial transpose.
pub fn ppt_check(rho: &DensityMatrix, tol: f64) -> CriterionVerdict {
    let pt = partial_transpose_b(rho);
    let min_ev = hermitian_eigenvalues(&pt)[0];
    let verdict = if min_ev < -tol {
        Verdict::Entangled
    } else if rho.dims().ppt_is_exact() {
        Verdict::Separable
    } else {
        Verdict::Inconclusive
    };
    CriterionVerdict {
        verdict,
        evidence: min_ev,
        criterion: Criterion::Ppt,
    }
}

/// Purity bound `tr(ρ²) <= 1/(p-1)`; inside it every state is separable.
pub fn separable_ball_check(rho: &DensityMatrix) -> CriterionVerdict {
    let purity = rho.purity();
    let bound = 1.0 / (rho.p() as f64 - 1.0);
    let verdict = if purity <= bound + 1e-12 {
        Verdict::Separable
    } else {
        Verdict::Inconclusive
    };
    CriterionVerdict {
        verdict,
        evidence: purity,
        criterion: Criterion::Ball,
    }
}

/// `Re tr(Wρ)`.
pub fn witness_value(w: &Witness, rho: &DensityMatrix) -> Result<f64> {
    if w.dims() != rho.dims() {
        return Err(QsepError::invalid(format!(
            "witness dims {} do not match state dims {}",
            w.dims(),
            rho.dims()
        )));
    }
    let tr = trace_product(w.matrix(), rho.entries());
    if tr.im.abs() > IMAG_TOL {
        return Err(QsepError::NumericalInconsistency(format!(
            "tr(W rho) has imaginary part {:.3e}",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// `tr(A B)`.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Optimal witness from a nearest-separable candidate:
/// `W = (ρ̃ − ρ − <ρ̃, ρ̃ − ρ> I) / ‖ρ̃ − ρ‖`.
pub fn optimal_witness(rho: &DensityMatrix, rho_sep: &DensityMatrix) -> Result<Witness> {
    if rho.dims() != rho_sep.dims() {
        return Err(QsepError::invalid("state and separable candidate differ in dims"));
    }
    let diff = rho_sep.entries() - rho.entries();
    let distance = diff.norm();
    if !(distance > MIN_WITNESS_DISTANCE) {
        return Err(QsepError::DegenerateWitness { distance });
    }
    let offset = hs_inner(rho_sep.entries(), &diff);
    let p = rho.p();
    let m = (diff - CMatrix::identity(p, p) * Complex64::new(offset, 0.0))
        * Complex64::new(1.0 / distance, 0.0);
    Witness::new(hermitize(m), rho.dims(), distance)
}

/// Margins for Monte-Carlo witness validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    /// Separable samples may dip this far below zero (rounding).
    pub sample_margin: f64,
    /// The target must satisfy `tr(Wρ) < -entanglement_margin`.
    pub entanglement_margin: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            sample_margin: 1e-9,
            entanglement_margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub n_samples: usize,
    pub min_sample_value: f64,
    pub mean_sample_value: f64,
    pub target_value: f64,
}

/// Checks `tr(Wσ) >= -margin` on `n_samples` random separable states and
/// `tr(Wρ) < -entanglement_margin` on the target.
pub fn validate_witness<R: Rng + ?Sized>(
    w: &Witness,
    rho: &DensityMatrix,
    n_samples: usize,
    margin: f64,
    rng: &mut R,
) -> Result<ValidationReport> {
    let config = WitnessConfig {
        sample_margin: margin,
        ..WitnessConfig::default()
    };
    validate_witness_with(w, rho, n_samples, config, SepDefaults::default(), Exec::default(), rng)
}

pub fn validate_witness_with<R: Rng + ?Sized>(
    w: &Witness,
    rho: &DensityMatrix,
    n_samples: usize,
    config: WitnessConfig,
    sep: SepDefaults,
    exec: Exec,
    rng: &mut R,
) -> Result<ValidationReport> {
    let target_value = witness_value(w, rho)?;
    let base: u64 = rng.random();
    let dims = w.dims();
    let values = exec.try_map_range(n_samples, |i| {
        let mut r = derive_rng(base, "witness-validation", i as u64);
        let sigma = sep.sample(dims, &mut r)?;
        witness_value(w, &sigma)
    })?;
    Ok(report_from_values(&values, target_value, config))
}

fn report_from_values(values: &[f64], target_value: f64, config: WitnessConfig) -> ValidationReport {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    let samples_ok = values.is_empty() || min >= -config.sample_margin;
    ValidationReport {
        passed: samples_ok && target_value < -config.entanglement_margin,
        n_samples: values.len(),
        min_sample_value: min,
        mean_sample_value: mean,
        target_value,
    }
}

/// Real coordinates of a Hermitian matrix in which the trace pairing is a dot
/// product: `tr(AB) = herm_coords(A) · herm_coords(B)`.
pub(crate) fn herm_coords_into(m: &CMatrix, out: &mut Vec<f64>) {
    let n = m.nrows();
    let s2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in (i + 1)..n {
            let z = m[(i, j)];
            out.push(s2 * z.re);
            out.push(s2 * z.im);
        }
    }
}

/// A fixed set of random separable states, stored in packed real coordinates,
/// shared by many witness validations.
#[derive(Debug, Clone)]
pub struct SeparablePool {
    dims: BipartiteDims,
    stride: usize,
    coords: Vec<f64>,
}

impl SeparablePool {
    /// Draws `n` states with the dataset's separable generator; item `i` uses
    /// its own seed derived from `seed`.
    pub fn generate(dims: BipartiteDims, n: usize, sep: SepDefaults, seed: u64, exec: Exec) -> Result<Self> {
        let p = dims.p();
        let stride = p * p;
        let rows = exec.try_map_range(n, |i| {
            let mut r = derive_rng(seed, "separable-pool", i as u64);
            let sigma = sep.sample(dims, &mut r)?;
            let mut row = Vec::with_capacity(stride);
            herm_coords_into(sigma.entries(), &mut row);
            Ok::<_, QsepError>(row)
        })?;
        let mut coords = Vec::with_capacity(n * stride);
        for row in rows {
            coords.extend_from_slice(&row);
        }
        Ok(SeparablePool { dims, stride, coords })
    }

    pub fn len(&self) -> usize {
        if self.stride == 0 {
            0
        } else {
            self.coords.len() / self.stride
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// `tr(Wσ_i)` for every pooled state.
    pub fn witness_values(&self, w: &Witness) -> Result<Vec<f64>> {
        if w.dims() != self.dims {
            return Err(QsepError::invalid("witness dims do not match pool dims"));
        }
        let mut wc = Vec::with_capacity(self.stride);
        herm_coords_into(w.matrix(), &mut wc);
        Ok(self
            .coords
            .chunks_exact(self.stride)
            .map(|row| row.iter().zip(&wc).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Same contract as [`validate_witness`], against the pooled states.
    pub fn validate(&self, w: &Witness, rho: &DensityMatrix, config: WitnessConfig) -> Result<ValidationReport> {
        let target_value = witness_value(w, rho)?;
        let values = self.witness_values(w)?;
        Ok(report_from_values(&values, target_value, config))
    }
}
