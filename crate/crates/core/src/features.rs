//! Generalized Gell-Mann basis and Bloch-vector features.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::datagen::{ClassLabel, LabeledSample};
use crate::error::{QsepError, Result};
use crate::par::Exec;
use crate::qcore::{CMatrix, DensityMatrix};

/// Largest tolerated `|Im tr(G ρ)|`.
pub const BLOCH_IMAG_TOL: f64 = 1e-10;

/// The `p² − 1` generalized Gell-Mann matrices: symmetric `S_ij`, then
/// antisymmetric `A_ij` (both with `i < j` in lexicographic order), then
/// diagonal `D_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GellMannBasis {
    p: usize,
    matrices: Vec<CMatrix>,
}

impl GellMannBasis {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(QsepError::invalid(format!("Gell-Mann basis needs p >= 2, got {p}")));
        }
        let one = Complex64::new(1.0, 0.0);
        let i_unit = Complex64::new(0.0, 1.0);
        let mut matrices = Vec::with_capacity(p * p - 1);
        for i in 0..p {
            for j in (i + 1)..p {
                let mut s = CMatrix::zeros(p, p);
                s[(i, j)] = one;
                s[(j, i)] = one;
                matrices.push(s);
            }
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let mut a = CMatrix::zeros(p, p);
                a[(i, j)] = -i_unit;
                a[(j, i)] = i_unit;
                matrices.push(a);
            }
        }
        for k in 1..p {
            let c = (2.0 / (k * (k + 1)) as f64).sqrt();
            let mut d = CMatrix::zeros(p, p);
            for i in 0..k {
                d[(i, i)] = Complex64::new(c, 0.0);
            }
            d[(k, k)] = Complex64::new(-(k as f64) * c, 0.0);
            matrices.push(d);
        }
        Ok(GellMannBasis { p, matrices })
    }

    /// Shared instance for `p`, built once per process.
    pub fn cached(p: usize) -> Result<Arc<GellMannBasis>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GellMannBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(b) = guard.get(&p) {
            return Ok(Arc::clone(b));
        }
        let b = Arc::new(GellMannBasis::new(p)?);
        guard.insert(p, Arc::clone(&b));
        Ok(b)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// Column names `s_i_j`, `a_i_j`, `d_k` (1-based), in basis order.
    pub fn names(&self) -> Vec<String> {
        let p = self.p;
        let mut out = Vec::with_capacity(self.len());
        for prefix in ["s", "a"] {
            for i in 1..=p {
                for j in (i + 1)..=p {
                    out.push(format!("{prefix}_{i}_{j}"));
                }
            }
        }
        out.extend((1..p).map(|k| format!("d_{k}")));
        out
    }
}

pub fn gellmann_basis(p: usize) -> Result<GellMannBasis> {
    GellMannBasis::new(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub p: usize,
    pub beta: Vec<f64>,
}

impl BlochVector {
    /// `I/p + Σ (β_l / 2) G_l`.
    pub fn reconstruct(&self, basis: &GellMannBasis) -> Result<CMatrix> {
        if basis.p != self.p || basis.len() != self.beta.len() {
            return Err(QsepError::invalid("Bloch vector and basis sizes differ"));
        }
        let p = self.p;
        let mut m = CMatrix::identity(p, p) * Complex64::new(1.0 / p as f64, 0.0);
        for (b, g) in self.beta.iter().zip(&basis.matrices) {
            m += g * Complex64::new(b / 2.0, 0.0);
        }
        Ok(m)
    }

    pub fn norm_squared(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum()
    }
}

/// `β_l = tr(G_l ρ)`. Uses the sparsity of the basis (two entries per
/// off-diagonal matrix).
pub fn bloch_vector(rho: &DensityMatrix, basis: &GellMannBasis) -> Result<BlochVector> {
    let p = basis.p;
    if rho.p() != p {
        return Err(QsepError::invalid(format!(
            "state dimension {} does not match basis dimension {p}",
            rho.p()
        )));
    }
    let m = rho.entries();
    let mut beta = Vec::with_capacity(basis.len());
    let mut worst_imag = 0.0f64;
    // tr(S_ij ρ) = ρ_ji + ρ_ij
    for i in 0..p {
        for j in (i + 1)..p {
            let z = m[(j, i)] + m[(i, j)];
            worst_imag = worst_imag.max(z.im.abs());
            beta.push(z.re);
        }
    }
    // tr(A_ij ρ) = −i ρ_ji + i ρ_ij
    let i_unit = Complex64::new(0.0, 1.0);
    for i in 0..p {
        for j in (i + 1)..p {
            let z = -i_unit * m[(j, i)] + i_unit * m[(i, j)];
            worst_imag = worst_imag.max(z.im.abs());
            beta.push(z.re);
        }
    }
    for k in 1..p {
        let c = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut z = Complex64::new(0.0, 0.0);
        for i in 0..k {
            z += m[(i, i)];
        }
        z -= m[(k, k)] * k as f64;
        z *= c;
        worst_imag = worst_imag.max(z.im.abs());
        beta.push(z.re);
    }
    if worst_imag > BLOCH_IMAG_TOL {
        return Err(QsepError::NumericalInconsistency(format!(
            "Bloch coefficient has imaginary part {worst_imag:.3e}"
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(QsepError::NumericalInconsistency("non-finite Bloch coefficient".into()));
    }
    Ok(BlochVector { p, beta })
}

/// Bloch vectors of all samples, in order.
pub fn featurize(samples: &[LabeledSample], exec: Exec) -> Result<Vec<BlochVector>> {
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    let basis = GellMannBasis::cached(first.rho.p())?;
    let out = exec.map_slice(samples, |s| bloch_vector(&s.rho, &basis));
    out.into_iter().collect()
}

/// Writes one CSV row per sample: Bloch coordinates, binary label, class.
pub fn write_features_csv<W: Write>(out: W, samples: &[LabeledSample], exec: Exec) -> Result<()> {
    let vectors = featurize(samples, exec)?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| QsepError::Io(std::io::Error::other(e));
    let names = match samples.first() {
        Some(s) => GellMannBasis::cached(s.rho.p())?.names(),
        None => Vec::new(),
    };
    let mut header: Vec<String> = vec!["id".into()];
    header.extend(names);
    header.push("label".into());
    header.push("class".into());
    w.write_record(&header).map_err(io)?;
    for (s, v) in samples.iter().zip(&vectors) {
        let mut row = Vec::with_capacity(v.beta.len() + 3);
        row.push(s.id.clone());
        row.extend(v.beta.iter().map(|b| format_f64(*b)));
        row.push(s.label.binary().to_string());
        row.push(s.label.as_str().to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a file written by [`write_features_csv`] back as `(id, β, label, class)`.
pub fn read_features_csv<R: std::io::Read>(input: R) -> Result<Vec<(String, Vec<f64>, i8, ClassLabel)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (row_idx, rec) in r.records().enumerate() {
        let line = row_idx + 2;
        let load = |m: String| QsepError::Load { line, message: m };
        let rec = rec.map_err(|e| load(e.to_string()))?;
        let n = rec.len();
        if n < 3 {
            return Err(load("too few columns".into()));
        }
        let beta = (1..n - 2)
            .map(|i| rec[i].parse::<f64>().map_err(|e| load(format!("column {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let label: i8 = rec[n - 2].parse().map_err(|e| load(format!("label: {e}")))?;
        let class: ClassLabel = rec[n - 1].parse().map_err(|e: QsepError| load(e.to_string()))?;
        out.push((rec[0].to_string(), beta, label, class));
    }
    Ok(out)
}
