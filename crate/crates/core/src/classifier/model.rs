use serde::{Deserialize, Serialize};

use super::kernel::{Gram, KernelSpec};
use super::smo::solve_dual;
use crate::error::{QsepError, Result};

/// Per-feature affine map `(x − mean) / scale` applied before the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaling {
    /// Zero mean and unit variance on `x`; constant columns keep scale 1.
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let dim = check_features(x)?;
        let n = x.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; dim];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let scale = var.into_iter().map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 }).collect();
        Ok(FeatureScaling { mean, scale })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub c: f64,
    pub seed: Option<u64>,
    /// Mean validation accuracy per fold for the selected grid point.
    pub fold_scores: Vec<f64>,
    pub tol: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub kernel: KernelSpec,
    pub support_vectors: Vec<Vec<f64>>,
    /// `y_i α_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub scaling: Option<FeatureScaling>,
    pub meta: TrainingMeta,
}

pub(crate) fn check_features(x: &[Vec<f64>]) -> Result<usize> {
    let dim = x.first().map(Vec::len).unwrap_or(0);
    if dim == 0 {
        return Err(QsepError::invalid("empty feature set"));
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(QsepError::invalid(format!("feature row {i} has length {} instead of {dim}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(QsepError::invalid(format!("feature row {i} has non-finite entries")));
        }
    }
    Ok(dim)
}

fn check_labels(y: &[i8], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(QsepError::invalid("features and labels differ in length"));
    }
    if n < 2 {
        return Err(QsepError::invalid("need at least two training samples"));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(QsepError::invalid("labels must be -1 or +1"));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(QsepError::invalid("training data must contain both labels"));
    }
    Ok(())
}

/// Trains a soft-margin kernel SVM on `(x, y)`.
pub fn svm_train(x: &[Vec<f64>], y: &[i8], kernel: KernelSpec, c: f64, tol: f64) -> Result<KernelModel> {
    check_features(x)?;
    check_labels(y, x.len())?;
    kernel.validate()?;
    let gram = Gram::new(&kernel, x);
    train_with_gram(x, y, &gram, kernel, c, tol)
}

/// Same as [`svm_train`] with features standardized first.
pub fn svm_train_scaled(x: &[Vec<f64>], y: &[i8], kernel: KernelSpec, c: f64, tol: f64) -> Result<KernelModel> {
    let scaling = FeatureScaling::fit(x)?;
    let xs: Vec<Vec<f64>> = x.iter().map(|r| scaling.apply(r)).collect();
    let mut model = svm_train(&xs, y, kernel, c, tol)?;
    model.scaling = Some(scaling);
    Ok(model)
}

pub(crate) fn train_with_gram(
    x: &[Vec<f64>],
    y: &[i8],
    gram: &Gram,
    kernel: KernelSpec,
    c: f64,
    tol: f64,
) -> Result<KernelModel> {
    check_labels(y, x.len())?;
    let sol = solve_dual(gram, y, c, tol)?;
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(x[i].clone());
            dual_coefs.push(y[i] as f64 * a);
        }
    }
    Ok(KernelModel {
        kernel,
        support_vectors,
        dual_coefs,
        bias: -sol.rho,
        scaling: None,
        meta: TrainingMeta {
            c,
            seed: None,
            fold_scores: Vec::new(),
            tol,
            iterations: sol.iterations,
        },
    })
}

impl KernelModel {
    pub fn dim(&self) -> usize {
        match &self.scaling {
            Some(s) => s.mean.len(),
            None => self.support_vectors.first().map(Vec::len).unwrap_or(0),
        }
    }

    /// `Σ_i dual_coefs[i] k(sv_i, x) + bias`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        let dim = self.dim();
        if x.len() != dim {
            return Err(QsepError::invalid(format!("feature length {} does not match model dimension {dim}", x.len())));
        }
        let scaled;
        let x = match &self.scaling {
            Some(s) => {
                scaled = s.apply(x);
                &scaled[..]
            }
            None => x,
        };
        let mut sum = 0.0;
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            sum += coef * self.kernel.eval(sv, x);
        }
        Ok(sum + self.bias)
    }

    /// Label `+1` (entangled) when the decision value is `>= 0`.
    pub fn predict(&self, x: &[f64]) -> Result<(i8, f64)> {
        let v = self.decision_value(x)?;
        Ok((if v >= 0.0 { 1 } else { -1 }, v))
    }
}

pub fn svm_predict(model: &KernelModel, x: &[f64]) -> Result<(i8, f64)> {
    model.predict(x)
}
