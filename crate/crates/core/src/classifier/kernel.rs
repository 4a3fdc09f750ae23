use serde::{Deserialize, Serialize};

use crate::error::{QsepError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KernelSpec {
    /// `exp(−γ ‖x − y‖²)`.
    Gaussian { gamma: f64 },
    /// `(x·y + coef0)^degree`.
    Polynomial { degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(QsepError::invalid(format!("gaussian gamma must be > 0, got {gamma}")))
            }
            KernelSpec::Polynomial { degree, coef0 } if degree == 0 || !coef0.is_finite() => Err(
                QsepError::invalid(format!("polynomial kernel needs degree >= 1 and finite coef0, got {degree}, {coef0}")),
            ),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Polynomial { degree, coef0 } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (dot + coef0).powi(degree as i32)
            }
        }
    }

    /// γ ∈ {2⁻⁷ … 2³}, then polynomial degrees 2 and 3 with `coef0 = 1`.
    pub fn default_grid() -> Vec<KernelSpec> {
        let mut grid: Vec<KernelSpec> = (-7..=3)
            .map(|e| KernelSpec::Gaussian { gamma: 2f64.powi(e) })
            .collect();
        grid.extend([2, 3].map(|degree| KernelSpec::Polynomial { degree, coef0: 1.0 }));
        grid
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelSpec::Gaussian { gamma } => write!(f, "gaussian(gamma={gamma})"),
            KernelSpec::Polynomial { degree, coef0 } => write!(f, "poly(degree={degree}, coef0={coef0})"),
        }
    }
}

/// C ∈ {2⁻³ … 2⁷}.
pub fn default_c_grid() -> Vec<f64> {
    (-3..=7).map(|e| 2f64.powi(e)).collect()
}

/// Dense symmetric kernel matrix, row-major.
#[derive(Debug, Clone)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn new(kernel: &KernelSpec, x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = kernel.eval(&x[i], &x[j]);
                data[i * n + j] = k;
                data[j * n + i] = k;
            }
        }
        Gram { n, data }
    }

    /// Principal submatrix on `idx`.
    pub fn select(&self, idx: &[usize]) -> Gram {
        let m = idx.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in idx {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Gram { n: m, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}
