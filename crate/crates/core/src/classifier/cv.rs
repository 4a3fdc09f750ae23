use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::kernel::{default_c_grid, Gram, KernelSpec};
use super::model::{check_features, train_with_gram, FeatureScaling, KernelModel};
use crate::error::{QsepError, Result};
use crate::par::Exec;
use crate::seed::derive_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub kernel_grid: Vec<KernelSpec>,
    pub c_grid: Vec<f64>,
    pub tol: f64,
    /// Standardize features (fitted on each training split).
    pub standardize: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            kernel_grid: KernelSpec::default_grid(),
            c_grid: default_c_grid(),
            tol: 1e-3,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub kernel_index: usize,
    pub kernel: KernelSpec,
    pub c: f64,
    /// Validation accuracy on each fold.
    pub fold_scores: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_kernel: KernelSpec,
    pub best_c: f64,
    /// Index into `rows` of the selected grid point.
    pub best_row: usize,
    /// One row per (kernel, C), kernel-major in grid order.
    pub rows: Vec<CvRow>,
}

/// Splits indices into `folds` parts with per-label proportions preserved.
pub fn stratified_folds(y: &[i8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(QsepError::invalid("need at least 2 folds"));
    }
    let mut out = vec![Vec::new(); folds];
    let mut labels: Vec<i8> = y.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let mut offset = 0;
    for label in labels {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        if idx.len() < folds {
            return Err(QsepError::invalid(format!(
                "class {label} has {} samples, fewer than {folds} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut derive_rng(seed, "cv-folds", label as u64));
        for (pos, i) in idx.into_iter().enumerate() {
            out[(pos + offset) % folds].push(i);
        }
        offset += 1;
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

fn validation_accuracy(model: &KernelModel, x: &[Vec<f64>], y: &[i8], idx: &[usize]) -> Result<f64> {
    let mut correct = 0usize;
    for &i in idx {
        if model.predict(&x[i])?.0 == y[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / idx.len() as f64)
}

/// Grid search by stratified k-fold cross-validation on mean accuracy. Ties go
/// to the smaller C, then to the earlier grid point.
pub fn cross_validate(x: &[Vec<f64>], y: &[i8], config: &CvConfig, seed: u64, exec: Exec) -> Result<CvResult> {
    check_features(x)?;
    if y.len() != x.len() {
        return Err(QsepError::invalid("features and labels differ in length"));
    }
    if config.kernel_grid.is_empty() || config.c_grid.is_empty() {
        return Err(QsepError::invalid("kernel and C grids must be nonempty"));
    }
    for k in &config.kernel_grid {
        k.validate()?;
    }
    let folds = stratified_folds(y, config.folds, seed)?;
    let nk = config.kernel_grid.len();
    let nf = folds.len();

    // scores[(k * nf + f)] = accuracy per C
    let per_task = exec.try_map_range(nk * nf, |task| {
        let (ki, fi) = (task / nf, task % nf);
        let kernel = config.kernel_grid[ki];
        let train_idx: Vec<usize> = (0..nf).filter(|&g| g != fi).flat_map(|g| folds[g].iter().copied()).collect();
        let mut xt: Vec<Vec<f64>> = train_idx.iter().map(|&i| x[i].clone()).collect();
        let yt: Vec<i8> = train_idx.iter().map(|&i| y[i]).collect();
        let scaling = if config.standardize {
            let s = FeatureScaling::fit(&xt)?;
            xt = xt.iter().map(|r| s.apply(r)).collect();
            Some(s)
        } else {
            None
        };
        let gram = Gram::new(&kernel, &xt);
        config
            .c_grid
            .iter()
            .map(|&c| {
                let mut model = train_with_gram(&xt, &yt, &gram, kernel, c, config.tol)?;
                model.scaling = scaling.clone();
                validation_accuracy(&model, x, y, &folds[fi])
            })
            .collect::<Result<Vec<f64>>>()
    })?;

    let mut rows = Vec::with_capacity(nk * config.c_grid.len());
    for (ki, kernel) in config.kernel_grid.iter().enumerate() {
        for (ci, &c) in config.c_grid.iter().enumerate() {
            let fold_scores: Vec<f64> = (0..nf).map(|fi| per_task[ki * nf + fi][ci]).collect();
            let mean = fold_scores.iter().sum::<f64>() / nf as f64;
            rows.push(CvRow {
                kernel_index: ki,
                kernel: *kernel,
                c,
                fold_scores,
                mean,
            });
        }
    }
    let mut best_row = 0;
    for (i, row) in rows.iter().enumerate().skip(1) {
        let b = &rows[best_row];
        if row.mean > b.mean || (row.mean == b.mean && row.c < b.c) {
            best_row = i;
        }
    }
    Ok(CvResult {
        best_kernel: rows[best_row].kernel,
        best_c: rows[best_row].c,
        best_row,
        rows,
    })
}
