//! Frank-Wolfe search for the nearest separable state.
//!
//! The linear subproblem over product states is approximated in two steps:
//! the top eigenvector of `ρ − ρ_t` is computed, then replaced by its closest
//! product state (top Schmidt pair). The iterate moves toward that product
//! projector with the classic step `α_t = 2/(t+2)`. Iterates are kept both as a
//! dense matrix and as an explicit list of weighted product atoms, which
//! certifies separability of the result.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QsepError, Result};
use crate::par::Exec;
use crate::qcore::{
    haar_vector, hermitian_top_eigpair_with, hs_inner, kron_vec, schmidt_top, BipartiteDims,
    CMatrix, CVector, DensityMatrix, EigenStrategy, PureState,
};
use crate::seed::derive_rng;

/// Atoms lighter than this are dropped from the decomposition.
pub const ATOM_PRUNE_WEIGHT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepRule {
    /// `α_t = 2 / (t + 2)`.
    #[default]
    Classic,
}

impl StepRule {
    fn step(self, t: usize) -> f64 {
        match self {
            StepRule::Classic => 2.0 / (t as f64 + 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwConfig {
    pub max_iters: usize,
    /// Stop once the Frank-Wolfe gap lies in `[0, gap_tol]`. Zero disables the test.
    pub gap_tol: f64,
    pub track_trajectory: bool,
    pub step_rule: StepRule,
    pub eigen: EigenStrategy,
    /// Fixed starting product state `(a, b)` instead of a random one.
    pub initial: Option<(CVector, CVector)>,
}

impl Default for FwConfig {
    fn default() -> Self {
        FwConfig {
            max_iters: 1000,
            gap_tol: 1e-7,
            track_trajectory: false,
            step_rule: StepRule::Classic,
            eigen: EigenStrategy::Dense,
            initial: None,
        }
    }
}

impl FwConfig {
    pub fn with_iters(max_iters: usize) -> Self {
        FwConfig {
            max_iters,
            ..FwConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(QsepError::invalid("max_iters must be >= 1"));
        }
        if !(self.gap_tol >= 0.0) {
            return Err(QsepError::invalid("gap_tol must be >= 0"));
        }
        Ok(())
    }
}

/// One weighted product term `w |a><a| ⊗ |b><b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductAtom {
    pub weight: f64,
    pub a: CVector,
    pub b: CVector,
}

#[derive(Debug, Clone)]
pub struct FwResult {
    pub nearest: DensityMatrix,
    pub distance: f64,
    pub iterations_run: usize,
    /// Gap at the last evaluated iterate; `NaN` if no gap was evaluated.
    pub final_gap: f64,
    /// `(iteration, distance)` with iteration 0 the starting point.
    pub trajectory: Option<Vec<(usize, f64)>>,
    pub decomposition: Vec<ProductAtom>,
}

impl FwResult {
    /// Dense matrix rebuilt from the atom list.
    pub fn reconstruct(&self) -> CMatrix {
        let p = self.nearest.p();
        let mut out = CMatrix::zeros(p, p);
        for atom in &self.decomposition {
            let v = kron_vec(&atom.a, &atom.b);
            out += &v * v.adjoint() * Complex64::new(atom.weight, 0.0);
        }
        out
    }
}

fn rank_one_update(rho_t: &mut CMatrix, alpha: f64, v: &CVector) {
    let keep = 1.0 - alpha;
    let n = v.len();
    for j in 0..n {
        let vj = v[j].conj() * alpha;
        for i in 0..n {
            rho_t[(i, j)] = rho_t[(i, j)] * keep + v[i] * vj;
        }
    }
}

fn unit(v: CVector) -> CVector {
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Approximate nearest separable state to `rho`.
pub fn fw_nearest_separable<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    config: &FwConfig,
    rng: &mut R,
) -> Result<FwResult> {
    config.validate()?;
    let dims = rho.dims();
    let (pa, pb) = (dims.p_a(), dims.p_b());

    let (a0, b0) = match &config.initial {
        Some((a, b)) => {
            if a.len() != pa || b.len() != pb {
                return Err(QsepError::invalid("initial product state does not match dims"));
            }
            (unit(a.clone()), unit(b.clone()))
        }
        None => (haar_vector(pa, rng), haar_vector(pb, rng)),
    };
    let v0 = kron_vec(&a0, &b0);
    let mut rho_t = &v0 * v0.adjoint();
    let mut atoms = vec![ProductAtom {
        weight: 1.0,
        a: a0,
        b: b0,
    }];
    let target = rho.entries();
    let mut trajectory = config.track_trajectory.then(Vec::new);
    let mut distance = (target - &rho_t).norm();
    if let Some(tr) = trajectory.as_mut() {
        tr.push((0, distance));
    }

    let mut final_gap = f64::NAN;
    let mut iterations_run = 0;
    for t in 0..config.max_iters {
        let residual = target - &rho_t;
        let (_, s) = hermitian_top_eigpair_with(&residual, config.eigen)?;
        let top = schmidt_top(&PureState::normalized(s, dims)?);
        let vertex = top.product_vector();

        // gap = <2(ρ_t − ρ), ρ_t − σ*> = 2(<σ*|R|σ*> − <R, ρ_t>), R = ρ − ρ_t.
        let r_vertex = vertex.dotc(&(&residual * &vertex)).re;
        let gap = 2.0 * (r_vertex - hs_inner(&residual, &rho_t));
        final_gap = gap;
        // The approximate vertex only bounds the true gap from below, so a
        // negative value says nothing about convergence; keep iterating.
        if config.gap_tol > 0.0 && (0.0..=config.gap_tol).contains(&gap) {
            break;
        }

        let alpha = config.step_rule.step(t);
        rank_one_update(&mut rho_t, alpha, &vertex);
        for atom in atoms.iter_mut() {
            atom.weight *= 1.0 - alpha;
        }
        atoms.retain(|atom| atom.weight >= ATOM_PRUNE_WEIGHT);
        atoms.push(ProductAtom {
            weight: alpha,
            a: top.a1,
            b: top.b1,
        });
        iterations_run = t + 1;

        distance = (target - &rho_t).norm();
        if let Some(tr) = trajectory.as_mut() {
            tr.push((iterations_run, distance));
        }
        debug_assert!((rho_t.trace().re - 1.0).abs() < 1e-9);
    }

    let nearest = DensityMatrix::from_construction(rho_t, dims);
    let distance = nearest.distance(rho);
    Ok(FwResult {
        nearest,
        distance,
        iterations_run,
        final_gap,
        trajectory,
        decomposition: atoms,
    })
}

/// Product-state start `|a><a| ⊗ |b><b|` for [`FwConfig::initial`].
pub fn product_start(a: &CVector, b: &CVector) -> Option<(CVector, CVector)> {
    Some((a.clone(), b.clone()))
}

/// One row of the aggregated error curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurvePoint {
    pub class_tag: String,
    pub iteration: usize,
    pub mean_distance: f64,
    pub std_distance: f64,
}

/// Mean and population standard deviation of the FW distance per iteration
/// across `inputs`. Runs that stop early contribute their last distance to
/// later iterations.
pub fn fw_error_curve<R: Rng + ?Sized>(
    class_tag: &str,
    inputs: &[DensityMatrix],
    config: &FwConfig,
    exec: Exec,
    rng: &mut R,
) -> Result<Vec<ErrorCurvePoint>> {
    if !config.track_trajectory {
        return Err(QsepError::invalid("error curve requires track_trajectory"));
    }
    let first = inputs
        .first()
        .ok_or_else(|| QsepError::invalid("error curve needs at least one input"))?;
    let dims: BipartiteDims = first.dims();
    if inputs.iter().any(|r| r.dims() != dims) {
        return Err(QsepError::invalid("error curve inputs have mixed dims"));
    }
    let base: u64 = rng.random();
    let runs = exec.try_map_range(inputs.len(), |i| {
        let mut r = derive_rng(base, "fw-error-curve", i as u64);
        fw_nearest_separable(&inputs[i], config, &mut r)
    })?;
    let curves: Vec<Vec<f64>> = runs
        .into_iter()
        .map(|res| {
            res.trajectory
                .unwrap_or_default()
                .into_iter()
                .map(|(_, d)| d)
                .collect()
        })
        .collect();
    let len = curves.iter().map(Vec::len).max().unwrap_or(0);
    let n = curves.len() as f64;
    Ok((0..len)
        .map(|it| {
            let vals: Vec<f64> = curves
                .iter()
                .map(|c| c.get(it).or(c.last()).copied().unwrap_or(f64::NAN))
                .collect();
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            ErrorCurvePoint {
                class_tag: class_tag.to_string(),
                iteration: it,
                mean_distance: mean,
                std_distance: var.sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{haar_vector, random_separable};
    use crate::seed::rng_from_seed;
    use approx::assert_abs_diff_eq;

    #[test]
    fn product_target_is_a_fixed_point() {
        let d = BipartiteDims::new(3, 3).unwrap();
        let mut rng = rng_from_seed(8);
        let a = haar_vector(3, &mut rng);
        let b = haar_vector(3, &mut rng);
        let rho = DensityMatrix::from_pure(&PureState::product(&a, &b).unwrap());
        let cfg = FwConfig {
            initial: product_start(&a, &b),
            ..FwConfig::default()
        };
        let res = fw_nearest_separable(&rho, &cfg, &mut rng).unwrap();
        assert_eq!(res.iterations_run, 0);
        assert!(res.distance < 1e-12);
        assert_eq!(d, res.nearest.dims());
    }

    #[test]
    fn exact_iteration_count_without_gap_test() {
        let d = BipartiteDims::new(2, 3).unwrap();
        let mut rng = rng_from_seed(1);
        let rho = random_separable(d, 3, &mut rng).unwrap();
        let cfg = FwConfig {
            max_iters: 37,
            gap_tol: 0.0,
            track_trajectory: true,
            ..FwConfig::default()
        };
        let res = fw_nearest_separable(&rho, &cfg, &mut rng).unwrap();
        assert_eq!(res.iterations_run, 37);
        assert_eq!(res.trajectory.as_ref().unwrap().len(), 38);
    }

    #[test]
    fn decomposition_reconstructs_iterate() {
        let d = BipartiteDims::new(3, 3).unwrap();
        let mut rng = rng_from_seed(12);
        let rho = random_separable(d, 5, &mut rng).unwrap();
        let res = fw_nearest_separable(&rho, &FwConfig::with_iters(300), &mut rng).unwrap();
        let total: f64 = res.decomposition.iter().map(|a| a.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        assert!(res.decomposition.iter().all(|a| a.weight > 0.0));
        let diff = (res.reconstruct() - res.nearest.entries()).norm();
        assert!(diff < 1e-10, "reconstruction error {diff}");
    }

    #[test]
    fn error_curve_requires_trajectory_and_matching_dims() {
        let d = BipartiteDims::new(2, 2).unwrap();
        let mut rng = rng_from_seed(3);
        let rho = random_separable(d, 2, &mut rng).unwrap();
        assert!(fw_error_curve("SEP", &[rho.clone()], &FwConfig::default(), Exec::Sequential, &mut rng).is_err());
        assert!(fw_error_curve("SEP", &[], &FwConfig::default(), Exec::Sequential, &mut rng).is_err());
        let other = DensityMatrix::maximally_mixed(BipartiteDims::new(2, 3).unwrap());
        let cfg = FwConfig {
            track_trajectory: true,
            max_iters: 5,
            ..FwConfig::default()
        };
        assert!(fw_error_curve("SEP", &[rho, other], &cfg, Exec::Sequential, &mut rng).is_err());
    }
}
