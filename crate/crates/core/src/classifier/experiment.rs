use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvConfig};
use super::kernel::{Gram, KernelSpec};
use super::model::{train_with_gram, FeatureScaling, KernelModel};
use crate::criteria::{ppt_check, separable_ball_check, Verdict, PPT_TOL};
use crate::datagen::{augment_seeded, ClassLabel, Generator, LabeledSample, Provenance};
use crate::error::{QsepError, Result};
use crate::features::{bloch_vector, featurize, GellMannBasis};
use crate::fw::{fw_nearest_separable, FwConfig};
use crate::par::Exec;
use crate::qcore::{random_density_mixture, BipartiteDims};
use crate::seed::{derive_rng, derive_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// PPT_ENT training samples used as augmentation seeds.
    pub n_seeds: usize,
    pub unitary_fraction: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            n_seeds: 10,
            unitary_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Fraction of the entangled training class taken from PPT_ENT.
    pub ppt_ratio: f64,
    pub augment: Option<AugmentConfig>,
    pub cv: CvConfig,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ppt_ratio: 0.0,
            augment: None,
            cv: CvConfig::default(),
            repetitions: 1,
        }
    }
}

/// Report columns: the three dataset classes plus separable states produced
/// by the Frank-Wolfe solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScoreClass {
    Sep,
    PptEnt,
    NpptEnt,
    Fw,
}

impl ScoreClass {
    pub fn of(sample: &LabeledSample) -> ScoreClass {
        match sample.label {
            ClassLabel::Sep if sample.provenance.generator == Generator::FwDecomposition => ScoreClass::Fw,
            ClassLabel::Sep => ScoreClass::Sep,
            ClassLabel::PptEnt => ScoreClass::PptEnt,
            ClassLabel::NpptEnt => ScoreClass::NpptEnt,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreClass::Sep => "SEP",
            ScoreClass::PptEnt => "PPT_ENT",
            ScoreClass::NpptEnt => "NPPT_ENT",
            ScoreClass::Fw => "FW",
        }
    }
}

/// Recall on one class over the repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: ScoreClass,
    pub n_test: usize,
    pub mean: f64,
    /// Population standard deviation; 0 for a single repetition.
    pub std: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scores: Vec<ClassScore>,
    pub repetitions: usize,
    /// Grid point selected in each repetition.
    pub selected: Vec<(KernelSpec, f64)>,
}

impl EvalReport {
    pub fn score(&self, class: ScoreClass) -> Option<&ClassScore> {
        self.scores.iter().find(|s| s.class == class)
    }

    /// One row per class: `class,n_test,mean,std`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,n_test,mean,std,repetitions\n");
        for c in &self.scores {
            s.push_str(&format!(
                "{},{},{:.16e},{:.16e},{}\n",
                c.class.as_str(),
                c.n_test,
                c.mean,
                c.std,
                self.repetitions
            ));
        }
        s
    }

    fn from_runs(runs: Vec<(Vec<(ScoreClass, usize, f64)>, (KernelSpec, f64))>) -> EvalReport {
        let repetitions = runs.len();
        let mut classes: Vec<(ScoreClass, usize)> = runs
            .first()
            .map(|r| r.0.iter().map(|(c, n, _)| (*c, *n)).collect())
            .unwrap_or_default();
        classes.sort();
        let scores = classes
            .into_iter()
            .map(|(class, n_test)| {
                let values: Vec<f64> = runs
                    .iter()
                    .map(|r| r.0.iter().find(|x| x.0 == class).map(|x| x.2).unwrap_or(f64::NAN))
                    .collect();
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
                ClassScore {
                    class,
                    n_test,
                    mean,
                    std: var.sqrt(),
                    values,
                }
            })
            .collect();
        EvalReport {
            scores,
            repetitions,
            selected: runs.into_iter().map(|r| r.1).collect(),
        }
    }
}

fn take_shuffled(pool: &[&LabeledSample], n: usize, seed: u64, what: &str) -> Result<Vec<LabeledSample>> {
    if pool.len() < n {
        return Err(QsepError::invalid(format!(
            "need {n} {what} training samples, only {} available",
            pool.len()
        )));
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut derive_rng(seed, what, 0));
    Ok(idx[..n].iter().map(|&i| pool[i].clone()).collect())
}

fn by_class(samples: &[LabeledSample], class: ScoreClass) -> Vec<&LabeledSample> {
    samples.iter().filter(|s| ScoreClass::of(s) == class).collect()
}

/// Training set: every SEP sample, plus an equally sized entangled class of
/// which `ppt_ratio` comes from PPT_ENT (augmented when configured).
pub fn assemble_training_set(
    train: &[LabeledSample],
    ppt_ratio: f64,
    augment: Option<AugmentConfig>,
    seed: u64,
    exec: Exec,
) -> Result<Vec<LabeledSample>> {
    if !(0.0..=1.0).contains(&ppt_ratio) {
        return Err(QsepError::invalid("ppt_ratio must lie in [0, 1]"));
    }
    let sep: Vec<LabeledSample> = by_class(train, ScoreClass::Sep).into_iter().cloned().collect();
    if sep.is_empty() {
        return Err(QsepError::invalid("training data has no SEP samples"));
    }
    let n_ent = sep.len();
    let n_ppt = (ppt_ratio * n_ent as f64).round() as usize;
    let n_nppt = n_ent - n_ppt;
    let nppt = take_shuffled(&by_class(train, ScoreClass::NpptEnt), n_nppt, seed, "NPPT_ENT")?;
    let ppt_pool = by_class(train, ScoreClass::PptEnt);
    let ppt = match (n_ppt, augment) {
        (0, _) => Vec::new(),
        (_, Some(aug)) => {
            let seeds = take_shuffled(&ppt_pool, aug.n_seeds, seed, "PPT_ENT seeds")?;
            augment_seeded(&seeds, n_ppt, aug.unitary_fraction, derive_seed(seed, "augment", 0), exec)?
        }
        (_, None) => take_shuffled(&ppt_pool, n_ppt, seed, "PPT_ENT")?,
    };
    let mut out = sep;
    out.extend(nppt);
    out.extend(ppt);
    Ok(out)
}

fn features_and_labels(samples: &[LabeledSample], exec: Exec) -> Result<(Vec<Vec<f64>>, Vec<i8>)> {
    let x = featurize(samples, exec)?.into_iter().map(|b| b.beta).collect();
    let y = samples.iter().map(|s| s.label.binary()).collect();
    Ok((x, y))
}

/// Cross-validates on `samples`, then refits the selected grid point on all of them.
pub fn train_model(samples: &[LabeledSample], cv: &CvConfig, seed: u64, exec: Exec) -> Result<KernelModel> {
    let (x, y) = features_and_labels(samples, exec)?;
    let result = cross_validate(&x, &y, cv, derive_seed(seed, "cv", 0), exec)?;
    let (xt, scaling) = if cv.standardize {
        let s = FeatureScaling::fit(&x)?;
        (x.iter().map(|r| s.apply(r)).collect::<Vec<_>>(), Some(s))
    } else {
        (x, None)
    };
    let gram = Gram::new(&result.best_kernel, &xt);
    let mut model = train_with_gram(&xt, &y, &gram, result.best_kernel, result.best_c, cv.tol)?;
    model.scaling = scaling;
    model.meta.seed = Some(seed);
    model.meta.fold_scores = result.rows[result.best_row].fold_scores.clone();
    Ok(model)
}

fn recall_by_class(model: &KernelModel, test: &[LabeledSample], exec: Exec) -> Result<Vec<(ScoreClass, usize, f64)>> {
    let (x, _) = features_and_labels(test, exec)?;
    let predicted = exec.map_slice(&x, |xi| model.predict(xi).map(|p| p.0));
    let predicted: Vec<i8> = predicted.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::new();
    for class in [ScoreClass::Sep, ScoreClass::PptEnt, ScoreClass::NpptEnt, ScoreClass::Fw] {
        let mut n = 0usize;
        let mut correct = 0usize;
        for (s, &p) in test.iter().zip(&predicted) {
            if ScoreClass::of(s) == class {
                n += 1;
                if p == s.label.binary() {
                    correct += 1;
                }
            }
        }
        if n > 0 {
            out.push((class, n, correct as f64 / n as f64));
        }
    }
    Ok(out)
}

/// Per-class recall of `model` on `test` (a single repetition).
pub fn evaluate(model: &KernelModel, test: &[LabeledSample], exec: Exec) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(QsepError::invalid("test set is empty"));
    }
    let scores = recall_by_class(model, test, exec)?;
    Ok(EvalReport::from_runs(vec![(scores, (model.kernel, model.meta.c))]))
}

/// Report plus the model trained in the first repetition.
#[derive(Debug, Clone)]
pub struct TrainedExperiment {
    pub report: EvalReport,
    pub model: KernelModel,
}

pub fn run_experiment(
    train: &[LabeledSample],
    test: &[LabeledSample],
    config: &ExperimentConfig,
    seed: u64,
    exec: Exec,
) -> Result<TrainedExperiment> {
    run_with_extra(train, test, config, seed, exec, &[])
}

fn run_with_extra(
    train: &[LabeledSample],
    test: &[LabeledSample],
    config: &ExperimentConfig,
    seed: u64,
    exec: Exec,
    extra_train: &[LabeledSample],
) -> Result<TrainedExperiment> {
    if config.repetitions == 0 {
        return Err(QsepError::invalid("repetitions must be >= 1"));
    }
    if test.is_empty() {
        return Err(QsepError::invalid("test set is empty"));
    }
    let mut runs = Vec::with_capacity(config.repetitions);
    let mut first_model = None;
    for rep in 0..config.repetitions {
        let rep_seed = derive_seed(seed, "repetition", rep as u64);
        let mut set = assemble_training_set(train, config.ppt_ratio, config.augment, rep_seed, exec)?;
        set.extend_from_slice(extra_train);
        let model = train_model(&set, &config.cv, rep_seed, exec)?;
        runs.push((recall_by_class(&model, test, exec)?, (model.kernel, model.meta.c)));
        first_model.get_or_insert(model);
    }
    Ok(TrainedExperiment {
        report: EvalReport::from_runs(runs),
        model: first_model.expect("at least one repetition"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSweepRow {
    pub k: usize,
    pub n: usize,
    pub ratio_predicted_separable: f64,
    pub ratio_ppt: f64,
    pub ratio_ball: f64,
}

/// Fractions of random `k`-mixtures predicted separable, PPT, and inside the
/// separable ball.
pub fn k_sweep(
    model: &KernelModel,
    dims: BipartiteDims,
    k_values: &[usize],
    n_per_k: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<KSweepRow>> {
    if n_per_k == 0 {
        return Err(QsepError::invalid("n_per_k must be >= 1"));
    }
    let basis = GellMannBasis::cached(dims.p())?;
    k_values
        .iter()
        .map(|&k| {
            let flags = exec.try_map_range(n_per_k, |i| {
                let mut rng = derive_rng(seed, "k-sweep", ((k as u64) << 32) | i as u64);
                let rho = random_density_mixture(dims, k, &mut rng)?;
                let beta = bloch_vector(&rho, &basis)?.beta;
                let svm_sep = model.predict(&beta)?.0 < 0;
                let ppt = ppt_check(&rho, PPT_TOL).verdict != Verdict::Entangled;
                let ball = separable_ball_check(&rho).verdict == Verdict::Separable;
                Ok::<_, QsepError>((svm_sep, ppt, ball))
            })?;
            let frac = |f: fn(&(bool, bool, bool)) -> bool| flags.iter().filter(|x| f(x)).count() as f64 / n_per_k as f64;
            Ok(KSweepRow {
                k,
                n: n_per_k,
                ratio_predicted_separable: frac(|x| x.0),
                ratio_ppt: frac(|x| x.1),
                ratio_ball: frac(|x| x.2),
            })
        })
        .collect()
}

/// Separable states found by the solver for each entangled input, labelled SEP.
pub fn fw_data(
    inputs: &[LabeledSample],
    fw_config: &FwConfig,
    seed: u64,
    exec: Exec,
) -> Result<Vec<LabeledSample>> {
    exec.try_map_range(inputs.len(), |i| {
        let s = derive_seed(seed, "fw-data", i as u64);
        let res = fw_nearest_separable(&inputs[i].rho, fw_config, &mut derive_rng(s, "fw", 0))?;
        Ok(LabeledSample {
            id: format!("FW-{i:06}"),
            rho: res.nearest,
            label: ClassLabel::Sep,
            witness: None,
            provenance: Provenance {
                seed: s,
                generator: Generator::FwDecomposition,
                k_or_r: res.decomposition.len(),
                parent_id: Some(inputs[i].id.clone()),
            },
        })
    })
}

/// Entangled samples alternating PPT_ENT and NPPT_ENT, at most `n`.
fn entangled_inputs(samples: &[LabeledSample], n: usize) -> Vec<LabeledSample> {
    let ppt = by_class(samples, ScoreClass::PptEnt);
    let nppt = by_class(samples, ScoreClass::NpptEnt);
    let mut out = Vec::with_capacity(n);
    let (mut a, mut b) = (ppt.into_iter(), nppt.into_iter());
    while out.len() < n {
        let before = out.len();
        if let Some(s) = a.next() {
            out.push(s.clone());
        }
        if out.len() < n {
            if let Some(s) = b.next() {
                out.push(s.clone());
            }
        }
        if out.len() == before {
            break;
        }
    }
    out
}

/// Adds solver-produced separable states to the test set (as an FW column)
/// and, when `include_fw_in_train` is set, half as many to the SEP training
/// class as it already has.
pub fn fw_limitation_experiment(
    train: &[LabeledSample],
    test: &[LabeledSample],
    include_fw_in_train: bool,
    fw_config: &FwConfig,
    config: &ExperimentConfig,
    seed: u64,
    exec: Exec,
) -> Result<TrainedExperiment> {
    let n_test_sep = by_class(test, ScoreClass::Sep).len().max(1);
    let test_inputs = entangled_inputs(test, n_test_sep);
    if test_inputs.is_empty() {
        return Err(QsepError::invalid("test set has no entangled samples to project"));
    }
    let mut full_test = test.to_vec();
    full_test.extend(fw_data(&test_inputs, fw_config, derive_seed(seed, "fw-test", 0), exec)?);
    let extra = if include_fw_in_train {
        let n = (by_class(train, ScoreClass::Sep).len() / 2).max(1);
        let inputs = entangled_inputs(train, n);
        fw_data(&inputs, fw_config, derive_seed(seed, "fw-train", 0), exec)?
    } else {
        Vec::new()
    };
    run_with_extra(train, &full_test, config, seed, exec, &extra)
}
