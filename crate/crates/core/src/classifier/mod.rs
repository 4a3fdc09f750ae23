//! Kernel SVM trained by SMO, grid-searched by stratified cross-validation,
//! and the experiments built on it.

mod cv;
mod experiment;
mod kernel;
mod model;
pub mod model_io;
mod smo;

pub use cv::{cross_validate, stratified_folds, CvConfig, CvResult, CvRow};
pub use experiment::{
    assemble_training_set, evaluate, fw_data, fw_limitation_experiment, k_sweep, run_experiment,
    train_model, AugmentConfig, ClassScore, EvalReport, ExperimentConfig, KSweepRow, ScoreClass,
    TrainedExperiment,
};
pub use kernel::{default_c_grid, Gram, KernelSpec};
pub use model_io::{model_from_str, model_to_string, read_model, write_model};
pub use model::{svm_predict, svm_train, svm_train_scaled, FeatureScaling, KernelModel, TrainingMeta};
pub use smo::{solve_dual, DualSolution};
