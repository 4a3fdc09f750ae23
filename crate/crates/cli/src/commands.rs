use std::fmt;
use std::path::Path;

use serde_json::json;

use qsep_core::classifier::{
    assemble_training_set, evaluate, fw_limitation_experiment, k_sweep, model_from_str, model_to_string,
    train_model, AugmentConfig, CvConfig, ExperimentConfig,
};
use qsep_core::criteria::WitnessConfig;
use qsep_core::datagen::{
    augment_seeded, generate_nppt_seeded, generate_ppt_ent_seeded, generate_sep_seeded, revalidate, ClassLabel,
    KRange, LabeledSample, PptEntConfig, SepDefaults,
};
use qsep_core::dataset::{dataset_read, dataset_write, write_atomic, Dataset, DatasetHeader};
use qsep_core::features::{format_f64, write_features_csv};
use qsep_core::fw::{fw_error_curve, fw_nearest_separable, FwConfig};
use qsep_core::par::Exec;
use qsep_core::qcore::BipartiteDims;
use qsep_core::seed::{derive_rng, derive_seed};
use qsep_core::QsepError;

use crate::{Command, DimArgs};

#[derive(Debug)]
pub enum CliError {
    Core(QsepError),
    /// A check ran to completion and found violations.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(QsepError::GeneratorStarved(_)) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Check(msg) => f.write_str(msg),
        }
    }
}

impl From<QsepError> for CliError {
    fn from(e: QsepError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

const EXEC: Exec = Exec::Parallel;

fn dims(d: DimArgs) -> CliResult<BipartiteDims> {
    Ok(BipartiteDims::new(d.dim_a, d.dim_b)?)
}

fn k_range(default: KRange, k_min: Option<usize>, k_max: Option<usize>) -> CliResult<KRange> {
    Ok(KRange::new(k_min.unwrap_or(default.min), k_max.unwrap_or(default.max))?)
}

fn write_dataset(path: &Path, dims: BipartiteDims, seed: u64, config: serde_json::Value, samples: &[LabeledSample]) -> CliResult<()> {
    let header = DatasetHeader::new(dims, Some(seed), config);
    dataset_write(path, &header, samples)?;
    eprintln!("wrote {} samples to {}", samples.len(), path.display());
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read(path: &Path) -> CliResult<Dataset> {
    Ok(dataset_read(path)?)
}

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::GenSep { dims: d, n, seed, r_max, out } => {
            let dims = dims(d)?;
            let sep = SepDefaults { r_max, ..SepDefaults::default() };
            let samples = generate_sep_seeded(dims, n, seed, sep, EXEC)?;
            let config = json!({ "command": "gen-sep", "n": n, "sep": sep });
            write_dataset(&out, dims, seed, config, &samples)
        }
        Command::GenNppt { dims: d, n, seed, k_min, k_max, out } => {
            let dims = dims(d)?;
            let k = k_range(KRange::nppt_default(dims), k_min, k_max)?;
            let samples = generate_nppt_seeded(dims, n, k, seed, EXEC)?;
            let config = json!({ "command": "gen-nppt", "n": n, "k_range": k });
            write_dataset(&out, dims, seed, config, &samples)
        }
        Command::GenPptEnt { dims: d, n, seed, k_min, k_max, iters, n_validation, out } => {
            let dims = dims(d)?;
            let mut cfg = PptEntConfig::for_dims(dims);
            cfg.k_range = k_range(cfg.k_range, k_min, k_max)?;
            cfg.fw = FwConfig::with_iters(iters);
            cfg.n_validation = n_validation;
            let (samples, stats) = generate_ppt_ent_seeded(dims, n, &cfg, seed, EXEC)?;
            eprintln!(
                "draws {}, PPT candidates {}, validation failures {}",
                stats.draws, stats.ppt_candidates, stats.validation_failures
            );
            let config = json!({
                "command": "gen-ppt-ent",
                "n": n,
                "k_range": cfg.k_range,
                "fw_iters": iters,
                "n_validation": n_validation,
                "witness": cfg.witness,
                "validation": cfg.validation,
            });
            write_dataset(&out, dims, seed, config, &samples)
        }
        Command::Augment { input, seeds_n, out_n, unitary_frac, seed, out } => {
            let ds = read(&input)?;
            let seeds: Vec<LabeledSample> = ds
                .samples
                .into_iter()
                .filter(|s| s.label == ClassLabel::PptEnt)
                .take(seeds_n)
                .collect();
            if seeds.len() < seeds_n {
                return Err(CliError::Check(format!(
                    "input has {} PPT_ENT samples, {seeds_n} requested as seeds",
                    seeds.len()
                )));
            }
            let samples = augment_seeded(&seeds, out_n, unitary_frac, seed, EXEC)?;
            let config = json!({
                "command": "augment",
                "seeds_n": seeds_n,
                "out_n": out_n,
                "unitary_frac": unitary_frac,
            });
            write_dataset(&out, ds.header.dims, seed, config, &samples)
        }
        Command::Fw { input, iters, gap_tol, seed, trajectory_out, out } => {
            let ds = read(&input)?;
            let cfg = FwConfig {
                max_iters: iters,
                gap_tol,
                track_trajectory: trajectory_out.is_some(),
                ..FwConfig::default()
            };
            let results = EXEC.try_map_range(ds.samples.len(), |i| {
                fw_nearest_separable(&ds.samples[i].rho, &cfg, &mut derive_rng(seed, "fw", i as u64))
            })?;
            let mut summary = String::from("id,label,distance,iterations,final_gap\n");
            let mut traj = String::from("id,iteration,distance\n");
            for (s, r) in ds.samples.iter().zip(&results) {
                summary.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.id,
                    s.label,
                    format_f64(r.distance),
                    r.iterations_run,
                    format_f64(r.final_gap)
                ));
                for &(it, d) in r.trajectory.iter().flatten() {
                    traj.push_str(&format!("{},{it},{}\n", s.id, format_f64(d)));
                }
            }
            if let Some(p) = &trajectory_out {
                write_atomic(p, traj.as_bytes())?;
            }
            write_text(out.as_deref(), &summary)
        }
        Command::WitnessCheck { input, n_validation, seed } => {
            let ds = read(&input)?;
            let cfg = WitnessConfig::default();
            let checks = EXEC.map_range(ds.samples.len(), |i| {
                let s = &ds.samples[i];
                s.check_structural(cfg)?;
                if s.witness.is_some() {
                    let rep = revalidate(s, n_validation, cfg, &mut derive_rng(seed, "witness-check", i as u64))?;
                    if !rep.passed {
                        return Err(QsepError::NumericalInconsistency(format!(
                            "sample {}: witness failed revalidation (min separable value {:.3e}, target {:.3e})",
                            s.id, rep.min_sample_value, rep.target_value
                        )));
                    }
                }
                Ok(())
            });
            let failures: Vec<String> = checks.into_iter().filter_map(|c| c.err().map(|e| e.to_string())).collect();
            for f in &failures {
                eprintln!("{f}");
            }
            println!("checked {} samples, {} violations", ds.samples.len(), failures.len());
            if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Check(format!("{} samples failed validation", failures.len())))
            }
        }
        Command::Features { input, out } => {
            let ds = read(&input)?;
            let mut buf = Vec::new();
            write_features_csv(&mut buf, &ds.samples, EXEC)?;
            write_atomic(&out, &buf)?;
            Ok(())
        }
        Command::Train {
            train,
            ppt_ratio,
            augment,
            augment_seeds,
            unitary_frac,
            folds,
            standardize,
            seed,
            model_out,
        } => {
            let ds = read(&train)?;
            let aug = augment.then_some(AugmentConfig {
                n_seeds: augment_seeds,
                unitary_fraction: unitary_frac,
            });
            let cv = CvConfig {
                folds,
                standardize,
                ..CvConfig::default()
            };
            let set = assemble_training_set(&ds.samples, ppt_ratio, aug, seed, EXEC)?;
            let model = train_model(&set, &cv, seed, EXEC)?;
            eprintln!("selected {:?}, C = {}", model.kernel, model.meta.c);
            write_atomic(&model_out, model_to_string(&model)?.as_bytes())?;
            Ok(())
        }
        Command::Eval { model, test, report_out } => {
            let model = model_from_str(&std::fs::read_to_string(&model)?)?;
            let ds = read(&test)?;
            let report = evaluate(&model, &ds.samples, EXEC)?;
            write_text(report_out.as_deref(), &report.to_csv())
        }
        Command::KSweep { model, dims: d, k_min, k_max, n, seed, out } => {
            let dims = dims(d)?;
            let model = model_from_str(&std::fs::read_to_string(&model)?)?;
            let ks = KRange::new(k_min, k_max)?;
            let rows = k_sweep(&model, dims, &(ks.min..=ks.max).collect::<Vec<_>>(), n, seed, EXEC)?;
            let mut csv = String::from("k,n,ratio_predicted_separable,ratio_ppt,ratio_ball\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.k,
                    r.n,
                    format_f64(r.ratio_predicted_separable),
                    format_f64(r.ratio_ppt),
                    format_f64(r.ratio_ball)
                ));
            }
            write_atomic(&out, csv.as_bytes())?;
            Ok(())
        }
        Command::FigErrorCurve { input, iters, seed, out } => {
            let ds = read(&input)?;
            let cfg = FwConfig {
                max_iters: iters,
                track_trajectory: true,
                ..FwConfig::default()
            };
            let mut csv = String::from("class,iteration,mean_distance,std_distance\n");
            for label in ClassLabel::ALL {
                let inputs: Vec<_> = ds.samples.iter().filter(|s| s.label == label).map(|s| s.rho.clone()).collect();
                if inputs.is_empty() {
                    continue;
                }
                let mut rng = derive_rng(seed, "error-curve", label as u64);
                for p in fw_error_curve(label.as_str(), &inputs, &cfg, EXEC, &mut rng)? {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        p.class_tag,
                        p.iteration,
                        format_f64(p.mean_distance),
                        format_f64(p.std_distance)
                    ));
                }
            }
            write_atomic(&out, csv.as_bytes())?;
            Ok(())
        }
        Command::FwLimitation { train, test, include_fw, iters, seed, report_out } => {
            let train = read(&train)?;
            let test = read(&test)?;
            let cfg = ExperimentConfig::default();
            let fw = FwConfig::with_iters(iters);
            let out = fw_limitation_experiment(
                &train.samples,
                &test.samples,
                include_fw,
                &fw,
                &cfg,
                derive_seed(seed, "fw-limitation", 0),
                EXEC,
            )?;
            write_text(report_out.as_deref(), &out.report.to_csv())
        }
    }
}
