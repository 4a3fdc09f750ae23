//! Labelled dataset generation (SEP / PPT_ENT / NPPT_ENT) and augmentation of
//! PPT-entangled states.
//!
//! Every sample owns a seed derived from `(base seed, class stream, index)`,
//! so datasets are identical regardless of thread count.

mod region;
mod unitary;

pub use region::{
    region_g, sample_in_region, sample_in_region_with, RegionDraw, RegionSample, RobustnessRegion,
    REGION_GUARD,
};
pub use unitary::{random_local_unitary, random_local_unitary_transform, LocalUnitary};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{
    optimal_witness, ppt_check, validate_witness_with, SeparablePool, ValidationReport, Verdict,
    Witness, WitnessConfig, PPT_TOL,
};
use crate::error::{QsepError, Result, StarvationReport};
use crate::fw::{fw_nearest_separable, FwConfig};
use crate::par::Exec;
use crate::qcore::{
    random_density_mixture, random_separable_with, BipartiteDims, DensityMatrix, FactorRank,
};
use crate::seed::{derive_rng, derive_seed, rng_from_seed};

/// Consecutive rejected draws after which a generator reports starvation.
/// A generator whose acceptance rate is at least 1e-4 produces a run this long
/// with probability below e^-10.
pub const STARVATION_WINDOW: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassLabel {
    Sep,
    PptEnt,
    NpptEnt,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Sep, ClassLabel::PptEnt, ClassLabel::NpptEnt];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Sep => "SEP",
            ClassLabel::PptEnt => "PPT_ENT",
            ClassLabel::NpptEnt => "NPPT_ENT",
        }
    }

    /// Binary target: separable −1, entangled +1.
    pub fn binary(self) -> i8 {
        match self {
            ClassLabel::Sep => -1,
            ClassLabel::PptEnt | ClassLabel::NpptEnt => 1,
        }
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClassLabel {
    type Err = QsepError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SEP" => Ok(ClassLabel::Sep),
            "PPT_ENT" => Ok(ClassLabel::PptEnt),
            "NPPT_ENT" => Ok(ClassLabel::NpptEnt),
            other => Err(QsepError::invalid(format!("unknown class label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Generator {
    Mixture,
    SeparableConstruction,
    /// Output of the Frank-Wolfe solver (a tracked mixture of product states).
    FwDecomposition,
    AugmentRegion,
    AugmentUnitary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Seed of this sample's own random stream.
    pub seed: u64,
    pub generator: Generator,
    /// Mixture size `k` or number of separable terms `r`.
    pub k_or_r: usize,
    pub parent_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: String,
    pub rho: DensityMatrix,
    pub label: ClassLabel,
    pub witness: Option<Witness>,
    pub provenance: Provenance,
}

impl LabeledSample {
    /// Checks the class invariants that need no Monte-Carlo sampling:
    /// construction certificate for SEP, PT sign for NPPT_ENT, PPT plus a
    /// detecting witness for PPT_ENT.
    pub fn check_structural(&self, witness_cfg: WitnessConfig) -> Result<()> {
        let fail = |msg: String| Err(QsepError::invalid(format!("sample {}: {msg}", self.id)));
        match self.label {
            ClassLabel::Sep => {
                if !matches!(
                    self.provenance.generator,
                    Generator::SeparableConstruction | Generator::FwDecomposition
                ) {
                    return fail(format!(
                        "SEP sample has no separability certificate (generator {:?})",
                        self.provenance.generator
                    ));
                }
                if self.witness.is_some() {
                    return fail("SEP sample carries a witness".into());
                }
            }
            ClassLabel::NpptEnt => {
                let v = ppt_check(&self.rho, PPT_TOL);
                if v.verdict != Verdict::Entangled {
                    return fail(format!("NPPT_ENT sample is PPT (min PT eigenvalue {:.3e})", v.evidence));
                }
                if self.witness.is_some() {
                    return fail("NPPT_ENT sample carries a witness".into());
                }
            }
            ClassLabel::PptEnt => {
                let v = ppt_check(&self.rho, PPT_TOL);
                if v.verdict == Verdict::Entangled {
                    return fail(format!("PPT_ENT sample is not PPT (min PT eigenvalue {:.3e})", v.evidence));
                }
                let Some(w) = &self.witness else {
                    return fail("PPT_ENT sample has no witness".into());
                };
                let value = crate::criteria::witness_value(w, &self.rho)?;
                // Region samples are only guaranteed a negative value, not the
                // validation margin of their seed.
                let margin = match self.provenance.generator {
                    Generator::AugmentRegion | Generator::AugmentUnitary => 0.0,
                    _ => witness_cfg.entanglement_margin,
                };
                if !(value < -margin) {
                    return fail(format!("witness does not detect the state (tr(Wρ) = {value:.3e})"));
                }
            }
        }
        Ok(())
    }
}

/// Ensemble for separable states: `r` uniform in `1..=r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SepDefaults {
    /// Upper bound on the number of product terms; `None` means `p²`.
    pub r_max: Option<usize>,
    #[serde(with = "factor_rank_serde")]
    pub factors: FactorRank,
}

impl Default for SepDefaults {
    fn default() -> Self {
        SepDefaults {
            r_max: None,
            factors: FactorRank::UpToLocalDim,
        }
    }
}

mod factor_rank_serde {
    use crate::qcore::FactorRank;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(f: &FactorRank, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match f {
            FactorRank::Pure => "PURE",
            FactorRank::UpToLocalDim => "UP_TO_LOCAL_DIM",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FactorRank, D::Error> {
        match String::deserialize(d)?.as_str() {
            "PURE" => Ok(FactorRank::Pure),
            "UP_TO_LOCAL_DIM" => Ok(FactorRank::UpToLocalDim),
            other => Err(serde::de::Error::custom(format!("unknown factor rank {other}"))),
        }
    }
}

impl SepDefaults {
    pub fn r_max_for(&self, dims: BipartiteDims) -> usize {
        self.r_max.unwrap_or(dims.p() * dims.p()).max(1)
    }

    /// Draws `r` and returns a separable state.
    pub fn sample<R: Rng + ?Sized>(&self, dims: BipartiteDims, rng: &mut R) -> Result<DensityMatrix> {
        Ok(self.sample_with_r(dims, rng)?.0)
    }

    pub fn sample_with_r<R: Rng + ?Sized>(&self, dims: BipartiteDims, rng: &mut R) -> Result<(DensityMatrix, usize)> {
        let r = rng.random_range(1..=self.r_max_for(dims));
        Ok((random_separable_with(dims, r, self.factors, rng)?, r))
    }
}

/// Inclusive range of mixture sizes `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

impl KRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(QsepError::invalid(format!("invalid k range [{min}, {max}]")));
        }
        Ok(KRange { min, max })
    }

    /// `[1, p]`: small mixtures, mostly NPT.
    pub fn nppt_default(dims: BipartiteDims) -> Self {
        KRange { min: 1, max: dims.p() }
    }

    /// `[p/2, 2p]`: around the PPT threshold.
    pub fn ppt_default(dims: BipartiteDims) -> Self {
        let p = dims.p();
        KRange {
            min: (p / 2).max(1),
            max: 2 * p,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

fn sample_id(label: ClassLabel, index: usize) -> String {
    format!("{}-{index:06}", label.as_str())
}

/// `n` separable states built as random mixtures of product states.
pub fn generate_sep<R: Rng + ?Sized>(dims: BipartiteDims, n: usize, rng: &mut R) -> Result<Vec<LabeledSample>> {
    generate_sep_seeded(dims, n, rng.random(), SepDefaults::default(), Exec::default())
}

pub fn generate_sep_seeded(
    dims: BipartiteDims,
    n: usize,
    seed: u64,
    sep: SepDefaults,
    exec: Exec,
) -> Result<Vec<LabeledSample>> {
    if n == 0 {
        return Err(QsepError::invalid("n must be >= 1"));
    }
    exec.try_map_range(n, |i| {
        let s = derive_seed(seed, "sep", i as u64);
        let (rho, r) = sep.sample_with_r(dims, &mut rng_from_seed(s))?;
        Ok(LabeledSample {
            id: sample_id(ClassLabel::Sep, i),
            rho,
            label: ClassLabel::Sep,
            witness: None,
            provenance: Provenance {
                seed: s,
                generator: Generator::SeparableConstruction,
                k_or_r: r,
                parent_id: None,
            },
        })
    })
}

fn check_k_range(dims: BipartiteDims, k: KRange) -> Result<()> {
    if k.min == 0 || k.min > k.max || k.max > 4 * dims.p() {
        return Err(QsepError::invalid(format!(
            "k range [{}, {}] must lie within [1, {}]",
            k.min,
            k.max,
            4 * dims.p()
        )));
    }
    Ok(())
}

/// `n` random mixtures whose partial transpose has a negative eigenvalue.
pub fn generate_nppt<R: Rng + ?Sized>(
    dims: BipartiteDims,
    n: usize,
    k_range: KRange,
    rng: &mut R,
) -> Result<Vec<LabeledSample>> {
    generate_nppt_seeded(dims, n, k_range, rng.random(), Exec::default())
}

pub fn generate_nppt_seeded(
    dims: BipartiteDims,
    n: usize,
    k_range: KRange,
    seed: u64,
    exec: Exec,
) -> Result<Vec<LabeledSample>> {
    if n == 0 {
        return Err(QsepError::invalid("n must be >= 1"));
    }
    check_k_range(dims, k_range)?;
    exec.try_map_range(n, |i| {
        let s = derive_seed(seed, "nppt", i as u64);
        let mut rng = rng_from_seed(s);
        let mut rejected = 0u64;
        loop {
            let k = k_range.draw(&mut rng);
            let rho = random_density_mixture(dims, k, &mut rng)?;
            if ppt_check(&rho, PPT_TOL).verdict == Verdict::Entangled {
                return Ok(LabeledSample {
                    id: sample_id(ClassLabel::NpptEnt, i),
                    rho,
                    label: ClassLabel::NpptEnt,
                    witness: None,
                    provenance: Provenance {
                        seed: s,
                        generator: Generator::Mixture,
                        k_or_r: k,
                        parent_id: None,
                    },
                });
            }
            rejected += 1;
            if rejected >= STARVATION_WINDOW {
                return Err(QsepError::GeneratorStarved(StarvationReport {
                    generator: "NPPT_ENT",
                    attempts: rejected,
                    accepted: 0,
                    ppt_rate: None,
                    validation_failure_rate: None,
                }));
            }
        }
    })
}

/// How PPT candidates get their witnesses checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidationMode {
    /// One pool of `n_validation` separable states drawn once per call and
    /// shared by every candidate.
    SharedPool,
    /// Fresh separable samples for every candidate.
    Fresh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PptEntConfig {
    pub k_range: KRange,
    pub fw: FwConfig,
    pub n_validation: usize,
    pub witness: WitnessConfig,
    pub sep: SepDefaults,
    pub validation: ValidationMode,
}

impl PptEntConfig {
    pub fn for_dims(dims: BipartiteDims) -> Self {
        PptEntConfig {
            k_range: KRange::ppt_default(dims),
            fw: FwConfig::default(),
            n_validation: 10_000,
            witness: WitnessConfig::default(),
            sep: SepDefaults::default(),
            validation: ValidationMode::SharedPool,
        }
    }
}

/// Counters from the PPT-entangled pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PptEntStats {
    pub draws: u64,
    pub ppt_candidates: u64,
    pub validation_failures: u64,
    pub accepted: u64,
}

impl PptEntStats {
    fn add(&mut self, o: &PptEntStats) {
        self.draws += o.draws;
        self.ppt_candidates += o.ppt_candidates;
        self.validation_failures += o.validation_failures;
        self.accepted += o.accepted;
    }

    fn ratio(num: u64, den: u64) -> Option<f64> {
        (den > 0).then(|| num as f64 / den as f64)
    }

    pub fn ppt_rate(&self) -> Option<f64> {
        Self::ratio(self.ppt_candidates, self.draws)
    }

    pub fn validation_failure_rate(&self) -> Option<f64> {
        Self::ratio(self.validation_failures, self.ppt_candidates)
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        Self::ratio(self.accepted, self.draws)
    }
}

/// PPT states certified entangled by a validated optimal witness.
pub fn generate_ppt_ent<R: Rng + ?Sized>(
    dims: BipartiteDims,
    n: usize,
    k_range: KRange,
    fw_config: &FwConfig,
    n_validation: usize,
    rng: &mut R,
) -> Result<Vec<LabeledSample>> {
    let config = PptEntConfig {
        k_range,
        fw: fw_config.clone(),
        n_validation,
        ..PptEntConfig::for_dims(dims)
    };
    Ok(generate_ppt_ent_seeded(dims, n, &config, rng.random(), Exec::default())?.0)
}

pub fn generate_ppt_ent_seeded(
    dims: BipartiteDims,
    n: usize,
    config: &PptEntConfig,
    seed: u64,
    exec: Exec,
) -> Result<(Vec<LabeledSample>, PptEntStats)> {
    if n == 0 {
        return Err(QsepError::invalid("n must be >= 1"));
    }
    check_k_range(dims, config.k_range)?;
    // No candidate can succeed where PPT already implies separability; skip the pool.
    let pool = match config.validation {
        ValidationMode::SharedPool if !dims.ppt_is_exact() => Some(SeparablePool::generate(
            dims,
            config.n_validation,
            config.sep,
            derive_seed(seed, "validation-pool", 0),
            exec,
        )?),
        _ => None,
    };
    let results = exec.map_range(n, |i| ppt_ent_one(dims, i, config, seed, pool.as_ref()));
    let mut stats = PptEntStats::default();
    let mut samples = Vec::with_capacity(n);
    let mut first_err = None;
    for r in results {
        match r {
            Ok((sample, st)) => {
                stats.add(&st);
                samples.push(sample);
            }
            Err((e, st)) => {
                stats.add(&st);
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return Err(match e {
            QsepError::GeneratorStarved(_) => QsepError::GeneratorStarved(StarvationReport {
                generator: "PPT_ENT",
                attempts: stats.draws,
                accepted: stats.accepted,
                ppt_rate: stats.ppt_rate(),
                validation_failure_rate: stats.validation_failure_rate(),
            }),
            other => other,
        });
    }
    Ok((samples, stats))
}

type OneResult = std::result::Result<(LabeledSample, PptEntStats), (QsepError, PptEntStats)>;

fn ppt_ent_one(
    dims: BipartiteDims,
    index: usize,
    config: &PptEntConfig,
    seed: u64,
    pool: Option<&SeparablePool>,
) -> OneResult {
    let s = derive_seed(seed, "ppt-ent", index as u64);
    let mut rng = rng_from_seed(s);
    let mut stats = PptEntStats::default();
    let mut since_accept = 0u64;
    macro_rules! tri {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(e) => return Err((e, stats)),
            }
        };
    }
    loop {
        if since_accept >= STARVATION_WINDOW {
            return Err((
                QsepError::GeneratorStarved(StarvationReport {
                    generator: "PPT_ENT",
                    attempts: stats.draws,
                    accepted: stats.accepted,
                    ppt_rate: stats.ppt_rate(),
                    validation_failure_rate: stats.validation_failure_rate(),
                }),
                stats,
            ));
        }
        stats.draws += 1;
        since_accept += 1;
        let k = config.k_range.draw(&mut rng);
        let rho = tri!(random_density_mixture(dims, k, &mut rng));
        // INCONCLUSIVE means PPT where PPT does not settle separability.
        if ppt_check(&rho, PPT_TOL).verdict != Verdict::Inconclusive {
            continue;
        }
        stats.ppt_candidates += 1;
        let fw = tri!(fw_nearest_separable(&rho, &config.fw, &mut rng));
        let witness = match optimal_witness(&rho, &fw.nearest) {
            Ok(w) => w,
            Err(QsepError::DegenerateWitness { .. }) => {
                stats.validation_failures += 1;
                continue;
            }
            Err(e) => return Err((e, stats)),
        };
        let report: ValidationReport = match pool {
            Some(pool) => tri!(pool.validate(&witness, &rho, config.witness)),
            None => tri!(validate_witness_with(
                &witness,
                &rho,
                config.n_validation,
                config.witness,
                config.sep,
                Exec::Sequential,
                &mut rng,
            )),
        };
        if !report.passed {
            stats.validation_failures += 1;
            continue;
        }
        stats.accepted += 1;
        return Ok((
            LabeledSample {
                id: sample_id(ClassLabel::PptEnt, index),
                rho,
                label: ClassLabel::PptEnt,
                witness: Some(witness),
                provenance: Provenance {
                    seed: s,
                    generator: Generator::Mixture,
                    k_or_r: k,
                    parent_id: None,
                },
            },
            stats,
        ));
    }
}

/// New PPT-entangled samples drawn from the robustness regions of `seeds`
/// (round-robin), each optionally followed by a random local unitary.
pub fn augment<R: Rng + ?Sized>(
    seeds: &[LabeledSample],
    n_out: usize,
    unitary_fraction: f64,
    rng: &mut R,
) -> Result<Vec<LabeledSample>> {
    augment_seeded(seeds, n_out, unitary_fraction, rng.random(), Exec::default())
}

pub fn augment_seeded(
    seeds: &[LabeledSample],
    n_out: usize,
    unitary_fraction: f64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<LabeledSample>> {
    if n_out == 0 {
        return Err(QsepError::invalid("n_out must be >= 1"));
    }
    if seeds.is_empty() {
        return Err(QsepError::invalid("augmentation needs at least one seed"));
    }
    if !(0.0..=1.0).contains(&unitary_fraction) {
        return Err(QsepError::invalid("unitary_fraction must lie in [0, 1]"));
    }
    let regions = seeds
        .iter()
        .map(|s| {
            if s.label != ClassLabel::PptEnt {
                return Err(QsepError::invalid(format!("seed {} is not PPT_ENT", s.id)));
            }
            let w = s
                .witness
                .as_ref()
                .ok_or_else(|| QsepError::invalid(format!("seed {} has no witness", s.id)))?;
            RobustnessRegion::new(s.rho.clone(), w)
        })
        .collect::<Result<Vec<_>>>()?;

    exec.try_map_range(n_out, |j| {
        let parent = &seeds[j % seeds.len()];
        let region = &regions[j % seeds.len()];
        let s = derive_seed(seed, "augment", j as u64);
        let mut rng = rng_from_seed(s);
        let drawn = sample_in_region_with(region, RegionDraw::default(), &mut rng)?;
        let witness = parent.witness.clone().expect("checked above");
        let (rho, witness, generator) = if rng.random::<f64>() < unitary_fraction {
            let u = random_local_unitary(drawn.rho.dims(), &mut rng);
            (u.apply(&drawn.rho), u.apply_witness(&witness), Generator::AugmentUnitary)
        } else {
            (drawn.rho, witness, Generator::AugmentRegion)
        };
        Ok(LabeledSample {
            id: format!("AUG-{j:06}"),
            rho,
            label: ClassLabel::PptEnt,
            witness: Some(witness),
            provenance: Provenance {
                seed: s,
                generator,
                k_or_r: drawn.noise_rank,
                parent_id: Some(parent.id.clone()),
            },
        })
    })
}

/// Fresh Monte-Carlo re-validation of a PPT_ENT sample's witness.
pub fn revalidate<R: Rng + ?Sized>(
    sample: &LabeledSample,
    n_validation: usize,
    config: WitnessConfig,
    rng: &mut R,
) -> Result<ValidationReport> {
    let w = sample
        .witness
        .as_ref()
        .ok_or_else(|| QsepError::invalid(format!("sample {} has no witness", sample.id)))?;
    let base: u64 = rng.random();
    validate_witness_with(
        w,
        &sample.rho,
        n_validation,
        config,
        SepDefaults::default(),
        Exec::default(),
        &mut derive_rng(base, "revalidate", 0),
    )
}
