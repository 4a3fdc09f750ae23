//! JSON-Lines dataset files.
//!
//! Line 1 is the header object; every following line is one sample:
//! `{"id":..,"label":"SEP"|"PPT_ENT"|"NPPT_ENT","matrix":[[re,im],..],
//! "witness":[[re,im],..]|null,"witness_source_distance":x|null,"provenance":{..}}`
//! with matrices row-major. Matrix and witness floats are written with 17
//! significant digits and parsed exactly, so write → read → write reproduces
//! the file byte for byte.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criteria::{Witness, WitnessConfig};
use crate::datagen::{ClassLabel, LabeledSample, Provenance};
use crate::error::{QsepError, Result};
use crate::features::format_f64;
use crate::qcore::{BipartiteDims, CMatrix, Complex64, DensityMatrix};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub format_version: u32,
    pub dims: BipartiteDims,
    /// Unix seconds from `SOURCE_DATE_EPOCH`, if set when the file was written.
    pub created: Option<u64>,
    pub master_seed: Option<u64>,
    pub generator_config: serde_json::Value,
}

impl DatasetHeader {
    pub fn new(dims: BipartiteDims, master_seed: Option<u64>, generator_config: serde_json::Value) -> Self {
        DatasetHeader {
            format_version: FORMAT_VERSION,
            dims,
            created: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()),
            master_seed,
            generator_config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub samples: Vec<LabeledSample>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    id: String,
    label: ClassLabel,
    matrix: Vec<[f64; 2]>,
    witness: Option<Vec<[f64; 2]>>,
    witness_source_distance: Option<f64>,
    provenance: Provenance,
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| QsepError::invalid(e.to_string()))
}

fn push_matrix(out: &mut String, m: &CMatrix) {
    out.push('[');
    let (r, c) = m.shape();
    for i in 0..r {
        for j in 0..c {
            if i + j > 0 {
                out.push(',');
            }
            let z = m[(i, j)];
            let _ = write!(out, "[{},{}]", format_f64(z.re), format_f64(z.im));
        }
    }
    out.push(']');
}

pub fn sample_to_line(s: &LabeledSample) -> Result<String> {
    let mut out = String::with_capacity(64 * s.rho.p() * s.rho.p());
    let _ = write!(out, "{{\"id\":{},\"label\":{},\"matrix\":", json(&s.id)?, json(&s.label)?);
    push_matrix(&mut out, s.rho.entries());
    out.push_str(",\"witness\":");
    match &s.witness {
        Some(w) => {
            push_matrix(&mut out, w.matrix());
            let _ = write!(out, ",\"witness_source_distance\":{}", format_f64(w.source_distance()));
        }
        None => out.push_str("null,\"witness_source_distance\":null"),
    }
    let _ = write!(out, ",\"provenance\":{}}}", json(&s.provenance)?);
    Ok(out)
}

pub fn dataset_to_string(header: &DatasetHeader, samples: &[LabeledSample]) -> Result<String> {
    let mut out = json(header)?;
    out.push('\n');
    for s in samples {
        if s.rho.dims() != header.dims {
            return Err(QsepError::invalid(format!(
                "sample {} has dims {} but the dataset is {}",
                s.id,
                s.rho.dims(),
                header.dims
            )));
        }
        out.push_str(&sample_to_line(s)?);
        out.push('\n');
    }
    Ok(out)
}

fn matrix_from_pairs(pairs: &[[f64; 2]], p: usize) -> std::result::Result<CMatrix, String> {
    if pairs.len() != p * p {
        return Err(format!("expected {} entries, found {}", p * p, pairs.len()));
    }
    Ok(CMatrix::from_fn(p, p, |i, j| {
        let [re, im] = pairs[i * p + j];
        Complex64::new(re, im)
    }))
}

fn parse_sample(line: &str, dims: BipartiteDims, cfg: WitnessConfig) -> std::result::Result<LabeledSample, String> {
    let raw: RawSample = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let p = dims.p();
    let rho = DensityMatrix::new(matrix_from_pairs(&raw.matrix, p)?, dims).map_err(|e| e.to_string())?;
    let witness = match raw.witness {
        Some(pairs) => Some(
            Witness::new(matrix_from_pairs(&pairs, p)?, dims, raw.witness_source_distance.unwrap_or(0.0))
                .map_err(|e| e.to_string())?,
        ),
        None => None,
    };
    let sample = LabeledSample {
        id: raw.id,
        rho,
        label: raw.label,
        witness,
        provenance: raw.provenance,
    };
    sample.check_structural(cfg).map_err(|e| e.to_string())?;
    Ok(sample)
}

/// Parses and validates a dataset; stops at the first bad line.
pub fn dataset_from_str(s: &str) -> Result<Dataset> {
    let mut lines = s.lines().enumerate();
    let (_, first) = lines.next().ok_or(QsepError::Load {
        line: 1,
        message: "missing header".into(),
    })?;
    let header: DatasetHeader = serde_json::from_str(first).map_err(|e| QsepError::Load {
        line: 1,
        message: format!("bad header: {e}"),
    })?;
    if header.format_version != FORMAT_VERSION {
        return Err(QsepError::Load {
            line: 1,
            message: format!("unsupported format version {}", header.format_version),
        });
    }
    let cfg = WitnessConfig::default();
    let mut samples = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let sample = parse_sample(line, header.dims, cfg).map_err(|message| QsepError::Load { line: i + 1, message })?;
        samples.push(sample);
    }
    Ok(Dataset { header, samples })
}

pub fn dataset_read(path: &Path) -> Result<Dataset> {
    dataset_from_str(&std::fs::read_to_string(path)?)
}

pub fn dataset_write(path: &Path, header: &DatasetHeader, samples: &[LabeledSample]) -> Result<()> {
    write_atomic(path, dataset_to_string(header, samples)?.as_bytes())
}

/// Writes through a temporary file in the target directory, then renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| QsepError::Io(e.error))?;
    Ok(())
}
