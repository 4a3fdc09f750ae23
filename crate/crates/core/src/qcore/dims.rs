use serde::{Deserialize, Serialize};

use crate::error::{QsepError, Result};

/// Local dimensions of a bipartite system `H_A ⊗ H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDims", into = "RawDims")]
pub struct BipartiteDims {
    p_a: usize,
    p_b: usize,
}

#[derive(Serialize, Deserialize)]
struct RawDims {
    p_a: usize,
    p_b: usize,
}

impl TryFrom<RawDims> for BipartiteDims {
    type Error = QsepError;
    fn try_from(raw: RawDims) -> Result<Self> {
        BipartiteDims::new(raw.p_a, raw.p_b)
    }
}

impl From<BipartiteDims> for RawDims {
    fn from(d: BipartiteDims) -> Self {
        RawDims { p_a: d.p_a, p_b: d.p_b }
    }
}

impl BipartiteDims {
    pub fn new(p_a: usize, p_b: usize) -> Result<Self> {
        if p_a < 2 || p_b < 2 {
            return Err(QsepError::invalid(format!(
                "subsystem dimensions must be >= 2, got ({p_a}, {p_b})"
            )));
        }
        Ok(BipartiteDims { p_a, p_b })
    }

    pub fn p_a(&self) -> usize {
        self.p_a
    }

    pub fn p_b(&self) -> usize {
        self.p_b
    }

    /// Total dimension `p_a * p_b`.
    pub fn p(&self) -> usize {
        self.p_a * self.p_b
    }

    /// True for 2x2 and 2x3 systems, where PPT is equivalent to separability.
    pub fn ppt_is_exact(&self) -> bool {
        matches!((self.p_a, self.p_b), (2, 2) | (2, 3) | (3, 2))
    }
}

impl std::fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.p_a, self.p_b)
    }
}
