//! Neighbourhood of a PPT-entangled state that contains only PPT-entangled
//! states: `(1−μ)(νρ + (1−ν)I/p) + μσ` for `ν ∈ (f(W), 1)`, `μ ∈ [0, g(ν, W))`
//! and any density matrix `σ`.

use rand::Rng;

use crate::criteria::{ppt_check, witness_value, Verdict, Witness, PPT_TOL};
use crate::error::{QsepError, Result};
use crate::qcore::{hermitian_eigenvalues, mixture_matrix, CMatrix, DensityMatrix};
use num_complex::Complex64;

/// Keeps `ν` and `μ` strictly inside their open intervals.
pub const REGION_GUARD: f64 = 1e-6;
/// Eigenvalues of `W` above this count as positive.
const POSITIVE_EIG_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RobustnessRegion {
    rho: DensityMatrix,
    /// Seed witness rescaled to unit trace; the region bounds assume `tr W = 1`.
    witness: Witness,
    lambda_rho: f64,
    nu_lower: f64,
    num_pos: usize,
    trace_pos: f64,
}

impl RobustnessRegion {
    pub fn new(rho: DensityMatrix, witness: &Witness) -> Result<Self> {
        if witness.dims() != rho.dims() {
            return Err(QsepError::invalid("witness and state dims differ"));
        }
        let tr = witness.trace();
        if !(tr > 0.0) {
            return Err(QsepError::RegionEmpty(format!(
                "witness trace {tr:.3e} is not positive"
            )));
        }
        let witness = witness.scaled(1.0 / tr)?;
        let lambda_rho = -witness_value(&witness, &rho)?;
        if !(lambda_rho > 0.0) {
            return Err(QsepError::RegionEmpty(format!(
                "witness does not detect the state (tr(Wρ) = {:.3e})",
                -lambda_rho
            )));
        }
        let p = rho.p() as f64;
        let nu_lower = 1.0 / (1.0 + lambda_rho * p);
        let ev = hermitian_eigenvalues(witness.matrix());
        let positive: Vec<f64> = ev.into_iter().filter(|&x| x > POSITIVE_EIG_TOL).collect();
        let num_pos = positive.len();
        let trace_pos: f64 = positive.iter().sum();
        if num_pos == 0 || !(trace_pos > 0.0) {
            return Err(QsepError::RegionEmpty("witness has no positive part".into()));
        }
        if nu_lower + REGION_GUARD >= 1.0 - REGION_GUARD {
            return Err(QsepError::RegionEmpty(format!(
                "nu interval ({nu_lower}, 1) is empty after guarding"
            )));
        }
        Ok(RobustnessRegion {
            rho,
            witness,
            lambda_rho,
            nu_lower,
            num_pos,
            trace_pos,
        })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    /// Unit-trace witness the region is built from.
    pub fn witness(&self) -> &Witness {
        &self.witness
    }

    /// `λ_ρ = −tr(Wρ)` for the unit-trace witness.
    pub fn lambda_rho(&self) -> f64 {
        self.lambda_rho
    }

    /// `f(W) = 1 / (1 + λ_ρ p)`.
    pub fn nu_lower(&self) -> f64 {
        self.nu_lower
    }

    pub fn num_pos(&self) -> usize {
        self.num_pos
    }

    pub fn trace_pos(&self) -> f64 {
        self.trace_pos
    }
}

/// Upper bound `g(ν, W)` on the noise weight `μ`.
pub fn region_g(region: &RobustnessRegion, nu: f64) -> Result<f64> {
    if !(nu > region.nu_lower && nu < 1.0) {
        return Err(QsepError::invalid(format!(
            "nu = {nu} outside ({}, 1)",
            region.nu_lower
        )));
    }
    let p = region.rho.p() as f64;
    let first = (1.0 - nu) / (p - 1.0 - nu);
    let excess = region.num_pos as f64 * (nu * (1.0 + p * region.lambda_rho) - 1.0);
    let second = excess / (p * region.trace_pos + excess);
    Ok(first.min(second))
}

/// Overrides for [`sample_in_region_with`]; `None` draws the value at random.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionDraw {
    pub nu: Option<f64>,
    pub mu: Option<f64>,
    /// Rank of the noise state `σ`; default uniform in `1..=p`.
    pub noise_rank: Option<usize>,
}

/// A state drawn from the region, with the parameters used.
#[derive(Debug, Clone)]
pub struct RegionSample {
    pub rho: DensityMatrix,
    pub nu: f64,
    pub mu: f64,
    pub noise_rank: usize,
}

pub fn sample_in_region<R: Rng + ?Sized>(region: &RobustnessRegion, rng: &mut R) -> Result<DensityMatrix> {
    Ok(sample_in_region_with(region, RegionDraw::default(), rng)?.rho)
}

pub fn sample_in_region_with<R: Rng + ?Sized>(
    region: &RobustnessRegion,
    draw: RegionDraw,
    rng: &mut R,
) -> Result<RegionSample> {
    let lo = region.nu_lower + REGION_GUARD;
    let hi = 1.0 - REGION_GUARD;
    if lo >= hi {
        return Err(QsepError::RegionEmpty("nu interval is empty".into()));
    }
    let nu = match draw.nu {
        Some(nu) => nu,
        None => rng.random_range(lo..hi),
    };
    let g = region_g(region, nu)?;
    let mu = match draw.mu {
        Some(mu) => {
            if !(0.0..g).contains(&mu) {
                return Err(QsepError::invalid(format!("mu = {mu} outside [0, {g})")));
            }
            mu
        }
        None => rng.random::<f64>() * (1.0 - REGION_GUARD) * g,
    };
    let p = region.rho.p();
    let noise_rank = match draw.noise_rank {
        Some(k) if k >= 1 => k,
        Some(_) => return Err(QsepError::invalid("noise rank must be >= 1")),
        None => rng.random_range(1..=p),
    };
    let sigma = mixture_matrix(p, noise_rank, rng);

    let c = |x: f64| Complex64::new(x, 0.0);
    let core = region.rho.entries() * c(nu) + CMatrix::identity(p, p) * c((1.0 - nu) / p as f64);
    let out = core * c(1.0 - mu) + sigma * c(mu);
    let out = DensityMatrix::from_construction(out, region.rho.dims());

    let ppt = ppt_check(&out, PPT_TOL);
    if ppt.verdict == Verdict::Entangled {
        return Err(QsepError::NumericalInconsistency(format!(
            "region sample lost PPT (min PT eigenvalue {:.3e}, nu {nu}, mu {mu})",
            ppt.evidence
        )));
    }
    let wv = witness_value(&region.witness, &out)?;
    if !(wv < 0.0) {
        return Err(QsepError::NumericalInconsistency(format!(
            "region sample no longer detected by the seed witness (tr(Wρ) = {wv:.3e}, nu {nu}, mu {mu})"
        )));
    }
    Ok(RegionSample {
        rho: out,
        nu,
        mu,
        noise_rank,
    })
}
