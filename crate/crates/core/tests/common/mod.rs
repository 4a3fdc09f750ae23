//! Property checks shared by the proptest suites and the acceptance run.
//! Each takes its parameters plus a seed and returns a description of the
//! first violation.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use qsep_core::classifier::{
    evaluate, model_to_string, solve_dual, train_model, CvConfig, Gram, KernelSpec,
};
use qsep_core::datagen::{generate_nppt_seeded, generate_sep_seeded, KRange, LabeledSample, SepDefaults};
use qsep_core::dataset::{dataset_from_str, dataset_to_string, DatasetHeader};
use qsep_core::features::{bloch_vector, GellMannBasis};
use qsep_core::par::Exec;
use qsep_core::qcore::{
    haar_random_pure, hermitian_eigenvalues, partial_transpose_b_matrix, random_density_mixture, schmidt_top,
    BipartiteDims, CMatrix, CVector, DensityMatrix, PureState,
};
use qsep_core::seed::rng_from_seed;

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn dims(pa: usize, pb: usize) -> BipartiteDims {
    BipartiteDims::new(pa, pb).unwrap()
}

/// Partial transpose twice is the identity, bit for bit; trace and
/// Hermiticity survive one application.
pub fn pt_involution(pa: usize, pb: usize, k: usize, seed: u64) -> Check {
    let d = dims(pa, pb);
    let rho = random_density_mixture(d, k, &mut rng_from_seed(seed)).unwrap();
    let once = partial_transpose_b_matrix(rho.entries(), d);
    let twice = partial_transpose_b_matrix(&once, d);
    ensure(&twice == rho.entries(), || "PT applied twice changed the matrix".into())?;
    let tr = once.trace();
    ensure((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12, || format!("PT trace {tr}"))?;
    ensure(max_abs_diff(&once, &once.adjoint()) < 1e-12, || "PT output not Hermitian".into())
}

/// Top Schmidt coefficient against the top eigenvalue of `M M†`, computed
/// by an independent Hermitian eigensolver.
pub fn schmidt_vs_oracle(pa: usize, pb: usize, seed: u64) -> Check {
    let d = dims(pa, pb);
    let s = haar_random_pure(d, &mut rng_from_seed(seed));
    let top = schmidt_top(&s);
    let amps = s.amplitudes();
    let m = CMatrix::from_fn(pa, pb, |i, j| amps[i * pb + j]);
    let ev = hermitian_eigenvalues(&(&m * m.adjoint()));
    let oracle = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0).sqrt();
    ensure((top.lambda1 - oracle).abs() < 1e-8, || {
        format!("lambda1 {} vs oracle {oracle}", top.lambda1)
    })?;
    let overlap = top.product_vector().dotc(amps).norm();
    ensure((overlap - top.lambda1).abs() < 1e-8, || {
        format!("product overlap {overlap} vs lambda1 {}", top.lambda1)
    })?;
    ensure((top.a1.norm() - 1.0).abs() < 1e-12 && (top.b1.norm() - 1.0).abs() < 1e-12, || {
        "Schmidt vectors not unit".into()
    })
}

/// `tr(G_i G_j) = 2 δ_ij`.
pub fn ggm_gram(p: usize) -> Check {
    let basis = GellMannBasis::new(p).unwrap();
    let g = basis.matrices();
    ensure(g.len() == p * p - 1, || format!("basis size {}", g.len()))?;
    for i in 0..g.len() {
        for j in i..g.len() {
            let v: Complex64 = (&g[i] * &g[j]).trace();
            let want = if i == j { 2.0 } else { 0.0 };
            ensure((v.re - want).abs() < 1e-12 && v.im.abs() < 1e-12, || {
                format!("p={p}: tr(G_{i} G_{j}) = {v}")
            })?;
        }
    }
    Ok(())
}

/// Bloch reconstruction and `tr ρ² = 1/p + ‖β‖²/2`.
pub fn bloch_identities(pa: usize, pb: usize, k: usize, seed: u64) -> Check {
    let d = dims(pa, pb);
    let rho = random_density_mixture(d, k, &mut rng_from_seed(seed)).unwrap();
    let basis = GellMannBasis::cached(d.p()).unwrap();
    let b = bloch_vector(&rho, &basis).unwrap();
    let back = b.reconstruct(&basis).unwrap();
    let err = max_abs_diff(&back, rho.entries());
    ensure(err < 1e-10, || format!("reconstruction error {err:.3e}"))?;
    let lhs = rho.purity();
    let rhs = 1.0 / d.p() as f64 + b.norm_squared() / 2.0;
    ensure((lhs - rhs).abs() < 1e-10, || format!("purity {lhs} vs Bloch {rhs}"))
}

/// Dual feasibility and the maximal KKT violation, recomputed from `α`
/// rather than read from the solver.
pub fn smo_kkt(n: usize, seed: u64) -> Check {
    let mut rng = rng_from_seed(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label: i8 = if i % 2 == 0 { 1 } else { -1 };
        let shift = 0.6 * label as f64;
        x.push((0..4).map(|_| shift + rng.random_range(-1.0..1.0)).collect::<Vec<f64>>());
        y.push(label);
    }
    let c = 2f64.powi(rng.random_range(-3..=7));
    let kernel = if rng.random_bool(0.5) {
        KernelSpec::Gaussian { gamma: 2f64.powi(rng.random_range(-4..=2)) }
    } else {
        KernelSpec::Polynomial { degree: 2, coef0: 1.0 }
    };
    let tol = 1e-3;
    let gram = Gram::new(&kernel, &x);
    let sol = solve_dual(&gram, &y, c, tol).map_err(|e| e.to_string())?;
    let a = &sol.alpha;
    let eq: f64 = a.iter().zip(&y).map(|(ai, &yi)| ai * yi as f64).sum();
    ensure(eq.abs() < 1e-9, || format!("sum y alpha = {eq:.3e}"))?;
    ensure(a.iter().all(|&ai| (0.0..=c).contains(&ai)), || "alpha outside [0, C]".into())?;
    let (mut up, mut low) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..n {
        let yt = y[t] as f64;
        let grad: f64 = (0..n).map(|j| yt * y[j] as f64 * gram.get(t, j) * a[j]).sum::<f64>() - 1.0;
        let v = -yt * grad;
        let in_up = if yt > 0.0 { a[t] < c } else { a[t] > 0.0 };
        let in_low = if yt > 0.0 { a[t] > 0.0 } else { a[t] < c };
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    let violation = up - low;
    ensure(violation <= tol + 1e-9, || format!("KKT violation {violation:.3e} > {tol}"))
}

fn small_dataset(n: usize, seed: u64) -> (BipartiteDims, Vec<LabeledSample>) {
    let d = dims(3, 3);
    let mut s = generate_sep_seeded(d, n, seed, SepDefaults::default(), Exec::Parallel).unwrap();
    s.extend(generate_nppt_seeded(d, n, KRange::nppt_default(d), seed ^ 1, Exec::Parallel).unwrap());
    (d, s)
}

/// Write, read, write: identical bytes and equal samples.
pub fn dataset_round_trip_samples(dims: BipartiteDims, samples: &[LabeledSample], seed: u64) -> Check {
    let header = DatasetHeader::new(dims, Some(seed), serde_json::json!({ "seed": seed }));
    let first = dataset_to_string(&header, samples).map_err(|e| e.to_string())?;
    let back = dataset_from_str(&first).map_err(|e| e.to_string())?;
    ensure(back.samples == samples, || "samples changed on reload".into())?;
    let second = dataset_to_string(&back.header, &back.samples).map_err(|e| e.to_string())?;
    ensure(first == second, || "bytes changed on rewrite".into())
}

pub fn dataset_round_trip(n: usize, seed: u64) -> Check {
    let (d, samples) = small_dataset(n, seed);
    dataset_round_trip_samples(d, &samples, seed)
}

fn pipeline_output(seed: u64, exec: Exec) -> String {
    let d = dims(3, 3);
    let mut train = generate_sep_seeded(d, 20, seed, SepDefaults::default(), exec).unwrap();
    train.extend(generate_nppt_seeded(d, 20, KRange::nppt_default(d), seed + 1, exec).unwrap());
    let mut test = generate_sep_seeded(d, 10, seed + 2, SepDefaults::default(), exec).unwrap();
    test.extend(generate_nppt_seeded(d, 10, KRange::nppt_default(d), seed + 3, exec).unwrap());
    let cv = CvConfig {
        folds: 3,
        kernel_grid: vec![KernelSpec::Gaussian { gamma: 0.5 }, KernelSpec::Gaussian { gamma: 4.0 }],
        c_grid: vec![0.5, 8.0],
        ..CvConfig::default()
    };
    let model = train_model(&train, &cv, seed, exec).unwrap();
    let report = evaluate(&model, &test, exec).unwrap();
    let header = DatasetHeader::new(d, Some(seed), serde_json::Value::Null);
    let data = dataset_to_string(&header, &train).unwrap();
    format!("{data}{}{}", model_to_string(&model).unwrap(), report.to_csv())
}

/// Generation, training and evaluation repeat bit-identically, and do not
/// depend on the execution mode.
pub fn pipeline_determinism(seed: u64) -> Check {
    let a = pipeline_output(seed, Exec::Parallel);
    let b = pipeline_output(seed, Exec::Parallel);
    let c = pipeline_output(seed, Exec::Sequential);
    ensure(a == b, || "two parallel runs differ".into())?;
    ensure(a == c, || "sequential and parallel runs differ".into())
}

pub fn bell_pure() -> PureState {
    let d = dims(2, 2);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = CVector::from_vec([h, 0.0, 0.0, h].iter().map(|&x| Complex64::new(x, 0.0)).collect());
    PureState::new(amps, d).unwrap()
}

pub fn bell() -> DensityMatrix {
    DensityMatrix::from_pure(&bell_pure())
}

fn werner(t: f64) -> CMatrix {
    bell().entries() * Complex64::new(t, 0.0) + CMatrix::identity(4, 4) * Complex64::new((1.0 - t) / 4.0, 0.0)
}

/// Smallest distance from the Bell state to a separable Werner state,
/// found by scanning `t` over `[0, 1/3]`.
pub fn werner_oracle() -> f64 {
    let rho = bell();
    (0..=3000)
        .map(|i| i as f64 / 9000.0)
        .map(|t| (rho.entries() - werner(t)).norm())
        .fold(f64::INFINITY, f64::min)
}
