use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qsep_core::classifier::{cross_validate, CvConfig, KernelSpec};
use qsep_core::criteria::{optimal_witness, SeparablePool};
use qsep_core::datagen::{generate_nppt_seeded, generate_sep_seeded, KRange, SepDefaults};
use qsep_core::features::featurize;
use qsep_core::fw::{fw_nearest_separable, FwConfig};
use qsep_core::par::Exec;
use qsep_core::qcore::{random_density_mixture, BipartiteDims};
use qsep_core::seed::{derive_rng, rng_from_seed};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn dims() -> BipartiteDims {
    BipartiteDims::new(3, 3).unwrap()
}

fn generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate_sep_256");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_sep_seeded(dims(), 256, black_box(1), SepDefaults::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn validation(c: &mut Criterion) {
    let d = dims();
    let mut rng = rng_from_seed(2);
    let rho = random_density_mixture(d, 10, &mut rng).unwrap();
    let near = fw_nearest_separable(&rho, &FwConfig::with_iters(200), &mut rng).unwrap();
    let w = optimal_witness(&rho, &near.nearest).unwrap();
    let mut g = c.benchmark_group("validation_pool_4096");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let pool = SeparablePool::generate(d, 4096, SepDefaults::default(), 3, exec).unwrap();
                pool.witness_values(black_box(&w)).unwrap()
            })
        });
    }
    g.finish();
}

fn frank_wolfe(c: &mut Criterion) {
    let d = dims();
    let inputs: Vec<_> = (0..16)
        .map(|i| random_density_mixture(d, 12, &mut derive_rng(4, "bench", i)).unwrap())
        .collect();
    let cfg = FwConfig::with_iters(200);
    let mut g = c.benchmark_group("fw_16x200");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec.map_range(inputs.len(), |i| {
                    fw_nearest_separable(&inputs[i], &cfg, &mut derive_rng(5, "fw", i as u64))
                        .unwrap()
                        .distance
                })
            })
        });
    }
    g.finish();
}

fn classifier(c: &mut Criterion) {
    let d = dims();
    let mut samples = generate_sep_seeded(d, 100, 6, SepDefaults::default(), Exec::Parallel).unwrap();
    samples.extend(generate_nppt_seeded(d, 100, KRange::new(1, 14).unwrap(), 7, Exec::Parallel).unwrap());
    let mut g = c.benchmark_group("featurize_200");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| featurize(black_box(&samples), exec).unwrap()));
    }
    g.finish();

    let x: Vec<Vec<f64>> = featurize(&samples, Exec::Parallel).unwrap().into_iter().map(|b| b.beta).collect();
    let y: Vec<i8> = samples.iter().map(|s| s.label.binary()).collect();
    let cfg = CvConfig {
        kernel_grid: [-1, 1, 3].map(|e| KernelSpec::Gaussian { gamma: 2f64.powi(e) }).to_vec(),
        c_grid: vec![0.5, 2.0, 8.0],
        ..CvConfig::default()
    };
    let mut g = c.benchmark_group("cross_validate_200x9");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| cross_validate(black_box(&x), &y, &cfg, 8, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, generation, validation, frank_wolfe, classifier);
criterion_main!(benches);
