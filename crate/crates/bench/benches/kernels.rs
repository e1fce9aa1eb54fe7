use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gaugesim_bench::{canonical_beams, canonical_grid, dynamics_setup};
use gaugesim_core::dynamics::evolve;
use gaugesim_core::spectrum::{landau_bands, SpectrumConfig};
use gaugesim_core::{curl_z, gradient, ratio_field, vector_potential};

fn fields(c: &mut Criterion) {
    let beams = canonical_beams();
    let grid = canonical_grid(41);
    c.bench_function("ratio_field 2401x41", |b| {
        b.iter(|| ratio_field(&beams, &grid).unwrap())
    });
    let rf = ratio_field(&beams, &grid).unwrap();
    c.bench_function("gradient 2401x41", |b| b.iter(|| gradient(&rf.sin2theta)));
    let a = vector_potential(&rf);
    c.bench_function("curl_z 2401x41", |b| b.iter(|| curl_z(&a)));
}

fn bands(c: &mut Criterion) {
    let beams = canonical_beams();
    let spec = SpectrumConfig::default();
    let mut g = c.benchmark_group("landau_bands");
    g.sample_size(10);
    for n_q in [1usize, 8] {
        let qs: Vec<f64> = (0..n_q).map(|i| -0.6 + 0.2 * i as f64 / n_q as f64).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n_q), &qs, |b, qs| {
            b.iter(|| landau_bands(&beams, &spec, qs, 3).unwrap())
        });
    }
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve_10_steps");
    g.sample_size(10);
    for n in [256usize, 512] {
        let s = dynamics_setup(n, 10);
        let grid = s.grid().unwrap();
        let profile = s.profile(&grid).unwrap();
        let state = s.initial_state(&grid, &profile).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| evolve(&state, &profile, &s.evolution).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fields, bands, dynamics);
criterion_main!(benches);
