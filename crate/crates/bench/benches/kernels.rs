use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fockramp::dynamics::{propagate, Wavefunction};
use fockramp::experiments::Preset;
use fockramp::schedule::{faquad_profile, invert_profile, linear_schedule, uniform_lambda_grid};
use fockramp::eigensolve;

fn spectral(c: &mut Criterion) {
    let preset = Preset::mini().unwrap();
    let mut group = c.benchmark_group("eigensolve");
    group.measurement_time(Duration::from_secs(5));
    for k in [3, 5, 8] {
        group.bench_with_input(BenchmarkId::new("mini_A0", k), &k, |b, &k| {
            b.iter(|| eigensolve(black_box(&preset.path.initial()), &preset.grid, k).unwrap())
        });
    }
    group.finish();
}

fn propagation(c: &mut Criterion) {
    let preset = Preset::mini().unwrap();
    let (start, _) = preset.endpoint_states().unwrap();
    let psi0 = Wavefunction::from_eigenstate(&start, preset.n_target).unwrap();
    let mut group = c.benchmark_group("propagate");
    group.sample_size(20);
    for t_f in [5.0, 20.0] {
        let s = linear_schedule(&preset.path, t_f, 1025).unwrap();
        group.bench_with_input(BenchmarkId::new("mini_linear", t_f), &s, |b, s| {
            b.iter(|| propagate(black_box(&psi0), s, preset.dt).unwrap())
        });
    }
    group.finish();
}

fn design(c: &mut Criterion) {
    let preset = Preset::mini().unwrap();
    let lambdas = uniform_lambda_grid(preset.path.a0, preset.path.af, 128);
    let mut group = c.benchmark_group("design");
    group.sample_size(10);
    group.bench_function("faquad_profile_128", |b| {
        b.iter(|| faquad_profile(&preset.path, &preset.grid, preset.n_target, black_box(&lambdas)).unwrap())
    });
    let profile = faquad_profile(&preset.path, &preset.grid, preset.n_target, &lambdas).unwrap();
    group.bench_function("invert_profile", |b| b.iter(|| invert_profile(black_box(&profile), 200.0).unwrap()));
    group.finish();
}

criterion_group!(benches, spectral, propagation, design);
criterion_main!(benches);
