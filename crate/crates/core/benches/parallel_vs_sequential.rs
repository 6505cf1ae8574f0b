use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polaron_core::fock::{
    assemble_fiber_hamiltonian, discretize_modes_free, ground_state, FockBasis, FockBudget,
    LanczosOptions,
};
use polaron_core::hessian::{HessianKind, HessianOptions, HessianSetup};
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = ThreadPoolBuilder::new().build().expect("default pool");
    let n = default.current_num_threads();
    vec![
        ("single".to_string(), ThreadPoolBuilder::new().num_threads(1).build().expect("pool")),
        (format!("default-{n}"), default),
    ]
}

fn hessian_report(c: &mut Criterion) {
    let setup = HessianSetup::new(1.0, HessianOptions::default()).expect("setup");
    let mut group = c.benchmark_group("hessian_report_R1_lmax6");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| setup.report(HessianKind::Ball).expect("report")))
        });
    }
    group.finish();
}

fn fiber_ground_state(c: &mut Criterion) {
    let budget = FockBudget::default();
    let modes = discretize_modes_free(1.0, 2.0, 1.0, budget.max_modes).expect("modes");
    let basis = FockBasis::new(modes.len(), 3, budget.max_dimension).expect("basis");
    let mut group = c.benchmark_group("fiber_alpha1_K2_M3");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("assemble", &name), |b| {
            b.iter(|| pool.install(|| assemble_fiber_hamiltonian(&modes, &basis, 1.0, [0.0; 3], &budget).expect("h")))
        });
        let h = assemble_fiber_hamiltonian(&modes, &basis, 1.0, [0.0; 3], &budget).expect("h");
        group.bench_function(BenchmarkId::new("lanczos", &name), |b| {
            b.iter(|| pool.install(|| ground_state(&h, &LanczosOptions::default()).expect("ground state")))
        });
    }
    group.finish();
}

criterion_group!(benches, hessian_report, fiber_ground_state);
criterion_main!(benches);
