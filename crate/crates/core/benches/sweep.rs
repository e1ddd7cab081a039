use criterion::{criterion_group, criterion_main, Criterion};

use cfp_core::simulator::SchedulerPolicy;
use cfp_core::sweep::{run_all, run_all_sequential, ExperimentSpec, InitialClass};
use cfp_core::ExactAngle;

fn grid() -> Vec<ExperimentSpec> {
    let mut v = Vec::new();
    for n in [10usize, 14, 20] {
        for seed in 0..8 {
            v.push(ExperimentSpec::new(
                n,
                InitialClass::StrictBiangular {
                    alpha: ExactAngle::from_turns(3, 10 * n as i64),
                },
                SchedulerPolicy::SeededRandomFair { seed, k: 3 },
                seed,
                2000,
            ));
        }
    }
    v
}

fn bench_sweep(c: &mut Criterion) {
    let specs = grid();
    let mut g = c.benchmark_group("pipeline-sweep");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| run_all_sequential(&specs)));
    g.bench_function("parallel", |b| b.iter(|| run_all(&specs)));
    g.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
