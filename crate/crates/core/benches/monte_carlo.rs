use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hybrid_est::channel::exp_covariance;
use hybrid_est::combiner::design_sequential;
use hybrid_est::estimator::{empirical_nmse, McOptions, TrainingScenario};
use hybrid_est::exec::Execution;

fn trials(c: &mut Criterion) {
    let (m, l, t) = (64, 8, 8);
    let cov = exp_covariance(m, 0.8).unwrap();
    let scenario = TrainingScenario::from_snr_db(m, l, t, 0.0).unwrap();
    let set = design_sequential(&cov, l, t, scenario.rho).unwrap();

    let mut group = c.benchmark_group("empirical_nmse_m64_l8_t8");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let opts = McOptions {
            exec,
            ..McOptions::new(2000, 7)
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &opts,
            |b, opts| b.iter(|| empirical_nmse(&set, &cov, &scenario, opts).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
