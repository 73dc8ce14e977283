use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use impsel::audit::{check_impartiality, AuditConfig, AuditMode};
use impsel::partition::{build_certificate, fubini};
use impsel::twin_threshold::plan_thresholds_k1;
use impsel::{run_twin_threshold, GraphClassSpec, MechanismId};

fn twin_threshold(c: &mut Criterion) {
    let mut group = c.benchmark_group("twin_threshold");
    for n in [16usize, 32, 64] {
        let spec = GraphClassSpec::new(n, Some(1), false).unwrap();
        let graphs: Vec<_> = (0..16).map(|s| spec.sample(s).unwrap()).collect();
        let pair = plan_thresholds_k1(n).unwrap().thresholds;
        group.bench_with_input(BenchmarkId::from_parameter(n), &graphs, |b, graphs| {
            b.iter(|| {
                for g in graphs {
                    black_box(run_twin_threshold(g, pair).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn exhaustive_audit(c: &mut Criterion) {
    let spec = GraphClassSpec::new(5, Some(1), false).unwrap();
    let m: MechanismId = "twin:4,1".parse().unwrap();
    let cfg = AuditConfig::default();
    c.bench_function("audit_g5_k1", |b| {
        b.iter(|| black_box(check_impartiality(&m, &spec, AuditMode::Exhaustive, &cfg).unwrap()))
    });
}

fn partitions(c: &mut Criterion) {
    c.bench_function("certificate_8", |b| b.iter(|| black_box(build_certificate(8, 12).unwrap())));
    c.bench_function("fubini_20", |b| b.iter(|| black_box(fubini(20, 24).unwrap())));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = twin_threshold, exhaustive_audit, partitions
}
criterion_main!(benches);
