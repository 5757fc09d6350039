use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpc_bench::channels;
use qpc_core::measures::{
    alpha_cre_with, alpha_pre_with, beta_pre_with, f_threshold_with, MeasureOptions,
};
use qpc_core::qpt::{qpt_reconstruct_2q, QptInputSet};
use qpc_core::sdp::SolverOptions;

fn preservation(c: &mut Criterion) {
    let o = SolverOptions::default();
    let mut g = c.benchmark_group("preservation");
    g.sample_size(10);
    for (name, chi) in channels() {
        g.bench_with_input(BenchmarkId::new("alpha_pre", name), &chi, |b, chi| {
            b.iter(|| alpha_pre_with(chi, &o).unwrap().value)
        });
        g.bench_with_input(BenchmarkId::new("beta_pre", name), &chi, |b, chi| {
            b.iter(|| beta_pre_with(chi, &o).unwrap().value)
        });
        g.bench_with_input(BenchmarkId::new("f_threshold", name), &chi, |b, chi| {
            b.iter(|| f_threshold_with(chi, &o).unwrap().value)
        });
    }
    g.finish();
}

fn creation(c: &mut Criterion) {
    let opts = MeasureOptions {
        verify_samples: 0,
        ..MeasureOptions::default()
    };
    let mut g = c.benchmark_group("creation");
    g.sample_size(10);
    for (name, chi) in channels() {
        g.bench_with_input(BenchmarkId::new("alpha_cre", name), &chi, |b, chi| {
            b.iter(|| alpha_cre_with(chi, &opts).unwrap().value)
        });
    }
    g.finish();
}

fn tomography(c: &mut Criterion) {
    let set = QptInputSet::two_qubit();
    let (_, chi) = &channels()[0];
    let outputs = set.outputs(chi).unwrap();
    c.bench_function("qpt_reconstruct_2q", |b| {
        b.iter(|| qpt_reconstruct_2q(&outputs).unwrap())
    });
}

criterion_group!(benches, preservation, creation, tomography);
criterion_main!(benches);
