use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use uwbchan::estimation::fit_sv_params;
use uwbchan::metrics::{average_pdp, cfr, delay_stats};
use uwbchan_bench::{ensemble, one_cir, run_clean, scan_fixture};

fn bench_generation(c: &mut Criterion) {
    c.bench_function("generate_cir_foliage", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            black_box(one_cir(seed))
        })
    });
    c.bench_function("generate_ensemble_100", |b| {
        b.iter(|| black_box(ensemble(100, 42)))
    });
}

fn bench_clean(c: &mut Criterion) {
    let (scan, template) = scan_fixture();
    c.bench_function("clean_deconvolve_5_taps", |b| {
        b.iter(|| black_box(run_clean(&scan, &template)))
    });
}

fn bench_metrics(c: &mut Criterion) {
    let cirs = ensemble(100, 7);
    c.bench_function("average_pdp_100", |b| {
        b.iter(|| black_box(average_pdp(&cirs).unwrap()))
    });
    let pdp = average_pdp(&cirs).unwrap();
    c.bench_function("delay_stats", |b| {
        b.iter(|| black_box(delay_stats(&pdp).unwrap()))
    });
    let cir = one_cir(3);
    c.bench_function("cfr_8192", |b| {
        b.iter(|| black_box(cfr(&cir, 8192).unwrap()))
    });
}

fn bench_fitting(c: &mut Criterion) {
    let cirs = ensemble(200, 11);
    c.bench_function("fit_sv_params_200", |b| {
        b.iter(|| black_box(fit_sv_params(&cirs).unwrap()))
    });
}

criterion_group!(benches, bench_generation, bench_clean, bench_metrics, bench_fitting);
criterion_main!(benches);
