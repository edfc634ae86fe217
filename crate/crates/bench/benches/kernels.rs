use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use switchseq::complexity::ScalingKernel;
use switchseq::fisher::{FisherCost, FisherCostConfig};
use switchseq::fourier::{fourier_step, FourierCost};
use switchseq::{ArrayModel, FourierStepConfig, Polarization, SwitchingSequence};

fn ambiguity(c: &mut Criterion) {
    let mut group = c.benchmark_group("ambiguity");
    for pairs in [64, 256, 1024] {
        for kernel in [ScalingKernel::AmbiguityGeneral, ScalingKernel::AmbiguityHighXpr] {
            let mut f = kernel.prepare(pairs).expect("even pair count");
            group.bench_with_input(BenchmarkId::new(kernel.label(), pairs), &pairs, |b, _| b.iter(|| black_box(f())));
        }
    }
    group.finish();
}

fn fourier(c: &mut Criterion) {
    let mut group = c.benchmark_group("fourier_cost");
    for len in [64, 1024, 16384] {
        let plan = FourierCost::new(len);
        let seq = SwitchingSequence::trivial(len, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| black_box(plan.evaluate(black_box(seq.eta()), 1.0)))
        });
    }
    group.finish();
    c.bench_function("fourier_step/64", |b| b.iter(|| fourier_step(&FourierStepConfig::new(64, 1.0, 3)).unwrap()));
}

fn fisher(c: &mut Criterion) {
    let mut group = c.benchmark_group("fisher_cost_ula");
    for m in [16, 64, 256] {
        let tx = ArrayModel::isotropic_ula(m, 0.5, Polarization::V).unwrap();
        let rx = ArrayModel::single_isotropic(Polarization::V);
        let cost =
            FisherCost::new(&tx, &rx, (Polarization::V, Polarization::V), &FisherCostConfig::tx_azimuth()).unwrap();
        let seq = SwitchingSequence::trivial(m, 1e-5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| black_box(cost.evaluate(black_box(seq.eta())).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, ambiguity, fourier, fisher);
criterion_main!(benches);
