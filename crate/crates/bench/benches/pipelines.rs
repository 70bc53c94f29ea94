//! Benchmarks for the three hot paths: inequality-system generation plus
//! Fourier-Motzkin projection, entropy evaluation over an induced joint, and
//! the diamond-network relay rate.

use admnet_core::catalog::{build, mac_binary_adder, Instance};
use admnet_core::dist::EntropyEvaluator;
use admnet_core::region::{fourier_motzkin, generate_system, DEFAULT_SUBSET_CAP};
use criterion::{criterion_group, criterion_main, Criterion};
use std::collections::BTreeSet;
use std::hint::black_box;

fn bench_generate_and_project(c: &mut Criterion) {
    let ci = mac_binary_adder().unwrap();
    c.bench_function("generate_system/mac", |b| {
        b.iter(|| {
            generate_system(
                black_box(&ci.omega),
                black_box(&ci.admn),
                ci.mode,
                DEFAULT_SUBSET_CAP,
            )
            .unwrap()
        })
    });
    let generated = generate_system(&ci.omega, &ci.admn, ci.mode, DEFAULT_SUBSET_CAP).unwrap();
    c.bench_function("fourier_motzkin/mac", |b| {
        b.iter(|| fourier_motzkin(black_box(&generated.system), &ci.eliminate).unwrap())
    });
}

fn bench_entropy(c: &mut Criterion) {
    let ci = mac_binary_adder().unwrap();
    let generated = generate_system(&ci.omega, &ci.admn, ci.mode, DEFAULT_SUBSET_CAP).unwrap();
    let eval = EntropyEvaluator::new(&generated.joint);
    let all: BTreeSet<String> = generated.joint.all_ids();
    c.bench_function("entropy/mac-joint", |b| {
        b.iter(|| eval.entropy(black_box(&all)).unwrap())
    });
}

fn bench_diamond(c: &mut Criterion) {
    let Instance::Gdcaf(spec) = build("diamond-gdcaf").unwrap() else {
        panic!("diamond entry is a relay instance");
    };
    c.bench_function("gdcaf_rate/diamond", |b| {
        b.iter(|| black_box(&spec).rate().unwrap())
    });
}

criterion_group!(
    benches,
    bench_generate_and_project,
    bench_entropy,
    bench_diamond
);
criterion_main!(benches);
