//! Throughput of the hot kernels: the special-frame reduction and the
//! inequality suite on random tensors, the pinched sampler, one explicit
//! step of the finite-difference flow, and a scalar-sweep evaluation.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hypermcf_core::curvature::inequalities::splitting_suite;
use hypermcf_core::curvature::{sampler, special_frame};
use hypermcf_core::flow::axisym::{make_initial_profile, ProfileKind};
use hypermcf_core::pinching::PinchingProfile;
use hypermcf_core::rng;
use std::hint::black_box;

fn bench_special_frame(c: &mut Criterion) {
    let mut r = rng::seeded(1);
    let tensors: Vec<_> = (0..256).map(|_| sampler::random_sff(8, 3, &mut r)).collect();
    let mut i = 0;
    c.bench_function("special_frame n=8 q=3", |b| {
        b.iter(|| {
            i = (i + 1) % tensors.len();
            black_box(special_frame(&tensors[i]).unwrap())
        })
    });
}

fn bench_splitting_suite(c: &mut Criterion) {
    let mut r = rng::seeded(2);
    let tensors: Vec<_> = (0..256).map(|_| sampler::random_sff(6, 3, &mut r)).collect();
    let mut i = 0;
    c.bench_function("splitting_suite n=6 q=3", |b| {
        b.iter(|| {
            i = (i + 1) % tensors.len();
            black_box(splitting_suite(&tensors[i]).unwrap())
        })
    });
}

fn bench_pinched_sampler(c: &mut Criterion) {
    let mut r = rng::seeded(3);
    c.bench_function("random_pinched n=6 q=3", |b| {
        b.iter(|| black_box(sampler::random_pinched(6, 3, -1.0, 0.005, &mut r).unwrap()))
    });
}

fn bench_axisym_step(c: &mut Criterion) {
    let profile =
        make_initial_profile(ProfileKind::Ellipsoid { a: 1.0, b: 1.1 }, 6, -1.0, 400, true)
            .unwrap();
    let dt = 1e-9;
    c.bench_function("axisym flow_step 400 nodes", |b| {
        b.iter_batched(
            || profile.clone(),
            |p| black_box(p.flow_step(dt).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

fn bench_alpha_ring_property_margins(c: &mut Criterion) {
    let p = PinchingProfile::new(6, -1.0).unwrap();
    let mut y = 36.1;
    c.bench_function("alpha_ring_property_margins", |b| {
        b.iter(|| {
            y = if y > 1e8 { 36.1 } else { y * 1.0001 };
            black_box(p.alpha_ring_property_margins(y).unwrap())
        })
    });
}

criterion_group!(
    kernels,
    bench_special_frame,
    bench_splitting_suite,
    bench_pinched_sampler,
    bench_axisym_step,
    bench_alpha_ring_property_margins
);
criterion_main!(kernels);
