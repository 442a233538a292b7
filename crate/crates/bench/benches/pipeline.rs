//! Benchmarks for the hot paths: the constants/domain/bounds pipeline,
//! the periodic-orbit solver, and raw billiard-map throughput.

use billiard_core::constants::{build_domain, compute_constants, KappaReading, Mode};
use billiard_core::dimension::{dimension_bounds, g_extrema, BoundVariant};
use billiard_core::dynamics::{billiard_map, simulate, PhasePoint};
use billiard_core::orbits::{find_periodic_orbit, SymbolSequence};
use billiard_core::{Billiard, Obstacle, Tolerances};
use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::{Vector2, Vector3};
use std::hint::black_box;

fn three_disks() -> (Billiard<2>, Tolerances) {
    let t = Tolerances::default();
    let b = Billiard::new(
        vec![
            Obstacle::<2>::ball(Vector2::new(-4.0, 0.0), 3.0).unwrap(),
            Obstacle::<2>::ball(Vector2::new(4.0, 0.0), 2.0).unwrap(),
            Obstacle::<2>::ball(Vector2::new(0.0, 10.0), 1.0).unwrap(),
        ],
        &t,
    )
    .unwrap();
    (b, t)
}

fn three_ellipsoids() -> (Billiard<3>, Tolerances) {
    let t = Tolerances::default();
    let id = nalgebra::Matrix3::identity();
    let b = Billiard::new(
        vec![
            Obstacle::<3>::ellipsoid(Vector3::new(-5.0, 0.0, 0.0), [2.0, 1.5, 1.0], id).unwrap(),
            Obstacle::<3>::ball(Vector3::new(5.0, 0.0, 0.0), 1.5).unwrap(),
            Obstacle::<3>::ball(Vector3::new(0.0, 8.0, 5.0), 1.0).unwrap(),
        ],
        &t,
    )
    .unwrap();
    (b, t)
}

fn bench_bounds_pipeline(c: &mut Criterion) {
    let (b, t) = three_disks();
    for (label, mode) in [("natural", Mode::Natural), ("adjusted", Mode::Adjusted)] {
        c.bench_function(&format!("bounds_pipeline_2d_{label}"), |bench| {
            bench.iter(|| {
                let r = compute_constants(&b, mode, KappaReading::Departure, &t).unwrap();
                let gx = g_extrema(&build_domain(&r));
                black_box(dimension_bounds(3, &gx, &r, 1e6, BoundVariant::TwoSidedEq1))
            })
        });
    }
    let (b3, t3) = three_ellipsoids();
    c.bench_function("bounds_pipeline_3d_adjusted", |bench| {
        bench.iter(|| {
            let r = compute_constants(&b3, Mode::Adjusted, KappaReading::Departure, &t3).unwrap();
            let gx = g_extrema(&build_domain(&r));
            black_box(dimension_bounds(3, &gx, &r, 1e6, BoundVariant::TwoSidedEq1))
        })
    });
}

fn bench_orbit_solver(c: &mut Criterion) {
    let (b, t) = three_disks();
    let short = SymbolSequence::periodic(vec![0, 1, 2], 3).unwrap();
    let long = SymbolSequence::periodic(vec![0, 1, 0, 2, 1, 2, 0, 1], 3).unwrap();
    c.bench_function("orbit_solver_period_3", |bench| {
        bench.iter(|| black_box(find_periodic_orbit(&b, &short, &t).unwrap()))
    });
    c.bench_function("orbit_solver_period_8", |bench| {
        bench.iter(|| black_box(find_periodic_orbit(&b, &long, &t).unwrap()))
    });
}

fn bench_billiard_map(c: &mut Criterion) {
    let (b, t) = three_disks();
    let x0 = PhasePoint::new(Vector2::new(-0.9, 0.0), Vector2::new(1.0, 0.001));
    c.bench_function("billiard_map_single_step", |bench| {
        bench.iter(|| black_box(billiard_map(&x0, &b, &t).unwrap()))
    });
    c.bench_function("simulate_8_reflections_with_fronts", |bench| {
        bench.iter(|| black_box(simulate(&x0, &b, 8, None, &t).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_bounds_pipeline,
    bench_orbit_solver,
    bench_billiard_map
);
criterion_main!(benches);
