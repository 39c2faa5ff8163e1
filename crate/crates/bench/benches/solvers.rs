use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use saddlegap_core::conformal::phi_omega;
use saddlegap_core::extremal::{minimax_p, minimax_q, BoundaryMesh, DEFAULT_TOL};
use saddlegap_core::problems::random_instance;
use saddlegap_core::solvers::{run_gda, slingshot_scsc_schedule};
use saddlegap_core::SpectralSetDescriptor;

fn extremal(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimax");
    group.sample_size(10);
    let halfdisc = SpectralSetDescriptor::half_disc(0.1, 1.0).unwrap();
    let cc = SpectralSetDescriptor::half_disc(0.0, 1.0).unwrap();
    for t in [4usize, 8, 16] {
        let mesh = BoundaryMesh::build(&halfdisc, t, 0.05).unwrap();
        group.bench_with_input(BenchmarkId::new("p_halfdisc", t), &mesh, |b, m| {
            b.iter(|| minimax_p(m, t, DEFAULT_TOL).unwrap())
        });
        let mesh = BoundaryMesh::build(&cc, t + 1, 0.05).unwrap();
        group.bench_with_input(BenchmarkId::new("q_halfdisc", t), &mesh, |b, m| {
            b.iter(|| minimax_q(m, t, DEFAULT_TOL).unwrap())
        });
    }
    group.finish();
}

fn slingshot(c: &mut Criterion) {
    let problem = random_instance(0.1, 1.0, 20, 20, 1).unwrap();
    let z0 = nalgebra::DVector::from_element(40, 1.0);
    let schedule = slingshot_scsc_schedule(64, problem.mu(), problem.l()).unwrap();
    c.bench_function("slingshot_scsc_T64_d40", |b| b.iter(|| run_gda(&problem, &schedule, &z0).unwrap()));
}

fn conformal(c: &mut Criterion) {
    let points: Vec<Complex64> = (0..1000).map(|k| Complex64::new(-2.0 + k as f64 * 1e-3, 0.3)).collect();
    c.bench_function("phi_omega_1000", |b| {
        b.iter(|| points.iter().map(|&z| phi_omega(z).unwrap().norm()).sum::<f64>())
    });
}

criterion_group!(benches, extremal, slingshot, conformal);
criterion_main!(benches);
