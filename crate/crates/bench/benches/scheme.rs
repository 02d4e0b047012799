//! Micro-benchmarks of the per-step building blocks: stiffness assembly,
//! residual and Jacobian evaluation, the condensed linear solve, and one
//! full Newton step.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use vagflow_bench::Setup;
use vagflow_core::assembly::{assemble_stiffness, DofVector, JacobianBlocks, NonlinearSystem};
use vagflow_core::mesh::build_submesh;
use vagflow_core::physics::TensorField;
use vagflow_core::solver::{newton_solve, NewtonConfig, NewtonWorkspace, SchurSolver};

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for n in [8usize, 16, 32] {
        let setup = Setup::fokker_planck(n);
        let system = setup.system();
        let sub = build_submesh(&setup.mesh).unwrap();
        let tensor = TensorField::diagonal(1.0, 10.0).unwrap();
        let prev = setup.state.clone();
        let mut residual = DofVector::zeros(&setup.mesh);
        let mut blocks = JacobianBlocks::new(&setup.mesh);

        group.bench_with_input(BenchmarkId::new("stiffness", n), &n, |b, _| {
            b.iter(|| {
                black_box(assemble_stiffness(&setup.mesh, &sub, &tensor).unwrap());
            })
        });
        group.bench_with_input(BenchmarkId::new("residual", n), &n, |b, _| {
            b.iter(|| {
                system
                    .residual(&setup.state, &prev, 1e-3, 0.0, None, &mut residual)
                    .unwrap();
                black_box(residual.inf_norm());
            })
        });
        group.bench_with_input(BenchmarkId::new("jacobian", n), &n, |b, _| {
            b.iter(|| {
                system
                    .assemble(&setup.state, &prev, 1e-3, 0.0, None, &mut blocks)
                    .unwrap();
                black_box(blocks.d[0]);
            })
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for n in [8usize, 16, 32] {
        let setup = Setup::fokker_planck(n);
        let system = setup.system();
        let prev = setup.state.clone();
        let mut blocks = JacobianBlocks::new(&setup.mesh);
        system.assemble(&setup.state, &prev, 1e-3, 0.0, None, &mut blocks).unwrap();

        group.bench_with_input(BenchmarkId::new("schur", n), &n, |b, _| {
            let mut solver = SchurSolver::new(&setup.mesh);
            b.iter(|| {
                black_box(solver.solve(&setup.mesh, &blocks).unwrap());
            })
        });
        group.bench_with_input(BenchmarkId::new("newton_step", n), &n, |b, _| {
            let mut ws = NewtonWorkspace::new(&setup.mesh);
            let cfg = NewtonConfig::default();
            b.iter(|| {
                black_box(newton_solve(&system, &prev, 1e-3, 1e-3, &cfg, &mut ws).unwrap());
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_assembly, bench_solve);
criterion_main!(benches);
