use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dilation_frames::atoms::build_atom;
use dilation_frames::bump::{build_bump, BumpKind};
use dilation_frames::frames::{FrameSystem, TestSpace};
use dilation_frames::groups::RotationList;
use dilation_frames::sampling::{build_rotation_scale_grid, TranslationRange};
use dilation_frames::{DilationGroupSpec, Execution, GridSpec, OrbitGeometry};
use num_complex::Complex64;

fn system(exec: Execution) -> FrameSystem {
    let spec = DilationGroupSpec::similitude(1);
    let geom = OrbitGeometry::new(spec).unwrap();
    let rho = build_bump(BumpKind::default(), 1.0, &GridSpec::centered(1, 256, 1.0 / 32.0).unwrap()).unwrap();
    let psi = build_atom(&rho, &geom, 4).unwrap();
    let set = build_rotation_scale_grid(
        spec,
        0.2,
        0.2,
        &RotationList::signs(),
        -10..=20,
        &TranslationRange::Window { length: 64.0 },
    )
    .unwrap();
    let grid = GridSpec::centered(1, 1024, 1.0 / 16.0).unwrap();
    let space = TestSpace::with_filter(grid, |xi| (0.5..=4.0).contains(&xi[0].abs())).unwrap();
    FrameSystem::from_sampled(&psi, &set, space, exec).unwrap()
}

fn frame_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("frame_operator");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let sys = system(exec);
        let u: Vec<Complex64> = (0..sys.space().len())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.37).cos()))
            .collect();
        group.bench_with_input(BenchmarkId::new("apply", name), &u, |b, u| b.iter(|| sys.apply(u).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, frame_operator);
criterion_main!(benches);
