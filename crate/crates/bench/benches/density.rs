use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use localtime::density::density_quadrature_refined;
use localtime::{density, density_tridiagonal, Generator, SimplexPoint};
use std::hint::black_box;

fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("series");
    for k in 1..=4usize {
        let g = Generator::srw_path(-1, k as i64);
        let range: Vec<usize> = (1..=k).collect();
        let l = SimplexPoint::new(&range, &vec![2.0 / k as f64; k]).unwrap();
        group.bench_with_input(BenchmarkId::new("srw_interval", k), &k, |bench, &k| {
            bench.iter(|| density(&g, 1, k, black_box(&l), 1e-13).unwrap())
        });
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let g = Generator::srw_path(-1, 3);
    let l = SimplexPoint::new(&[1, 2, 3], &[0.6, 0.9, 0.5]).unwrap();
    c.bench_function("quadrature/srw_interval/3", |bench| {
        bench.iter(|| density_quadrature_refined(&g, 1, 3, black_box(&l), 1e-12, 256).unwrap())
    });
    c.bench_function("tridiagonal/srw_interval/3", |bench| {
        bench.iter(|| density_tridiagonal(&g, 1, 3, black_box(&l)).unwrap())
    });
}

criterion_group!(benches, series, oracles);
criterion_main!(benches);
