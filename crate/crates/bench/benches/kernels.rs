use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use folia_core::cech::{canonical_complex, cohomology, UnitaryLocalSystem};
use folia_core::ueda::{construct_formal_foliation, genus_two_seed, torus_seed};
use folia_core::{Cyclotomic, Field, GermDiffeo, PowerSeries};
use std::hint::black_box;

type Q = Cyclotomic;

fn germ(n: usize, shift: i64) -> GermDiffeo<Q> {
    let coeffs: Vec<Q> = (0..=n).map(|j| if j == 0 { Q::zero() } else { Q::from_i64((j as i64 + shift) % 5 + 1) }).collect();
    GermDiffeo::new(PowerSeries::new(coeffs)).unwrap()
}

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("germ");
    for n in [8usize, 16, 32] {
        let f = germ(n, 0);
        let h = germ(n, 2);
        g.bench_with_input(BenchmarkId::new("compose", n), &n, |b, _| b.iter(|| black_box(&f).compose(black_box(&h))));
        g.bench_with_input(BenchmarkId::new("inverse", n), &n, |b, _| b.iter(|| black_box(&f).inverse()));
    }
    g.finish();
}

fn cech(c: &mut Criterion) {
    let mut g = c.benchmark_group("cohomology");
    for genus in [1u32, 2, 3] {
        let cx = canonical_complex(genus).unwrap();
        let t = UnitaryLocalSystem::<Q>::trivial(&cx);
        g.bench_with_input(BenchmarkId::new("trivial", genus), &genus, |b, _| b.iter(|| cohomology(&cx, &t).unwrap()));
    }
    g.finish();
}

fn construct(c: &mut Criterion) {
    let mut g = c.benchmark_group("construct");
    g.sample_size(10);
    let torus = torus_seed::<Q>(1, 10).unwrap();
    g.bench_function("torus_10", |b| b.iter(|| construct_formal_foliation(&torus, Some(1), 10).unwrap()));
    let g2 = genus_two_seed::<Q>(10).unwrap();
    g.bench_function("genus2_10", |b| b.iter(|| construct_formal_foliation(&g2, Some(2), 10).unwrap()));
    g.finish();
}

criterion_group!(benches, series, cech, construct);
criterion_main!(benches);
