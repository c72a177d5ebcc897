use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ezop::cech::{examples, CechAlgebra};
use ezop::conformal::{borcherds_sweep, check_conformal_jacobi, ConformalAlgebra, VertexAlgebraData};
use ezop::cosimp::Truncation;
use ezop::operad::{aw_cocycle, check_concentration, jacobiator, lie_dim, z_operad_complex, JacobiForm};
use ezop::q;
use ezop::transfer::{level_basis, Probe, TransferredStructure};
use std::hint::black_box;

fn linear_algebra(c: &mut Criterion) {
    let mut g = c.benchmark_group("cohomology");
    for d in [3usize, 4] {
        let trunc = Truncation::for_window(d, 2 - d as i64).unwrap();
        let z = z_operad_complex(2, trunc).unwrap();
        g.bench_with_input(BenchmarkId::new("z2_ranks", d), &z, |b, z| b.iter(|| z.cohomology_at(black_box(0))));
    }
    g.sample_size(10);
    g.bench_function("concentration_n2_d4", |b| b.iter(|| check_concentration(2, 4, (-2, 0)).unwrap()));
    g.finish();
}

fn operads(c: &mut Criterion) {
    let mut g = c.benchmark_group("operad");
    g.bench_function("lie_dim_5", |b| b.iter(|| lie_dim(black_box(5)).unwrap()));
    for levels in [2usize, 3, 4] {
        g.bench_with_input(BenchmarkId::new("cocycle", levels), &levels, |b, &l| b.iter(|| aw_cocycle(l)));
    }
    let c3 = aw_cocycle(3);
    g.bench_function("jacobiator_3", |b| b.iter(|| jacobiator(&c3, JacobiForm::Cyclic).unwrap()));
    g.sample_size(10);
    g.bench_function("transfer_structure_3", |b| b.iter(|| TransferredStructure::new(3, JacobiForm::Cyclic).unwrap()));
    g.finish();
}

fn transferred_bracket(c: &mut Criterion) {
    let b = CechAlgebra::new(examples::sl2_three_opens(), 3).unwrap();
    let ts = TransferredStructure::new(3, JacobiForm::Cyclic).unwrap();
    let x = level_basis(&b, 1);
    let mut g = c.benchmark_group("transfer");
    g.bench_function("bracket_level1_pairs", |bch| {
        bch.iter(|| {
            for u in x.iter().take(6) {
                for v in x.iter().take(6) {
                    black_box(ts.bracket(&b, u, v, &Probe::Plain).unwrap());
                }
            }
        })
    });
    g.finish();
}

fn conformal(c: &mut Criterion) {
    let mut g = c.benchmark_group("conformal");
    let vir = ConformalAlgebra::virasoro(q(1));
    g.bench_function("virasoro_jacobi_4_4", |b| b.iter(|| check_conformal_jacobi(&vir, 4, 4)));
    let w = VertexAlgebraData::truncated_polynomials(3);
    g.sample_size(10);
    g.bench_function("borcherds_deg3_range2", |b| b.iter(|| borcherds_sweep(&w, (2, 2, 2)).unwrap()));
    g.finish();
}

criterion_group!(benches, linear_algebra, operads, transferred_bracket, conformal);
criterion_main!(benches);
