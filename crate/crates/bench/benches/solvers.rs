use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use choquet_core::choquet::{choquet_integral, quantile};
use choquet_core::data::{fit_distribution, Family};
use choquet_core::es::{choquet_es, es_dual, ru_minimize};
use choquet_core::fixtures::{random_capacity, random_rv, random_sup_probability, rng, sharing_fixture, student_t_sample};
use choquet_core::infconv::{brute_force_infconv, infconv_value, share_atomless, share_discrete};
use choquet_core::lp::{lp_solve, LpProblem, Relation, Sense};
use choquet_core::{AgentSpec, Capacity, EsMethod, FiniteSpace, ProbabilityVector, Side, SimpleRandomVariable};
use rand::Rng;

fn integrals(c: &mut Criterion) {
    let mut g = c.benchmark_group("choquet");
    for m in [4usize, 8, 12] {
        let mut r = rng(m as u64);
        let w = random_capacity(&mut r, m);
        let x = random_rv(&mut r, m, 9);
        g.bench_with_input(BenchmarkId::new("integral", m), &m, |b, _| b.iter(|| choquet_integral(black_box(&w), &x)));
        g.bench_with_input(BenchmarkId::new("quantile", m), &m, |b, _| {
            b.iter(|| quantile(black_box(&w), 0.1, Side::Left, &x))
        });
    }
    g.finish();
}

fn shortfall(c: &mut Criterion) {
    let mut g = c.benchmark_group("es");
    let mut r = rng(1);
    let w: Capacity = random_sup_probability(&mut r, 8, 3).into();
    let x = random_rv(&mut r, 8, 9);
    g.bench_function("quantile_integral", |b| b.iter(|| choquet_es(&w, 0.2, black_box(&x), EsMethod::QuantileIntegral)));
    g.bench_function("scaled_capacity", |b| b.iter(|| choquet_es(&w, 0.2, black_box(&x), EsMethod::ScaledCapacity)));
    g.bench_function("ru_minimize", |b| b.iter(|| ru_minimize(&w, 0.2, black_box(&x))));
    let p: Capacity = ProbabilityVector::uniform(8).into();
    g.bench_function("dual", |b| b.iter(|| es_dual(&p, 0.2, black_box(&x))));
    g.finish();
}

fn simplex(c: &mut Criterion) {
    let mut g = c.benchmark_group("lp");
    for n in [10usize, 40] {
        let mut r = rng(n as u64);
        let mut p = LpProblem::new(Sense::Max, (0..n).map(|_| r.random_range(0.0..1.0)).collect());
        for _ in 0..n {
            p.add((0..n).map(|_| r.random_range(0.1..2.0)).collect(), Relation::Le, r.random_range(1.0..5.0));
        }
        g.bench_with_input(BenchmarkId::new("packing", n), &n, |b, _| b.iter(|| lp_solve(black_box(&p))));
    }
    g.finish();
}

fn sharing(c: &mut Criterion) {
    let mut g = c.benchmark_group("sharing");
    let x = SimpleRandomVariable::new((1..=20).map(|j| j as f64 / 20.0).collect()).unwrap();
    let agents: Vec<AgentSpec> = [0.05, 0.1]
        .iter()
        .map(|&a| AgentSpec::var("agent", ProbabilityVector::uniform(20).into(), a).unwrap())
        .collect();
    let space = FiniteSpace::equiprobable(20).unwrap();
    g.bench_function("discrete_20", |b| b.iter(|| share_discrete(black_box(&agents), &x)));
    g.bench_function("atomless_20", |b| b.iter(|| share_atomless(black_box(&agents), &x, &space)));
    let f = sharing_fixture(3);
    let vs = f.binaries();
    g.bench_function("infconv_value", |b| b.iter(|| infconv_value(black_box(&vs), &f.x)));
    g.bench_function("brute_force", |b| b.iter(|| brute_force_infconv(black_box(&vs), &f.x)));
    g.finish();
}

fn fitting(c: &mut Criterion) {
    let xs = student_t_sample(5, 2_500, 5.0, 0.0, 0.01);
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    g.bench_function("student_t_2500", |b| b.iter(|| fit_distribution(black_box(&xs), Family::StudentT)));
    g.finish();
}

criterion_group!(benches, integrals, shortfall, simplex, sharing, fitting);
criterion_main!(benches);
