use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use emsr_bench::{desk_code, desk_codeword, random_message};
use emsr_core::emsr::subset_rank;
use emsr_core::{execute_repair, mds_check, plan_repair, HelperChoice, HelperPolicy, MdsMode};

fn coding(c: &mut Criterion) {
    let code = desk_code();
    let msg = random_message(&code, 1);
    let word = desk_codeword(&code);
    c.bench_function("encode/desk", |b| {
        b.iter(|| code.encode(black_box(&msg)).unwrap())
    });
    let erased = BTreeSet::from([0, 11, 24]);
    c.bench_function("decode/desk-3-erasures", |b| {
        b.iter(|| code.decode_erasures(black_box(&word), &erased).unwrap())
    });
}

fn repair(c: &mut Criterion) {
    let code = desk_code();
    let word = desk_codeword(&code);
    let plan = plan_repair(&code, 7, &HelperChoice::Policy(HelperPolicy::Ascending)).unwrap();
    c.bench_function("repair/desk", |b| {
        b.iter(|| execute_repair(&code, black_box(&word.blocks), &plan).unwrap())
    });
}

fn verification(c: &mut Criterion) {
    let code = desk_code();
    c.bench_function("rank/U_E-96x96", |b| {
        b.iter(|| subset_rank(&code, black_box(&[0, 9, 18]), 0).unwrap())
    });
    let mut group = c.benchmark_group("mds");
    group.sample_size(10);
    group.bench_function("sample-100", |b| {
        b.iter(|| {
            mds_check(
                &code,
                MdsMode::Sample {
                    count: 100,
                    seed: 0,
                },
            )
        })
    });
    group.finish();
}

criterion_group!(benches, coding, repair, verification);
criterion_main!(benches);
