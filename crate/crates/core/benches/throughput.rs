use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qcheck::generators::queue::gen_queue_corpus;
use qcheck::membership::check_membership_batch;
use qcheck::{check_correctness, CorrectnessOptions, MembershipOptions, Mode};

fn values(n: usize) -> Vec<String> {
    ["a", "b", "c"][..n].iter().map(|v| v.to_string()).collect()
}

fn correctness(c: &mut Criterion) {
    let corpus = gen_queue_corpus(2, 2, &values(2)).unwrap();
    let mut group = c.benchmark_group("correctness");
    for parallel in [false, true] {
        let mut opts = CorrectnessOptions::new(8);
        opts.parallel = parallel;
        for mode in [Mode::Qc, Mode::Qsc] {
            let id = BenchmarkId::new(mode.to_string(), if parallel { "parallel" } else { "sequential" });
            group.bench_with_input(id, &opts, |b, opts| {
                b.iter(|| check_correctness(&corpus.specification, &corpus.implementation, mode, opts).unwrap())
            });
        }
    }
    group.finish();
}

fn membership(c: &mut Criterion) {
    let corpus = gen_queue_corpus(3, 3, &values(3)).unwrap();
    let opts = MembershipOptions::default();
    let mut group = c.benchmark_group("membership_batch");
    for parallel in [false, true] {
        for mode in [Mode::Qc, Mode::Qsc] {
            let id = BenchmarkId::new(mode.to_string(), if parallel { "parallel" } else { "sequential" });
            group.bench_function(id, |b| {
                b.iter(|| check_membership_batch(&corpus.specification, &corpus.histories, mode, &opts, parallel))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, correctness, membership);
criterion_main!(benches);
