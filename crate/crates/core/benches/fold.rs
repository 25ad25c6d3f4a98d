use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
#[cfg(feature = "parallel")]
use distinct_powers::threshold::fold_power_par;
use distinct_powers::threshold::fold_power_seq;

/// A bit array with all cubes below `start^3` already folded in, so the
/// benchmarked fold runs against a realistically dense array.
fn warm_words(n: u32, cap_bits: u64, start: u64) -> Vec<u64> {
    let mut words = vec![0u64; (cap_bits as usize).div_ceil(64)];
    words[0] = 1; // empty sum
    for m in 1..start {
        fold_power_seq(&mut words, m.pow(n));
    }
    words
}

fn bench_fold(c: &mut Criterion) {
    let n = 3u32;
    let cap_bits: u64 = 1 << 24;
    let start = 128u64; // next base to fold; offset 128^3 = 2_097_152 bits
    let base = warm_words(n, cap_bits, start);
    let offset = start.pow(n);

    let mut group = c.benchmark_group("fold_power");
    group.bench_with_input(BenchmarkId::new("seq", cap_bits), &offset, |b, &o| {
        b.iter_batched_ref(
            || base.clone(),
            |words| fold_power_seq(words, o),
            BatchSize::LargeInput,
        )
    });
    #[cfg(feature = "parallel")]
    group.bench_with_input(BenchmarkId::new("par", cap_bits), &offset, |b, &o| {
        b.iter_batched_ref(
            || base.clone(),
            |words| fold_power_par(words, o),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_fold);
criterion_main!(benches);
