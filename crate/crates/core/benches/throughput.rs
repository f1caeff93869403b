//! Throughput of the data-parallel paths. Bench ids are the same with and
//! without the `parallel` feature, so one build can serve as the baseline of
//! the other:
//!
//! ```text
//! cargo bench -p qc-polar --bench throughput -- --save-baseline parallel
//! cargo bench -p qc-polar --bench throughput --no-default-features -- --baseline parallel
//! ```

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qc_polar::code_model::{mask_from_str, CodeSpec};
use qc_polar::construction::{greedy_prune, CycleProxy};
use qc_polar::decoders::DecoderKind;
use qc_polar::encoder::encode_qc;
use qc_polar::par;
use qc_polar::protograph::{analyze, random_shifts};
use qc_polar::simulator::{run_point, SimConfig};

const MASK: &str = "1111111010000000";

fn spec(q: usize) -> CodeSpec {
    CodeSpec::new(4, q, mask_from_str(MASK), random_shifts(4, q, 1)).unwrap()
}

fn mode() -> &'static str {
    if par::is_parallel() {
        "rayon"
    } else {
        "sequential"
    }
}

fn simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_point");
    g.sample_size(10);
    for q in [16usize, 64] {
        let mut cfg = SimConfig::new(spec(q), DecoderKind::bp(16));
        cfg.max_frames = 128;
        cfg.max_frame_errors = u64::MAX;
        g.throughput(Throughput::Elements(cfg.max_frames));
        g.bench_with_input(BenchmarkId::new("bp16", q), &cfg, |b, cfg| {
            b.iter(|| run_point(black_box(cfg), 2.0).unwrap())
        });
    }
    g.finish();
}

fn prune(c: &mut Criterion) {
    let mut g = c.benchmark_group("greedy_prune");
    g.sample_size(10);
    let s = spec(256);
    g.bench_function("proxy_c6_25pct", |b| {
        b.iter(|| greedy_prune(black_box(&s), 0.25, &CycleProxy { c_max: 6 }).unwrap())
    });
    g.finish();
}

fn cycles(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyze");
    let s = spec(256);
    for c_max in [6usize, 8] {
        g.bench_with_input(BenchmarkId::new("n4", c_max), &c_max, |b, &c_max| {
            b.iter(|| analyze(black_box(&s), c_max).unwrap())
        });
    }
    g.finish();
}

fn encode(c: &mut Criterion) {
    let mut g = c.benchmark_group("encode");
    let s = spec(256);
    let data: Vec<u8> = (0..s.k()).map(|i| (i % 3 == 0) as u8).collect();
    g.throughput(Throughput::Elements(s.block_len() as u64));
    g.bench_function("n4_q256", |b| b.iter(|| encode_qc(black_box(&s), black_box(&data)).unwrap()));
    g.finish();
}

fn report_mode(_: &mut Criterion) {
    eprintln!("qc-polar benches built in {} mode", mode());
}

criterion_group!(benches, report_mode, simulate, prune, cycles, encode);
criterion_main!(benches);
