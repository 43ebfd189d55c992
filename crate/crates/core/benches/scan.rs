use std::fs::File;
use std::io::BufWriter;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sumprof::baselines::oracle_labels;
use sumprof::breakdown::{bin_by_style, Factor};
use sumprof::corpus::Document;
use sumprof::report::{cmd_stats, pattern_table, ScanOptions};
use sumprof::synth::{self, SynthSpec};
use sumprof::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn spec(docs: usize) -> SynthSpec {
    SynthSpec {
        docs,
        vocab: 2000,
        sentences: 8..=12,
        sentence_len: 16..=24,
        phrases: 20,
        ..SynthSpec::default()
    }
}

fn in_memory(c: &mut Criterion) {
    let docs = synth::documents(&spec(1000));
    let refs: Vec<&Document> = docs.iter().collect();
    let labels = oracle_labels(&refs, None, Execution::Parallel);

    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| oracle_labels(&refs, None, exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("density_bins");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| bin_by_style(&refs, Factor::Density, 3, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("pattern_table");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| pattern_table(&refs, &labels, 100, false, exec).unwrap())
        });
    }
    g.finish();
}

fn streaming(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.jsonl");
    synth::write_corpus(&spec(5000), BufWriter::new(File::create(&path).unwrap())).unwrap();

    let mut g = c.benchmark_group("stats_stream");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = ScanOptions {
            exec,
            ..ScanOptions::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| cmd_stats(&path, "bench", None, opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, in_memory, streaming);
criterion_main!(benches);
