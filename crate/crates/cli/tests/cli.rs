use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sumprof::synth::{self, Region, SynthSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sumprof"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn sumprof")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpus(dir: &Path, name: &str, spec: SynthSpec) -> PathBuf {
    let path = dir.join(format!("{name}.jsonl"));
    synth::write_corpus(&spec, BufWriter::new(File::create(&path).unwrap())).unwrap();
    path
}

fn small(dir: &Path) -> PathBuf {
    corpus(
        dir,
        "small",
        SynthSpec {
            docs: 60,
            phrases: 6,
            domains: vec!["cnn".into(), "dailymail".into()],
            ..SynthSpec::default()
        },
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["stats", "x.jsonl", "--format", "xml"]).status.code(), Some(1));
    let missing = run(&["stats", "/nonexistent/corpus.jsonl"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nonexistent"));

    let dir = tempfile::tempdir().unwrap();
    let notest = corpus(
        dir.path(),
        "notest",
        SynthSpec {
            docs: 5,
            train: 1.0,
            valid: 0.0,
            ..SynthSpec::default()
        },
    );
    assert_eq!(run(&["stats", s(&notest)]).status.code(), Some(2));
    assert_eq!(run(&["breakdown", "--in", s(&notest), "--factor", "sideways"]).status.code(), Some(1));
}

#[test]
fn oracle_then_rouge_and_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(dir.path());
    let labels = dir.path().join("labels.jsonl");
    let o = run(&["oracle", "--in", s(&c), "--out", s(&labels)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&labels).unwrap();
    assert_eq!(text.lines().count(), 60);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first["id"].is_string() && first["selected"].is_array());

    let r = run(&["rouge", "--in", s(&c), "--pred", s(&labels)]);
    assert!(r.status.success());
    let out = stdout(&r);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "name\tr1\tr2\trl");
    assert_eq!(lines[1].split('\t').count(), 4);

    let b = run(&["breakdown", "--in", s(&c), "--factor", "density", "--pred", s(&labels)]);
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    let out = stdout(&b);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("low\t") && rows[2].starts_with("high\t"));
    // predictions equal to the oracle score perfectly in every bin
    for row in rows {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols[2], "100.00");
        assert_eq!(cols[3], "100.00");
    }

    let p = run(&["breakdown", "--in", s(&c), "--factor", "pvalue", "--pred", s(&labels), "--format", "json"]);
    let v: Value = serde_json::from_slice(&p.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["granularity"], "sentence");
}

#[test]
fn output_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(dir.path());
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("stats{threads}.json"));
        let o = run(&["stats", s(&c), "--threads", threads, "--format", "json", "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let seq = run(&["stats", s(&c), "--sequential", "--format", "json"]);
    assert_eq!(seq.stdout, outputs[0]);
    let rows: Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(rows[0]["name"], "small");
}

#[test]
fn leadk_writes_labels() {
    let dir = tempfile::tempdir().unwrap();
    let c = corpus(
        dir.path(),
        "lead",
        SynthSpec {
            docs: 30,
            region: Region::Head,
            summary_sentences: 3..=3,
            ..SynthSpec::default()
        },
    );
    let labels = dir.path().join("lead.jsonl");
    let o = run(&["leadk", "--in", s(&c), "-k", "3", "--labels", s(&labels), "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["r1"], 100.0);
    let first: Value = serde_json::from_str(fs::read_to_string(&labels).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["selected"], serde_json::json!([0, 1, 2]));
}

#[test]
fn tagging() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(dir.path());
    let d = run(&["tag", "--in", s(&c), "--scheme", "domain"]);
    assert!(d.status.success());
    let tags: std::collections::BTreeSet<String> = stdout(&d)
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["tag"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(tags.into_iter().collect::<Vec<_>>(), ["cnn", "dailymail"]);

    let a = run(&["tag", "--in", s(&c), "--scheme", "random", "--tags", "3", "--seed", "7"]);
    let b = run(&["tag", "--in", s(&c), "--scheme", "random", "--tags", "3", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);

    let once = dir.path().join("once.jsonl");
    assert!(run(&["tag", "--in", s(&c), "--scheme", "pc", "--out", s(&once)]).status.success());
    let twice = run(&["tag", "--in", s(&once), "--scheme", "pc"]);
    assert!(twice.status.success(), "{}", String::from_utf8_lossy(&twice.stderr));
    let first: Value = serde_json::from_str(fs::read_to_string(&once).unwrap().lines().next().unwrap()).unwrap();
    let tags = first["sentence_tags"].as_array().unwrap();
    assert_eq!(tags.len(), first["sentences"].as_array().unwrap().len());
    assert!(tags[0].as_str().unwrap().starts_with("P1C"));

    let p = run(&["tag", "--in", s(&c), "--scheme", "pvalue"]);
    let first: Value = serde_json::from_str(stdout(&p).lines().next().unwrap()).unwrap();
    assert_eq!(first["sentence_tags"][0], "P1");
}

#[test]
fn matrix_and_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let a = corpus(
        dir.path(),
        "alpha",
        SynthSpec {
            docs: 80,
            prefix: "ka".into(),
            region: Region::Head,
            phrases: 5,
            ..SynthSpec::default()
        },
    );
    let b = corpus(
        dir.path(),
        "beta",
        SynthSpec {
            docs: 80,
            prefix: "mo".into(),
            region: Region::Tail,
            sentences: 40..=45,
            phrases: 5,
            ..SynthSpec::default()
        },
    );
    let m = run(&["matrix", s(&a), s(&b)]);
    assert!(m.status.success(), "{}", String::from_utf8_lossy(&m.stderr));
    let out = stdout(&m);
    assert!(out.starts_with("pcr\talpha\tbeta\n"));
    assert!(out.contains("\nccr\talpha\tbeta\n"));
    assert_eq!(run(&["matrix", s(&a)]).status.code(), Some(1));

    let p = run(&["patterns", "--in", s(&a), "--top-m", "5"]);
    assert!(p.status.success());
    let out = stdout(&p);
    let flagged = out.lines().filter(|l| l.ends_with("\t1")).count();
    assert_eq!(flagged, 5);
}

#[test]
fn config_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(dir.path());
    let cfg = dir.path().join("sumprof.conf");
    fs::write(&cfg, "# defaults\nformat = json\nthreads=2\nlead_k=2\n").unwrap();
    let o = run(&["stats", s(&c), "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["lead_k"], 2);
    // the command line wins over the file
    let o = run(&["stats", s(&c), "--config", s(&cfg), "--format", "tsv"]);
    assert!(stdout(&o).starts_with("dataset\t"));
    // keys the subcommand does not accept are usage errors
    fs::write(&cfg, "factor=density\n").unwrap();
    assert_eq!(run(&["stats", s(&c), "--config", s(&cfg)]).status.code(), Some(1));
}
