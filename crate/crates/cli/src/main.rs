use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use sumprof::baselines::{evaluate_labels, evaluate_split, lead_k, Labels};
use sumprof::breakdown::{
    bin_by_cvalue, bin_by_pvalue, bin_by_style, breakdown_eval, emit_tags, Averaging, BinAssignment, CValueBins,
    Factor, TagContext, TagScheme,
};
use sumprof::constituent::{sentence_cvalue, PatternTable, PcrParams, ThresholdSet, DEFAULT_CCR_SCALE, DEFAULT_TOP_M};
use sumprof::corpus::{corpus_name, load_corpus_with, Corpus, Document, Split};
use sumprof::par::{with_threads, Execution};
use sumprof::report::{
    breakdown_tsv, cmd_matrix, cmd_stats, corpus_oracle, matrix_tsv, pattern_table, rouge_tsv, salience_by_bins,
    salience_tsv, stats_tsv, to_json, Format, MatrixParams, Measure, RougeF1, ScanOptions,
};
use sumprof::style::SalienceDenominator;

#[derive(Parser, Debug)]
#[command(name = "sumprof", version, about = "Profile extractive summarization datasets")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for commands that use randomness
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Plain key=value file supplying defaults for long options
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format
    #[arg(long, global = true, default_value = "tsv", value_parser = parse_format)]
    format: Format,
    /// Directory for cached oracle labels
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Run without worker threads
    #[arg(long, global = true)]
    sequential: bool,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dataset statistics table (style factors, Lead-k and oracle ROUGE)
    Stats(StatsArgs),
    /// Greedy oracle labels as line-delimited JSON
    Oracle(OracleArgs),
    /// Lead-k ROUGE
    Leadk(LeadkArgs),
    /// ROUGE of a label file against reference summaries
    Rouge(RougeArgs),
    /// Cross-dataset PCR/CCR matrices
    Matrix(MatrixArgs),
    /// Test-set breakdown by a style or constituent factor
    Breakdown(BreakdownArgs),
    /// Write a corpus with document or sentence tags added
    Tag(TagArgs),
    /// Ground-truth pattern table of the training split
    Patterns(PatternsArgs),
}

#[derive(Args, Debug)]
struct OracleOpts {
    /// Cap on oracle selections per document
    #[arg(long)]
    max_sentences: Option<usize>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(required = true)]
    corpora: Vec<PathBuf>,
    /// Lead-k length (default: rounded mean oracle label count)
    #[arg(long)]
    lead_k: Option<usize>,
    #[command(flatten)]
    oracle: OracleOpts,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// train, valid, test or all
    #[arg(long, default_value = "all")]
    split: String,
    #[command(flatten)]
    oracle: OracleOpts,
}

#[derive(Args, Debug)]
struct LeadkArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(short, long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value = "test")]
    split: String,
    /// Also write the Lead-k label file here
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RougeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, default_value = "test")]
    split: String,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(required = true, num_args = 2..)]
    corpora: Vec<PathBuf>,
    /// pcr, ccr or both
    #[arg(long, default_value = "both")]
    measure: String,
    #[command(flatten)]
    constituent: ConstituentOpts,
    #[arg(long, default_value_t = PcrParams::default().epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = PcrParams::default().cap)]
    cap: f64,
    #[arg(long, default_value_t = DEFAULT_CCR_SCALE)]
    scale: f64,
    #[command(flatten)]
    oracle: OracleOpts,
}

#[derive(Args, Debug)]
struct ConstituentOpts {
    /// Finite positional thresholds, comma separated
    #[arg(long, default_value = "3,7,15,35")]
    thresholds: String,
    /// Size of the top pattern set
    #[arg(long, default_value_t = DEFAULT_TOP_M)]
    top_m: usize,
}

#[derive(Args, Debug)]
struct BreakdownArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// density, compression, pvalue or cvalue
    #[arg(long)]
    factor: String,
    /// Predicted label file to evaluate per bin
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Number of bins (default: 3 for style factors, 5 for cvalue)
    #[arg(long)]
    bins: Option<usize>,
    /// Average accuracy per document instead of pooling sentences
    #[arg(long = "macro")]
    macro_avg: bool,
    /// Report salience concentration of the top J sentences per bin
    #[arg(long, value_name = "J")]
    salience: Option<usize>,
    /// Divide salience by all sentence tokens instead of content tokens
    #[arg(long)]
    salience_all_tokens: bool,
    #[command(flatten)]
    constituent: ConstituentOpts,
    #[command(flatten)]
    oracle: OracleOpts,
}

#[derive(Args, Debug)]
struct TagArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// random, domain, pvalue, cvalue or pc
    #[arg(long)]
    scheme: String,
    /// Number of pseudo-domain tags for the random scheme
    #[arg(long, default_value_t = 2)]
    tags: usize,
    /// Content-value bins
    #[arg(long, default_value_t = 5)]
    bins: usize,
    /// Pattern table (TSV) to use instead of mining the training split
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    constituent: ConstituentOpts,
    #[command(flatten)]
    oracle: OracleOpts,
}

#[derive(Args, Debug)]
struct PatternsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOP_M)]
    top_m: usize,
    /// Prefer patterns rare outside ground-truth sentences
    #[arg(long)]
    discriminative: bool,
    #[command(flatten)]
    oracle: OracleOpts,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<sumprof::Error> for Failure {
    fn from(e: sumprof::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

type CliResult<T = ()> = Result<T, Failure>;

/// Reads `key=value` lines; blank lines and `#` comments are ignored.
fn read_config(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<PathBuf> {
    args.iter().enumerate().find_map(|(i, a)| {
        if let Some(v) = a.strip_prefix("--config=") {
            Some(PathBuf::from(v))
        } else if a == "--config" {
            args.get(i + 1).map(PathBuf::from)
        } else {
            None
        }
    })
}

/// Appends config defaults for options the chosen subcommand accepts and
/// the command line does not already set.
fn apply_config(mut args: Vec<String>) -> CliResult<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = read_config(&path)?;
    let cmd = Cli::command();
    let sub = args
        .iter()
        .skip(1)
        .find_map(|a| cmd.find_subcommand(a))
        .ok_or_else(|| usage("missing subcommand"))?;
    let mut known: HashSet<String> = HashSet::new();
    let mut flags: HashSet<String> = HashSet::new();
    for arg in cmd.get_arguments().chain(sub.get_arguments()) {
        if let Some(l) = arg.get_long() {
            known.insert(l.to_string());
            if !arg.get_action().takes_values() {
                flags.insert(l.to_string());
            }
        }
    }
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        if !known.contains(&key) {
            return Err(usage(format!(
                "{}: option `{key}` is not accepted by `{}`",
                path.display(),
                sub.get_name()
            )));
        }
        let flag = format!("--{key}");
        let given = args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        if flags.contains(&key) {
            match value.as_str() {
                "true" | "1" | "yes" => args.push(flag),
                "false" | "0" | "no" => {}
                _ => return Err(usage(format!("{}: `{key}` expects true or false", path.display()))),
            }
        } else {
            args.push(format!("{flag}={value}"));
        }
    }
    Ok(args)
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let args = match apply_config(raw) {
        Ok(a) => a,
        Err(Failure::Usage(m)) | Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = with_threads(cli.threads, || run(&cli)).map_err(Failure::from).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    exec: Execution,
}

impl Ctx<'_> {
    fn scan(&self, oracle: &OracleOpts) -> ScanOptions {
        ScanOptions {
            exec: self.exec,
            max_sentences: oracle.max_sentences,
            cache_dir: self.cli.cache_dir.clone(),
            ..ScanOptions::default()
        }
    }

    fn load(&self, path: &Path) -> CliResult<Corpus> {
        log::info!("loading {}", path.display());
        Ok(load_corpus_with(path, &corpus_name(path), self.exec)?)
    }

    /// Writes bytes to `--out` or stdout.
    fn emit(&self, bytes: &[u8]) -> CliResult {
        match &self.cli.out {
            Some(p) => fs::write(p, bytes).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::Data(format!("stdout: {e}")))
            }
        }
    }

    fn table<T: Serialize + ?Sized>(&self, value: &T, tsv: impl FnOnce() -> String) -> CliResult {
        let text = match self.cli.format {
            Format::Tsv => tsv(),
            Format::Json => to_json(value),
        };
        self.emit(text.as_bytes())
    }
}

fn run(cli: &Cli) -> CliResult {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let ctx = Ctx { cli, exec };
    match &cli.command {
        Command::Stats(a) => stats(&ctx, a),
        Command::Oracle(a) => oracle(&ctx, a),
        Command::Leadk(a) => leadk(&ctx, a),
        Command::Rouge(a) => rouge(&ctx, a),
        Command::Matrix(a) => matrix(&ctx, a),
        Command::Breakdown(a) => breakdown(&ctx, a),
        Command::Tag(a) => tag(&ctx, a),
        Command::Patterns(a) => patterns(&ctx, a),
    }
}

/// `None` means every split.
fn parse_split(s: &str) -> CliResult<Option<Split>> {
    if s == "all" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(usage)
}

fn thresholds(opts: &ConstituentOpts) -> CliResult<ThresholdSet> {
    ThresholdSet::parse(&opts.thresholds).map_err(|e| usage(e.to_string()))
}

fn stats(ctx: &Ctx, a: &StatsArgs) -> CliResult {
    if a.lead_k == Some(0) {
        return Err(usage("--lead-k must be at least 1"));
    }
    let opts = ctx.scan(&a.oracle);
    let rows = a
        .corpora
        .iter()
        .map(|p| {
            log::info!("scanning {}", p.display());
            cmd_stats(p, &corpus_name(p), a.lead_k, &opts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ctx.table(&rows, || stats_tsv(&rows))
}

fn labels_bytes(labels: &Labels) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    labels
        .write_jsonl(&mut buf)
        .map_err(|e| Failure::Data(e.to_string()))?;
    Ok(buf)
}

fn oracle(ctx: &Ctx, a: &OracleArgs) -> CliResult {
    let splits: Vec<Split> = match parse_split(&a.split)? {
        Some(s) => vec![s],
        None => Split::ALL.to_vec(),
    };
    let corpus = ctx.load(&a.input)?;
    let labels = corpus_oracle(&a.input, &corpus, &splits, &ctx.scan(&a.oracle))?;
    ctx.emit(&labels_bytes(&labels)?)
}

fn selected_docs(corpus: &Corpus, split: Option<Split>) -> Vec<&Document> {
    corpus
        .documents
        .iter()
        .filter(|d| split.is_none_or(|s| d.split == s))
        .collect()
}

fn rouge_of(ctx: &Ctx, corpus: &Corpus, split: Option<Split>, labels: &Labels) -> CliResult<RougeF1> {
    let t = match split {
        Some(s) => {
            if corpus.split(s).next().is_none() {
                return Err(sumprof::Error::MissingSplit {
                    corpus: corpus.name.clone(),
                    split: s.to_string(),
                }
                .into());
            }
            evaluate_split(corpus, s, labels, ctx.exec)?
        }
        None => evaluate_labels(corpus, labels)?,
    };
    Ok(RougeF1::percent(&t))
}

fn leadk(ctx: &Ctx, a: &LeadkArgs) -> CliResult {
    if a.k == 0 {
        return Err(usage("-k must be at least 1"));
    }
    let split = parse_split(&a.split)?;
    let corpus = ctx.load(&a.input)?;
    let labels: Labels = selected_docs(&corpus, split).iter().map(|d| lead_k(d, a.k)).collect();
    if let Some(p) = &a.labels {
        labels.write_file(p)?;
    }
    let r = rouge_of(ctx, &corpus, split, &labels)?;
    ctx.table(&r, || rouge_tsv(&corpus.name, &r))
}

fn rouge(ctx: &Ctx, a: &RougeArgs) -> CliResult {
    let split = parse_split(&a.split)?;
    let corpus = ctx.load(&a.input)?;
    let labels = Labels::read_jsonl(&a.pred)?;
    let r = rouge_of(ctx, &corpus, split, &labels)?;
    ctx.table(&r, || rouge_tsv(&corpus.name, &r))
}

fn matrix(ctx: &Ctx, a: &MatrixArgs) -> CliResult {
    let measures = match a.measure.as_str() {
        "both" => vec![Measure::Pcr, Measure::Ccr],
        m => vec![m.parse().map_err(usage)?],
    };
    let params = MatrixParams {
        thresholds: thresholds(&a.constituent)?,
        pcr: PcrParams {
            epsilon: a.epsilon,
            cap: a.cap,
        },
        top_m: a.constituent.top_m,
        ccr_scale: a.scale,
    };
    let corpora: Vec<(String, PathBuf)> = a.corpora.iter().map(|p| (corpus_name(p), p.clone())).collect();
    let matrices = cmd_matrix(&corpora, &measures, &params, &ctx.scan(&a.oracle))?;
    ctx.table(&matrices, || {
        matrices.iter().map(matrix_tsv).collect::<Vec<_>>().join("\n")
    })
}

fn train_table(
    ctx: &Ctx,
    path: &Path,
    corpus: &Corpus,
    oracle: &OracleOpts,
    top_m: usize,
    discriminative: bool,
) -> CliResult<(PatternTable, Labels)> {
    let labels = corpus_oracle(path, corpus, &[Split::Train], &ctx.scan(oracle))?;
    let train = selected_docs(corpus, Some(Split::Train));
    if train.is_empty() {
        return Err(sumprof::Error::MissingSplit {
            corpus: corpus.name.clone(),
            split: Split::Train.to_string(),
        }
        .into());
    }
    let table = pattern_table(&train, &labels, top_m, discriminative, ctx.exec)?;
    Ok((table, labels))
}

fn breakdown(ctx: &Ctx, a: &BreakdownArgs) -> CliResult {
    let factor: Factor = a.factor.parse().map_err(usage)?;
    if a.bins == Some(0) {
        return Err(usage("--bins must be at least 1"));
    }
    if a.salience.is_some() && !matches!(factor, Factor::Density | Factor::Compression) {
        return Err(usage("--salience needs a document-level factor"));
    }
    let corpus = ctx.load(&a.input)?;
    let test = selected_docs(&corpus, Some(Split::Test));
    if test.is_empty() {
        return Err(sumprof::Error::MissingSplit {
            corpus: corpus.name.clone(),
            split: Split::Test.to_string(),
        }
        .into());
    }
    let scan = ctx.scan(&a.oracle);
    let needs_oracle = a.pred.is_some() || matches!(factor, Factor::PValue | Factor::CValue);
    let oracle = if needs_oracle {
        corpus_oracle(&a.input, &corpus, &[Split::Test], &scan)?
    } else {
        Labels::new()
    };
    let bins: BinAssignment = match factor {
        Factor::Density | Factor::Compression => {
            let all: Vec<&Document> = corpus.documents.iter().collect();
            bin_by_style(&all, factor, a.bins.unwrap_or(3), ctx.exec)?
        }
        Factor::PValue => bin_by_pvalue(&test, &oracle, &thresholds(&a.constituent)?)?,
        Factor::CValue => {
            let (table, _) = train_table(ctx, &a.input, &corpus, &a.oracle, a.constituent.top_m, false)?;
            bin_by_cvalue(&test, &oracle, &table, a.bins.unwrap_or(5), ctx.exec)?
        }
    };

    if let Some(j) = a.salience {
        if j == 0 {
            return Err(usage("--salience must be at least 1"));
        }
        let denom = if a.salience_all_tokens {
            SalienceDenominator::All
        } else {
            SalienceDenominator::Content
        };
        let rows = salience_by_bins(&bins, &test, j, denom, ctx.exec)?;
        return ctx.table(&rows, || salience_tsv(&rows));
    }
    match &a.pred {
        Some(p) => {
            let pred = Labels::read_jsonl(p)?;
            let averaging = if a.macro_avg {
                Averaging::Macro
            } else {
                Averaging::Micro
            };
            let report = breakdown_eval(&pred, &oracle, &bins, &test, averaging, ctx.exec)?;
            ctx.table(&report, || breakdown_tsv(&report))
        }
        None => ctx.table(&bins, || bins.to_tsv()),
    }
}

fn tag(ctx: &Ctx, a: &TagArgs) -> CliResult {
    let scheme = match a.scheme.as_str() {
        "random" => TagScheme::Random {
            tags: a.tags,
            seed: ctx.cli.seed,
        },
        "domain" => TagScheme::Domain,
        "pvalue" => TagScheme::PValue,
        "cvalue" => TagScheme::CValue,
        "pc" => TagScheme::PC,
        s => return Err(usage(format!("unknown tag scheme `{s}`"))),
    };
    if matches!(scheme, TagScheme::Random { tags: 0, .. }) {
        return Err(usage("--tags must be at least 1"));
    }
    let th = thresholds(&a.constituent)?;
    let cvalue = if matches!(scheme, TagScheme::CValue | TagScheme::PC) {
        let corpus = ctx.load(&a.input)?;
        let (table, labels) = match &a.table {
            Some(p) => {
                let f = File::open(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
                let table = PatternTable::read_tsv(BufReader::new(f))?;
                let labels = corpus_oracle(&a.input, &corpus, &[Split::Train], &ctx.scan(&a.oracle))?;
                (table, labels)
            }
            None => train_table(ctx, &a.input, &corpus, &a.oracle, a.constituent.top_m, false)?,
        };
        let reference: Vec<f64> = labels
            .iter()
            .filter_map(|l| corpus.get(&l.doc_id).map(|d| (d, l)))
            .flat_map(|(d, l)| l.sorted().into_iter().map(move |i| &d.sentences[i]))
            .map(|s| sentence_cvalue(s, &table))
            .collect();
        Some(CValueBins::fit(table, &reference, a.bins)?)
    } else {
        None
    };
    let tctx = TagContext {
        thresholds: &th,
        cvalue: cvalue.as_ref(),
    };
    let summary = match &ctx.cli.out {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            emit_tags(&a.input, &scheme, &tctx, BufWriter::new(f))?
        }
        None => emit_tags(&a.input, &scheme, &tctx, BufWriter::new(io::stdout().lock()))?,
    };
    log::info!(
        "tagged {} records, dropped {}, document tags: {:?}",
        summary.written,
        summary.skipped,
        summary.tags
    );
    Ok(())
}

#[derive(Serialize)]
struct PatternRow {
    pattern: String,
    score: f64,
    top: bool,
}

fn patterns(ctx: &Ctx, a: &PatternsArgs) -> CliResult {
    let corpus = ctx.load(&a.input)?;
    let (table, _) = train_table(ctx, &a.input, &corpus, &a.oracle, a.top_m, a.discriminative)?;
    match ctx.cli.format {
        Format::Tsv => {
            let mut buf = Vec::new();
            table.write_tsv(&mut buf).map_err(|e| Failure::Data(e.to_string()))?;
            ctx.emit(&buf)
        }
        Format::Json => {
            let top: HashSet<String> = table.top().iter().map(|(p, _)| p.to_string()).collect();
            let rows: Vec<PatternRow> = table
                .sorted()
                .into_iter()
                .map(|(p, score)| {
                    let pattern = p.to_string();
                    PatternRow {
                        top: top.contains(&pattern),
                        pattern,
                        score,
                    }
                })
                .collect();
            ctx.emit(to_json(&rows).as_bytes())
        }
    }
}
