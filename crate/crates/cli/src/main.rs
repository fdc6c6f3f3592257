use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmaug::artificial::{demo_cores, generate_split, read_cores_jsonl, read_cores_tsv, DmPolicy, SampleRecord, Stance};
use dmaug::augment::{
    prepare_discovery_pair, prepare_pdtb_pairs, read_discovery_tsv, read_pdtb_jsonl, AugmenterKind, PairRecord,
};
use dmaug::bio::{bio_to_spans, spans_to_bio, BioMode, CorpusSchema, DmSlot, LabelSequence};
use dmaug::conll::{read_conll, write_conll, LabeledSequence};
use dmaug::extract::{
    gold_dms_left_context, gold_dms_prefix_split, remove_explicit_dms, AnnotatedParagraph, DmLexicon,
};
use dmaug::metrics::{
    cohens_kappa, coverage_report, explicit_accuracy_report, pearson, sense_confusion, span_f1, token_metrics,
    DmScorers, EmbeddingTable, SenseLexicon,
};
use dmaug::pipeline::{
    backproject_predictions, prepare_corpus, DmHeuristic, DownstreamInstance, InputMode, MeanStd, RunConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Parser)]
#[command(name = "dmaug", version, about = "Discourse-marker augmentation and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the synthetic dataset from core elements.
    GenerateArtificial(GenerateArgs),
    /// Read gold DM slots off a CoNLL corpus.
    ExtractDms(ExtractArgs),
    /// Write a CoNLL corpus with explicit DMs removed.
    RemoveDms(ExtractArgs),
    /// Steps 1 to 3: remove, augment, project gold labels.
    Augment(AugmentArgs),
    /// Build training pairs for augmentation models.
    PreparePairs(PairsArgs),
    /// Step 5: map tagger predictions back to the original tokens.
    Project(ProjectArgs),
    /// Score predicted DMs against gold DMs.
    EvalDm(EvalDmArgs),
    /// Score tagger output against gold labels.
    EvalDownstream(EvalDownstreamArgs),
    /// Agreement between two annotation columns.
    Agreement(AgreementArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Core elements (.tsv or .jsonl); the bundled demo cores if absent.
    #[arg(long)]
    cores: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Stances::Both)]
    stances: Stances,
    #[arg(long, default_value = "train")]
    split: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stances {
    Original,
    Both,
}

#[derive(Args)]
struct CorpusArgs {
    /// CoNLL file (token<TAB>tag).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "pec")]
    schema: String,
    /// Read DMs as lexicon prefixes of ADUs instead of their left context.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AugmentArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_enum, default_value_t = Mode::Original)]
    input_mode: Mode,
    #[arg(long, value_enum, default_value_t = Augmenter::None)]
    augmenter: Augmenter,
    /// Base URL of the augmentation service, for `--augmenter remote`.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Prepared instances as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the augmented tokens and projected labels as CoNLL.
    #[arg(long)]
    conll: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Original,
    #[value(name = "removed_dms", alias = "removed-dms")]
    RemovedDms,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Augmenter {
    None,
    Rule,
    Remote,
}

#[derive(Args)]
struct PairsArgs {
    #[arg(long, value_enum)]
    format: PairFormat,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairFormat {
    Discovery,
    Pdtb,
}

#[derive(Args)]
struct ProjectArgs {
    /// Instances written by `augment`.
    #[arg(long)]
    instances: PathBuf,
    /// Tagger predictions over the augmented tokens, as CoNLL.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalDmArgs {
    /// Gold slots as JSON lines (`extract-dms` output).
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Word vectors in text format; the bundled demo table if absent.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Retrofitted vectors in text format.
    #[arg(long)]
    retrofit: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalDownstreamArgs {
    #[arg(long)]
    gold: PathBuf,
    /// Predictions over the original tokens; repeat once per seed.
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AgreementArgs {
    /// Two tab-separated annotation columns.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    Remote(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Remote(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Remote(m) => m,
        }
    }
}

impl From<dmaug::Error> for Failure {
    fn from(e: dmaug::Error) -> Self {
        match e {
            dmaug::Error::Remote(_) => Failure::Remote(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn create(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_jsonl<T: Serialize>(out: Option<&Path>, rows: impl IntoIterator<Item = T>) -> CliResult {
    let mut w = create(out)?;
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult {
    let mut w = create(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let mut out = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Failure::Data(format!("{}:{}: {e}", path.display(), n + 1)))?);
    }
    Ok(out)
}

fn read_corpus(path: &Path) -> CliResult<Vec<LabeledSequence>> {
    Ok(read_conll(open(path)?, &path.display().to_string())?)
}

fn schema(name: &str) -> CliResult<CorpusSchema> {
    CorpusSchema::by_name(name).ok_or_else(|| Failure::Usage(format!("unknown schema {name:?}")))
}

fn heuristic(lexicon: Option<&Path>) -> CliResult<DmHeuristic> {
    Ok(match lexicon {
        Some(p) => DmHeuristic::PrefixSplit(DmLexicon::read(open(p)?)?),
        None => DmHeuristic::LeftContext,
    })
}

#[derive(Serialize, Deserialize)]
struct SlotRecord {
    id: String,
    slots: Vec<DmSlot>,
}

/// Each record as an annotated paragraph with its gold slots.
fn gold_slots(args: &CorpusArgs) -> CliResult<Vec<(AnnotatedParagraph, Vec<DmSlot>)>> {
    let schema = schema(&args.schema)?;
    let heuristic = heuristic(args.lexicon.as_deref())?;
    let mut out = Vec::new();
    for (n, r) in read_corpus(&args.input)?.into_iter().enumerate() {
        let at = |e: dmaug::Error| Failure::Data(format!("record {n}: {e}"));
        let spans = bio_to_spans(&r.labels, BioMode::Strict).map_err(at)?;
        schema.check_spans(&spans).map_err(at)?;
        let p = AnnotatedParagraph::new(r.tokens, spans).map_err(at)?;
        out.push(match &heuristic {
            DmHeuristic::LeftContext => {
                let slots = gold_dms_left_context(&p);
                (p, slots)
            }
            DmHeuristic::PrefixSplit(lex) => {
                let (adus, slots) = gold_dms_prefix_split(&p, lex).map_err(at)?;
                let p = AnnotatedParagraph::with_sentence_bounds(p.tokens, adus, p.sentence_bounds).map_err(at)?;
                (p, slots)
            }
        });
    }
    Ok(out)
}

fn generate(args: GenerateArgs) -> CliResult {
    let cores = match &args.cores {
        None => demo_cores(),
        Some(p) if p.extension().is_some_and(|e| e == "jsonl" || e == "json") => {
            read_cores_jsonl(open(p)?, &p.display().to_string())?
        }
        Some(p) => read_cores_tsv(open(p)?, &p.display().to_string())?,
    };
    let stances: BTreeSet<Stance> = match args.stances {
        Stances::Original => [Stance::Original].into(),
        Stances::Both => [Stance::Original, Stance::Opposite].into(),
    };
    let policy = args.seed.map(DmPolicy::with_seed).unwrap_or_default();
    let samples = generate_split(&cores, &stances, &policy, dmaug::artificial::DEFAULT_MASK)?;
    write_jsonl(
        args.out.as_deref(),
        samples.iter().map(|s| SampleRecord::new(&args.split, s)),
    )
}

fn extract(args: ExtractArgs) -> CliResult {
    let rows = gold_slots(&args.corpus)?;
    write_jsonl(
        args.out.as_deref(),
        rows.into_iter().enumerate().map(|(n, (_, slots))| SlotRecord {
            id: n.to_string(),
            slots,
        }),
    )
}

fn remove(args: ExtractArgs) -> CliResult {
    let mut out = Vec::new();
    for (n, (p, slots)) in gold_slots(&args.corpus)?.into_iter().enumerate() {
        let at = |e: dmaug::Error| Failure::Data(format!("record {n}: {e}"));
        let (tokens, adus) = remove_explicit_dms(&p, &slots).map_err(at)?;
        let labels = spans_to_bio(&adus, tokens.len()).map_err(at)?;
        out.push(LabeledSequence { tokens, labels });
    }
    let mut w = create(args.out.as_deref())?;
    write_conll(&mut w, &out)?;
    w.flush()?;
    Ok(())
}

fn augment(args: AugmentArgs) -> CliResult {
    let augmenter = match (args.augmenter, args.endpoint) {
        (Augmenter::Remote, Some(e)) => AugmenterKind::Remote(e),
        (Augmenter::Remote, None) => return Err(Failure::Usage("--augmenter remote needs --endpoint".into())),
        (_, Some(_)) => return Err(Failure::Usage("--endpoint only applies to --augmenter remote".into())),
        (Augmenter::Rule, None) => AugmenterKind::Rule,
        (Augmenter::None, None) => AugmenterKind::None,
    };
    let mode = match args.input_mode {
        Mode::Original => InputMode::Original,
        Mode::RemovedDms => InputMode::RemovedDms,
    };
    let mut cfg = RunConfig::new(mode, augmenter, schema(&args.corpus.schema)?);
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    cfg.heuristic = heuristic(args.corpus.lexicon.as_deref())?;
    let records: Vec<(String, LabeledSequence)> = read_corpus(&args.corpus.input)?
        .into_iter()
        .enumerate()
        .map(|(n, r)| (n.to_string(), r))
        .collect();
    let run = prepare_corpus(&records, &cfg);
    write_jsonl(args.out.as_deref(), &run.instances)?;
    if let Some(path) = &args.conll {
        let seqs: Vec<LabeledSequence> = run
            .instances
            .iter()
            .map(|i| LabeledSequence {
                tokens: i.x_m.clone(),
                labels: i.y_m.clone(),
            })
            .collect();
        let mut w = create(Some(path))?;
        write_conll(&mut w, &seqs)?;
        w.flush()?;
    }
    for f in &run.failures {
        eprintln!("{f}");
    }
    let summary = format!("{} of {} records failed", run.failures.len(), run.total());
    if run.failures.iter().any(|f| f.remote) {
        Err(Failure::Remote(summary))
    } else if !run.failures.is_empty() {
        Err(Failure::Data(summary))
    } else {
        Ok(())
    }
}

fn prepare_pairs(args: PairsArgs) -> CliResult {
    let source = args.input.display().to_string();
    let pairs: Vec<PairRecord> = match args.format {
        PairFormat::Discovery => read_discovery_tsv(open(&args.input)?, &source)?
            .iter()
            .map(|d| prepare_discovery_pair(d).map(PairRecord::from))
            .collect::<Result<_, _>>()?,
        PairFormat::Pdtb => read_pdtb_jsonl(open(&args.input)?, &source)?
            .iter()
            .map(|d| prepare_pdtb_pairs(d).map(PairRecord::from))
            .collect::<Result<_, _>>()?,
    };
    write_jsonl(args.out.as_deref(), &pairs)
}

fn project(args: ProjectArgs) -> CliResult {
    let mut instances: Vec<DownstreamInstance> = read_jsonl(&args.instances)?;
    let preds = read_corpus(&args.predictions)?;
    if preds.len() != instances.len() {
        return Err(Failure::Data(format!(
            "{} prediction sequences for {} instances",
            preds.len(),
            instances.len()
        )));
    }
    // only the scoring and gap policy matter for step 5
    let cfg = RunConfig::new(InputMode::Original, AugmenterKind::None, CorpusSchema::pec());
    let mut out = Vec::with_capacity(instances.len());
    let mut dropped = 0;
    for (inst, pred) in instances.iter_mut().zip(preds) {
        if pred.tokens != inst.x_m {
            return Err(Failure::Data(format!(
                "{}: predicted tokens differ from the augmented tokens",
                inst.id
            )));
        }
        inst.z_m = Some(pred.labels);
        let z = backproject_predictions(inst, &cfg)?;
        dropped += inst.dropped_labels;
        out.push(LabeledSequence {
            tokens: inst.x.clone(),
            labels: z,
        });
    }
    let mut w = create(args.out.as_deref())?;
    write_conll(&mut w, &out)?;
    w.flush()?;
    if dropped > 0 {
        eprintln!("{dropped} labels on inserted tokens dropped");
    }
    Ok(())
}

fn read_table(path: &Path) -> CliResult<EmbeddingTable<f64>> {
    Ok(EmbeddingTable::read(open(path)?, &path.display().to_string())?)
}

fn eval_dm(args: EvalDmArgs) -> CliResult {
    let gold: Vec<SlotRecord> = read_jsonl(&args.gold)?;
    let pred: Vec<SlotRecord> = read_jsonl(&args.pred)?;
    if let Some((g, p)) = gold.iter().zip(&pred).find(|(g, p)| g.id != p.id) {
        return Err(Failure::Data(format!("record ids differ: {:?} vs {:?}", g.id, p.id)));
    }
    let gold: Vec<Vec<DmSlot>> = gold.into_iter().map(|r| r.slots).collect();
    let pred: Vec<Vec<DmSlot>> = pred.into_iter().map(|r| r.slots).collect();
    let word = match &args.vectors {
        Some(p) => read_table(p)?,
        None => EmbeddingTable::demo(),
    };
    let retrofit = args.retrofit.as_deref().map(read_table).transpose()?;
    let (am, dr) = (SenseLexicon::arg_markers(), SenseLexicon::disc_relations());
    let scorers = DmScorers {
        word: Some(&word),
        retrofit: retrofit.as_ref(),
        sentence: None,
        arg_marker: &am,
        disc_rel: &dr,
    };
    let report = explicit_accuracy_report(&gold, &pred, &scorers)?;
    let coverage = coverage_report(&gold, &pred)?;
    let confusion = sense_confusion(&gold, &pred, &am)?;
    write_json(
        args.out.as_deref(),
        &json!({ "accuracy": report, "coverage": coverage, "arg_marker_confusion": confusion.counts }),
    )
}

fn eval_downstream(args: EvalDownstreamArgs) -> CliResult {
    let gold = read_corpus(&args.gold)?;
    let gold_labels: Vec<&LabelSequence> = gold.iter().map(|r| &r.labels).collect();
    let mut runs = Vec::new();
    let (mut f1, mut acc, mut macro_f1) = (Vec::new(), Vec::new(), Vec::new());
    for path in &args.pred {
        let pred = read_corpus(path)?;
        if pred.len() != gold.len() || pred.iter().zip(&gold).any(|(p, g)| p.tokens != g.tokens) {
            return Err(Failure::Data(format!(
                "{}: tokens differ from the gold corpus",
                path.display()
            )));
        }
        let labels: Vec<&LabelSequence> = pred.iter().map(|r| &r.labels).collect();
        let span = span_f1(&gold_labels, &labels)?;
        let token = token_metrics(&gold_labels, &labels)?;
        f1.push(span.f1);
        acc.push(token.accuracy);
        macro_f1.push(token.macro_f1);
        runs.push(json!({ "pred": path, "span": span, "token": token }));
    }
    let summary = json!({
        "span_f1": MeanStd::of(&f1),
        "token_accuracy": MeanStd::of(&acc),
        "token_macro_f1": MeanStd::of(&macro_f1),
    });
    write_json(args.out.as_deref(), &json!({ "runs": runs, "summary": summary }))
}

fn agreement(args: AgreementArgs) -> CliResult {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (n, line) in open(&args.input)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (x, y) = line
            .split_once('\t')
            .ok_or_else(|| Failure::Data(format!("{}:{}: expected two columns", args.input.display(), n + 1)))?;
        a.push(x.trim().to_string());
        b.push(y.trim().to_string());
    }
    let kappa = cohens_kappa(&a, &b)?;
    let numeric = |xs: &[String]| xs.iter().map(|x| x.parse::<f64>().ok()).collect::<Option<Vec<f64>>>();
    let r = match (numeric(&a), numeric(&b)) {
        (Some(x), Some(y)) => Some(pearson(&x, &y)?),
        _ => None,
    };
    write_json(
        args.out.as_deref(),
        &json!({ "items": a.len(), "kappa": kappa, "pearson": r }),
    )
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::GenerateArtificial(a) => generate(a),
        Command::ExtractDms(a) => extract(a),
        Command::RemoveDms(a) => remove(a),
        Command::Augment(a) => augment(a),
        Command::PreparePairs(a) => prepare_pairs(a),
        Command::Project(a) => project(a),
        Command::EvalDm(a) => eval_dm(a),
        Command::EvalDownstream(a) => eval_downstream(a),
        Command::Agreement(a) => agreement(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
