//! The downstream experiment: remove or keep explicit DMs, augment, project
//! gold labels onto the augmented tokens, and map an external tagger's
//! predictions back to the original tokens for scoring.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{needleman_wunsch, project_labels, Alignment, GapPolicy, ScoringScheme};
use crate::artificial::{ArtificialSample, DmPolicy};
use crate::augment::{AugmenterKind, RemoteClient, RoleMap, RuleAugmenter};
use crate::bio::{bio_to_spans, spans_to_bio, BioMode, CorpusSchema, DmSlot, LabelSequence, Tag};
use crate::conll::LabeledSequence;
use crate::error::{Error, Result};
use crate::extract::{
    diff_predicted_dms, gold_dms_left_context, gold_dms_prefix_split, remove_explicit_dms, AnnotatedParagraph,
    DmLexicon,
};
use crate::metrics::{
    coverage_report, explicit_accuracy_report, mean_std, span_f1, token_metrics, DmScorers, MetricReport, SpanScores,
    TokenScores,
};
use crate::text::{detokenize, tokenize, TokenSequence};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    #[default]
    Original,
    RemovedDms,
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputMode::Original => "original",
            InputMode::RemovedDms => "removed_dms",
        })
    }
}

impl FromStr for InputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(InputMode::Original),
            "removed_dms" | "removed-dms" => Ok(InputMode::RemovedDms),
            _ => Err(Error::InvalidInput(format!("unknown input mode {s:?}"))),
        }
    }
}

/// How gold DMs are read off an annotated paragraph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum DmHeuristic {
    /// Text between the sentence start or previous ADU and the ADU.
    #[default]
    LeftContext,
    /// Lexicon entries opening an ADU.
    PrefixSplit(DmLexicon),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input_mode: InputMode,
    pub augmenter: AugmenterKind,
    pub schema: CorpusSchema,
    pub seed: u64,
    pub dm_policy: DmPolicy,
    pub role_map: RoleMap,
    pub heuristic: DmHeuristic,
    pub gap_policy: GapPolicy,
    pub scoring: ScoringScheme<i32>,
    /// Instances processed at once (and remote requests in flight).
    pub workers: usize,
}

impl RunConfig {
    pub fn new(input_mode: InputMode, augmenter: AugmenterKind, schema: CorpusSchema) -> Self {
        let role_map = RoleMap::for_schema(&schema);
        RunConfig {
            input_mode,
            augmenter,
            schema,
            seed: crate::artificial::DEFAULT_SEED,
            dm_policy: DmPolicy::default(),
            role_map,
            heuristic: DmHeuristic::LeftContext,
            gap_policy: GapPolicy::Contiguity,
            scoring: ScoringScheme::default(),
            workers: crate::augment::remote::DEFAULT_CONCURRENCY,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.dm_policy.seed = seed;
        self
    }

    /// `(original, none)`, the unaugmented baseline.
    pub fn is_baseline(&self) -> bool {
        self.input_mode == InputMode::Original && self.augmenter == AugmenterKind::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    ExtractDms,
    RemoveDms,
    Augment,
    Project,
    Backproject,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub id: String,
    pub stage: Stage,
    pub message: String,
    /// The failure came from the remote augmentation service.
    pub remote: bool,
}

impl fmt::Display for StageFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed at {}: {}", self.id, self.stage, self.message)
    }
}

/// One record through the five steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownstreamInstance {
    pub id: String,
    pub x: TokenSequence,
    pub y: LabelSequence,
    /// Text handed to the augmenter.
    pub x_s: String,
    /// Augmented text.
    pub x_s_m: String,
    pub x_m: TokenSequence,
    pub y_m: LabelSequence,
    pub z_m: Option<LabelSequence>,
    pub z: Option<LabelSequence>,
    pub gold_slots: Vec<DmSlot>,
    /// DMs recovered from the augmenter's output, one per ADU.
    pub pred_slots: Vec<DmSlot>,
    /// Non-`O` predictions on inserted tokens, lost in back-projection.
    pub dropped_labels: usize,
    #[serde(skip)]
    alignment: Option<Alignment<i32>>,
}

impl DownstreamInstance {
    /// Alignment of `x` (side A) with `x_m` (side B).
    pub fn alignment(&self, scoring: &ScoringScheme<i32>) -> Alignment<i32> {
        self.alignment
            .clone()
            .unwrap_or_else(|| needleman_wunsch(&self.x, &self.x_m, scoring))
    }
}

enum Augmenter {
    None,
    Rule(RuleAugmenter),
    Remote(RemoteClient),
}

impl Augmenter {
    fn from_config(cfg: &RunConfig) -> Self {
        match &cfg.augmenter {
            AugmenterKind::None => Augmenter::None,
            AugmenterKind::Rule => Augmenter::Rule(RuleAugmenter::new(cfg.dm_policy.clone(), cfg.role_map.clone())),
            AugmenterKind::Remote(endpoint) => Augmenter::Remote(RemoteClient::new(endpoint.clone())),
        }
    }
}

fn fail(id: &str, stage: Stage, e: impl fmt::Display) -> StageFailure {
    StageFailure {
        id: id.to_string(),
        stage,
        message: e.to_string(),
        remote: false,
    }
}

/// Steps 1 to 3 for one record.
pub fn prepare_downstream(
    id: &str,
    x: TokenSequence,
    y: LabelSequence,
    cfg: &RunConfig,
) -> std::result::Result<DownstreamInstance, StageFailure> {
    prepare_with(id, x, y, cfg, &Augmenter::from_config(cfg))
}

fn prepare_with(
    id: &str,
    x: TokenSequence,
    y: LabelSequence,
    cfg: &RunConfig,
    augmenter: &Augmenter,
) -> std::result::Result<DownstreamInstance, StageFailure> {
    if x.len() != y.len() {
        return Err(fail(
            id,
            Stage::Validate,
            format!("{} tokens but {} labels", x.len(), y.len()),
        ));
    }
    let spans = bio_to_spans(&y, BioMode::Strict).map_err(|e| fail(id, Stage::Validate, e))?;
    cfg.schema
        .check_spans(&spans)
        .map_err(|e| fail(id, Stage::Validate, e))?;
    let p = AnnotatedParagraph::new(x.clone(), spans).map_err(|e| fail(id, Stage::Validate, e))?;

    let (p, gold_slots) = match &cfg.heuristic {
        DmHeuristic::LeftContext => {
            let slots = gold_dms_left_context(&p);
            (p, slots)
        }
        DmHeuristic::PrefixSplit(lex) => {
            let (adus, slots) = gold_dms_prefix_split(&p, lex).map_err(|e| fail(id, Stage::ExtractDms, e))?;
            let p = AnnotatedParagraph::with_sentence_bounds(p.tokens, adus, p.sentence_bounds)
                .map_err(|e| fail(id, Stage::ExtractDms, e))?;
            (p, slots)
        }
    };

    let input = match cfg.input_mode {
        InputMode::Original => p,
        InputMode::RemovedDms => {
            let (tokens, adus) = remove_explicit_dms(&p, &gold_slots).map_err(|e| fail(id, Stage::RemoveDms, e))?;
            AnnotatedParagraph::new(tokens, adus).map_err(|e| fail(id, Stage::RemoveDms, e))?
        }
    };
    let x_s = detokenize(&input.tokens);

    let (x_s_m, x_m) = match augmenter {
        Augmenter::None => (x_s.clone(), input.tokens.clone()),
        Augmenter::Rule(rule) => {
            let rule = rule.clone().with_key_prefix(id);
            let out = rule.augment(&input).map_err(|e| fail(id, Stage::Augment, e))?;
            let x_m = tokenize(&out.text);
            (out.text, x_m)
        }
        Augmenter::Remote(client) => {
            let text = client.augment(&x_s).map_err(|e| StageFailure {
                remote: true,
                ..fail(id, Stage::Augment, e)
            })?;
            let x_m = tokenize(&text);
            (text, x_m)
        }
    };

    let candidates: Vec<usize> = input.adus.iter().map(|a| a.start).collect();
    let pred_slots = diff_predicted_dms(&input.tokens, &x_m, &candidates);

    let alignment = if x_m == x {
        Alignment::identity(x.len(), &cfg.scoring)
    } else {
        needleman_wunsch(&x, &x_m, &cfg.scoring)
    };
    let y_m = project_labels(&alignment, &y, cfg.gap_policy).map_err(|e| fail(id, Stage::Project, e))?;

    Ok(DownstreamInstance {
        id: id.to_string(),
        x,
        y,
        x_s,
        x_s_m,
        x_m,
        y_m,
        z_m: None,
        z: None,
        gold_slots,
        pred_slots,
        dropped_labels: 0,
        alignment: Some(alignment),
    })
}

/// Every instance comes out either complete or with a stage-tagged failure,
/// in input order.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PreparedRun {
    pub instances: Vec<DownstreamInstance>,
    pub failures: Vec<StageFailure>,
}

impl PreparedRun {
    pub fn total(&self) -> usize {
        self.instances.len() + self.failures.len()
    }
}

/// Steps 1 to 3 for a corpus, `cfg.workers` records at a time.
pub fn prepare_corpus(records: &[(String, LabeledSequence)], cfg: &RunConfig) -> PreparedRun {
    let augmenter = Augmenter::from_config(cfg);
    let run = || -> Vec<_> {
        records
            .par_iter()
            .map(|(id, r)| prepare_with(id, r.tokens.clone(), r.labels.clone(), cfg, &augmenter))
            .collect()
    };
    let outcomes = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    let mut out = PreparedRun::default();
    for o in outcomes {
        match o {
            Ok(i) => out.instances.push(i),
            Err(f) => out.failures.push(f),
        }
    }
    out
}

/// Step 5: maps `z_m` back onto `x`. Predictions on tokens with no
/// original counterpart are dropped and counted.
pub fn backproject_predictions(inst: &mut DownstreamInstance, cfg: &RunConfig) -> Result<LabelSequence> {
    let z_m = inst
        .z_m
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{}: no predictions to project back", inst.id)))?;
    if z_m.len() != inst.x_m.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs augmented tokens",
            left: z_m.len(),
            right: inst.x_m.len(),
        });
    }
    let back = inst.alignment(&cfg.scoring).swapped();
    let dropped = back
        .pairs
        .iter()
        .filter(|(m, x)| x.is_none() && m.is_some_and(|j| z_m[j] != Tag::O))
        .count();
    let z = project_labels(&back, z_m, cfg.gap_policy)?;
    inst.dropped_labels = dropped;
    inst.z = Some(z.clone());
    Ok(z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instances: usize,
    pub span: SpanScores,
    pub token: TokenScores,
    pub dropped_labels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dm_accuracy: Option<MetricReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dm_coverage: Option<f64>,
}

/// Downstream scores on `(y, z)`, plus DM reports when `scorers` is given.
pub fn evaluate_run(instances: &[DownstreamInstance], scorers: Option<&DmScorers<'_, f64>>) -> Result<RunReport> {
    let mut gold = Vec::with_capacity(instances.len());
    let mut pred = Vec::with_capacity(instances.len());
    for inst in instances {
        let z = inst
            .z
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("{}: predictions not projected back", inst.id)))?;
        gold.push(&inst.y);
        pred.push(z);
    }
    let span = span_f1(&gold, &pred)?;
    let token = token_metrics(&gold, &pred)?;
    let (dm_accuracy, dm_coverage) = match scorers {
        Some(s) => {
            let g: Vec<Vec<DmSlot>> = instances.iter().map(|i| i.gold_slots.clone()).collect();
            let p: Vec<Vec<DmSlot>> = instances.iter().map(|i| i.pred_slots.clone()).collect();
            (
                Some(explicit_accuracy_report(&g, &p, s)?),
                Some(coverage_report(&g, &p)?),
            )
        }
        None => (None, None),
    };
    Ok(RunReport {
        instances: instances.len(),
        span,
        token,
        dropped_labels: instances.iter().map(|i| i.dropped_labels).sum(),
        dm_accuracy,
        dm_coverage,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, std) = mean_std(xs);
        MeanStd { mean, std }
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} (± {:.3})", self.mean, self.std)
    }
}

/// Downstream scores over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub runs: usize,
    pub span_f1: MeanStd,
    pub token_accuracy: MeanStd,
    pub token_macro_f1: MeanStd,
}

pub fn summarize_seeds(reports: &[RunReport]) -> SeedSummary {
    let col = |f: fn(&RunReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
    SeedSummary {
        runs: reports.len(),
        span_f1: col(|r| r.span.f1),
        token_accuracy: col(|r| r.token.accuracy),
        token_macro_f1: col(|r| r.token.macro_f1),
    }
}

/// Tokens and BIO labels of a rendered synthetic sample.
pub fn sample_to_labeled(sample: &ArtificialSample) -> Result<LabeledSequence> {
    let tokens = tokenize(&sample.full_text);
    let labels = spans_to_bio(&sample.adu_spans, tokens.len())?;
    Ok(LabeledSequence { tokens, labels })
}
