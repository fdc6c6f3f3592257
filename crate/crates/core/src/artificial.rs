//! Template-based synthetic dataset: claim/premise seeds rendered into short
//! arguments where every ADU is preceded by a role-appropriate DM.
//!
//! Two-ADU samples follow `dm1 X1, dm2 X2.`; three-ADU samples follow
//! `dm1 X1, dm2 X2. Dm3, X3.` The claim always sits in the first sentence.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bio::AduSpan;
use crate::error::{Error, Result};
use crate::text::{capitalize_first, decapitalize_first, tokenize};

pub const STANCE_PLACEHOLDER: &str = "<STANCE>";
pub const DEFAULT_MASK: &str = "<mask>";
pub const DEFAULT_SEED: u64 = 2023;

/// Claim/stance/premise seed for one instantiation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreElements {
    pub copa_id: String,
    pub claim_template: String,
    pub original_stance: String,
    pub opposite_stance: String,
    pub premise_support: String,
    pub premise_attack: String,
}

impl CoreElements {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidCore {
                copa_id: self.copa_id.clone(),
                reason: reason.to_string(),
            })
        };
        let fields = [
            &self.copa_id,
            &self.claim_template,
            &self.original_stance,
            &self.opposite_stance,
            &self.premise_support,
            &self.premise_attack,
        ];
        if fields.iter().any(|f| f.trim().is_empty()) {
            return bad("all fields must be non-empty");
        }
        match self.claim_template.matches(STANCE_PLACEHOLDER).count() {
            1 => Ok(()),
            0 => bad("claim template has no <STANCE> placeholder"),
            _ => bad("claim template has more than one <STANCE> placeholder"),
        }
    }

    pub fn claim(&self, stance: Stance) -> String {
        let word = match stance {
            Stance::Original => &self.original_stance,
            Stance::Opposite => &self.opposite_stance,
        };
        clean_adu(&self.claim_template.replace(STANCE_PLACEHOLDER, word.trim()))
    }

    /// Premise text playing `role` towards the claim under `stance`. The
    /// opposite stance swaps which premise supports and which attacks.
    pub fn premise(&self, role: RoleClass, stance: Stance) -> String {
        let supporting = matches!(
            (role, stance),
            (RoleClass::Support, Stance::Original) | (RoleClass::Attack, Stance::Opposite)
        );
        clean_adu(if supporting {
            &self.premise_support
        } else {
            &self.premise_attack
        })
    }
}

/// ADU text as it appears after a DM: trimmed, no final period, lowercase
/// initial.
fn clean_adu(s: &str) -> String {
    let s = s.trim();
    let s = s.strip_suffix('.').unwrap_or(s).trim_end();
    decapitalize_first(s)
}

macro_rules! text_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::InvalidInput(format!(
                        concat!("unknown ", stringify!($name), " {:?}"), s
                    ))),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Original,
    Opposite,
}
text_enum!(Stance { Original => "original", Opposite => "opposite" });

/// Role of an ADU for DM selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleClass {
    Claim,
    Support,
    Attack,
}
text_enum!(RoleClass { Claim => "claim", Support => "support", Attack => "attack" });

impl RoleClass {
    /// ADU label used in synthetic samples.
    pub fn label(self) -> &'static str {
        match self {
            RoleClass::Claim => "Claim",
            RoleClass::Support => "Support",
            RoleClass::Attack => "Attack",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AduCount {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Position {
    #[serde(rename = "1")]
    First,
    #[serde(rename = "2")]
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PremiseRole {
    Support,
    Attack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionType {
    Dm1,
    Dm2,
    Dm3,
}

impl PredictionType {
    /// Zero-based ADU position whose DM is masked.
    pub fn index(self) -> usize {
        self as usize
    }
}

/// One point of the template parameter space. Field order is the sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TemplateConfig {
    pub num_adus: AduCount,
    pub stance_role: Stance,
    pub claim_position: Position,
    pub premise_role: Option<PremiseRole>,
    pub supportive_premise_position: Option<Position>,
    pub prediction_type: PredictionType,
}

impl TemplateConfig {
    pub fn validate(&self) -> Result<()> {
        let two = self.num_adus == AduCount::Two;
        if two && self.prediction_type == PredictionType::Dm3 {
            return Err(Error::InvalidConfig("dm3 needs three ADUs".into()));
        }
        if two != self.premise_role.is_some() {
            return Err(Error::InvalidConfig(
                "premise_role is set exactly when there are two ADUs".into(),
            ));
        }
        if two == self.supportive_premise_position.is_some() {
            return Err(Error::InvalidConfig(
                "supportive_premise_position is set exactly when there are three ADUs".into(),
            ));
        }
        Ok(())
    }

    /// Stable identifier, used to key the DM draw.
    pub fn key(&self) -> String {
        let n = match self.num_adus {
            AduCount::Two => 2,
            AduCount::Three => 3,
        };
        let pos = |p: Position| if p == Position::First { 1 } else { 2 };
        let mut k = format!("{n}-{}-c{}", self.stance_role, pos(self.claim_position));
        if let Some(r) = self.premise_role {
            k.push_str(match r {
                PremiseRole::Support => "-support",
                PremiseRole::Attack => "-attack",
            });
        }
        if let Some(p) = self.supportive_premise_position {
            k.push_str(&format!("-s{}", pos(p)));
        }
        k.push_str(&format!("-dm{}", self.prediction_type.index() + 1));
        k
    }
}

/// Full cartesian product of valid configurations for the given stances,
/// sorted by field tuple.
pub fn enumerate_configs(stance_roles: &BTreeSet<Stance>) -> Result<Vec<TemplateConfig>> {
    if stance_roles.is_empty() {
        return Err(Error::InvalidInput("stance_roles must not be empty".into()));
    }
    let positions = [Position::First, Position::Second];
    let mut out = Vec::new();
    for &stance_role in stance_roles {
        for claim_position in positions {
            for role in [PremiseRole::Support, PremiseRole::Attack] {
                for prediction_type in [PredictionType::Dm1, PredictionType::Dm2] {
                    out.push(TemplateConfig {
                        num_adus: AduCount::Two,
                        stance_role,
                        claim_position,
                        premise_role: Some(role),
                        supportive_premise_position: None,
                        prediction_type,
                    });
                }
            }
            for support_pos in positions {
                for prediction_type in [PredictionType::Dm1, PredictionType::Dm2, PredictionType::Dm3] {
                    out.push(TemplateConfig {
                        num_adus: AduCount::Three,
                        stance_role,
                        claim_position,
                        premise_role: None,
                        supportive_premise_position: Some(support_pos),
                        prediction_type,
                    });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// DM sets per role and position, plus the seed of the within-set draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmPolicy {
    pub claim_dms: Vec<String>,
    pub support_mid_dms: Vec<String>,
    pub support_lead_dms: Vec<String>,
    pub attack_mid_dms: Vec<String>,
    pub attack_lead_dms: Vec<String>,
    pub seed: u64,
}

impl Default for DmPolicy {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        DmPolicy {
            claim_dms: v(&["I think that", "in my opinion", "I believe that"]),
            support_mid_dms: v(&["because", "since", "given that"]),
            support_lead_dms: v(&["moreover", "furthermore", "indeed"]),
            attack_mid_dms: v(&["although", "even though", "even if"]),
            attack_lead_dms: v(&["however", "on the other hand", "conversely"]),
            seed: DEFAULT_SEED,
        }
    }
}

impl DmPolicy {
    pub fn with_seed(seed: u64) -> Self {
        DmPolicy {
            seed,
            ..Self::default()
        }
    }

    /// One DM per set, for fully predictable output.
    pub fn fixed(claim: &str, support_mid: &str, support_lead: &str, attack_mid: &str, attack_lead: &str) -> Self {
        DmPolicy {
            claim_dms: vec![claim.into()],
            support_mid_dms: vec![support_mid.into()],
            support_lead_dms: vec![support_lead.into()],
            attack_mid_dms: vec![attack_mid.into()],
            attack_lead_dms: vec![attack_lead.into()],
            seed: DEFAULT_SEED,
        }
    }

    /// A policy that never inserts anything.
    pub fn empty() -> Self {
        DmPolicy {
            claim_dms: vec![],
            support_mid_dms: vec![],
            support_lead_dms: vec![],
            attack_mid_dms: vec![],
            attack_lead_dms: vec![],
            seed: DEFAULT_SEED,
        }
    }

    /// The set for `role`; `lead` selects the sentence-leading (`Dm3, X3`)
    /// position. Claims use one set everywhere.
    pub fn set(&self, role: RoleClass, lead: bool) -> &[String] {
        match (role, lead) {
            (RoleClass::Claim, _) => &self.claim_dms,
            (RoleClass::Support, false) => &self.support_mid_dms,
            (RoleClass::Support, true) => &self.support_lead_dms,
            (RoleClass::Attack, false) => &self.attack_mid_dms,
            (RoleClass::Attack, true) => &self.attack_lead_dms,
        }
    }

    /// Seeded draw from the set, keyed so the same key always yields the same
    /// DM. Empty sets yield `""`.
    pub fn choose(&self, role: RoleClass, lead: bool, key: &str) -> &str {
        let set = self.set(role, lead);
        if set.is_empty() {
            return "";
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(key.as_bytes()));
        &set[rng.gen_range(0..set.len())]
    }

    pub fn contains(&self, role: RoleClass, lead: bool, dm: &str) -> bool {
        self.set(role, lead).iter().any(|d| d.eq_ignore_ascii_case(dm.trim()))
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One ADU in a rendered template, with the DM that precedes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedAdu {
    pub role: RoleClass,
    pub text: String,
    /// Surface form (capitalized when sentence-initial); empty if none.
    pub dm: String,
    pub sentence: usize,
    /// `Dm3, X3` position: the DM leads the sentence and takes a comma.
    pub lead: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtificialSample {
    pub core: Arc<CoreElements>,
    pub config: TemplateConfig,
    pub adus: Vec<RenderedAdu>,
    pub full_text: String,
    pub masked_text: String,
    pub mask: String,
    pub gold_dm: String,
    /// The same text with every DM removed.
    pub dm_free_text: String,
    pub adu_spans: Vec<AduSpan>,
}

impl ArtificialSample {
    /// Replaces the mask with `fill`.
    pub fn unmask(&self, fill: &str) -> String {
        self.masked_text.replacen(&self.mask, fill, 1)
    }

    pub fn dms(&self) -> Vec<&str> {
        self.adus.iter().map(|a| a.dm.as_str()).collect()
    }
}

/// Text variants composed from a layout.
enum Variant<'a> {
    Full,
    Masked(usize, &'a str),
    DmFree,
}

fn compose(adus: &[RenderedAdu], variant: Variant<'_>) -> (String, Vec<String>, Vec<AduSpan>) {
    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut spans = Vec::new();
    let n_sent = adus.iter().map(|a| a.sentence + 1).max().unwrap_or(0);

    for s in 0..n_sent {
        let mut pieces = Vec::new();
        for (k, (i, adu)) in adus.iter().enumerate().filter(|(_, a)| a.sentence == s).enumerate() {
            if k > 0 {
                tokens.push(",".into());
            }
            let dm = match variant {
                Variant::Full => adu.dm.clone(),
                Variant::Masked(m, mask) if m == i => mask.to_string(),
                Variant::Masked(..) => adu.dm.clone(),
                Variant::DmFree => String::new(),
            };
            let mut piece = String::new();
            let mut text = adu.text.clone();
            if dm.is_empty() {
                if k == 0 {
                    text = capitalize_first(&text);
                }
            } else {
                piece.push_str(&dm);
                tokens.extend(tokenize(&dm).into_inner());
                if adu.lead {
                    piece.push(',');
                    tokens.push(",".into());
                }
                piece.push(' ');
            }
            piece.push_str(&text);
            let start = tokens.len();
            tokens.extend(tokenize(&text).into_inner());
            spans.push(AduSpan::new(start, tokens.len(), adu.role.label()));
            pieces.push(piece);
        }
        tokens.push(".".into());
        sentences.push(format!("{}.", pieces.join(", ")));
    }
    (sentences.join(" "), tokens, spans)
}

/// Orders the ADUs of a configuration and draws their DMs.
fn layout(core: &CoreElements, config: &TemplateConfig, policy: &DmPolicy) -> Vec<RenderedAdu> {
    let stance = config.stance_role;
    let claim = (RoleClass::Claim, core.claim(stance));
    let mut adus: Vec<(RoleClass, String, usize, bool)> = Vec::new();

    match config.num_adus {
        AduCount::Two => {
            let role = match config.premise_role.unwrap_or(PremiseRole::Support) {
                PremiseRole::Support => RoleClass::Support,
                PremiseRole::Attack => RoleClass::Attack,
            };
            let premise = (role, core.premise(role, stance));
            let pair = match config.claim_position {
                Position::First => [claim, premise],
                Position::Second => [premise, claim],
            };
            adus.extend(pair.into_iter().map(|(r, t)| (r, t, 0, false)));
        }
        AduCount::Three => {
            let (first, second) = match config.supportive_premise_position.unwrap_or(Position::First) {
                Position::First => (RoleClass::Support, RoleClass::Attack),
                Position::Second => (RoleClass::Attack, RoleClass::Support),
            };
            let inner = (first, core.premise(first, stance));
            let pair = match config.claim_position {
                Position::First => [claim, inner],
                Position::Second => [inner, claim],
            };
            adus.extend(pair.into_iter().map(|(r, t)| (r, t, 0, false)));
            adus.push((second, core.premise(second, stance), 1, true));
        }
    }

    let mut first_in_sentence = HashSet::new();
    adus.into_iter()
        .enumerate()
        .map(|(i, (role, text, sentence, lead))| {
            let key = format!("{}|{}|{}", core.copa_id, config.key(), i);
            let dm = policy.choose(role, lead, &key);
            let initial = first_in_sentence.insert(sentence);
            let dm = if initial { capitalize_first(dm) } else { dm.to_string() };
            RenderedAdu {
                role,
                text,
                dm,
                sentence,
                lead,
            }
        })
        .collect()
}

pub fn render_sample(core: &CoreElements, config: &TemplateConfig, policy: &DmPolicy) -> Result<ArtificialSample> {
    render_sample_with_mask(Arc::new(core.clone()), config, policy, DEFAULT_MASK)
}

pub fn render_sample_with_mask(
    core: Arc<CoreElements>,
    config: &TemplateConfig,
    policy: &DmPolicy,
    mask: &str,
) -> Result<ArtificialSample> {
    core.validate()?;
    config.validate()?;
    let adus = layout(&core, config, policy);
    let (full_text, tokens, adu_spans) = compose(&adus, Variant::Full);
    if tokenize(&full_text).tokens() != tokens.as_slice() {
        return Err(Error::InvalidCore {
            copa_id: core.copa_id.clone(),
            reason: "ADU texts do not tokenize independently of their context".into(),
        });
    }
    let masked_index = config.prediction_type.index();
    let (masked_text, _, _) = compose(&adus, Variant::Masked(masked_index, mask));
    let (dm_free_text, _, _) = compose(&adus, Variant::DmFree);
    let gold_dm = adus[masked_index].dm.clone();
    Ok(ArtificialSample {
        core,
        config: *config,
        adus,
        full_text,
        masked_text,
        mask: mask.to_string(),
        gold_dm,
        dm_free_text,
        adu_spans,
    })
}

/// Renders every configuration for every core, in core order then config
/// order.
pub fn generate_split(
    cores: &[CoreElements],
    stance_roles: &BTreeSet<Stance>,
    policy: &DmPolicy,
    mask: &str,
) -> Result<Vec<ArtificialSample>> {
    if cores.is_empty() {
        return Err(Error::InvalidInput("no core elements".into()));
    }
    let mut seen = HashSet::new();
    for c in cores {
        if !seen.insert(c.copa_id.as_str()) {
            return Err(Error::DuplicateCopa(c.copa_id.clone()));
        }
    }
    let configs = enumerate_configs(stance_roles)?;
    let per_core: Vec<Vec<ArtificialSample>> = cores
        .par_iter()
        .map(|c| {
            let core = Arc::new(c.clone());
            configs
                .iter()
                .map(|cfg| render_sample_with_mask(core.clone(), cfg, policy, mask))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_core.into_iter().flatten().collect())
}

/// Training pair for end-to-end augmentation: DM-free input, full output.
pub fn make_e2e_pair(sample: &ArtificialSample) -> (String, String) {
    (sample.dm_free_text.clone(), sample.full_text.clone())
}

/// Record emitted for each generated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub split: String,
    pub copa_id: String,
    #[serde(flatten)]
    pub config: TemplateConfig,
    pub full_text: String,
    pub masked_text: String,
    pub gold_dm: String,
    pub input_text: String,
    pub output_text: String,
    pub adu_spans: Vec<AduSpan>,
}

impl SampleRecord {
    pub fn new(split: &str, sample: &ArtificialSample) -> Self {
        let (input_text, output_text) = make_e2e_pair(sample);
        SampleRecord {
            split: split.to_string(),
            copa_id: sample.core.copa_id.clone(),
            config: sample.config,
            full_text: sample.full_text.clone(),
            masked_text: sample.masked_text.clone(),
            gold_dm: sample.gold_dm.clone(),
            input_text,
            output_text,
            adu_spans: sample.adu_spans.clone(),
        }
    }
}

/// Reads core elements from tab-separated lines (`copa_id`, `claim_template`,
/// `original_stance`, `opposite_stance`, `premise_support`, `premise_attack`).
/// Blank lines, `#` comments and a `copa_id` header line are skipped.
pub fn read_cores_tsv<R: BufRead>(reader: R, source: &str) -> Result<Vec<CoreElements>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("copa_id\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 6 {
            return Err(Error::parse(
                source,
                n + 1,
                format!("expected 6 columns, found {}", cols.len()),
            ));
        }
        let core = CoreElements {
            copa_id: cols[0].into(),
            claim_template: cols[1].into(),
            original_stance: cols[2].into(),
            opposite_stance: cols[3].into(),
            premise_support: cols[4].into(),
            premise_attack: cols[5].into(),
        };
        core.validate()
            .map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
        out.push(core);
    }
    Ok(out)
}

/// Reads core elements from JSON lines.
pub fn read_cores_jsonl<R: BufRead>(reader: R, source: &str) -> Result<Vec<CoreElements>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let core: CoreElements = serde_json::from_str(&line).map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
        core.validate()
            .map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
        out.push(core);
    }
    Ok(out)
}

/// The bundled demonstration cores.
pub fn demo_cores() -> Vec<CoreElements> {
    read_cores_tsv(crate::data::DEMO_CORES.as_bytes(), "demo_cores.tsv").expect("bundled cores are valid")
}
