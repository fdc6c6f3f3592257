//! Rule-based augmentation: fill every implicit DM slot from a [`DmPolicy`].

use serde::{Deserialize, Serialize};

use super::RoleMap;
use crate::artificial::{DmPolicy, RoleClass};
use crate::bio::{AduSpan, DmSlot};
use crate::error::Result;
use crate::extract::{gold_dms_left_context, AnnotatedParagraph};
use crate::text::{capitalize_first, decapitalize_first, detokenize, tokenize, TokenSequence};

/// Output of the rule augmenter, with ADU spans re-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Augmented {
    pub tokens: TokenSequence,
    pub adus: Vec<AduSpan>,
    /// The DM inserted before each ADU; empty where nothing was inserted.
    pub inserted: Vec<DmSlot>,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct RuleAugmenter {
    pub policy: DmPolicy,
    pub role_map: RoleMap,
    /// Prefix of the per-ADU draw key (`{prefix}|{adu index}`).
    pub key_prefix: String,
}

impl RuleAugmenter {
    pub fn new(policy: DmPolicy, role_map: RoleMap) -> Self {
        RuleAugmenter {
            policy,
            role_map,
            key_prefix: String::new(),
        }
    }

    pub fn with_key_prefix(mut self, prefix: impl Into<String>) -> Self {
        self.key_prefix = prefix.into();
        self
    }

    pub fn augment(&self, p: &AnnotatedParagraph) -> Result<Augmented> {
        let roles = p
            .adus
            .iter()
            .map(|a| self.role_map.get(&a.label))
            .collect::<Result<Vec<RoleClass>>>()?;
        let existing = gold_dms_left_context(p);

        let mut out: Vec<String> = Vec::with_capacity(p.tokens.len() + 4 * p.adus.len());
        let mut adus = Vec::with_capacity(p.adus.len());
        let mut inserted = Vec::with_capacity(p.adus.len());
        let mut next_adu = 0;

        for (t, tok) in p.tokens.iter().enumerate() {
            let mut decap = false;
            if next_adu < p.adus.len() && p.adus[next_adu].start == t {
                let i = next_adu;
                let adu = &p.adus[i];
                let mut dm_text = String::new();
                if !existing[i].is_explicit() {
                    let initial = p.is_sentence_initial(adu.start);
                    let shares_sentence = p
                        .adus
                        .get(i + 1)
                        .is_some_and(|n| p.sentence_start_of(n.start) == p.sentence_start_of(adu.start));
                    let lead = initial && !shares_sentence && roles[i] != RoleClass::Claim;
                    let key = format!("{}|{}", self.key_prefix, i);
                    let dm = self.policy.choose(roles[i], lead, &key);
                    if !dm.is_empty() {
                        let dm = if initial { capitalize_first(dm) } else { dm.to_string() };
                        out.extend(tokenize(&dm).into_inner());
                        if lead {
                            out.push(",".into());
                        }
                        decap = initial;
                        dm_text = dm;
                    }
                }
                inserted.push(DmSlot::new(i, dm_text));
                let start = out.len();
                adus.push(AduSpan::new(start, start + adu.len(), adu.label.clone()));
                next_adu += 1;
            }
            out.push(if decap { decapitalize_first(tok) } else { tok.clone() });
        }

        let tokens = TokenSequence::from_vec_unchecked(out);
        let text = detokenize(&tokens);
        Ok(Augmented {
            tokens,
            adus,
            inserted,
            text,
        })
    }
}

/// Augmented text for `p`; explicit DMs already present stay as they are.
pub fn rule_based_augment(p: &AnnotatedParagraph, policy: &DmPolicy, role_map: &RoleMap) -> Result<String> {
    Ok(rule_based_augment_tokens(p, policy, role_map)?.text)
}

pub fn rule_based_augment_tokens(p: &AnnotatedParagraph, policy: &DmPolicy, role_map: &RoleMap) -> Result<Augmented> {
    RuleAugmenter::new(policy.clone(), role_map.clone()).augment(p)
}
