//! DM augmentation: a rule-based baseline, a client for external models, and
//! training-pair preparation.

pub mod pairs;
pub mod remote;
pub mod rule;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::artificial::RoleClass;
use crate::bio::CorpusSchema;
use crate::error::{Error, Result};

pub use pairs::{
    prepare_discovery_pair, prepare_pdtb_pairs, read_discovery_tsv, read_pdtb_jsonl, DiscoveryPair, ExplicitDm,
    ImplicitDm, PairRecord, PdtbRecord,
};
pub use remote::{RemoteClient, RemoteError};
pub use rule::{rule_based_augment, rule_based_augment_tokens, Augmented, RuleAugmenter};

/// Which augmenter a run uses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmenterKind {
    /// Pass the text through unchanged.
    #[default]
    None,
    Rule,
    Remote(String),
}

impl fmt::Display for AugmenterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmenterKind::None => f.write_str("none"),
            AugmenterKind::Rule => f.write_str("rule"),
            AugmenterKind::Remote(e) => write!(f, "remote({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentRequest {
    pub text: String,
    /// Known ADU start token indices, sorted.
    pub candidate_positions: Option<Vec<usize>>,
    pub augmenter: AugmenterKind,
}

impl AugmentRequest {
    pub fn new(text: impl Into<String>, augmenter: AugmenterKind) -> Self {
        AugmentRequest {
            text: text.into(),
            candidate_positions: None,
            augmenter,
        }
    }

    pub fn with_positions(mut self, positions: Vec<usize>) -> Result<Self> {
        let n = crate::text::tokenize(&self.text).len();
        if positions.windows(2).any(|w| w[0] >= w[1]) || positions.last().is_some_and(|&p| p >= n) {
            return Err(Error::InvalidInput(format!(
                "candidate positions {positions:?} must be sorted and below {n}"
            )));
        }
        self.candidate_positions = Some(positions);
        Ok(self)
    }
}

/// ADU label to role class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMap(BTreeMap<String, RoleClass>);

impl RoleMap {
    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, RoleClass)>) -> Self {
        RoleMap(pairs.into_iter().map(|(l, r)| (l.into(), r)).collect())
    }

    /// Premises count as support: attack roles need relation labels.
    pub fn pec() -> Self {
        Self::new([
            ("MajorClaim", RoleClass::Claim),
            ("Claim", RoleClass::Claim),
            ("Premise", RoleClass::Support),
        ])
    }

    pub fn hotel() -> Self {
        Self::new([
            ("MajorClaim", RoleClass::Claim),
            ("Claim", RoleClass::Claim),
            ("Recommendation", RoleClass::Claim),
            ("Premise", RoleClass::Support),
            ("ImplicitPremise", RoleClass::Support),
            ("Background", RoleClass::Support),
        ])
    }

    pub fn artificial() -> Self {
        Self::new([RoleClass::Claim, RoleClass::Support, RoleClass::Attack].map(|r| (r.label(), r)))
    }

    pub fn for_schema(schema: &CorpusSchema) -> Self {
        match schema.name.as_str() {
            "hotel" => Self::hotel(),
            "artificial" => Self::artificial(),
            _ => Self::pec(),
        }
    }

    pub fn get(&self, label: &str) -> Result<RoleClass> {
        self.0
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnmappedLabel(label.to_string()))
    }
}

impl Default for RoleMap {
    fn default() -> Self {
        Self::pec()
    }
}

impl FromStr for AugmenterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AugmenterKind::None),
            "rule" => Ok(AugmenterKind::Rule),
            "remote" => Err(Error::InvalidInput("the remote augmenter needs an endpoint".into())),
            _ => Err(Error::InvalidInput(format!("unknown augmenter {s:?}"))),
        }
    }
}
