use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RuleId;
use crate::io::{check_schema, FormatError, SCHEMA_VERSION};

pub const CATALOG_SCHEMA: &str = "hanabi-qd/rule-catalog";
/// Semantics version of [`RuleCatalog::standard`].
pub const CATALOG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Play,
    Tell,
    Discard,
}

/// Rule behaviors. Thresholds are in tenths so comparisons stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RuleKind {
    /// Play a card that is playable with certainty.
    PlayIfCertain,
    /// Play the most likely playable card if its probability exceeds the threshold.
    PlayProbability { tenths: u8 },
    /// Play the card touched by the most recent hint unless it is certainly unplayable.
    PlayMostRecentlyHinted,
    /// Hint a partner's playable card the partner does not fully know.
    TellAboutPlayableCard,
    /// Hint a dead card its holder cannot yet recognize as dead.
    TellAboutUselessCard,
    /// The legal hint that removes the most possibilities.
    TellMostInformation,
    /// Hint 1s whose rank is not known.
    TellAboutOnes,
    /// Hint 5s whose rank is not known.
    TellAboutFives,
    /// A uniformly random legal hint.
    TellRandomly,
    /// Color hint on the first card whose color is unknown.
    TellToSetSingletonColor,
    /// Rank hint on the first card whose rank is unknown.
    TellToSetSingletonRank,
    /// Rank hint on the first card nothing is known about.
    TellUnknownCard,
    /// Rank hint on a last remaining copy whose rank is unknown.
    TellAboutCriticalCard,
    DiscardOldest,
    DiscardRandom,
    /// Discard a card that is certainly dead.
    DiscardUseless,
    /// Discard the card most likely dead if that probability reaches the threshold.
    DiscardProbabilityUseless { tenths: u8 },
    /// Discard the card with the highest expected rank.
    DiscardHighestRank,
    /// Discard the card with the most remaining possibilities.
    DiscardLeastInformation,
    /// Discard the oldest card no hint has touched directly.
    DiscardOldestUnhinted,
}

impl RuleKind {
    pub fn family(&self) -> Family {
        use RuleKind::*;
        match self {
            PlayIfCertain | PlayProbability { .. } | PlayMostRecentlyHinted => Family::Play,
            TellAboutPlayableCard | TellAboutUselessCard | TellMostInformation | TellAboutOnes
            | TellAboutFives | TellRandomly | TellToSetSingletonColor | TellToSetSingletonRank
            | TellUnknownCard | TellAboutCriticalCard => Family::Tell,
            DiscardOldest | DiscardRandom | DiscardUseless | DiscardProbabilityUseless { .. }
            | DiscardHighestRank | DiscardLeastInformation | DiscardOldestUnhinted => Family::Discard,
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::PlayProbability { tenths } => write!(f, "PlayProbability(0.{tenths})"),
            RuleKind::DiscardProbabilityUseless { tenths } => {
                write!(f, "DiscardProbabilityUseless({:.1})", *tenths as f64 / 10.0)
            }
            other => write!(f, "{other:?}"),
        }
    }
}

/// Extra condition on the table state that must hold for a rule to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", content = "k", rename_all = "snake_case")]
pub enum Gate {
    Always,
    LivesAtLeast(u8),
    TokensAbove(u8),
    TokensBelow(u8),
}

impl Gate {
    #[inline]
    pub fn admits(&self, tokens: u8, lives: u8) -> bool {
        match *self {
            Gate::Always => true,
            Gate::LivesAtLeast(k) => lives >= k,
            Gate::TokensAbove(k) => tokens > k,
            Gate::TokensBelow(k) => tokens < k,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Always => Ok(()),
            Gate::LivesAtLeast(k) => write!(f, " [lives>={k}]"),
            Gate::TokensAbove(k) => write!(f, " [tokens>{k}]"),
            Gate::TokensBelow(k) => write!(f, " [tokens<{k}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: RuleId,
    pub family: Family,
    #[serde(flatten)]
    pub kind: RuleKind,
    pub condition: Gate,
    pub name: String,
}

/// Ordered, immutable list of rules. A [`RuleId`] indexes into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleCatalog {
    version: u32,
    rules: Vec<Rule>,
}

#[derive(Serialize, Deserialize)]
struct CatalogDoc {
    schema: String,
    version: u32,
    catalog_version: u32,
    rules: Vec<Rule>,
}

const PLAY_GATES: [Gate; 3] = [Gate::Always, Gate::LivesAtLeast(2), Gate::LivesAtLeast(3)];
const TELL_GATES: [Gate; 6] = [
    Gate::Always,
    Gate::TokensAbove(0),
    Gate::TokensAbove(1),
    Gate::TokensAbove(2),
    Gate::TokensAbove(4),
    Gate::TokensAbove(6),
];
const DISCARD_GATES: [Gate; 5] = [
    Gate::Always,
    Gate::TokensBelow(7),
    Gate::TokensBelow(6),
    Gate::TokensBelow(4),
    Gate::TokensBelow(2),
];

impl RuleCatalog {
    /// The default 139-rule catalog:
    ///
    /// * play (34): `PlayIfCertain`, then `PlayProbability(0.0..=0.9)` and
    ///   `PlayMostRecentlyHinted` under each of three life conditions;
    /// * tell (60): ten hint rules under six token conditions;
    /// * discard (45): nine discard rules under five token conditions.
    pub fn standard() -> RuleCatalog {
        use RuleKind::*;
        let mut specs: Vec<(RuleKind, Gate)> = vec![(PlayIfCertain, Gate::Always)];
        for gate in PLAY_GATES {
            for tenths in 0..10 {
                specs.push((PlayProbability { tenths }, gate));
            }
            specs.push((PlayMostRecentlyHinted, gate));
        }
        let tells = [
            TellAboutPlayableCard,
            TellAboutUselessCard,
            TellMostInformation,
            TellAboutOnes,
            TellAboutFives,
            TellRandomly,
            TellToSetSingletonColor,
            TellToSetSingletonRank,
            TellUnknownCard,
            TellAboutCriticalCard,
        ];
        for kind in tells {
            for gate in TELL_GATES {
                specs.push((kind, gate));
            }
        }
        let discards = [
            DiscardOldest,
            DiscardRandom,
            DiscardUseless,
            DiscardProbabilityUseless { tenths: 6 },
            DiscardProbabilityUseless { tenths: 8 },
            DiscardProbabilityUseless { tenths: 10 },
            DiscardHighestRank,
            DiscardLeastInformation,
            DiscardOldestUnhinted,
        ];
        for kind in discards {
            for gate in DISCARD_GATES {
                specs.push((kind, gate));
            }
        }
        RuleCatalog::from_specs(CATALOG_VERSION, specs)
    }

    pub fn from_specs(version: u32, specs: Vec<(RuleKind, Gate)>) -> RuleCatalog {
        let rules = specs
            .into_iter()
            .enumerate()
            .map(|(i, (kind, condition))| Rule {
                id: RuleId(i as u16),
                family: kind.family(),
                kind,
                condition,
                name: format!("{kind}{condition}"),
            })
            .collect();
        RuleCatalog { version, rules }
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn get(&self, id: RuleId) -> Option<&Rule> {
        self.rules.get(id.0 as usize)
    }

    /// First rule with the given behavior and condition.
    pub fn find(&self, kind: RuleKind, condition: Gate) -> Option<RuleId> {
        self.rules.iter().find(|r| r.kind == kind && r.condition == condition).map(|r| r.id)
    }

    pub fn to_json(&self) -> String {
        let doc = CatalogDoc {
            schema: CATALOG_SCHEMA.to_string(),
            version: SCHEMA_VERSION,
            catalog_version: self.version,
            rules: self.rules.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("catalog serializes")
    }

    pub fn from_json(text: &str) -> Result<RuleCatalog, FormatError> {
        let doc: CatalogDoc = serde_json::from_str(text)?;
        check_schema(CATALOG_SCHEMA, &doc.schema, doc.version)?;
        for (i, rule) in doc.rules.iter().enumerate() {
            if rule.id.0 as usize != i {
                return Err(FormatError::Malformed(format!("rule at position {i} has id {}", rule.id.0)));
            }
            if rule.family != rule.kind.family() {
                return Err(FormatError::Malformed(format!("rule {i} family mismatch")));
            }
        }
        Ok(RuleCatalog { version: doc.catalog_version, rules: doc.rules })
    }

    /// SHA-256 of the serialized catalog; pins rule semantics.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
