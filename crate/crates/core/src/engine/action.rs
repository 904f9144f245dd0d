use std::fmt;

use serde::{Deserialize, Serialize};

use super::card::{Card, Color};
use super::knowledge::CardKnowledge;

/// A move by the current player. Slots index the acting player's hand,
/// oldest card first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    Play { slot: u8 },
    Discard { slot: u8 },
    HintColor { target: u8, color: Color },
    HintRank { target: u8, rank: u8 },
}

impl Action {
    pub fn is_hint(&self) -> bool {
        matches!(self, Action::HintColor { .. } | Action::HintRank { .. })
    }

    pub fn is_play(&self) -> bool {
        matches!(self, Action::Play { .. })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Play { slot } => write!(f, "play {slot}"),
            Action::Discard { slot } => write!(f, "discard {slot}"),
            Action::HintColor { target, color } => write!(f, "hint p{target} {color}"),
            Action::HintRank { target, rank } => write!(f, "hint p{target} {rank}"),
        }
    }
}

/// What an action did. Everything here is public information.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    /// The played card is revealed; `knowledge` is the player's knowledge at
    /// the moment of play.
    Played { card: Card, knowledge: CardKnowledge, success: bool },
    Discarded { card: Card, knowledge: CardKnowledge },
    Hinted { touched: Vec<u8> },
}

/// One completed turn as every player observed it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnEvent {
    pub turn: u32,
    pub player: u8,
    pub action: Action,
    /// Hint tokens available when the turn started.
    pub tokens_before: u8,
    pub lives_before: u8,
    pub outcome: Outcome,
    /// Whether a replacement card was drawn.
    pub drew: bool,
}
