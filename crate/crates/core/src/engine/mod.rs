//! Deterministic two-to-five player Hanabi.

mod action;
mod card;
mod game;
mod knowledge;
mod record;
mod state;
mod view;

use thiserror::Error;

pub use action::{Action, Outcome, TurnEvent};
pub use card::{full_deck, Card, Color, COPIES_PER_RANK, DECK_SIZE, MAX_RANK, NUM_COLORS, NUM_IDENTITIES};
pub use game::{
    play_game, play_game_from, play_game_recorded, Agent, GameError, GameOutcome, GameRecord, GameStart,
    RecordedTurn,
};
pub use knowledge::CardKnowledge;
pub use record::{recount_stats, RECORD_SCHEMA};
pub use state::{starting_player, GameConfig, GameState, Hand, MAX_HINT_TOKENS, MAX_LIVES};
pub use view::PlayerView;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("player count {0} outside 2..=5")]
    InvalidPlayerCount(u8),
    #[error("illegal action {action}: {reason}")]
    IllegalAction { action: Action, reason: &'static str },
    #[error("game is already over")]
    Terminal,
    #[error("invalid state: {0}")]
    InvalidState(String),
}
