//! Behavior descriptors: information per play (IPP) and communicativeness.
//!
//! Both are computed from [`PlayStats`], which only ever reads public
//! information: the knowledge sets of a card at the moment it is played and
//! the hint-token count at the start of a turn.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Outcome, TurnEvent};

/// Default grid resolution on each axis.
pub const DEFAULT_BINS: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlayStats {
    /// Sum over played cards of known pieces (color, rank), each 0..=2.
    pub pieces_known_sum: u64,
    pub cards_played: u64,
    pub hints_given: u64,
    /// Turns that started with at least one hint token.
    pub turns_with_token: u64,
}

impl PlayStats {
    /// Fold one of the tracked player's turns into the counters.
    pub fn record_turn(&mut self, event: &TurnEvent) {
        if event.tokens_before > 0 {
            self.turns_with_token += 1;
            if event.action.is_hint() {
                self.hints_given += 1;
            }
        }
        if let Outcome::Played { knowledge, .. } = &event.outcome {
            self.cards_played += 1;
            self.pieces_known_sum += knowledge.pieces_known() as u64;
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.pieces_known_sum <= 2 * self.cards_played && self.hints_given <= self.turns_with_token
    }

    pub fn descriptor(&self) -> Result<BehaviorDescriptor, DescriptorError> {
        descriptor(self)
    }
}

impl Add for PlayStats {
    type Output = PlayStats;

    fn add(self, rhs: PlayStats) -> PlayStats {
        PlayStats {
            pieces_known_sum: self.pieces_known_sum + rhs.pieces_known_sum,
            cards_played: self.cards_played + rhs.cards_played,
            hints_given: self.hints_given + rhs.hints_given,
            turns_with_token: self.turns_with_token + rhs.turns_with_token,
        }
    }
}

impl AddAssign for PlayStats {
    fn add_assign(&mut self, rhs: PlayStats) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for PlayStats {
    fn sum<I: Iterator<Item = PlayStats>>(iter: I) -> PlayStats {
        iter.fold(PlayStats::default(), Add::add)
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("no card was played, information per play is undefined")]
    NoPlays,
    #[error("no turn started with a hint token, communicativeness is undefined")]
    NoTokenTurns,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorDescriptor {
    pub ipp: f64,
    pub communicativeness: f64,
}

impl BehaviorDescriptor {
    pub fn new(ipp: f64, communicativeness: f64) -> BehaviorDescriptor {
        BehaviorDescriptor { ipp, communicativeness }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.ipp) && (0.0..=1.0).contains(&self.communicativeness)
    }
}

pub fn descriptor(stats: &PlayStats) -> Result<BehaviorDescriptor, DescriptorError> {
    if stats.cards_played == 0 {
        return Err(DescriptorError::NoPlays);
    }
    if stats.turns_with_token == 0 {
        return Err(DescriptorError::NoTokenTurns);
    }
    Ok(BehaviorDescriptor {
        ipp: stats.pieces_known_sum as f64 / (2 * stats.cards_played) as f64,
        communicativeness: stats.hints_given as f64 / stats.turns_with_token as f64,
    })
}

/// A cell of the behavior grid: `i` on the IPP axis, `j` on the
/// communicativeness axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NicheIndex {
    pub i: usize,
    pub j: usize,
}

impl NicheIndex {
    pub fn new(i: usize, j: usize) -> NicheIndex {
        NicheIndex { i, j }
    }

    /// Descriptor coordinates of the cell center.
    pub fn center(&self, bins: usize) -> (f64, f64) {
        (
            (self.i as f64 + 0.5) / bins as f64,
            (self.j as f64 + 0.5) / bins as f64,
        )
    }
}

impl std::fmt::Display for NicheIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Largest `k < bins` with `k / bins <= value`.
///
/// Boundaries are compared against `k as f64 / bins as f64` rather than by
/// flooring `value * bins`, so a value sitting exactly on a decimal boundary
/// (0.05, 0.35, ...) always lands in the upper bin regardless of rounding in
/// the product.
pub fn axis_bin(value: f64, bins: usize) -> usize {
    assert!(bins > 0);
    let b = bins as f64;
    let mut k = (value * b).floor().clamp(0.0, (bins - 1) as f64) as usize;
    while k + 1 < bins && ((k + 1) as f64 / b) <= value {
        k += 1;
    }
    while k > 0 && (k as f64 / b) > value {
        k -= 1;
    }
    k
}

pub fn niche(descriptor: &BehaviorDescriptor, bins: usize) -> NicheIndex {
    NicheIndex {
        i: axis_bin(descriptor.ipp, bins),
        j: axis_bin(descriptor.communicativeness, bins),
    }
}
