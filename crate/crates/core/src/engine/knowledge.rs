use serde::{Deserialize, Serialize};

use super::card::{rank_bit, Card, Color, MAX_RANK};

pub(crate) const ALL_COLORS_MASK: u8 = 0b1_1111;
pub(crate) const ALL_RANKS_MASK: u8 = 0b1_1111;

/// What a card's holder can deduce from hints received so far.
///
/// `colors` and `ranks` are bitmasks: bit `c` set means color index `c` is
/// still possible; bit `r - 1` set means rank `r` is still possible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CardKnowledge {
    pub colors: u8,
    pub ranks: u8,
    pub color_hinted: bool,
    pub rank_hinted: bool,
    /// Turn of the latest hint that touched this card.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hinted_turn: Option<u32>,
}

impl Default for CardKnowledge {
    fn default() -> Self {
        CardKnowledge {
            colors: ALL_COLORS_MASK,
            ranks: ALL_RANKS_MASK,
            color_hinted: false,
            rank_hinted: false,
            hinted_turn: None,
        }
    }
}

impl CardKnowledge {
    #[inline]
    pub fn knows_color(&self) -> bool {
        self.colors.count_ones() == 1
    }

    #[inline]
    pub fn knows_rank(&self) -> bool {
        self.ranks.count_ones() == 1
    }

    #[inline]
    pub fn is_fully_known(&self) -> bool {
        self.knows_color() && self.knows_rank()
    }

    /// Known identity pieces (0, 1 or 2) as counted for information-per-play.
    #[inline]
    pub fn pieces_known(&self) -> u8 {
        self.knows_color() as u8 + self.knows_rank() as u8
    }

    pub fn known_color(&self) -> Option<Color> {
        self.knows_color().then(|| Color::from_index(self.colors.trailing_zeros() as usize))
    }

    pub fn known_rank(&self) -> Option<u8> {
        self.knows_rank().then(|| self.ranks.trailing_zeros() as u8 + 1)
    }

    #[inline]
    pub fn color_possible(&self, color: Color) -> bool {
        self.colors & color.bit() != 0
    }

    #[inline]
    pub fn rank_possible(&self, rank: u8) -> bool {
        self.ranks & rank_bit(rank) != 0
    }

    #[inline]
    pub fn admits(&self, card: Card) -> bool {
        self.color_possible(card.color) && self.rank_possible(card.rank)
    }

    /// Number of identities the possibility sets still allow.
    #[inline]
    pub fn identity_count(&self) -> u32 {
        self.colors.count_ones() * self.ranks.count_ones()
    }

    /// True when no hint, positive or negative, has touched this card.
    #[inline]
    pub fn is_blank(&self) -> bool {
        self.colors == ALL_COLORS_MASK && self.ranks == ALL_RANKS_MASK
    }

    pub fn possible_ranks(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=MAX_RANK).filter(move |&r| self.rank_possible(r))
    }

    pub fn possible_colors(&self) -> impl Iterator<Item = Color> + '_ {
        Color::ALL.into_iter().filter(move |&c| self.color_possible(c))
    }

    pub(crate) fn apply_color_hint(&mut self, color: Color, touched: bool, turn: u32) {
        if touched {
            self.colors = color.bit();
            self.color_hinted = true;
            self.hinted_turn = Some(turn);
        } else {
            self.colors &= !color.bit();
        }
    }

    pub(crate) fn apply_rank_hint(&mut self, rank: u8, touched: bool, turn: u32) {
        if touched {
            self.ranks = rank_bit(rank);
            self.rank_hinted = true;
            self.hinted_turn = Some(turn);
        } else {
            self.ranks &= !rank_bit(rank);
        }
    }

    /// Bits that a hint would remove from both possibility sets.
    pub(crate) fn info_gain_color(&self, color: Color, touched: bool) -> u32 {
        let after = if touched { color.bit() } else { self.colors & !color.bit() };
        (self.colors.count_ones()) - (after & self.colors).count_ones()
    }

    pub(crate) fn info_gain_rank(&self, rank: u8, touched: bool) -> u32 {
        let after = if touched { rank_bit(rank) } else { self.ranks & !rank_bit(rank) };
        (self.ranks.count_ones()) - (after & self.ranks).count_ones()
    }
}
