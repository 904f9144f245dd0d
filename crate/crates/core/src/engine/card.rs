use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of colors in the standard deck.
pub const NUM_COLORS: usize = 5;
/// Highest rank of any card.
pub const MAX_RANK: u8 = 5;
/// Distinct card identities (color x rank).
pub const NUM_IDENTITIES: usize = NUM_COLORS * MAX_RANK as usize;
/// Total cards in the deck.
pub const DECK_SIZE: usize = 50;
/// Copies of each rank per color, indexed by `rank - 1`.
pub const COPIES_PER_RANK: [u8; 5] = [3, 2, 2, 2, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    B,
    R,
    Y,
    W,
    G,
}

impl Color {
    /// Canonical color order, also used for tie-breaking.
    pub const ALL: [Color; NUM_COLORS] = [Color::B, Color::R, Color::Y, Color::W, Color::G];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Color {
        Color::ALL[index]
    }

    #[inline]
    pub fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn letter(self) -> char {
        match self {
            Color::B => 'B',
            Color::R => 'R',
            Color::Y => 'Y',
            Color::W => 'W',
            Color::G => 'G',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        match c.to_ascii_uppercase() {
            'B' => Some(Color::B),
            'R' => Some(Color::R),
            'Y' => Some(Color::Y),
            'W' => Some(Color::W),
            'G' => Some(Color::G),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[inline]
pub(crate) fn rank_bit(rank: u8) -> u8 {
    1 << (rank - 1)
}

/// A physical card. Serialized as a two-character string such as `"R2"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub color: Color,
    pub rank: u8,
}

impl Card {
    pub fn new(color: Color, rank: u8) -> Card {
        assert!((1..=MAX_RANK).contains(&rank), "rank {rank} out of range");
        Card { color, rank }
    }

    /// Dense identity index in `0..25`, color-major.
    #[inline]
    pub fn index(self) -> usize {
        self.color.index() * MAX_RANK as usize + (self.rank as usize - 1)
    }

    #[inline]
    pub fn from_index(index: usize) -> Card {
        Card {
            color: Color::from_index(index / MAX_RANK as usize),
            rank: (index % MAX_RANK as usize) as u8 + 1,
        }
    }

    /// Copies of this identity in a full deck.
    #[inline]
    pub fn copies(self) -> u8 {
        COPIES_PER_RANK[self.rank as usize - 1]
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.color, self.rank)
    }
}

impl FromStr for Card {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let (Some(c), Some(r), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(format!("malformed card {s:?}"));
        };
        let color = Color::from_letter(c).ok_or_else(|| format!("bad color in {s:?}"))?;
        let rank = r
            .to_digit(10)
            .filter(|r| (1..=MAX_RANK as u32).contains(r))
            .ok_or_else(|| format!("bad rank in {s:?}"))?;
        Ok(Card::new(color, rank as u8))
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The 50-card deck in canonical (unshuffled) order.
pub fn full_deck() -> Vec<Card> {
    let mut deck = Vec::with_capacity(DECK_SIZE);
    for color in Color::ALL {
        for rank in 1..=MAX_RANK {
            for _ in 0..COPIES_PER_RANK[rank as usize - 1] {
                deck.push(Card::new(color, rank));
            }
        }
    }
    deck
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deck_composition() {
        let deck = full_deck();
        assert_eq!(deck.len(), DECK_SIZE);
        for color in Color::ALL {
            let ranks: Vec<u8> = deck.iter().filter(|c| c.color == color).map(|c| c.rank).collect();
            assert_eq!(ranks, vec![1, 1, 1, 2, 2, 3, 3, 4, 4, 5]);
        }
    }

    #[test]
    fn index_round_trip() {
        for i in 0..NUM_IDENTITIES {
            assert_eq!(Card::from_index(i).index(), i);
        }
        assert_eq!(Card::new(Color::R, 2).to_string(), "R2");
        assert_eq!("g5".parse::<Card>().unwrap(), Card::new(Color::G, 5));
        assert!("X1".parse::<Card>().is_err());
        assert!("R6".parse::<Card>().is_err());
    }
}
