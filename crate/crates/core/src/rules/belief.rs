//! Card-counting beliefs about the viewer's own hand.

use crate::engine::{Card, CardKnowledge, PlayerView, MAX_RANK, NUM_COLORS, NUM_IDENTITIES};

/// Exact probability as `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub fn value(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    pub fn is_certain(self) -> bool {
        self.den > 0 && self.num == self.den
    }

    /// `self > tenths / 10`, exactly.
    pub fn exceeds_tenths(self, tenths: u8) -> bool {
        10 * self.num as u64 > tenths as u64 * self.den as u64
    }

    /// `self >= tenths / 10`, exactly.
    pub fn at_least_tenths(self, tenths: u8) -> bool {
        self.den > 0 && 10 * self.num as u64 >= tenths as u64 * self.den as u64
    }

    /// Strict comparison by cross-multiplication.
    pub fn greater_than(self, other: Fraction) -> bool {
        self.num as u64 * other.den as u64 > other.num as u64 * self.den as u64
    }
}

/// 25-bit mask of identities a knowledge state admits (bit = `Card::index`).
#[inline]
pub fn identity_mask(k: &CardKnowledge) -> u32 {
    let mut mask = 0u32;
    let mut colors = k.colors;
    while colors != 0 {
        let c = colors.trailing_zeros();
        mask |= (k.ranks as u32) << (c * MAX_RANK as u32);
        colors &= colors - 1;
    }
    mask
}

/// Public table facts: which identities are playable now and which can
/// never be played.
#[derive(Clone, Copy, Debug)]
pub struct TableFacts {
    pub playable: u32,
    pub dead: u32,
    /// Identities with every other copy already discarded.
    pub critical: u32,
}

impl TableFacts {
    pub fn new(fireworks: &[u8; NUM_COLORS], discard: &[Card]) -> TableFacts {
        let mut discarded = [0u8; NUM_IDENTITIES];
        for card in discard {
            discarded[card.index()] += 1;
        }
        let mut playable = 0u32;
        let mut dead = 0u32;
        let mut critical = 0u32;
        for (c, &height) in fireworks.iter().enumerate() {
            let base = c * MAX_RANK as usize;
            if height < MAX_RANK {
                playable |= 1 << (base + height as usize);
            }
            // Highest rank still reachable given the discards.
            let mut reach = MAX_RANK;
            for r in (height + 1)..=MAX_RANK {
                let card = Card::from_index(base + r as usize - 1);
                if discarded[card.index()] >= card.copies() {
                    reach = r - 1;
                    break;
                }
            }
            for r in 1..=MAX_RANK {
                let idx = base + r as usize - 1;
                if r <= height || r > reach {
                    dead |= 1 << idx;
                } else if discarded[idx] + 1 == Card::from_index(idx).copies() {
                    critical |= 1 << idx;
                }
            }
        }
        TableFacts { playable, dead, critical }
    }

    #[inline]
    pub fn is_dead(&self, card: Card) -> bool {
        self.dead & (1 << card.index()) != 0
    }

    #[inline]
    pub fn is_critical(&self, card: Card) -> bool {
        self.critical & (1 << card.index()) != 0
    }

    /// Every identity the knowledge admits is dead, so its holder can tell.
    #[inline]
    pub fn known_dead(&self, k: &CardKnowledge) -> bool {
        identity_mask(k) & !self.dead == 0
    }
}

/// The viewer's weighted beliefs over their own cards.
pub struct Beliefs<'v> {
    view: PlayerView<'v>,
    unseen: [u8; NUM_IDENTITIES],
    pub facts: TableFacts,
}

impl<'v> Beliefs<'v> {
    pub fn new(view: &PlayerView<'v>) -> Beliefs<'v> {
        Beliefs {
            view: *view,
            unseen: view.unseen_counts(),
            facts: TableFacts::new(view.fireworks(), view.discard_pile()),
        }
    }

    pub fn view(&self) -> &PlayerView<'v> {
        &self.view
    }

    pub fn unseen(&self) -> &[u8; NUM_IDENTITIES] {
        &self.unseen
    }

    #[inline]
    fn weight_of(&self, mask: u32) -> u32 {
        let mut total = 0u32;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            total += self.unseen[i] as u32;
            m &= m - 1;
        }
        total
    }

    fn fraction(&self, slot: usize, subset: u32) -> Fraction {
        let mask = identity_mask(&self.view.own_knowledge()[slot]);
        Fraction { num: self.weight_of(mask & subset), den: self.weight_of(mask) }
    }

    /// Probability that the card in `slot` can be played right now.
    pub fn playable(&self, slot: usize) -> Fraction {
        self.fraction(slot, self.facts.playable)
    }

    /// Probability that the card in `slot` can never be played.
    pub fn dead(&self, slot: usize) -> Fraction {
        self.fraction(slot, self.facts.dead)
    }

    /// Expected rank as `sum(rank * weight) / sum(weight)`.
    pub fn expected_rank(&self, slot: usize) -> Fraction {
        let mask = identity_mask(&self.view.own_knowledge()[slot]);
        let mut num = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            num += self.unseen[i] as u32 * (i as u32 % MAX_RANK as u32 + 1);
            m &= m - 1;
        }
        Fraction { num, den: self.weight_of(mask) }
    }

    pub fn hand_len(&self) -> usize {
        self.view.own_knowledge().len()
    }

    /// Slot with the highest playability, lowest slot on ties.
    pub fn most_playable(&self) -> Option<(usize, Fraction)> {
        let mut best: Option<(usize, Fraction)> = None;
        for slot in 0..self.hand_len() {
            let p = self.playable(slot);
            if best.is_none_or(|(_, b)| p.greater_than(b)) {
                best = Some((slot, p));
            }
        }
        best
    }
}

/// Probability that the card in `slot` is immediately playable, from the
/// viewer's perspective: identities consistent with the knowledge sets,
/// weighted by unseen copies.
pub fn playability(view: &PlayerView<'_>, slot: usize) -> f64 {
    Beliefs::new(view).playable(slot).value()
}
