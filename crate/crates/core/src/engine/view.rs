use serde::ser::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::action::{Action, TurnEvent};
use super::card::{Card, NUM_COLORS, NUM_IDENTITIES};
use super::knowledge::CardKnowledge;
use super::state::GameState;
use super::EngineError;

/// One player's observation of a game.
///
/// Exposes partner hands, public table state and the viewer's own
/// knowledge sets, but never the viewer's own cards or the deck order.
#[derive(Clone, Copy)]
pub struct PlayerView<'a> {
    state: &'a GameState,
    history: &'a [TurnEvent],
    viewer: usize,
}

impl<'a> PlayerView<'a> {
    pub fn new(state: &'a GameState, history: &'a [TurnEvent], viewer: usize) -> PlayerView<'a> {
        assert!(viewer < state.num_players(), "viewer {viewer} out of range");
        PlayerView { state, history, viewer }
    }

    pub fn viewer(&self) -> usize {
        self.viewer
    }

    pub fn num_players(&self) -> usize {
        self.state.num_players()
    }

    pub fn current_player(&self) -> usize {
        self.state.current_player()
    }

    /// Other seats in turn order starting after the viewer.
    pub fn partners(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.num_players();
        (1..n).map(move |d| (self.viewer + d) % n)
    }

    pub fn own_knowledge(&self) -> &'a [CardKnowledge] {
        self.state.hand(self.viewer).knowledge()
    }

    pub fn hand_len(&self, player: usize) -> usize {
        self.state.hand(player).len()
    }

    /// Cards held by `player`; `None` for the viewer's own hand.
    pub fn partner_cards(&self, player: usize) -> Option<&'a [Card]> {
        (player != self.viewer).then(|| self.state.hand(player).cards())
    }

    /// What `player` knows about their own cards (public for every seat).
    pub fn knowledge_of(&self, player: usize) -> &'a [CardKnowledge] {
        self.state.hand(player).knowledge()
    }

    pub fn fireworks(&self) -> &'a [u8; NUM_COLORS] {
        self.state.fireworks()
    }

    pub fn discard_pile(&self) -> &'a [Card] {
        self.state.discard_pile()
    }

    pub fn hint_tokens(&self) -> u8 {
        self.state.hint_tokens()
    }

    pub fn lives(&self) -> u8 {
        self.state.lives()
    }

    pub fn deck_size(&self) -> usize {
        self.state.deck_size()
    }

    pub fn final_countdown(&self) -> Option<u8> {
        self.state.final_countdown()
    }

    pub fn turn(&self) -> u32 {
        self.state.turn()
    }

    pub fn history(&self) -> &'a [TurnEvent] {
        self.history
    }

    pub fn score(&self) -> u8 {
        self.state.score()
    }

    pub fn can_discard(&self) -> bool {
        self.state.can_discard()
    }

    pub fn can_hint(&self) -> bool {
        self.state.can_hint()
    }

    #[inline]
    pub fn is_playable(&self, card: Card) -> bool {
        self.state.is_playable(card)
    }

    pub fn is_legal(&self, action: &Action) -> bool {
        self.state.is_legal(action)
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>, EngineError> {
        self.state.legal_actions()
    }

    /// Copies of each identity the viewer cannot see: the full deck minus
    /// partner hands, the discard pile and cards already on the fireworks.
    pub fn unseen_counts(&self) -> [u8; NUM_IDENTITIES] {
        let mut counts = [0u8; NUM_IDENTITIES];
        for (i, c) in counts.iter_mut().enumerate() {
            *c = Card::from_index(i).copies();
        }
        for p in self.partners() {
            for card in self.state.hand(p).cards() {
                counts[card.index()] -= 1;
            }
        }
        for card in self.state.discard_pile() {
            counts[card.index()] -= 1;
        }
        for (c, &h) in self.state.fireworks().iter().enumerate() {
            for r in 0..h as usize {
                counts[c * 5 + r] -= 1;
            }
        }
        counts
    }

    /// Short stable hash of the serialized view.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("view serializes");
        let hash = Sha256::digest(&bytes);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(serde::Serialize)]
struct PartnerSnapshot<'a> {
    player: usize,
    cards: &'a [Card],
    knowledge: &'a [CardKnowledge],
}

#[derive(serde::Serialize)]
struct ViewSnapshot<'a> {
    viewer: usize,
    turn: u32,
    current_player: usize,
    deck_size: usize,
    hint_tokens: u8,
    lives: u8,
    final_countdown: Option<u8>,
    fireworks: &'a [u8; NUM_COLORS],
    discard: &'a [Card],
    own_hand: &'a [CardKnowledge],
    partners: Vec<PartnerSnapshot<'a>>,
    history: &'a [TurnEvent],
}

impl Serialize for PlayerView<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let partners = self
            .partners()
            .map(|p| PartnerSnapshot {
                player: p,
                cards: self.state.hand(p).cards(),
                knowledge: self.state.hand(p).knowledge(),
            })
            .collect();
        ViewSnapshot {
            viewer: self.viewer,
            turn: self.turn(),
            current_player: self.current_player(),
            deck_size: self.deck_size(),
            hint_tokens: self.hint_tokens(),
            lives: self.lives(),
            final_countdown: self.final_countdown(),
            fireworks: self.fireworks(),
            discard: self.discard_pile(),
            own_hand: self.own_knowledge(),
            partners,
            history: self.history,
        }
        .serialize(serializer)
    }
}
