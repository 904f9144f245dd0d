use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::{Action, Outcome, TurnEvent};
use super::card::{full_deck, Card, Color, DECK_SIZE, MAX_RANK, NUM_COLORS, NUM_IDENTITIES};
use super::knowledge::CardKnowledge;
use super::EngineError;
use crate::seed::{self, Stream};

pub const MAX_HINT_TOKENS: u8 = 8;
pub const MAX_LIVES: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub players: u8,
    pub hand_size: u8,
}

impl GameConfig {
    /// Standard hand size: 5 cards for 2-3 players, 4 for 4-5.
    pub fn standard(players: u8) -> Result<GameConfig, EngineError> {
        let hand_size = match players {
            2 | 3 => 5,
            4 | 5 => 4,
            _ => return Err(EngineError::InvalidPlayerCount(players)),
        };
        Ok(GameConfig { players, hand_size })
    }

    pub fn two_player() -> GameConfig {
        GameConfig { players: 2, hand_size: 5 }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(2..=5).contains(&self.players) {
            return Err(EngineError::InvalidPlayerCount(self.players));
        }
        if self.hand_size == 0 || self.hand_size as usize * self.players as usize > DECK_SIZE {
            return Err(EngineError::InvalidState(format!("hand size {} too large", self.hand_size)));
        }
        Ok(())
    }

    /// Cards left in the deck right after dealing.
    pub fn deck_after_deal(&self) -> usize {
        DECK_SIZE - self.players as usize * self.hand_size as usize
    }
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig::two_player()
    }
}

/// One player's cards with the matching knowledge, oldest first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hand {
    pub(crate) cards: Vec<Card>,
    pub(crate) knowledge: Vec<CardKnowledge>,
}

impl Hand {
    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn cards(&self) -> &[Card] {
        &self.cards
    }

    pub fn knowledge(&self) -> &[CardKnowledge] {
        &self.knowledge
    }

    fn push(&mut self, card: Card) {
        self.cards.push(card);
        self.knowledge.push(CardKnowledge::default());
    }

    fn remove(&mut self, slot: usize) -> (Card, CardKnowledge) {
        (self.cards.remove(slot), self.knowledge.remove(slot))
    }
}

/// Full authoritative state of one game.
///
/// The deck is drawn from its end. Drawn cards join the newest slot, so slot 0
/// always holds the oldest card.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    config: GameConfig,
    deck: Vec<Card>,
    hands: Vec<Hand>,
    fireworks: [u8; NUM_COLORS],
    discard: Vec<Card>,
    hint_tokens: u8,
    lives: u8,
    current_player: u8,
    final_countdown: Option<u8>,
    turn: u32,
}

impl GameState {
    /// Shuffle and deal from `seed`; the starting player is also drawn from it.
    pub fn new(config: GameConfig, seed: u64) -> Result<GameState, EngineError> {
        config.validate()?;
        let start = starting_player(config, seed);
        GameState::with_start(config, seed, start)
    }

    /// Like [`GameState::new`] with an explicit starting player. Dealing
    /// proceeds in turn order from the starting player, so relabelling seats
    /// and rotating the start yields the same game.
    pub fn with_start(config: GameConfig, seed: u64, start: u8) -> Result<GameState, EngineError> {
        config.validate()?;
        if start >= config.players {
            return Err(EngineError::InvalidState(format!("starting player {start} out of range")));
        }
        let mut deck = full_deck();
        let mut rng = seed::rng_from(seed::derive(seed, Stream::Deal, 0));
        deck.shuffle(&mut rng);
        let n = config.players as usize;
        let mut hands = vec![Hand::default(); n];
        for offset in 0..n {
            let p = (start as usize + offset) % n;
            for _ in 0..config.hand_size {
                hands[p].push(deck.pop().expect("deck holds enough cards to deal"));
            }
        }
        Ok(GameState {
            config,
            deck,
            hands,
            fireworks: [0; NUM_COLORS],
            discard: Vec::new(),
            hint_tokens: MAX_HINT_TOKENS,
            lives: MAX_LIVES,
            current_player: start,
            final_countdown: None,
            turn: 0,
        })
    }

    /// Assemble a state from explicit parts, for fixtures and replay.
    /// Card conservation and ranges are validated.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        config: GameConfig,
        deck: Vec<Card>,
        hands: Vec<(Vec<Card>, Vec<CardKnowledge>)>,
        fireworks: [u8; NUM_COLORS],
        discard: Vec<Card>,
        hint_tokens: u8,
        lives: u8,
        current_player: u8,
        final_countdown: Option<u8>,
        turn: u32,
    ) -> Result<GameState, EngineError> {
        config.validate()?;
        let hands = hands
            .into_iter()
            .map(|(cards, knowledge)| Hand { cards, knowledge })
            .collect();
        let state = GameState {
            config,
            deck,
            hands,
            fireworks,
            discard,
            hint_tokens,
            lives,
            current_player,
            final_countdown,
            turn,
        };
        state.check_invariants()?;
        Ok(state)
    }

    /// A state with the given hands and table whose deck holds every
    /// remaining card in canonical order (drawn from the end). Knowledge
    /// starts blank and no turn has been played.
    pub fn arranged(
        config: GameConfig,
        hands: Vec<Vec<Card>>,
        fireworks: [u8; NUM_COLORS],
        discard: Vec<Card>,
        hint_tokens: u8,
        lives: u8,
        current_player: u8,
    ) -> Result<GameState, EngineError> {
        let mut remaining = [0u8; NUM_IDENTITIES];
        for c in full_deck() {
            remaining[c.index()] += 1;
        }
        let placed = hands.iter().flatten().chain(discard.iter()).copied().chain(
            Color::ALL
                .into_iter()
                .flat_map(|color| (1..=fireworks[color.index()].min(MAX_RANK)).map(move |r| Card::new(color, r))),
        );
        for c in placed {
            let slot = &mut remaining[c.index()];
            *slot = slot
                .checked_sub(1)
                .ok_or_else(|| EngineError::InvalidState(format!("too many copies of {c}")))?;
        }
        let deck = (0..NUM_IDENTITIES)
            .flat_map(|i| std::iter::repeat_n(Card::from_index(i), remaining[i] as usize))
            .collect();
        let hands = hands
            .into_iter()
            .map(|cards| {
                let knowledge = vec![CardKnowledge::default(); cards.len()];
                (cards, knowledge)
            })
            .collect();
        GameState::from_parts(config, deck, hands, fireworks, discard, hint_tokens, lives, current_player, None, 0)
    }

    pub fn config(&self) -> GameConfig {
        self.config
    }

    pub fn num_players(&self) -> usize {
        self.config.players as usize
    }

    pub fn deck(&self) -> &[Card] {
        &self.deck
    }

    pub fn deck_size(&self) -> usize {
        self.deck.len()
    }

    pub fn hand(&self, player: usize) -> &Hand {
        &self.hands[player]
    }

    pub fn fireworks(&self) -> &[u8; NUM_COLORS] {
        &self.fireworks
    }

    pub fn discard_pile(&self) -> &[Card] {
        &self.discard
    }

    pub fn hint_tokens(&self) -> u8 {
        self.hint_tokens
    }

    pub fn lives(&self) -> u8 {
        self.lives
    }

    pub fn current_player(&self) -> usize {
        self.current_player as usize
    }

    pub fn final_countdown(&self) -> Option<u8> {
        self.final_countdown
    }

    pub fn turn(&self) -> u32 {
        self.turn
    }

    /// Sum of firework heights; on a three-strike loss this is still the
    /// fireworks total rather than zero.
    pub fn score(&self) -> u8 {
        self.fireworks.iter().sum()
    }

    pub fn is_terminal(&self) -> bool {
        self.lives == 0
            || self.final_countdown == Some(0)
            || self.fireworks.iter().all(|&h| h == MAX_RANK)
    }

    #[inline]
    pub fn is_playable(&self, card: Card) -> bool {
        self.fireworks[card.color.index()] + 1 == card.rank
    }

    pub fn can_discard(&self) -> bool {
        self.hint_tokens < MAX_HINT_TOKENS
    }

    pub fn can_hint(&self) -> bool {
        self.hint_tokens > 0
    }

    /// Every legal action, plays by slot, then discards by slot, then hints by
    /// target, color hints before rank hints, each in ascending order.
    pub fn legal_actions(&self) -> Result<Vec<Action>, EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        let me = self.current_player as usize;
        let held = self.hands[me].len() as u8;
        let mut actions = Vec::with_capacity(20);
        actions.extend((0..held).map(|slot| Action::Play { slot }));
        if self.can_discard() {
            actions.extend((0..held).map(|slot| Action::Discard { slot }));
        }
        if self.can_hint() {
            for target in 0..self.config.players {
                if target as usize == me {
                    continue;
                }
                let cards = &self.hands[target as usize].cards;
                for color in Color::ALL {
                    if cards.iter().any(|c| c.color == color) {
                        actions.push(Action::HintColor { target, color });
                    }
                }
                for rank in 1..=MAX_RANK {
                    if cards.iter().any(|c| c.rank == rank) {
                        actions.push(Action::HintRank { target, rank });
                    }
                }
            }
        }
        Ok(actions)
    }

    /// Number of legal actions without materializing them.
    pub fn legal_action_count(&self) -> usize {
        if self.is_terminal() {
            return 0;
        }
        let me = self.current_player as usize;
        let held = self.hands[me].len();
        let mut n = held;
        if self.can_discard() {
            n += held;
        }
        if self.can_hint() {
            for (p, hand) in self.hands.iter().enumerate() {
                if p == me {
                    continue;
                }
                let colors = hand.cards.iter().fold(0u8, |m, c| m | c.color.bit());
                let ranks = hand.cards.iter().fold(0u8, |m, c| m | super::card::rank_bit(c.rank));
                n += (colors.count_ones() + ranks.count_ones()) as usize;
            }
        }
        n
    }

    /// Why `action` is illegal here, if it is.
    pub fn illegal_reason(&self, action: &Action) -> Option<&'static str> {
        if self.is_terminal() {
            return Some("game is over");
        }
        let me = self.current_player as usize;
        let held = self.hands[me].len();
        match *action {
            Action::Play { slot } => (slot as usize >= held).then_some("slot out of range"),
            Action::Discard { slot } => {
                if slot as usize >= held {
                    Some("slot out of range")
                } else if !self.can_discard() {
                    Some("cannot discard with all hint tokens available")
                } else {
                    None
                }
            }
            Action::HintColor { target, color } => self
                .hint_problem(me, target)
                .or_else(|| {
                    (!self.hands[target as usize].cards.iter().any(|c| c.color == color))
                        .then_some("hint touches no card")
                }),
            Action::HintRank { target, rank } => self.hint_problem(me, target).or_else(|| {
                (!self.hands[target as usize].cards.iter().any(|c| c.rank == rank))
                    .then_some("hint touches no card")
            }),
        }
    }

    fn hint_problem(&self, me: usize, target: u8) -> Option<&'static str> {
        if !self.can_hint() {
            Some("no hint tokens")
        } else if target as usize == me {
            Some("cannot hint yourself")
        } else if target >= self.config.players {
            Some("hint target out of range")
        } else {
            None
        }
    }

    pub fn is_legal(&self, action: &Action) -> bool {
        self.illegal_reason(action).is_none()
    }

    /// Apply `action` for the current player and report what happened.
    pub fn apply(&mut self, action: Action) -> Result<TurnEvent, EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        if let Some(reason) = self.illegal_reason(&action) {
            return Err(EngineError::IllegalAction { action, reason });
        }
        let me = self.current_player as usize;
        let tokens_before = self.hint_tokens;
        let lives_before = self.lives;
        let countdown_active = self.final_countdown.is_some();
        let mut drew = false;

        let outcome = match action {
            Action::Play { slot } => {
                let (card, knowledge) = self.hands[me].remove(slot as usize);
                let success = self.is_playable(card);
                if success {
                    self.fireworks[card.color.index()] = card.rank;
                    if card.rank == MAX_RANK && self.hint_tokens < MAX_HINT_TOKENS {
                        self.hint_tokens += 1;
                    }
                } else {
                    self.discard.push(card);
                    self.lives -= 1;
                }
                drew = self.draw(me);
                Outcome::Played { card, knowledge, success }
            }
            Action::Discard { slot } => {
                let (card, knowledge) = self.hands[me].remove(slot as usize);
                self.discard.push(card);
                self.hint_tokens += 1;
                drew = self.draw(me);
                Outcome::Discarded { card, knowledge }
            }
            Action::HintColor { target, color } => {
                self.hint_tokens -= 1;
                let turn = self.turn;
                let hand = &mut self.hands[target as usize];
                let mut touched = Vec::new();
                for (slot, (card, k)) in hand.cards.iter().zip(hand.knowledge.iter_mut()).enumerate() {
                    let hit = card.color == color;
                    k.apply_color_hint(color, hit, turn);
                    if hit {
                        touched.push(slot as u8);
                    }
                }
                Outcome::Hinted { touched }
            }
            Action::HintRank { target, rank } => {
                self.hint_tokens -= 1;
                let turn = self.turn;
                let hand = &mut self.hands[target as usize];
                let mut touched = Vec::new();
                for (slot, (card, k)) in hand.cards.iter().zip(hand.knowledge.iter_mut()).enumerate() {
                    let hit = card.rank == rank;
                    k.apply_rank_hint(rank, hit, turn);
                    if hit {
                        touched.push(slot as u8);
                    }
                }
                Outcome::Hinted { touched }
            }
        };

        if countdown_active {
            if let Some(c) = self.final_countdown.as_mut() {
                *c -= 1;
            }
        } else if drew && self.deck.is_empty() {
            // Every player, including this one, gets one more turn.
            self.final_countdown = Some(self.config.players);
        }

        let event = TurnEvent {
            turn: self.turn,
            player: me as u8,
            action,
            tokens_before,
            lives_before,
            outcome,
            drew,
        };
        self.turn += 1;
        self.current_player = ((me + 1) % self.num_players()) as u8;
        debug_assert!(self.check_invariants().is_ok(), "{:?}", self.check_invariants());
        Ok(event)
    }

    fn draw(&mut self, player: usize) -> bool {
        match self.deck.pop() {
            Some(card) => {
                self.hands[player].push(card);
                true
            }
            None => false,
        }
    }

    /// Card conservation, token/life ranges and knowledge soundness.
    pub fn check_invariants(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidState(msg));
        if self.hands.len() != self.config.players as usize {
            return bad(format!("{} hands for {} players", self.hands.len(), self.config.players));
        }
        if self.current_player >= self.config.players {
            return bad("current player out of range".into());
        }
        if self.hint_tokens > MAX_HINT_TOKENS {
            return bad(format!("hint tokens {}", self.hint_tokens));
        }
        if self.lives > MAX_LIVES {
            return bad(format!("lives {}", self.lives));
        }
        if self.fireworks.iter().any(|&h| h > MAX_RANK) {
            return bad("firework above 5".into());
        }
        let mut counts = [0u8; super::card::NUM_IDENTITIES];
        let mut total = self.deck.len() + self.discard.len();
        for card in self.deck.iter().chain(self.discard.iter()) {
            counts[card.index()] += 1;
        }
        for (p, hand) in self.hands.iter().enumerate() {
            if hand.cards.len() != hand.knowledge.len() {
                return bad(format!("player {p} hand and knowledge disagree"));
            }
            if hand.cards.len() > self.config.hand_size as usize {
                return bad(format!("player {p} holds too many cards"));
            }
            for (card, k) in hand.cards.iter().zip(&hand.knowledge) {
                counts[card.index()] += 1;
                if k.colors == 0 || k.ranks == 0 {
                    return bad(format!("player {p} has an empty possibility set"));
                }
                if !k.admits(*card) {
                    return bad(format!("player {p} knowledge excludes true card {card}"));
                }
                if (k.color_hinted && !k.knows_color()) || (k.rank_hinted && !k.knows_rank()) {
                    return bad(format!("player {p} hinted flag without singleton set"));
                }
            }
            total += hand.cards.len();
        }
        for (c, &h) in self.fireworks.iter().enumerate() {
            for rank in 1..=h {
                counts[Card::new(Color::from_index(c), rank).index()] += 1;
            }
            total += h as usize;
        }
        if total != DECK_SIZE {
            return bad(format!("card conservation violated: {total} cards accounted"));
        }
        for (i, &n) in counts.iter().enumerate() {
            let card = Card::from_index(i);
            if n != card.copies() {
                return bad(format!("{n} copies of {card}"));
            }
        }
        Ok(())
    }
}

/// Seat that moves first in the game generated by `seed`.
pub fn starting_player(config: GameConfig, seed: u64) -> u8 {
    let mut rng = seed::rng_from(seed::derive(seed, Stream::Seat, 0));
    rng.random_range(0..config.players)
}
