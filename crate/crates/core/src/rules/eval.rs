use rand::Rng;

use super::belief::{Beliefs, Fraction};
use super::catalog::{Rule, RuleCatalog, RuleKind};
use super::{Chromosome, RuleError, RuleId};
use crate::engine::{Action, Agent, Color, PlayerView, MAX_RANK};
use crate::seed::GameRng;

/// Evaluate one rule against a view. `None` means the rule abstains.
pub fn evaluate_rule(
    catalog: &RuleCatalog,
    id: RuleId,
    view: &PlayerView<'_>,
    rng: &mut GameRng,
) -> Result<Option<Action>, RuleError> {
    let rule = catalog.get(id).ok_or(RuleError::UnknownRule(id, catalog.len()))?;
    let beliefs = Beliefs::new(view);
    Ok(fire(rule, &beliefs, rng))
}

/// The action of the first rule in `chromosome` that fires.
///
/// When every rule abstains: discard the oldest card if discarding is legal,
/// otherwise play the most likely playable card.
pub fn agent_act(catalog: &RuleCatalog, chromosome: &Chromosome, view: &PlayerView<'_>, rng: &mut GameRng) -> Action {
    let beliefs = Beliefs::new(view);
    for &id in chromosome.genes() {
        let Some(rule) = catalog.get(id) else { continue };
        if let Some(action) = fire(rule, &beliefs, rng) {
            debug_assert!(view.is_legal(&action), "rule {} produced illegal {action}", rule.name);
            return action;
        }
    }
    fallback(&beliefs)
}

fn fallback(beliefs: &Beliefs<'_>) -> Action {
    if beliefs.view().can_discard() {
        Action::Discard { slot: 0 }
    } else {
        let (slot, _) = beliefs.most_playable().expect("a live player holds cards");
        Action::Play { slot: slot as u8 }
    }
}

fn fire(rule: &Rule, b: &Beliefs<'_>, rng: &mut GameRng) -> Option<Action> {
    let view = b.view();
    if !rule.condition.admits(view.hint_tokens(), view.lives()) {
        return None;
    }
    use RuleKind::*;
    match rule.kind {
        PlayIfCertain => first_slot(b, |s| b.playable(s).is_certain()).map(play),
        PlayProbability { tenths } => {
            let (slot, p) = b.most_playable()?;
            p.exceeds_tenths(tenths).then(|| play(slot))
        }
        PlayMostRecentlyHinted => {
            let knowledge = view.own_knowledge();
            let mut best: Option<(usize, u32)> = None;
            for (slot, k) in knowledge.iter().enumerate() {
                if let Some(t) = k.hinted_turn {
                    if best.is_none_or(|(_, bt)| t > bt) {
                        best = Some((slot, t));
                    }
                }
            }
            let (slot, _) = best?;
            (b.playable(slot).num > 0).then(|| play(slot))
        }

        TellAboutPlayableCard => tell_first(b, |card, k, _| {
            if !view.is_playable(card) || k.is_fully_known() {
                None
            } else if !k.knows_rank() {
                Some(Hint::Rank(card.rank))
            } else {
                Some(Hint::Color(card.color))
            }
        }),
        TellAboutUselessCard => tell_first(b, |card, k, facts| {
            if !facts.is_dead(card) || facts.known_dead(k) {
                None
            } else if !k.knows_color() {
                Some(Hint::Color(card.color))
            } else {
                Some(Hint::Rank(card.rank))
            }
        }),
        TellMostInformation => {
            if !view.can_hint() {
                return None;
            }
            let mut best: Option<(Action, u32)> = None;
            for target in view.partners() {
                let cards = view.partner_cards(target)?;
                let knowledge = view.knowledge_of(target);
                for hint in hints_touching(cards) {
                    let gain: u32 = cards
                        .iter()
                        .zip(knowledge)
                        .map(|(c, k)| match hint {
                            Hint::Color(color) => k.info_gain_color(color, c.color == color),
                            Hint::Rank(rank) => k.info_gain_rank(rank, c.rank == rank),
                        })
                        .sum();
                    if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                        best = Some((hint.to_action(target), gain));
                    }
                }
            }
            best.map(|(a, _)| a)
        }
        TellAboutOnes => tell_first(b, |card, k, _| (card.rank == 1 && !k.knows_rank()).then_some(Hint::Rank(1))),
        TellAboutFives => tell_first(b, |card, k, _| {
            (card.rank == MAX_RANK && !k.knows_rank()).then_some(Hint::Rank(MAX_RANK))
        }),
        TellRandomly => {
            if !view.can_hint() {
                return None;
            }
            let mut options = Vec::with_capacity(10);
            for target in view.partners() {
                let cards = view.partner_cards(target)?;
                options.extend(hints_touching(cards).map(|h| h.to_action(target)));
            }
            if options.is_empty() {
                return None;
            }
            Some(options[rng.random_range(0..options.len())])
        }
        TellToSetSingletonColor => tell_first(b, |card, k, _| (!k.knows_color()).then_some(Hint::Color(card.color))),
        TellToSetSingletonRank => tell_first(b, |card, k, _| (!k.knows_rank()).then_some(Hint::Rank(card.rank))),
        TellUnknownCard => tell_first(b, |card, k, _| k.is_blank().then_some(Hint::Rank(card.rank))),
        TellAboutCriticalCard => tell_first(b, |card, k, facts| {
            (facts.is_critical(card) && !k.knows_rank()).then_some(Hint::Rank(card.rank))
        }),

        DiscardOldest => can_discard(b).then(|| discard(0)),
        DiscardRandom => can_discard(b).then(|| discard(rng.random_range(0..b.hand_len()))),
        DiscardUseless => {
            if !can_discard(b) {
                return None;
            }
            first_slot(b, |s| b.dead(s).is_certain()).map(discard)
        }
        DiscardProbabilityUseless { tenths } => {
            if !can_discard(b) {
                return None;
            }
            let (slot, p) = best_slot(b, |s| b.dead(s))?;
            p.at_least_tenths(tenths).then(|| discard(slot))
        }
        DiscardHighestRank => {
            if !can_discard(b) {
                return None;
            }
            best_slot(b, |s| b.expected_rank(s)).map(|(slot, _)| discard(slot))
        }
        DiscardLeastInformation => {
            if !can_discard(b) {
                return None;
            }
            let knowledge = view.own_knowledge();
            let mut best = 0;
            for (slot, k) in knowledge.iter().enumerate() {
                if k.identity_count() > knowledge[best].identity_count() {
                    best = slot;
                }
            }
            Some(discard(best))
        }
        DiscardOldestUnhinted => {
            if !can_discard(b) {
                return None;
            }
            view.own_knowledge()
                .iter()
                .position(|k| !k.color_hinted && !k.rank_hinted)
                .map(discard)
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Hint {
    Color(Color),
    Rank(u8),
}

impl Hint {
    fn to_action(self, target: usize) -> Action {
        let target = target as u8;
        match self {
            Hint::Color(color) => Action::HintColor { target, color },
            Hint::Rank(rank) => Action::HintRank { target, rank },
        }
    }
}

/// Hints that touch at least one of `cards`: colors in order, then ranks ascending.
fn hints_touching(cards: &[crate::engine::Card]) -> impl Iterator<Item = Hint> + '_ {
    let colors = cards.iter().fold(0u8, |m, c| m | c.color.bit());
    let ranks = cards.iter().fold(0u8, |m, c| m | 1 << (c.rank - 1));
    Color::ALL
        .into_iter()
        .filter(move |c| colors & c.bit() != 0)
        .map(Hint::Color)
        .chain((1..=MAX_RANK).filter(move |r| ranks & (1 << (r - 1)) != 0).map(Hint::Rank))
}

/// First (partner, slot) in turn order then slot order for which `choose`
/// yields a hint. Hints always touch the chosen card, so they are legal.
fn tell_first<F>(b: &Beliefs<'_>, mut choose: F) -> Option<Action>
where
    F: FnMut(crate::engine::Card, &crate::engine::CardKnowledge, &super::belief::TableFacts) -> Option<Hint>,
{
    let view = b.view();
    if !view.can_hint() {
        return None;
    }
    for target in view.partners() {
        let cards = view.partner_cards(target)?;
        for (card, k) in cards.iter().zip(view.knowledge_of(target)) {
            if let Some(hint) = choose(*card, k, &b.facts) {
                return Some(hint.to_action(target));
            }
        }
    }
    None
}

fn first_slot(b: &Beliefs<'_>, pred: impl Fn(usize) -> bool) -> Option<usize> {
    (0..b.hand_len()).find(|&s| pred(s))
}

/// Slot maximizing `score`, lowest slot on ties.
fn best_slot(b: &Beliefs<'_>, score: impl Fn(usize) -> Fraction) -> Option<(usize, Fraction)> {
    let mut best: Option<(usize, Fraction)> = None;
    for slot in 0..b.hand_len() {
        let f = score(slot);
        if best.is_none_or(|(_, bf)| f.greater_than(bf)) {
            best = Some((slot, f));
        }
    }
    best
}

fn can_discard(b: &Beliefs<'_>) -> bool {
    b.view().can_discard()
}

fn play(slot: usize) -> Action {
    Action::Play { slot: slot as u8 }
}

fn discard(slot: usize) -> Action {
    Action::Discard { slot: slot as u8 }
}

/// An agent that follows a chromosome of rules.
#[derive(Clone, Debug)]
pub struct ChromosomeAgent<'c> {
    catalog: &'c RuleCatalog,
    chromosome: Chromosome,
    name: String,
}

impl<'c> ChromosomeAgent<'c> {
    pub fn new(catalog: &'c RuleCatalog, chromosome: Chromosome) -> ChromosomeAgent<'c> {
        let name = format!("rules{chromosome}");
        ChromosomeAgent { catalog, chromosome, name }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn chromosome(&self) -> &Chromosome {
        &self.chromosome
    }
}

impl Agent for ChromosomeAgent<'_> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn act(&mut self, view: &PlayerView<'_>, rng: &mut GameRng) -> Action {
        agent_act(self.catalog, &self.chromosome, view, rng)
    }
}
