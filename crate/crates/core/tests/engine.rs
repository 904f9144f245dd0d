use hanabi_qd_core::engine::{
    play_game, play_game_from, play_game_recorded, recount_stats, starting_player, Action, Agent, Card, Color,
    EngineError, GameConfig, GameError, GameRecord, GameState, Outcome, PlayerView, DECK_SIZE,
};
use hanabi_qd_core::seed::GameRng;
use proptest::prelude::*;
use rand::Rng;

fn cards(s: &str) -> Vec<Card> {
    s.split_whitespace().map(|c| c.parse().unwrap()).collect()
}

fn two() -> GameConfig {
    GameConfig::two_player()
}

struct RandomAgent;

impl Agent for RandomAgent {
    fn name(&self) -> String {
        "random".into()
    }

    fn act(&mut self, view: &PlayerView<'_>, rng: &mut GameRng) -> Action {
        let legal = view.legal_actions().unwrap();
        legal[rng.random_range(0..legal.len())]
    }
}

/// Discards the oldest card whenever that is legal, otherwise gives the first
/// legal hint. Never plays.
struct Discarder;

impl Agent for Discarder {
    fn name(&self) -> String {
        "discarder".into()
    }

    fn act(&mut self, view: &PlayerView<'_>, _rng: &mut GameRng) -> Action {
        if view.can_discard() {
            Action::Discard { slot: 0 }
        } else {
            *view.legal_actions().unwrap().iter().find(|a| a.is_hint()).unwrap()
        }
    }
}

/// Always tries to discard, even at 8 tokens.
struct StubbornDiscarder;

impl Agent for StubbornDiscarder {
    fn name(&self) -> String {
        "stubborn".into()
    }

    fn act(&mut self, _view: &PlayerView<'_>, _rng: &mut GameRng) -> Action {
        Action::Discard { slot: 0 }
    }
}

#[test]
fn new_game_deals_from_seed() {
    let s = GameState::new(two(), 11).unwrap();
    assert_eq!(s.hand(0).len(), 5);
    assert_eq!(s.hand(1).len(), 5);
    assert_eq!(s.deck_size(), 40);
    assert_eq!((s.hint_tokens(), s.lives(), s.score()), (8, 3, 0));
    assert_eq!(s.fireworks(), &[0; 5]);
    assert!(!s.is_terminal());
    assert_eq!(GameState::new(two(), 11).unwrap(), s);
    assert_ne!(GameState::new(two(), 12).unwrap().deck(), s.deck());

    for (players, hand) in [(3, 5), (4, 4), (5, 4)] {
        let c = GameConfig::standard(players).unwrap();
        let s = GameState::new(c, 1).unwrap();
        assert_eq!(s.deck_size(), DECK_SIZE - players as usize * hand);
    }
    assert_eq!(GameConfig::standard(6), Err(EngineError::InvalidPlayerCount(6)));
    assert!(GameState::new(GameConfig { players: 1, hand_size: 5 }, 0).is_err());
}

#[test]
fn legal_actions_at_full_tokens() {
    // Partner holds three colors and two ranks.
    let s = GameState::arranged(two(), vec![cards("B1 B2 R3 W4 G5"), cards("R1 R1 Y2 W2 R2")], [0; 5], vec![], 8, 3, 0)
        .unwrap();
    let legal = s.legal_actions().unwrap();
    assert_eq!(legal.len(), 10);
    assert!(!legal.iter().any(|a| matches!(a, Action::Discard { .. })));
    assert_eq!(
        legal[5..],
        [
            Action::HintColor { target: 1, color: Color::R },
            Action::HintColor { target: 1, color: Color::Y },
            Action::HintColor { target: 1, color: Color::W },
            Action::HintRank { target: 1, rank: 1 },
            Action::HintRank { target: 1, rank: 2 },
        ]
    );
}

#[test]
fn no_hints_without_tokens() {
    let s = GameState::arranged(two(), vec![cards("B1 B2 R3 W4 G5"), cards("R1 R1 Y2 W2 R2")], [0; 5], vec![], 0, 3, 0)
        .unwrap();
    let legal = s.legal_actions().unwrap();
    assert_eq!(legal.len(), 10);
    assert!(legal.iter().all(|a| !a.is_hint()));
}

#[test]
fn single_color_single_rank_hand_has_two_hints() {
    let s = GameState::arranged(two(), vec![cards("B1 B2 R3"), cards("G1 G1 G1")], [0; 5], vec![], 1, 3, 0).unwrap();
    let hints: Vec<Action> = s.legal_actions().unwrap().into_iter().filter(|a| a.is_hint()).collect();
    assert_eq!(
        hints,
        vec![Action::HintColor { target: 1, color: Color::G }, Action::HintRank { target: 1, rank: 1 }]
    );
}

#[test]
fn hints_must_touch_and_target_partner() {
    let s = GameState::arranged(two(), vec![cards("B1 B2 R3 W4 G5"), cards("R1 R1 Y2 W2 R2")], [0; 5], vec![], 5, 3, 0)
        .unwrap();
    assert!(!s.is_legal(&Action::HintColor { target: 1, color: Color::G }));
    assert!(!s.is_legal(&Action::HintRank { target: 1, rank: 5 }));
    assert!(!s.is_legal(&Action::HintRank { target: 0, rank: 1 }));
    assert!(!s.is_legal(&Action::Play { slot: 5 }));
    assert!(s.is_legal(&Action::Discard { slot: 4 }));
}

#[test]
fn playing_next_rank_extends_stack() {
    let mut s = GameState::arranged(two(), vec![cards("R2 B1 B2 B3 B4"), cards("G1 G2 G3 G4 W1")], [0, 1, 0, 0, 0], vec![], 8, 3, 0)
        .unwrap();
    let e = s.apply(Action::Play { slot: 0 }).unwrap();
    assert!(matches!(e.outcome, Outcome::Played { success: true, .. }));
    assert_eq!(s.fireworks()[Color::R.index()], 2);
    assert_eq!(s.lives(), 3);
    assert_eq!(s.hand(0).len(), 5);
    assert_eq!(s.current_player(), 1);
}

#[test]
fn misplay_costs_a_life() {
    let mut s = GameState::arranged(two(), vec![cards("R2 B1 B2 B3 B4"), cards("G1 G2 G3 G4 W1")], [0, 2, 0, 0, 0], vec![], 8, 3, 0)
        .unwrap();
    s.apply(Action::Play { slot: 0 }).unwrap();
    assert_eq!(s.fireworks()[Color::R.index()], 2);
    assert_eq!(s.lives(), 2);
    assert_eq!(s.discard_pile(), &cards("R2")[..]);
}

#[test]
fn rank_hint_sets_positive_and_negative_knowledge() {
    let mut s = GameState::arranged(two(), vec![cards("B2 B3 R3 W4 G5"), cards("R1 Y2 B1 W1 R4")], [0; 5], vec![], 8, 3, 0)
        .unwrap();
    let e = s.apply(Action::HintRank { target: 1, rank: 1 }).unwrap();
    assert_eq!(e.outcome, Outcome::Hinted { touched: vec![0, 2, 3] });
    assert_eq!(s.hint_tokens(), 7);
    let k = s.hand(1).knowledge();
    for slot in [0, 2, 3] {
        assert_eq!(k[slot].known_rank(), Some(1));
        assert!(k[slot].rank_hinted);
        assert!(!k[slot].knows_color());
    }
    for slot in [1, 4] {
        assert!(!k[slot].rank_possible(1));
        assert!(!k[slot].rank_hinted);
        assert_eq!(k[slot].possible_ranks().count(), 4);
    }
}

#[test]
fn negative_information_can_complete_knowledge() {
    let mut s = GameState::arranged(two(), vec![cards("B2 B3 R3 W4 G5"), cards("R1 R2 R3 R4 Y1")], [0; 5], vec![], 8, 3, 0)
        .unwrap();
    for rank in [1, 2, 3] {
        s.apply(Action::HintRank { target: 1, rank }).unwrap();
        s.apply(Action::Discard { slot: 0 }).unwrap();
    }
    s.apply(Action::HintRank { target: 1, rank: 4 }).unwrap();
    // Slot 4 (Y1) was touched by the 1 hint; R4 by the 4 hint. No card is 5.
    let k = s.hand(1).knowledge();
    assert_eq!(k[3].known_rank(), Some(4));
    assert!(!k[3].color_hinted);
}

#[test]
fn discard_recovers_token_and_is_illegal_at_eight() {
    let mut s = GameState::arranged(two(), vec![cards("B2 B3 R3 W4 G5"), cards("R1 R2 R3 R4 Y1")], [0; 5], vec![], 8, 3, 0)
        .unwrap();
    assert!(matches!(
        s.clone().apply(Action::Discard { slot: 0 }),
        Err(EngineError::IllegalAction { .. })
    ));
    s.apply(Action::HintColor { target: 1, color: Color::R }).unwrap();
    assert_eq!(s.hint_tokens(), 7);
    s.apply(Action::Discard { slot: 0 }).unwrap();
    assert_eq!(s.hint_tokens(), 8);
    assert_eq!(s.discard_pile().len(), 1);
}

#[test]
fn playing_a_five_restores_a_token() {
    let mut s = GameState::arranged(two(), vec![cards("G5 B3 R3 W4 B2"), cards("R1 R2 R3 R4 Y1")], [0, 0, 0, 0, 4], vec![], 3, 3, 0)
        .unwrap();
    s.apply(Action::Play { slot: 0 }).unwrap();
    assert_eq!(s.hint_tokens(), 4);
    assert_eq!(s.fireworks()[Color::G.index()], 5);

    let mut full = GameState::arranged(two(), vec![cards("G5 B3 R3 W4 B2"), cards("R1 R2 R3 R4 Y1")], [0, 0, 0, 0, 4], vec![], 8, 3, 0)
        .unwrap();
    full.apply(Action::Play { slot: 0 }).unwrap();
    assert_eq!(full.hint_tokens(), 8);
}

#[test]
fn terminal_conditions_and_score() {
    let s = GameState::arranged(two(), vec![vec![], vec![]], [5; 5], vec![], 8, 3, 0).unwrap();
    assert!(s.is_terminal());
    assert_eq!(s.score(), 25);

    let s = GameState::arranged(two(), vec![cards("B4"), cards("R4")], [3, 3, 3, 2, 2], vec![], 8, 0, 0).unwrap();
    assert!(s.is_terminal());
    assert_eq!(s.score(), 13);
    assert_eq!(s.legal_actions(), Err(EngineError::Terminal));
}

#[test]
fn last_life_lost_ends_game_with_stack_sum() {
    let mut s = GameState::arranged(two(), vec![cards("R5 B3 Y3 W4 B2"), cards("R1 R2 R3 R4 Y1")], [2, 3, 0, 0, 0], vec![], 8, 1, 0)
        .unwrap();
    s.apply(Action::Play { slot: 0 }).unwrap();
    assert!(s.is_terminal());
    assert_eq!(s.score(), 5);
    assert_eq!(s.apply(Action::Play { slot: 0 }).unwrap_err(), EngineError::Terminal);
}

#[test]
fn every_player_moves_once_after_deck_runs_out() {
    for players in 2..=5u8 {
        let config = GameConfig::standard(players).unwrap();
        let mut s = GameState::new(config, 3).unwrap();
        // Give a hint first so discarding is legal, then discard until empty.
        while s.deck_size() > 0 {
            let a = if s.can_discard() {
                Action::Discard { slot: 0 }
            } else {
                *s.legal_actions().unwrap().iter().find(|a| a.is_hint()).unwrap()
            };
            s.apply(a).unwrap();
        }
        assert_eq!(s.final_countdown(), Some(players));
        let mut extra = 0;
        while !s.is_terminal() {
            let a = s.legal_actions().unwrap()[0];
            s.apply(a).unwrap();
            extra += 1;
        }
        assert_eq!(extra, players as u32);
    }
}

#[test]
fn view_hides_own_cards_and_deck_order() {
    let a = GameState::arranged(two(), vec![cards("B1 B2 R3 W4 G5"), cards("R1 R1 Y2 W2 R2")], [0; 5], vec![], 8, 3, 0)
        .unwrap();
    let b = GameState::arranged(two(), vec![cards("Y3 Y3 G1 G4 B5"), cards("R1 R1 Y2 W2 R2")], [0; 5], vec![], 8, 3, 0)
        .unwrap();
    assert_ne!(a.deck(), b.deck());
    let va = serde_json::to_string(&PlayerView::new(&a, &[], 0)).unwrap();
    let vb = serde_json::to_string(&PlayerView::new(&b, &[], 0)).unwrap();
    assert_eq!(va, vb);
    assert_eq!(PlayerView::new(&a, &[], 0).digest(), PlayerView::new(&b, &[], 0).digest());
    // Partner's view does differ.
    assert_ne!(PlayerView::new(&a, &[], 1).digest(), PlayerView::new(&b, &[], 1).digest());
    assert!(PlayerView::new(&a, &[], 0).partner_cards(0).is_none());
}

#[test]
fn degenerate_discarder_scores_zero() {
    for seed in 0..50 {
        let mut a = Discarder;
        let mut b = Discarder;
        let record = play_game_recorded(&mut [&mut a, &mut b], two(), seed).unwrap();
        assert_eq!(record.score, 0);
        assert_eq!(record.lives_left, 3);
        // Each discard refills the tokens to 8, so every discard is preceded
        // by a forced hint: 40 hint/discard pairs, then two countdown turns.
        assert_eq!(record.turns.len(), 82);
    }
}

#[test]
fn illegal_action_aborts_with_agent_and_turn() {
    let mut a = StubbornDiscarder;
    let mut b = StubbornDiscarder;
    match play_game(&mut [&mut a, &mut b], two(), 4) {
        Err(GameError::IllegalAction { agent, turn, .. }) => {
            assert_eq!(agent, "stubborn");
            assert_eq!(turn, 0);
        }
        other => panic!("expected illegal action, got {other:?}"),
    }
}

#[test]
fn games_are_pure_functions_of_seed() {
    for seed in 0..20 {
        let run = || {
            let (mut a, mut b) = (RandomAgent, RandomAgent);
            play_game_recorded(&mut [&mut a, &mut b], two(), seed).unwrap().to_jsonl()
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn swapping_seats_and_start_replays_the_same_game() {
    for seed in 0..30 {
        let start = starting_player(two(), seed);
        let (mut a, mut b) = (RandomAgent, RandomAgent);
        let x = play_game_from(&mut [&mut a, &mut b], two(), seed, start).unwrap();
        let y = play_game_from(&mut [&mut b, &mut a], two(), seed, 1 - start).unwrap();
        assert_eq!((x.score, x.turns), (y.score, y.turns));
        assert_eq!(x.stats[0], y.stats[1]);
        assert_eq!(x.stats[1], y.stats[0]);
    }
}

#[test]
fn record_round_trips_and_replays() {
    let (mut a, mut b) = (RandomAgent, RandomAgent);
    let record = play_game_recorded(&mut [&mut a, &mut b], two(), 99).unwrap();
    let text = record.to_jsonl();
    let back = GameRecord::from_jsonl(&text).unwrap();
    assert_eq!(back, record);
    let states = back.replay_states().unwrap();
    assert_eq!(states.len(), record.turns.len());
    assert_eq!(record.outcome().turns as usize, record.turns.len());
    for (state, turn) in states.iter().zip(&record.turns) {
        assert_eq!(PlayerView::new(state, &[], turn.event.player as usize).digest().len(), 16);
    }

    let bad = text.replace("hanabi-qd/game-record", "other");
    assert!(GameRecord::from_jsonl(&bad).is_err());
    let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    assert!(GameRecord::from_jsonl(&truncated).is_err());
}

#[test]
fn recount_ignores_card_identities() {
    for seed in 0..20 {
        let (mut a, mut b) = (RandomAgent, RandomAgent);
        let record = play_game_recorded(&mut [&mut a, &mut b], two(), seed).unwrap();
        let text = record.to_jsonl();
        let mut redacted = String::new();
        for line in text.lines() {
            let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
            if let Some(o) = v.get_mut("outcome").and_then(|o| o.as_object_mut()) {
                o.remove("card");
            }
            redacted.push_str(&v.to_string());
            redacted.push('\n');
        }
        assert!(!redacted.contains("\"card\""));
        assert_eq!(recount_stats(&redacted, 2).unwrap(), record.stats);
    }
}

fn fuzz_game(config: GameConfig, seed: u64) -> Result<(), String> {
    let mut state = GameState::new(config, seed).map_err(|e| e.to_string())?;
    let mut rng = hanabi_qd_core::seed::rng_from(seed);
    let players = config.players as usize;
    let deck_after_deal = config.deck_after_deal();
    let mut heights = *state.fireworks();
    let mut turns = 0usize;
    while !state.is_terminal() {
        let legal = state.legal_actions().map_err(|e| e.to_string())?;
        if legal.iter().any(|a| !state.is_legal(a)) {
            return Err("legal_actions lists an illegal action".into());
        }
        let action = legal[rng.random_range(0..legal.len())];
        state.apply(action).map_err(|e| e.to_string())?;
        state.check_invariants().map_err(|e| format!("turn {turns}: {e}"))?;
        let on_table: usize = state.fireworks().iter().map(|&h| h as usize).sum::<usize>();
        let held: usize = (0..players).map(|p| state.hand(p).len()).sum();
        if state.deck_size() + held + state.discard_pile().len() + on_table != DECK_SIZE {
            return Err("card conservation".into());
        }
        for (h, new) in heights.iter_mut().zip(state.fireworks()) {
            if new < h {
                return Err("firework height decreased".into());
            }
            *h = *new;
        }
        turns += 1;
    }
    if state.score() as usize != heights.iter().map(|&h| h as usize).sum::<usize>() {
        return Err("score differs from stack sum".into());
    }
    if turns > 2 * deck_after_deal + 8 + players {
        return Err(format!("{turns} turns exceeds bound"));
    }
    Ok(())
}

#[test]
fn fuzzed_games_keep_invariants() {
    for seed in 0..2_000u64 {
        let players = 2 + (seed % 4) as u8;
        fuzz_game(GameConfig::standard(players).unwrap(), seed).unwrap();
    }
}

#[test]
fn turn_count_bound_is_tight_for_hint_discard_cycles() {
    // Hints interleaved with discards stretch a game well past one turn per
    // deck card; the alternating discarder reaches 2 * deck + players.
    let (mut a, mut b) = (Discarder, Discarder);
    let turns = play_game(&mut [&mut a, &mut b], two(), 5).unwrap().turns as usize;
    assert!(turns > 50 + 2);
    assert_eq!(turns, 2 * two().deck_after_deal() + 2);
}

proptest! {
    #[test]
    fn random_games_respect_invariants(seed in any::<u64>(), players in 2u8..=5) {
        prop_assert!(fuzz_game(GameConfig::standard(players).unwrap(), seed).is_ok());
    }
}
