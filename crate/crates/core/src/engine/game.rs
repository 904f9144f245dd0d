use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::action::{Action, TurnEvent};
use super::state::{starting_player, GameConfig, GameState};
use super::view::PlayerView;
use super::EngineError;
use crate::metrics::PlayStats;
use crate::seed::{self, GameRng, Stream};

/// Per-game information handed to each agent before the first turn.
#[derive(Clone, Copy, Debug)]
pub struct GameStart {
    pub seat: usize,
    pub players: usize,
    pub seed: u64,
}

/// Something that can take a seat at the table.
///
/// `rng` is the game's rule stream, shared by all seats; agents that need
/// randomness must draw from it so that a game is a pure function of its seed.
pub trait Agent {
    fn name(&self) -> String;

    fn begin_game(&mut self, _start: &GameStart) {}

    fn act(&mut self, view: &PlayerView<'_>, rng: &mut GameRng) -> Action;

    /// Called for every seat after each turn, including the seat that acted.
    fn observe(&mut self, _view: &PlayerView<'_>, _event: &TurnEvent) {}
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("agent {agent} (seat {seat}) chose illegal action {action} on turn {turn}: {reason}")]
    IllegalAction {
        agent: String,
        seat: usize,
        turn: u32,
        action: Action,
        reason: &'static str,
    },
    #[error("{given} agents supplied for a {expected}-player game")]
    AgentCount { given: usize, expected: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Summary of a finished game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub seed: u64,
    pub starting_player: u8,
    pub score: u8,
    pub turns: u32,
    pub lives_left: u8,
    /// Per-seat behavior counters.
    pub stats: Vec<PlayStats>,
}

/// One recorded turn: a digest of the actor's view plus the public event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedTurn {
    pub view_digest: String,
    #[serde(flatten)]
    pub event: TurnEvent,
}

/// Complete log of one game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub seed: u64,
    pub config: GameConfig,
    pub agents: Vec<String>,
    pub starting_player: u8,
    pub turns: Vec<RecordedTurn>,
    pub score: u8,
    pub lives_left: u8,
    pub stats: Vec<PlayStats>,
}

impl GameRecord {
    pub fn outcome(&self) -> GameOutcome {
        GameOutcome {
            seed: self.seed,
            starting_player: self.starting_player,
            score: self.score,
            turns: self.turns.len() as u32,
            lives_left: self.lives_left,
            stats: self.stats.clone(),
        }
    }

    /// Rebuild the state before every turn from the seed and recorded actions.
    /// Fails if any recorded event disagrees with the replay.
    pub fn replay_states(&self) -> Result<Vec<GameState>, EngineError> {
        let mut state = GameState::with_start(self.config, self.seed, self.starting_player)?;
        let mut states = Vec::with_capacity(self.turns.len());
        for t in &self.turns {
            states.push(state.clone());
            let event = state.apply(t.event.action)?;
            if event != t.event {
                return Err(EngineError::InvalidState(format!(
                    "replay diverged on turn {}",
                    t.event.turn
                )));
            }
        }
        Ok(states)
    }
}

/// Play one game with the seed-determined starting player.
pub fn play_game(agents: &mut [&mut dyn Agent], config: GameConfig, seed: u64) -> Result<GameOutcome, GameError> {
    let start = starting_player(config, seed);
    play_game_from(agents, config, seed, start)
}

/// Play one game with an explicit starting seat.
pub fn play_game_from(
    agents: &mut [&mut dyn Agent],
    config: GameConfig,
    seed: u64,
    start: u8,
) -> Result<GameOutcome, GameError> {
    let mut runner = Runner::new(agents, config, seed, start)?;
    runner.run(None)?;
    Ok(runner.outcome())
}

/// Play one game and keep the full turn log.
pub fn play_game_recorded(
    agents: &mut [&mut dyn Agent],
    config: GameConfig,
    seed: u64,
) -> Result<GameRecord, GameError> {
    let start = starting_player(config, seed);
    let names = agents.iter().map(|a| a.name()).collect();
    let mut turns = Vec::new();
    let mut runner = Runner::new(agents, config, seed, start)?;
    runner.run(Some(&mut turns))?;
    let outcome = runner.outcome();
    Ok(GameRecord {
        seed,
        config,
        agents: names,
        starting_player: start,
        turns,
        score: outcome.score,
        lives_left: outcome.lives_left,
        stats: outcome.stats,
    })
}

struct Runner<'a, 'b> {
    agents: &'a mut [&'b mut dyn Agent],
    state: GameState,
    history: Vec<TurnEvent>,
    stats: Vec<PlayStats>,
    rng: GameRng,
    seed: u64,
    start: u8,
}

impl<'a, 'b> Runner<'a, 'b> {
    fn new(
        agents: &'a mut [&'b mut dyn Agent],
        config: GameConfig,
        seed: u64,
        start: u8,
    ) -> Result<Self, GameError> {
        if agents.len() != config.players as usize {
            return Err(GameError::AgentCount { given: agents.len(), expected: config.players as usize });
        }
        let state = GameState::with_start(config, seed, start)?;
        Ok(Runner {
            agents,
            state,
            history: Vec::with_capacity(80),
            stats: vec![PlayStats::default(); config.players as usize],
            rng: seed::rng_from(seed::derive(seed, Stream::Rules, 0)),
            seed,
            start,
        })
    }

    fn run(&mut self, mut log: Option<&mut Vec<RecordedTurn>>) -> Result<(), GameError> {
        let players = self.state.num_players();
        for (seat, agent) in self.agents.iter_mut().enumerate() {
            agent.begin_game(&GameStart { seat, players, seed: self.seed });
        }
        while !self.state.is_terminal() {
            let seat = self.state.current_player();
            let view = PlayerView::new(&self.state, &self.history, seat);
            let digest = log.as_ref().map(|_| view.digest());
            let action = self.agents[seat].act(&view, &mut self.rng);
            if let Some(reason) = self.state.illegal_reason(&action) {
                return Err(GameError::IllegalAction {
                    agent: self.agents[seat].name(),
                    seat,
                    turn: self.state.turn(),
                    action,
                    reason,
                });
            }
            let event = self.state.apply(action)?;
            self.stats[seat].record_turn(&event);
            if let (Some(log), Some(view_digest)) = (log.as_deref_mut(), digest) {
                log.push(RecordedTurn { view_digest, event: event.clone() });
            }
            self.history.push(event);
            let event = self.history.last().expect("just pushed");
            for (p, agent) in self.agents.iter_mut().enumerate() {
                let view = PlayerView::new(&self.state, &self.history, p);
                agent.observe(&view, event);
            }
        }
        Ok(())
    }

    fn outcome(&self) -> GameOutcome {
        GameOutcome {
            seed: self.seed,
            starting_player: self.start,
            score: self.state.score(),
            turns: self.state.turn(),
            lives_left: self.state.lives(),
            stats: self.stats.clone(),
        }
    }
}
