//! MAP-Elites over rule chromosomes.
//!
//! Candidates come from uniform sampling during an initial random phase and
//! from crossover and mutation of archive elites afterwards. A candidate that
//! lands in an occupied niche is compared against the incumbent re-played on
//! the candidate's own seeds, so both sides of the comparison see the same
//! deals.

mod archive;
mod evolve;
mod reeval;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use archive::{Archive, ArchiveEntry, ARCHIVE_SCHEMA};
pub use evolve::{fitness, generation_seeds, new_chromosome, run, Evaluated, Evolver, FitnessResult, Placement, RunMonitor};
pub use reeval::{reevaluate, ReevalEntry, ReevalReport};

use crate::engine::{GameConfig, GameError};
use crate::io::FormatError;
use crate::metrics::DEFAULT_BINS;
use crate::rules::CHROMOSOME_LEN;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    /// Candidates to generate in total.
    pub total_candidates: u64,
    /// Leading candidates drawn uniformly at random.
    pub random_phase: u64,
    pub games_per_eval: usize,
    /// Per-gene replacement probability.
    pub mutation_rate: f64,
    pub crossover_probability: f64,
    pub chromosome_length: usize,
    pub bins: usize,
    pub master_seed: u64,
    pub checkpoint_every: u64,
    /// Worker threads. `1` runs strictly in order and is bit-reproducible.
    pub threads: usize,
    /// Candidates evaluated concurrently from one archive snapshot when
    /// `threads > 1`.
    pub batch_size: usize,
    pub game: GameConfig,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            total_candidates: 1_000_000,
            random_phase: 10_000,
            games_per_eval: 100,
            mutation_rate: 0.1,
            crossover_probability: 0.5,
            chromosome_length: CHROMOSOME_LEN,
            bins: DEFAULT_BINS,
            master_seed: 0,
            checkpoint_every: 10_000,
            threads: 1,
            batch_size: 256,
            game: GameConfig::two_player(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |m: &str| Err(EvolveError::Config(m.to_string()));
        if self.random_phase > self.total_candidates {
            return bad("random phase longer than total candidates");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) || !(0.0..=1.0).contains(&self.crossover_probability) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.games_per_eval == 0 {
            return bad("games per evaluation must be positive");
        }
        if self.chromosome_length == 0 {
            return bad("chromosome length must be positive");
        }
        if self.bins == 0 {
            return bad("bins must be positive");
        }
        if self.threads == 0 || self.batch_size == 0 {
            return bad("threads and batch size must be positive");
        }
        self.game.validate().map_err(|e| EvolveError::Config(e.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("archive invariant violated: {0}")]
    Invariant(String),
    #[error("archive is empty")]
    EmptyArchive,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("checkpoint failed: {0}")]
    Checkpoint(#[from] FormatError),
}
