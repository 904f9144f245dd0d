//! Hanabi simulation and quality-diversity toolkit.
//!
//! The crate is organized bottom-up:
//!
//! * [`engine`]: rules, observation masking and game records.
//! * [`rules`]: the rule catalog and chromosome-driven agents.
//! * [`metrics`]: behavior descriptors and niche mapping.
//! * [`elites`]: MAP-Elites search over chromosomes.
//! * [`evaluation`]: cross-play and match-up matrices.
//! * [`meta`]: response tables and the adaptive meta-agent.
//! * [`analysis`]: Hamming distance, state corpora and action agreement.

pub mod analysis;
pub mod elites;
pub mod engine;
pub mod evaluation;
pub mod io;
pub mod meta;
pub mod metrics;
pub mod rules;
pub mod seed;
pub mod stats;

pub use engine::{Action, Agent, Card, CardKnowledge, Color, GameConfig, GameRecord, GameState, PlayerView};
pub use metrics::{BehaviorDescriptor, NicheIndex, PlayStats};
