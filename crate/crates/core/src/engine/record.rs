//! JSON-Lines form of [`GameRecord`]: a header line, one line per turn, and a
//! footer line. Every line carries a `kind` tag.
//!
//! ```text
//! {"kind":"header","schema":"hanabi-qd/game-record","version":1,"seed":..,"agents":[..],"config":{..},"starting_player":0}
//! {"kind":"turn","view_digest":"..","turn":0,"player":0,"action":{..},"tokens_before":8,"lives_before":3,"outcome":{..},"drew":false}
//! {"kind":"footer","score":17,"lives_left":2,"turns":68,"stats":[{..},{..}]}
//! ```

use serde::{Deserialize, Serialize};

use super::game::{GameRecord, RecordedTurn};
use super::state::GameConfig;
use crate::io::{FormatError, SCHEMA_VERSION};
use crate::metrics::PlayStats;

pub const RECORD_SCHEMA: &str = "hanabi-qd/game-record";

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Header {
        schema: String,
        version: u32,
        seed: u64,
        agents: Vec<String>,
        config: GameConfig,
        starting_player: u8,
    },
    Turn(RecordedTurn),
    Footer {
        score: u8,
        lives_left: u8,
        turns: u32,
        stats: Vec<PlayStats>,
    },
}

impl GameRecord {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("record line serializes"));
            out.push('\n');
        };
        push(&Line::Header {
            schema: RECORD_SCHEMA.to_string(),
            version: SCHEMA_VERSION,
            seed: self.seed,
            agents: self.agents.clone(),
            config: self.config,
            starting_player: self.starting_player,
        });
        for t in &self.turns {
            push(&Line::Turn(t.clone()));
        }
        push(&Line::Footer {
            score: self.score,
            lives_left: self.lives_left,
            turns: self.turns.len() as u32,
            stats: self.stats.clone(),
        });
        out
    }

    pub fn from_jsonl(text: &str) -> Result<GameRecord, FormatError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Line = serde_json::from_str(lines.next().ok_or(FormatError::Empty)?)?;
        let Line::Header { schema, version, seed, agents, config, starting_player } = header else {
            return Err(FormatError::Malformed("first line is not a header".into()));
        };
        crate::io::check_schema(RECORD_SCHEMA, &schema, version)?;
        let mut turns = Vec::new();
        for line in lines {
            match serde_json::from_str::<Line>(line)? {
                Line::Turn(t) => turns.push(t),
                Line::Footer { score, lives_left, turns: n, stats } => {
                    if n as usize != turns.len() {
                        return Err(FormatError::Malformed(format!(
                            "footer reports {n} turns, found {}",
                            turns.len()
                        )));
                    }
                    return Ok(GameRecord {
                        seed,
                        config,
                        agents,
                        starting_player,
                        turns,
                        score,
                        lives_left,
                        stats,
                    });
                }
                Line::Header { .. } => return Err(FormatError::Malformed("duplicate header".into())),
            }
        }
        Err(FormatError::Malformed("missing footer".into()))
    }
}

/// Recount per-seat [`PlayStats`] from the turn lines of a serialized record.
///
/// Reads only the acting player, the token count at turn start, the action
/// type and, for plays, the knowledge sets at the moment of play. Card
/// identities are never consulted, so the count also works on records with
/// every `card` field stripped.
pub fn recount_stats(text: &str, players: usize) -> Result<Vec<PlayStats>, FormatError> {
    let mut stats = vec![PlayStats::default(); players];
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line)?;
        if v["kind"] != "turn" {
            continue;
        }
        let field = |name: &str| {
            v[name].as_u64().ok_or_else(|| FormatError::Malformed(format!("turn line lacks {name}")))
        };
        let player = field("player")? as usize;
        let s = stats
            .get_mut(player)
            .ok_or_else(|| FormatError::Malformed(format!("player {player} out of range")))?;
        let action = v["action"]["type"].as_str().unwrap_or_default();
        if field("tokens_before")? > 0 {
            s.turns_with_token += 1;
            if action.starts_with("hint") {
                s.hints_given += 1;
            }
        }
        if action == "play" {
            let k = &v["outcome"]["knowledge"];
            let singleton = |mask: &serde_json::Value| mask.as_u64().is_some_and(|m| m.count_ones() == 1) as u64;
            s.cards_played += 1;
            s.pieces_known_sum += singleton(&k["colors"]) + singleton(&k["ranks"]);
        }
    }
    Ok(stats)
}
