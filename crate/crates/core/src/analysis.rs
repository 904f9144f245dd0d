//! Diversity diagnostics: chromosome Hamming distance and action agreement
//! over a corpus of recorded decision points, plus the risk-aversion metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elites::Archive;
use crate::engine::{play_game_recorded, Action, Agent, GameError, GameRecord, GameState, PlayerView};
use crate::io::{check_schema, FormatError, SCHEMA_VERSION};
use crate::metrics::NicheIndex;
use crate::rules::{agent_act, playability, Chromosome, ChromosomeAgent, RuleCatalog};
use crate::seed::{self, Stream};

pub const CORPUS_SCHEMA: &str = "hanabi-qd/state-corpus";
pub const AGREEMENT_SCHEMA: &str = "hanabi-qd/agreement";
pub const HAMMING_SCHEMA: &str = "hanabi-qd/hamming";

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("chromosome lengths differ ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("archives use different grids ({0} and {1} bins)")]
    GridMismatch(usize, usize),
    #[error("snapshot {id} is not a live decision point: {reason}")]
    BadSnapshot { id: u64, reason: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Number of positions at which the two chromosomes hold different rules.
pub fn hamming(a: &Chromosome, b: &Chromosome) -> Result<usize, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.genes().iter().zip(b.genes()).filter(|(x, y)| x != y).count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingRow {
    pub niche: NicheIndex,
    pub distance: usize,
}

/// Hamming distance between the elites of every niche both archives occupy.
pub fn hamming_report(a: &Archive, b: &Archive) -> Result<Vec<HammingRow>, AnalysisError> {
    if a.bins() != b.bins() {
        return Err(AnalysisError::GridMismatch(a.bins(), b.bins()));
    }
    a.occupied()
        .filter_map(|(n, ea)| b.get(n).map(|eb| (n, ea, eb)))
        .map(|(niche, ea, eb)| Ok(HammingRow { niche, distance: hamming(&ea.chromosome, &eb.chromosome)? }))
        .collect()
}

pub fn hamming_csv(rows: &[HammingRow]) -> String {
    let mut out = crate::io::csv_schema_line(HAMMING_SCHEMA);
    out.push_str("i,j,distance\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.niche.i, r.niche.j, r.distance));
    }
    out
}

/// One decision point: the full state before the acting player moves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: u64,
    pub source: NicheIndex,
    pub game_seed: u64,
    pub turn: u32,
    pub state: GameState,
}

impl Snapshot {
    pub fn actor(&self) -> usize {
        self.state.current_player()
    }

    /// The acting player's view. History is not part of a snapshot.
    pub fn view(&self) -> PlayerView<'_> {
        PlayerView::new(&self.state, &[], self.actor())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateCorpus {
    pub snapshots: Vec<Snapshot>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CorpusLine {
    Header { schema: String, version: u32, count: usize },
    Snapshot(Box<Snapshot>),
}

impl StateCorpus {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let header = CorpusLine::Header {
            schema: CORPUS_SCHEMA.to_string(),
            version: SCHEMA_VERSION,
            count: self.snapshots.len(),
        };
        out.push_str(&serde_json::to_string(&header).expect("header serializes"));
        out.push('\n');
        for s in &self.snapshots {
            out.push_str(&serde_json::to_string(&CorpusLine::Snapshot(Box::new(s.clone()))).expect("snapshot serializes"));
            out.push('\n');
        }
        out
    }

    /// Parse and validate a corpus; every snapshot must be a consistent,
    /// non-terminal state.
    pub fn from_jsonl(text: &str) -> Result<StateCorpus, AnalysisError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or(FormatError::Empty)?;
        let count = match serde_json::from_str(first).map_err(FormatError::from)? {
            CorpusLine::Header { schema, version, count } => {
                check_schema(CORPUS_SCHEMA, &schema, version)?;
                count
            }
            CorpusLine::Snapshot(_) => return Err(FormatError::Malformed("corpus header missing".into()).into()),
        };
        let mut snapshots = Vec::with_capacity(count);
        for line in lines {
            match serde_json::from_str(line).map_err(FormatError::from)? {
                CorpusLine::Snapshot(s) => {
                    if s.state.is_terminal() {
                        return Err(AnalysisError::BadSnapshot { id: s.id, reason: "terminal".into() });
                    }
                    s.state
                        .check_invariants()
                        .map_err(|e| AnalysisError::BadSnapshot { id: s.id, reason: e.to_string() })?;
                    snapshots.push(*s);
                }
                CorpusLine::Header { .. } => {
                    return Err(FormatError::Malformed("second corpus header".into()).into())
                }
            }
        }
        if snapshots.len() != count {
            return Err(FormatError::Malformed(format!("header says {count} snapshots, found {}", snapshots.len())).into());
        }
        Ok(StateCorpus { snapshots })
    }
}

/// Every decision point of `games_per_elite` self-play games per elite.
/// Snapshot ids are assigned in archive order, then game, then turn.
pub fn collect_states(
    archive: &Archive,
    catalog: &RuleCatalog,
    games_per_elite: usize,
    seed: u64,
) -> Result<StateCorpus, AnalysisError> {
    let config = archive.config().game;
    let elites: Vec<_> = archive.occupied().collect();
    let per_elite = elites
        .par_iter()
        .map(|(n, e)| {
            let seeds = seed::seed_list(seed, Stream::Corpus, archive.cell_index(*n) as u64, games_per_elite);
            let mut out = Vec::new();
            for s in seeds {
                let mut seats: Vec<ChromosomeAgent<'_>> =
                    (0..config.players).map(|_| ChromosomeAgent::new(catalog, e.chromosome.clone())).collect();
                let mut agents: Vec<&mut dyn Agent> = seats.iter_mut().map(|a| a as &mut dyn Agent).collect();
                let record = play_game_recorded(&mut agents, config, s)?;
                let states = record.replay_states().map_err(GameError::from)?;
                for (turn, state) in states.into_iter().enumerate() {
                    out.push(Snapshot { id: 0, source: *n, game_seed: s, turn: turn as u32, state });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let mut snapshots: Vec<Snapshot> = per_elite.into_iter().flatten().collect();
    for (id, s) in snapshots.iter_mut().enumerate() {
        s.id = id as u64;
    }
    Ok(StateCorpus { snapshots })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NicheAgreement {
    pub niche: NicheIndex,
    pub agreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub snapshots: usize,
    pub niches: Vec<NicheAgreement>,
    /// Mean over niches.
    pub mean_agreement: f64,
    pub mean_legal_actions: f64,
    /// Expected agreement of two independent uniform-random agents.
    pub random_baseline: f64,
}

impl AgreementReport {
    pub fn to_csv(&self) -> String {
        let mut out = crate::io::csv_schema_line(AGREEMENT_SCHEMA);
        out.push_str("i,j,agreement\n");
        for r in &self.niches {
            out.push_str(&format!("{},{},{}\n", r.niche.i, r.niche.j, r.agreement));
        }
        out
    }
}

/// Rng for a rule evaluated at a snapshot. Both elites of a niche draw from
/// the same stream, so identical chromosomes always agree.
fn snapshot_rng(snapshot: u64, niche: NicheIndex) -> seed::GameRng {
    let cell = ((niche.i as u64) << 32) | niche.j as u64;
    seed::rng_from(seed::derive(seed::derive(snapshot, Stream::Agreement, 0), Stream::Agreement, cell))
}

/// For each niche occupied in both archives, the fraction of corpus states in
/// which the two elites pick the same action.
pub fn action_agreement(
    a: &Archive,
    b: &Archive,
    catalog: &RuleCatalog,
    corpus: &StateCorpus,
) -> Result<AgreementReport, AnalysisError> {
    if a.bins() != b.bins() {
        return Err(AnalysisError::GridMismatch(a.bins(), b.bins()));
    }
    let common: Vec<_> = a.occupied().filter_map(|(n, ea)| b.get(n).map(|eb| (n, ea, eb))).collect();
    let niches: Vec<NicheAgreement> = common
        .par_iter()
        .map(|&(niche, ea, eb)| {
            let same = corpus
                .snapshots
                .iter()
                .filter(|s| {
                    let view = s.view();
                    let x = agent_act(catalog, &ea.chromosome, &view, &mut snapshot_rng(s.id, niche));
                    let y = agent_act(catalog, &eb.chromosome, &view, &mut snapshot_rng(s.id, niche));
                    x == y
                })
                .count();
            let agreement = if corpus.is_empty() { 0.0 } else { same as f64 / corpus.len() as f64 };
            NicheAgreement { niche, agreement }
        })
        .collect();
    let (mut legal, mut baseline) = (0.0, 0.0);
    for s in &corpus.snapshots {
        let k = s.state.legal_action_count() as f64;
        legal += k;
        baseline += 1.0 / k;
    }
    let per = |x: f64| if corpus.is_empty() { 0.0 } else { x / corpus.len() as f64 };
    let mean_agreement =
        if niches.is_empty() { 0.0 } else { niches.iter().map(|n| n.agreement).sum::<f64>() / niches.len() as f64 };
    Ok(AgreementReport {
        snapshots: corpus.len(),
        niches,
        mean_agreement,
        mean_legal_actions: per(legal),
        random_baseline: per(baseline),
    })
}

/// Mean probability, from the actor's point of view, that each played card was
/// playable. `None` when the records contain no plays.
pub fn risk_aversion(records: &[GameRecord]) -> Result<Option<f64>, AnalysisError> {
    let (mut total, mut plays) = (0.0, 0u64);
    for record in records {
        let states = record.replay_states().map_err(GameError::from)?;
        for (state, turn) in states.iter().zip(&record.turns) {
            if let Action::Play { slot } = turn.event.action {
                let view = PlayerView::new(state, &[], turn.event.player as usize);
                total += playability(&view, slot as usize);
                plays += 1;
            }
        }
    }
    Ok((plays > 0).then(|| total / plays as f64))
}
