//! Generalist and best-response selection from a match-up matrix, and the
//! meta-agent that switches between them during play.
//!
//! When the meta-agent is confident in its estimate of the partner's niche it
//! follows the specialized response for that niche; otherwise it follows the
//! generalist.

use std::collections::HashMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elites::Archive;
use crate::engine::{play_game, Action, Agent, GameConfig, GameError, GameStart, PlayerView, TurnEvent};
use crate::evaluation::MatchupMatrix;
use crate::io::{check_schema, FormatError, SCHEMA_VERSION};
use crate::metrics::{niche, BehaviorDescriptor, NicheIndex, PlayStats};
use crate::rules::{agent_act, Chromosome, ChromosomeAgent, RuleCatalog};
use crate::seed::{self, GameRng, Stream};
use crate::stats::{Accumulator, ScoreSummary};

pub const RESPONSE_SCHEMA: &str = "hanabi-qd/response-table";
pub const SEGMENTS_SCHEMA: &str = "hanabi-qd/response-segments";
pub const META_EVAL_SCHEMA: &str = "hanabi-qd/meta-eval";

#[derive(Debug, Error)]
pub enum MetaError {
    #[error("niche {0} is not occupied")]
    Unoccupied(NicheIndex),
    #[error("match-up matrix is empty")]
    Empty,
    #[error("oracle mode needs the partner's true niche")]
    MissingTrueNiche,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Average score of `n` across all occupied partners, itself included.
pub fn intra_score(matrix: &MatchupMatrix, n: NicheIndex) -> Result<f64, MetaError> {
    if !matrix.contains(n) {
        return Err(MetaError::Unoccupied(n));
    }
    let total: f64 = matrix.niches().iter().map(|&p| matrix.score(n, p)).sum();
    Ok(total / matrix.len() as f64)
}

/// Index of the greatest value; the earliest wins ties.
fn first_argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k)
}

/// The niche with the highest intra score. Niches are scanned in
/// lexicographic order, so the smallest `(i, j)` wins ties.
pub fn generalist(matrix: &MatchupMatrix) -> Result<NicheIndex, MetaError> {
    let niches = matrix.niches();
    let k = first_argmax(niches.iter().map(|&n| intra_score(matrix, n).expect("occupied")))
        .ok_or(MetaError::Empty)?;
    Ok(niches[k])
}

/// Best occupied partner for `p`, smallest `(i, j)` on ties.
pub fn best_response(matrix: &MatchupMatrix, p: NicheIndex) -> Result<NicheIndex, MetaError> {
    if !matrix.contains(p) {
        return Err(MetaError::Unoccupied(p));
    }
    let niches = matrix.niches();
    let k = first_argmax(niches.iter().map(|&q| matrix.score(q, p))).ok_or(MetaError::Empty)?;
    Ok(niches[k])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub partner: NicheIndex,
    pub response: NicheIndex,
}

/// Generalist plus one best response per occupied niche.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseTable {
    pub population: String,
    pub bins: usize,
    pub generalist: NicheIndex,
    /// Sorted by partner niche.
    pub responses: Vec<Response>,
}

#[derive(Serialize, Deserialize)]
struct ResponseDoc {
    schema: String,
    version: u32,
    #[serde(flatten)]
    table: ResponseTable,
}

pub fn response_table(matrix: &MatchupMatrix, bins: usize) -> Result<ResponseTable, MetaError> {
    let generalist = generalist(matrix)?;
    let responses = matrix
        .niches()
        .iter()
        .map(|&partner| Ok(Response { partner, response: best_response(matrix, partner)? }))
        .collect::<Result<Vec<_>, MetaError>>()?;
    Ok(ResponseTable { population: matrix.population().to_string(), bins, generalist, responses })
}

impl ResponseTable {
    pub fn response(&self, partner: NicheIndex) -> Option<NicheIndex> {
        self.responses
            .binary_search_by_key(&(partner.i, partner.j), |r| (r.partner.i, r.partner.j))
            .ok()
            .map(|k| self.responses[k].response)
    }

    /// The occupied niche closest to `n` by distance between cell centers,
    /// smallest `(i, j)` on ties.
    pub fn nearest_partner(&self, n: NicheIndex) -> Option<NicheIndex> {
        let (x, y) = n.center(self.bins);
        let dist = |m: NicheIndex| {
            let (a, b) = m.center(self.bins);
            (a - x).powi(2) + (b - y).powi(2)
        };
        let mut best: Option<(NicheIndex, f64)> = None;
        for r in &self.responses {
            let d = dist(r.partner);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((r.partner, d));
            }
        }
        best.map(|(m, _)| m)
    }

    /// Response to the occupied niche nearest `n`.
    pub fn response_near(&self, n: NicheIndex) -> Option<NicheIndex> {
        self.nearest_partner(n).and_then(|m| self.response(m))
    }

    pub fn to_json(&self) -> String {
        let doc = ResponseDoc { schema: RESPONSE_SCHEMA.into(), version: SCHEMA_VERSION, table: self.clone() };
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ResponseTable, FormatError> {
        let doc: ResponseDoc = serde_json::from_str(text)?;
        check_schema(RESPONSE_SCHEMA, &doc.schema, doc.version)?;
        let mut table = doc.table;
        table.responses.sort_by_key(|r| (r.partner.i, r.partner.j));
        Ok(table)
    }

    /// Partner-to-response segments: `m,n,i_response,j_response`.
    pub fn segments_csv(&self) -> String {
        let mut out = crate::io::csv_schema_line(SEGMENTS_SCHEMA);
        out.push_str("m,n,i_response,j_response\n");
        for r in &self.responses {
            out.push_str(&format!("{},{},{},{}\n", r.partner.i, r.partner.j, r.response.i, r.response.j));
        }
        out
    }
}

/// Behavior counters of one partner, accumulated from its public turns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartnerModel {
    pub partner_id: Option<u64>,
    pub stats: PlayStats,
    pub turns_observed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NicheEstimate {
    pub descriptor: Option<BehaviorDescriptor>,
    pub niche: Option<NicheIndex>,
    /// Partner turns observed.
    pub confidence: u64,
}

impl PartnerModel {
    pub fn new(partner_id: Option<u64>) -> PartnerModel {
        PartnerModel { partner_id, ..PartnerModel::default() }
    }

    pub fn update(&mut self, event: &TurnEvent) {
        self.stats.record_turn(event);
        self.turns_observed += 1;
    }
}

/// Descriptor and niche implied by the partner's observed turns. Undefined
/// descriptors come with confidence zero.
pub fn estimate_niches(model: &PartnerModel, bins: usize) -> NicheEstimate {
    match model.stats.descriptor() {
        Ok(d) => NicheEstimate { descriptor: Some(d), niche: Some(niche(&d, bins)), confidence: model.turns_observed },
        Err(_) => NicheEstimate { descriptor: None, niche: None, confidence: 0 },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaMode {
    Oracle,
    Generalist,
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaConfig {
    pub mode: MetaMode,
    /// Partner turns that must be exceeded before specializing; `None` never
    /// specializes.
    pub threshold: Option<u64>,
    /// Pool partner observations across games with the same partner id.
    pub persist_across_games: bool,
}

impl Default for MetaConfig {
    fn default() -> Self {
        MetaConfig { mode: MetaMode::Adaptive, threshold: Some(0), persist_across_games: true }
    }
}

/// Response table together with the chromosomes it refers to.
#[derive(Clone, Debug)]
pub struct MetaPolicy {
    table: ResponseTable,
    elites: HashMap<NicheIndex, Chromosome>,
}

impl MetaPolicy {
    pub fn new(table: ResponseTable, archive: &Archive) -> Result<MetaPolicy, MetaError> {
        let mut elites = HashMap::new();
        let needed = std::iter::once(table.generalist).chain(table.responses.iter().map(|r| r.response));
        for n in needed {
            let e = archive.get(n).ok_or(MetaError::Unoccupied(n))?;
            elites.insert(n, e.chromosome.clone());
        }
        Ok(MetaPolicy { table, elites })
    }

    pub fn table(&self) -> &ResponseTable {
        &self.table
    }

    pub fn chromosome(&self, n: NicheIndex) -> Option<&Chromosome> {
        self.elites.get(&n)
    }

    pub fn generalist(&self) -> &Chromosome {
        &self.elites[&self.table.generalist]
    }
}

/// Plays as one of the policy's elites, chosen afresh every turn.
#[derive(Clone, Debug)]
pub struct MetaAgent<'p> {
    catalog: &'p RuleCatalog,
    policy: &'p MetaPolicy,
    config: MetaConfig,
    seat: usize,
    partner: Option<u64>,
    true_niche: Option<NicheIndex>,
    model: PartnerModel,
    saved: HashMap<u64, PartnerModel>,
}

impl<'p> MetaAgent<'p> {
    pub fn new(catalog: &'p RuleCatalog, policy: &'p MetaPolicy, config: MetaConfig) -> MetaAgent<'p> {
        MetaAgent {
            catalog,
            policy,
            config,
            seat: 0,
            partner: None,
            true_niche: None,
            model: PartnerModel::default(),
            saved: HashMap::new(),
        }
    }

    /// Announce the next partner. Takes effect at the start of the next game.
    pub fn set_partner(&mut self, id: Option<u64>, true_niche: Option<NicheIndex>) -> Result<(), MetaError> {
        if self.config.mode == MetaMode::Oracle && true_niche.is_none() {
            return Err(MetaError::MissingTrueNiche);
        }
        self.partner = id;
        self.true_niche = true_niche;
        Ok(())
    }

    pub fn model(&self) -> &PartnerModel {
        &self.model
    }

    pub fn estimate(&self) -> NicheEstimate {
        estimate_niches(&self.model, self.policy.table.bins)
    }

    /// Niche whose elite acts next.
    pub fn current_policy(&self) -> NicheIndex {
        let table = &self.policy.table;
        match self.config.mode {
            MetaMode::Generalist => table.generalist,
            MetaMode::Oracle => self.true_niche.and_then(|n| table.response_near(n)).unwrap_or(table.generalist),
            MetaMode::Adaptive => {
                let est = self.estimate();
                match (est.niche, self.config.threshold) {
                    (Some(n), Some(c)) if est.confidence > c => table.response_near(n).unwrap_or(table.generalist),
                    _ => table.generalist,
                }
            }
        }
    }
}

impl Agent for MetaAgent<'_> {
    fn name(&self) -> String {
        format!("meta-{:?}", self.config.mode).to_lowercase()
    }

    fn begin_game(&mut self, start: &GameStart) {
        self.seat = start.seat;
        let previous = std::mem::take(&mut self.model);
        if self.config.persist_across_games {
            if let Some(id) = previous.partner_id {
                self.saved.insert(id, previous);
            }
            if let Some(id) = self.partner {
                self.model = self.saved.remove(&id).unwrap_or_else(|| PartnerModel::new(Some(id)));
                return;
            }
        }
        self.model = PartnerModel::new(self.partner);
    }

    fn act(&mut self, view: &PlayerView<'_>, rng: &mut GameRng) -> Action {
        let chromosome = self.policy.chromosome(self.current_policy()).expect("policy covers table");
        agent_act(self.catalog, chromosome, view, rng)
    }

    fn observe(&mut self, _view: &PlayerView<'_>, event: &TurnEvent) {
        if event.player as usize != self.seat {
            self.model.update(event);
        }
    }
}

/// One partner of a meta-agent evaluation.
#[derive(Clone, Debug)]
pub struct Partner {
    pub id: u64,
    pub niche: NicheIndex,
    pub chromosome: Chromosome,
    pub descriptor: BehaviorDescriptor,
}

impl Partner {
    /// Every elite of `archive`, identified by cell index.
    pub fn all(archive: &Archive) -> Vec<Partner> {
        archive
            .occupied()
            .map(|(n, e)| Partner {
                id: archive.cell_index(n) as u64,
                niche: n,
                chromosome: e.chromosome.clone(),
                descriptor: e.descriptor,
            })
            .collect()
    }

    /// `k` distinct elites drawn uniformly, returned in archive order.
    pub fn sample(archive: &Archive, k: usize, seed: u64) -> Vec<Partner> {
        let all = Partner::all(archive);
        if k >= all.len() {
            return all;
        }
        let mut rng = seed::rng_from(seed::derive(seed, Stream::Sampling, 0));
        let mut picked = sample(&mut rng, all.len(), k).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|x| all[x].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartnerResult {
    pub niche: NicheIndex,
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
    /// Games that ended with a defined estimate.
    pub estimated_games: u64,
    pub mae_ipp: Option<f64>,
    pub mae_communicativeness: Option<f64>,
    pub bias_ipp: Option<f64>,
    pub bias_communicativeness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaEvalReport {
    pub config: MetaConfig,
    pub games_per_partner: usize,
    pub seed: u64,
    pub partners: Vec<PartnerResult>,
    pub mean: f64,
    /// Standard error of `mean`, pooled over partners.
    pub sem: f64,
    pub mae_ipp: Option<f64>,
    pub mae_communicativeness: Option<f64>,
    pub bias_ipp: Option<f64>,
    pub bias_communicativeness: Option<f64>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    schema: &'a str,
    version: u32,
    #[serde(flatten)]
    report: &'a MetaEvalReport,
}

impl MetaEvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&ReportDoc { schema: META_EVAL_SCHEMA, version: SCHEMA_VERSION, report: self })
            .expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = crate::io::csv_schema_line(META_EVAL_SCHEMA);
        out.push_str("i,j,mean,sd,n,estimated_games,mae_ipp,mae_communicativeness,bias_ipp,bias_communicativeness\n");
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        for p in &self.partners {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                p.niche.i,
                p.niche.j,
                p.mean,
                p.sd,
                p.n,
                p.estimated_games,
                opt(p.mae_ipp),
                opt(p.mae_communicativeness),
                opt(p.bias_ipp),
                opt(p.bias_communicativeness)
            ));
        }
        out
    }
}

#[derive(Default)]
struct ErrorAcc {
    n: u64,
    abs: [f64; 2],
    signed: [f64; 2],
}

impl ErrorAcc {
    fn push(&mut self, est: BehaviorDescriptor, truth: BehaviorDescriptor) {
        let d = [est.ipp - truth.ipp, est.communicativeness - truth.communicativeness];
        self.n += 1;
        for k in 0..2 {
            self.abs[k] += d[k].abs();
            self.signed[k] += d[k];
        }
    }

    fn merge(&mut self, o: &ErrorAcc) {
        self.n += o.n;
        for k in 0..2 {
            self.abs[k] += o.abs[k];
            self.signed[k] += o.signed[k];
        }
    }

    fn mean(&self, v: [f64; 2], k: usize) -> Option<f64> {
        (self.n > 0).then(|| v[k] / self.n as f64)
    }
}

/// Play the meta-agent with each partner for `games` games. The meta-agent
/// sits in seat 0 and the starting player is drawn from each game seed.
/// Estimation errors compare the end-of-game estimate with the partner's
/// archived descriptor.
pub fn meta_eval(
    catalog: &RuleCatalog,
    policy: &MetaPolicy,
    config: MetaConfig,
    partners: &[Partner],
    game: GameConfig,
    games: usize,
    seed: u64,
) -> Result<MetaEvalReport, MetaError> {
    let per_partner = partners
        .par_iter()
        .map(|p| {
            let mut meta = MetaAgent::new(catalog, policy, config);
            meta.set_partner(Some(p.id), Some(p.niche))?;
            let mut other = ChromosomeAgent::new(catalog, p.chromosome.clone());
            let mut scores = Accumulator::default();
            let mut errors = ErrorAcc::default();
            for s in seed::seed_list(seed, Stream::MetaEval, p.id, games) {
                let outcome = play_game(&mut [&mut meta, &mut other], game, s)?;
                scores.push(outcome.score as f64);
                if let Some(d) = meta.estimate().descriptor {
                    errors.push(d, p.descriptor);
                }
            }
            let s = scores.summary();
            let row = PartnerResult {
                niche: p.niche,
                mean: s.mean,
                sd: s.sd,
                n: s.n,
                estimated_games: errors.n,
                mae_ipp: errors.mean(errors.abs, 0),
                mae_communicativeness: errors.mean(errors.abs, 1),
                bias_ipp: errors.mean(errors.signed, 0),
                bias_communicativeness: errors.mean(errors.signed, 1),
            };
            Ok((row, s, errors))
        })
        .collect::<Result<Vec<_>, MetaError>>()?;

    let mut total = ErrorAcc::default();
    for (_, _, e) in &per_partner {
        total.merge(e);
    }
    let summaries: Vec<ScoreSummary> = per_partner.iter().map(|x| x.1).collect();
    let (mean, sem) = pooled_mean(&summaries);
    Ok(MetaEvalReport {
        config,
        games_per_partner: games,
        seed,
        partners: per_partner.into_iter().map(|x| x.0).collect(),
        mean,
        sem,
        mae_ipp: total.mean(total.abs, 0),
        mae_communicativeness: total.mean(total.abs, 1),
        bias_ipp: total.mean(total.signed, 0),
        bias_communicativeness: total.mean(total.signed, 1),
    })
}

/// Mean of per-partner means and its standard error, treating partners as
/// fixed and games as the only noise: `sqrt(sum sem_k^2) / K`.
pub fn pooled_mean(parts: &[ScoreSummary]) -> (f64, f64) {
    if parts.is_empty() {
        return (0.0, 0.0);
    }
    let k = parts.len() as f64;
    let mean = parts.iter().map(|s| s.mean).sum::<f64>() / k;
    let var: f64 = parts.iter().map(|s| s.sem().powi(2)).sum();
    (mean, var.sqrt() / k)
}
