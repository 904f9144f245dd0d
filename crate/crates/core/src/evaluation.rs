//! Cross-play between elites: single pairings, full match-up matrices over a
//! population, and same-niche comparisons across two populations.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elites::Archive;
use crate::engine::{play_game, play_game_from, starting_player, Agent, GameConfig, GameError};
use crate::io::{check_schema, strip_csv_schema, FormatError, SCHEMA_VERSION};
use crate::metrics::NicheIndex;
use crate::rules::{Chromosome, ChromosomeAgent, RuleCatalog};
use crate::seed::{self, Stream};
use crate::stats::{Accumulator, ScoreSummary};

pub const MATCHUP_SCHEMA: &str = "hanabi-qd/matchup";
pub const MATCHUP_SUMMARY_SCHEMA: &str = "hanabi-qd/matchup-summary";
pub const CORRESPONDING_SCHEMA: &str = "hanabi-qd/corresponding-pairs";
pub const DEFAULT_GAMES_PER_PAIR: usize = 400;

/// Seat assignment for a two-agent pairing.
///
/// `Normal` puts the first agent in seat 0 and lets the seed pick who starts.
/// `Mirrored` swaps the seats and the starting seat, so the same agent moves
/// first and the deal is identical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Seating {
    #[default]
    Normal,
    Mirrored,
}

/// Play `a` with `b` once per seed and summarize the scores.
pub fn cross_play(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    config: GameConfig,
    seeds: &[u64],
    seating: Seating,
) -> Result<ScoreSummary, GameError> {
    if config.players != 2 {
        return Err(GameError::AgentCount { given: 2, expected: config.players as usize });
    }
    let mut acc = Accumulator::default();
    for &s in seeds {
        let outcome = match seating {
            Seating::Normal => play_game(&mut [&mut *a, &mut *b], config, s)?,
            Seating::Mirrored => {
                let start = 1 - starting_player(config, s);
                play_game_from(&mut [&mut *b, &mut *a], config, s, start)?
            }
        };
        acc.push(outcome.score as f64);
    }
    Ok(acc.summary())
}

/// [`cross_play`] between two chromosomes.
pub fn cross_play_chromosomes(
    catalog: &RuleCatalog,
    a: &Chromosome,
    b: &Chromosome,
    config: GameConfig,
    seeds: &[u64],
    seating: Seating,
) -> Result<ScoreSummary, GameError> {
    let mut x = ChromosomeAgent::new(catalog, a.clone());
    let mut y = ChromosomeAgent::new(catalog, b.clone());
    cross_play(&mut x, &mut y, config, seeds, seating)
}

/// Seeds for the unordered pair `(a, b)` of a match-up matrix. They depend only
/// on the two cells, so any subset of pairs is reproducible on its own.
pub fn pair_seeds(master: u64, bins: usize, a: NicheIndex, b: NicheIndex, games: usize) -> Vec<u64> {
    let (lo, hi) = if (a.i, a.j) <= (b.i, b.j) { (a, b) } else { (b, a) };
    let cells = (bins * bins) as u64;
    let index = (lo.i * bins + lo.j) as u64 * cells + (hi.i * bins + hi.j) as u64;
    seed::seed_list(master, Stream::Matchup, index, games)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub a: NicheIndex,
    pub b: NicheIndex,
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
}

/// Mean cross-play score for every unordered pair of occupied niches,
/// self-pairs included.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchupMatrix {
    population: String,
    games_per_pair: usize,
    master_seed: u64,
    niches: Vec<NicheIndex>,
    position: HashMap<NicheIndex, usize>,
    /// Upper triangle, row-major over `niches`.
    pairs: Vec<PairScore>,
}

/// Offset of `(lo, hi)`, `lo <= hi`, in a row-major upper triangle of side `n`.
fn tri_index(n: usize, lo: usize, hi: usize) -> usize {
    lo * (2 * n - lo + 1) / 2 + hi - lo
}

impl MatchupMatrix {
    /// Play every pair of elites `games_per_pair` times. Runs on the current
    /// rayon pool; results do not depend on the number of threads.
    pub fn compute(
        archive: &Archive,
        catalog: &RuleCatalog,
        games_per_pair: usize,
        master_seed: u64,
        population: impl Into<String>,
    ) -> Result<MatchupMatrix, GameError> {
        let elites: Vec<(NicheIndex, &Chromosome)> = archive.occupied().map(|(n, e)| (n, &e.chromosome)).collect();
        let jobs: Vec<(usize, usize)> =
            (0..elites.len()).flat_map(|a| (a..elites.len()).map(move |b| (a, b))).collect();
        let game = archive.config().game;
        let bins = archive.bins();
        let pairs = jobs
            .par_iter()
            .map(|&(a, b)| {
                let (na, ca) = elites[a];
                let (nb, cb) = elites[b];
                let seeds = pair_seeds(master_seed, bins, na, nb, games_per_pair);
                let s = cross_play_chromosomes(catalog, ca, cb, game, &seeds, Seating::Normal)?;
                Ok(PairScore { a: na, b: nb, mean: s.mean, sd: s.sd, n: s.n })
            })
            .collect::<Result<Vec<_>, GameError>>()?;
        let niches: Vec<NicheIndex> = elites.iter().map(|e| e.0).collect();
        Ok(MatchupMatrix::assemble(population.into(), games_per_pair, master_seed, niches, pairs))
    }

    fn assemble(
        population: String,
        games_per_pair: usize,
        master_seed: u64,
        niches: Vec<NicheIndex>,
        pairs: Vec<PairScore>,
    ) -> MatchupMatrix {
        let position = niches.iter().enumerate().map(|(k, n)| (*n, k)).collect();
        MatchupMatrix { population, games_per_pair, master_seed, niches, position, pairs }
    }

    /// Build a matrix from a dense table of scores. `scores[a][b]` must be
    /// symmetric; only the upper triangle is read.
    pub fn from_scores(niches: Vec<NicheIndex>, scores: &[Vec<f64>]) -> MatchupMatrix {
        let mut pairs = Vec::new();
        for a in 0..niches.len() {
            for b in a..niches.len() {
                pairs.push(PairScore { a: niches[a], b: niches[b], mean: scores[a][b], sd: 0.0, n: 0 });
            }
        }
        MatchupMatrix::assemble(String::new(), 0, 0, niches, pairs)
    }

    pub fn population(&self) -> &str {
        &self.population
    }

    pub fn games_per_pair(&self) -> usize {
        self.games_per_pair
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Occupied niches in lexicographic order.
    pub fn niches(&self) -> &[NicheIndex] {
        &self.niches
    }

    pub fn len(&self) -> usize {
        self.niches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.niches.is_empty()
    }

    pub fn contains(&self, n: NicheIndex) -> bool {
        self.position.contains_key(&n)
    }

    /// Unordered pairs, self-pairs included.
    pub fn pairs(&self) -> &[PairScore] {
        &self.pairs
    }

    pub fn pair(&self, a: NicheIndex, b: NicheIndex) -> Option<&PairScore> {
        let pa = *self.position.get(&a)?;
        let pb = *self.position.get(&b)?;
        let (lo, hi) = if pa <= pb { (pa, pb) } else { (pb, pa) };
        self.pairs.get(tri_index(self.niches.len(), lo, hi))
    }

    /// Mean score of the pair; panics if either niche is unoccupied.
    pub fn score(&self, a: NicheIndex, b: NicheIndex) -> f64 {
        self.pair(a, b).map(|p| p.mean).unwrap_or_else(|| panic!("pair {a} {b} not in matrix"))
    }

    pub fn max_sd(&self) -> f64 {
        self.pairs.iter().map(|p| p.sd).fold(0.0, f64::max)
    }

    /// `# schema=... population=... games_per_pair=... seed=...` then
    /// `iA,jA,iB,jB,mean,sd,n`, one row per unordered pair.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# schema={MATCHUP_SCHEMA} version={SCHEMA_VERSION} population={} games_per_pair={} seed={}\n",
            self.population.replace(char::is_whitespace, "_"),
            self.games_per_pair,
            self.master_seed
        );
        out.push_str("iA,jA,iB,jB,mean,sd,n\n");
        for p in &self.pairs {
            out.push_str(&format!("{},{},{},{},{},{},{}\n", p.a.i, p.a.j, p.b.i, p.b.j, p.mean, p.sd, p.n));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<MatchupMatrix, FormatError> {
        let body = strip_csv_schema(MATCHUP_SCHEMA, text)?;
        let meta = text.lines().next().unwrap_or_default();
        let field = |key: &str| {
            meta.split_whitespace().find_map(|p| p.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        };
        let population = field("population").unwrap_or_default().to_string();
        let parse_num = |key: &str| -> Result<u64, FormatError> {
            field(key)
                .unwrap_or("0")
                .parse()
                .map_err(|_| FormatError::Malformed(format!("bad {key} in schema comment")))
        };
        let games_per_pair = parse_num("games_per_pair")? as usize;
        let master_seed = parse_num("seed")?;

        #[derive(Deserialize)]
        struct Row {
            #[serde(rename = "iA")]
            ia: usize,
            #[serde(rename = "jA")]
            ja: usize,
            #[serde(rename = "iB")]
            ib: usize,
            #[serde(rename = "jB")]
            jb: usize,
            mean: f64,
            sd: f64,
            n: u64,
        }
        let mut rows = Vec::new();
        for r in csv::Reader::from_reader(body.as_bytes()).deserialize::<Row>() {
            let r = r?;
            rows.push(PairScore {
                a: NicheIndex::new(r.ia, r.ja),
                b: NicheIndex::new(r.ib, r.jb),
                mean: r.mean,
                sd: r.sd,
                n: r.n,
            });
        }
        MatchupMatrix::from_pairs(population, games_per_pair, master_seed, rows)
    }

    /// Rebuild from unordered pair scores in any order. Every pair of the
    /// implied niche set must appear exactly once.
    pub fn from_pairs(
        population: String,
        games_per_pair: usize,
        master_seed: u64,
        rows: Vec<PairScore>,
    ) -> Result<MatchupMatrix, FormatError> {
        let mut niches: Vec<NicheIndex> = rows.iter().flat_map(|p| [p.a, p.b]).collect();
        niches.sort_by_key(|n| (n.i, n.j));
        niches.dedup();
        let k = niches.len();
        let position: HashMap<NicheIndex, usize> = niches.iter().enumerate().map(|(x, n)| (*n, x)).collect();
        let mut slots: Vec<Option<PairScore>> = vec![None; k * (k + 1) / 2];
        for mut p in rows {
            let (pa, pb) = (position[&p.a], position[&p.b]);
            if pa > pb {
                std::mem::swap(&mut p.a, &mut p.b);
            }
            let (lo, hi) = (pa.min(pb), pa.max(pb));
            let slot = &mut slots[tri_index(k, lo, hi)];
            if slot.is_some() {
                return Err(FormatError::Malformed(format!("pair {} {} listed twice", p.a, p.b)));
            }
            *slot = Some(p);
        }
        let pairs = slots
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| FormatError::Malformed("match-up matrix is missing pairs".into()))?;
        Ok(MatchupMatrix::assemble(population, games_per_pair, master_seed, niches, pairs))
    }

    pub fn summary(&self) -> MatchupSummary {
        let diag: Vec<f64> = self.pairs.iter().filter(|p| p.a == p.b).map(|p| p.mean).collect();
        let off: Vec<f64> = self.pairs.iter().filter(|p| p.a != p.b).map(|p| p.mean).collect();
        MatchupSummary {
            schema: MATCHUP_SUMMARY_SCHEMA.to_string(),
            version: SCHEMA_VERSION,
            population: self.population.clone(),
            games_per_pair: self.games_per_pair,
            seed: self.master_seed,
            coverage: self.niches.len(),
            pairs: self.pairs.len(),
            mean_self_play: ScoreSummary::from_scores(diag).mean,
            mean_cross_play: ScoreSummary::from_scores(off).mean,
            max_sd: self.max_sd(),
        }
    }
}

/// Headline numbers of a matrix, stored next to the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchupSummary {
    pub schema: String,
    pub version: u32,
    pub population: String,
    pub games_per_pair: usize,
    pub seed: u64,
    pub coverage: usize,
    pub pairs: usize,
    pub mean_self_play: f64,
    pub mean_cross_play: f64,
    pub max_sd: f64,
}

impl MatchupSummary {
    pub fn from_json(text: &str) -> Result<MatchupSummary, FormatError> {
        let s: MatchupSummary = serde_json::from_str(text)?;
        check_schema(MATCHUP_SUMMARY_SCHEMA, &s.schema, s.version)?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondingPair {
    pub niche: NicheIndex,
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
    /// Self-play fitness of each elite as stored in its archive.
    pub fitness_a: f64,
    pub fitness_b: f64,
    pub hamming: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondingReport {
    pub games: usize,
    pub seed: u64,
    pub pairs: Vec<CorrespondingPair>,
}

impl CorrespondingReport {
    pub fn mean_score(&self) -> f64 {
        ScoreSummary::from_scores(self.pairs.iter().map(|p| p.mean)).mean
    }

    pub fn mean_hamming(&self) -> f64 {
        ScoreSummary::from_scores(self.pairs.iter().map(|p| p.hamming as f64)).mean
    }

    pub fn to_csv(&self) -> String {
        let mut out = crate::io::csv_schema_line(CORRESPONDING_SCHEMA);
        out.push_str("i,j,mean,sd,n,fitness_a,fitness_b,hamming\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                p.niche.i, p.niche.j, p.mean, p.sd, p.n, p.fitness_a, p.fitness_b, p.hamming
            ));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvaluationError {
    #[error("archives use different grids ({0} and {1} bins)")]
    GridMismatch(usize, usize),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Cross-play the two elites of every niche occupied in both archives.
pub fn corresponding_pairs(
    a: &Archive,
    b: &Archive,
    catalog: &RuleCatalog,
    games: usize,
    seed: u64,
) -> Result<CorrespondingReport, EvaluationError> {
    if a.bins() != b.bins() {
        return Err(EvaluationError::GridMismatch(a.bins(), b.bins()));
    }
    let common: Vec<_> = a.occupied().filter_map(|(n, ea)| b.get(n).map(|eb| (n, ea, eb))).collect();
    let game = a.config().game;
    let pairs = common
        .par_iter()
        .map(|&(n, ea, eb)| {
            let seeds = seed::seed_list(seed, Stream::CrossPlay, a.cell_index(n) as u64, games);
            let s = cross_play_chromosomes(catalog, &ea.chromosome, &eb.chromosome, game, &seeds, Seating::Normal)?;
            Ok(CorrespondingPair {
                niche: n,
                mean: s.mean,
                sd: s.sd,
                n: s.n,
                fitness_a: ea.fitness,
                fitness_b: eb.fitness,
                hamming: crate::analysis::hamming(&ea.chromosome, &eb.chromosome).unwrap_or(usize::MAX),
            })
        })
        .collect::<Result<Vec<_>, EvaluationError>>()?;
    Ok(CorrespondingReport { games, seed, pairs })
}
