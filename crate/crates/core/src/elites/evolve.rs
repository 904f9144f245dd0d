use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;

use super::archive::{Archive, ArchiveEntry};
use super::{EvolutionConfig, EvolveError};
use crate::engine::{play_game, Agent, GameConfig, GameError};
use crate::metrics::{niche, BehaviorDescriptor, NicheIndex, PlayStats};
use crate::rules::{Chromosome, ChromosomeAgent, RuleCatalog, RuleId};
use crate::seed::{self, Stream};
use crate::stats::ScoreSummary;

/// Self-play evaluation of one chromosome on a fixed seed list.
#[derive(Clone, Debug, PartialEq)]
pub struct FitnessResult {
    pub summary: ScoreSummary,
    /// Behavior counters pooled over both seats and all games.
    pub stats: PlayStats,
}

impl FitnessResult {
    pub fn mean(&self) -> f64 {
        self.summary.mean
    }

    pub fn descriptor(&self) -> Option<BehaviorDescriptor> {
        self.stats.descriptor().ok()
    }
}

/// Mean self-play score of `chromosome` over `seeds`.
pub fn fitness(
    catalog: &RuleCatalog,
    chromosome: &Chromosome,
    seeds: &[u64],
    config: GameConfig,
) -> Result<FitnessResult, GameError> {
    let mut seats: Vec<ChromosomeAgent<'_>> =
        (0..config.players).map(|_| ChromosomeAgent::new(catalog, chromosome.clone())).collect();
    let mut stats = PlayStats::default();
    let mut scores = Vec::with_capacity(seeds.len());
    for &s in seeds {
        let mut agents: Vec<&mut dyn Agent> = seats.iter_mut().map(|a| a as &mut dyn Agent).collect();
        let outcome = play_game(&mut agents, config, s)?;
        stats += outcome.stats.iter().copied().sum();
        scores.push(outcome.score as f64);
    }
    Ok(FitnessResult { summary: ScoreSummary::from_scores(scores), stats })
}

/// Evaluation seeds for candidate number `generation`.
pub fn generation_seeds(config: &EvolutionConfig, generation: u64) -> Vec<u64> {
    seed::seed_list(config.master_seed, Stream::Evaluation, generation, config.games_per_eval)
}

/// Produce candidate number `generation`.
///
/// During the random phase (or while the archive is empty) genes are drawn
/// uniformly. Afterwards a uniformly chosen elite is the parent; with
/// `crossover_probability` each gene is instead taken from a second uniformly
/// chosen elite on a fair coin flip; finally each gene is replaced by a
/// uniform draw with probability `mutation_rate`.
pub fn new_chromosome(archive: &Archive, generation: u64, catalog_len: usize) -> Chromosome {
    let config = archive.config();
    let mut rng = seed::rng_from(seed::derive(config.master_seed, Stream::Evolution, generation));
    let len = config.chromosome_length;
    if generation < config.random_phase || archive.is_empty() {
        return Chromosome::random(len, catalog_len, &mut rng);
    }
    let elites: Vec<&ArchiveEntry> = archive.occupied().map(|(_, e)| e).collect();
    let mut child = elites[rng.random_range(0..elites.len())].chromosome.clone();
    if rng.random_bool(config.crossover_probability) {
        let other = &elites[rng.random_range(0..elites.len())].chromosome;
        for (gene, &theirs) in child.genes_mut().iter_mut().zip(other.genes()) {
            if rng.random_bool(0.5) {
                *gene = theirs;
            }
        }
    }
    for gene in child.genes_mut() {
        if rng.random_bool(config.mutation_rate) {
            *gene = RuleId(rng.random_range(0..catalog_len) as u16);
        }
    }
    child
}

/// A candidate together with its evaluation.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub chromosome: Chromosome,
    pub seeds: Vec<u64>,
    pub result: FitnessResult,
}

impl Evaluated {
    pub fn evaluate(
        catalog: &RuleCatalog,
        chromosome: Chromosome,
        seeds: Vec<u64>,
        config: GameConfig,
    ) -> Result<Evaluated, GameError> {
        let result = fitness(catalog, &chromosome, &seeds, config)?;
        Ok(Evaluated { chromosome, seeds, result })
    }

    fn into_entry(self, descriptor: BehaviorDescriptor, games_played: u64) -> ArchiveEntry {
        ArchiveEntry {
            chromosome: self.chromosome,
            fitness: self.result.summary.mean,
            descriptor,
            stats: self.result.stats,
            eval_seeds: self.seeds,
            games_played,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Placement {
    /// Fitness not positive.
    RejectedFitness,
    /// No card played or no token turn, so the descriptor is undefined.
    RejectedDescriptor,
    Inserted(NicheIndex),
    Replaced { niche: NicheIndex, incumbent: f64 },
    Kept { niche: NicheIndex, incumbent: f64 },
}

/// Counts of seed-matched comparisons and any invariant breaches seen in a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunMonitor {
    pub candidates: u64,
    pub inserted: u64,
    pub replaced: u64,
    pub kept: u64,
    pub rejected: u64,
    pub paired_checks: u64,
    pub violations: Vec<String>,
}

impl RunMonitor {
    fn record(&mut self, p: &Placement) {
        self.candidates += 1;
        match p {
            Placement::RejectedFitness | Placement::RejectedDescriptor => self.rejected += 1,
            Placement::Inserted(_) => self.inserted += 1,
            Placement::Replaced { .. } => self.replaced += 1,
            Placement::Kept { .. } => self.kept += 1,
        }
    }
}

impl Archive {
    /// Place an evaluated candidate, re-playing the incumbent on the
    /// candidate's seeds when the niche is taken.
    pub fn try_insert(&mut self, catalog: &RuleCatalog, candidate: Evaluated) -> Result<Placement, EvolveError> {
        let mut monitor = RunMonitor::default();
        self.place(catalog, candidate, None, &mut monitor)
    }

    fn place(
        &mut self,
        catalog: &RuleCatalog,
        candidate: Evaluated,
        precomputed: Option<Evaluated>,
        monitor: &mut RunMonitor,
    ) -> Result<Placement, EvolveError> {
        if candidate.result.summary.mean <= 0.0 {
            return Ok(Placement::RejectedFitness);
        }
        let Some(descriptor) = candidate.result.descriptor() else {
            return Ok(Placement::RejectedDescriptor);
        };
        let n = niche(&descriptor, self.bins());
        let coverage_before = self.coverage();
        let n_games = candidate.seeds.len() as u64;

        let Some(incumbent) = self.get(n) else {
            self.put(n, candidate.into_entry(descriptor, n_games));
            return Ok(Placement::Inserted(n));
        };

        let reeval = match precomputed {
            Some(e) if e.chromosome == incumbent.chromosome && e.seeds == candidate.seeds => e,
            _ => Evaluated::evaluate(catalog, incumbent.chromosome.clone(), candidate.seeds.clone(), self.config().game)?,
        };
        let incumbent_fitness = reeval.result.summary.mean;
        let candidate_fitness = candidate.result.summary.mean;
        let comparison_seeds = candidate.seeds.clone();
        let placement = if candidate_fitness > incumbent_fitness {
            self.put(n, candidate.into_entry(descriptor, n_games));
            Placement::Replaced { niche: n, incumbent: incumbent_fitness }
        } else {
            let bins = self.bins();
            let entry = self.entry_mut(n).expect("occupied");
            entry.games_played += n_games;
            // The refreshed evaluation is stored only if it still maps here;
            // otherwise the previous evaluation stays, keeping cell and
            // descriptor consistent.
            if let Some(d) = reeval.result.descriptor().filter(|d| niche(d, bins) == n) {
                entry.fitness = incumbent_fitness;
                entry.descriptor = d;
                entry.stats = reeval.result.stats;
                entry.eval_seeds = reeval.seeds;
            }
            Placement::Kept { niche: n, incumbent: incumbent_fitness }
        };

        monitor.paired_checks += 1;
        let stored = self.get(n).expect("occupied");
        if stored.eval_seeds == comparison_seeds && stored.fitness < candidate_fitness.max(incumbent_fitness) {
            monitor.violations.push(format!(
                "niche {n}: stored {} below paired max of {candidate_fitness} and {incumbent_fitness}",
                stored.fitness
            ));
        }
        if self.coverage() < coverage_before {
            monitor.violations.push(format!("coverage fell from {coverage_before} to {}", self.coverage()));
        }
        Ok(placement)
    }
}

/// Drives the search loop over an archive, with optional checkpointing.
pub struct Evolver<'c> {
    catalog: &'c RuleCatalog,
    archive: Archive,
    monitor: RunMonitor,
    checkpoint: Option<PathBuf>,
}

impl<'c> Evolver<'c> {
    pub fn new(config: EvolutionConfig, catalog: &'c RuleCatalog) -> Result<Evolver<'c>, EvolveError> {
        config.validate()?;
        Ok(Evolver { catalog, archive: Archive::new(config, catalog.hash()), monitor: RunMonitor::default(), checkpoint: None })
    }

    /// Continue from a checkpointed archive.
    pub fn resume(archive: Archive, catalog: &'c RuleCatalog) -> Result<Evolver<'c>, EvolveError> {
        archive.config().validate()?;
        if archive.catalog_hash() != catalog.hash() {
            return Err(EvolveError::Config("archive was produced with a different rule catalog".into()));
        }
        Ok(Evolver { catalog, archive, monitor: RunMonitor::default(), checkpoint: None })
    }

    /// Write the archive to `path` every `checkpoint_every` candidates.
    pub fn with_checkpoint(mut self, path: impl AsRef<Path>) -> Self {
        self.checkpoint = Some(path.as_ref().to_path_buf());
        self
    }

    /// Change the run length of a resumed search. The new total may not be
    /// below the candidates already processed.
    pub fn set_total_candidates(&mut self, total: u64) -> Result<(), EvolveError> {
        if total < self.archive.generation() {
            return Err(EvolveError::Config(format!(
                "archive already holds {} candidates, more than {total}",
                self.archive.generation()
            )));
        }
        let config = self.archive.config_mut();
        config.total_candidates = total;
        config.validate()
    }

    pub fn set_threads(&mut self, threads: usize) -> Result<(), EvolveError> {
        let config = self.archive.config_mut();
        config.threads = threads;
        config.validate()
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn monitor(&self) -> &RunMonitor {
        &self.monitor
    }

    pub fn into_archive(self) -> Archive {
        self.archive
    }

    pub fn into_parts(self) -> (Archive, RunMonitor) {
        (self.archive, self.monitor)
    }

    fn total(&self) -> u64 {
        self.archive.config().total_candidates
    }

    /// Process one candidate in strict order.
    pub fn step(&mut self) -> Result<Placement, EvolveError> {
        let g = self.archive.generation();
        let chromosome = new_chromosome(&self.archive, g, self.catalog.len());
        let seeds = generation_seeds(self.archive.config(), g);
        let candidate = Evaluated::evaluate(self.catalog, chromosome, seeds, self.archive.config().game)?;
        let placement = self.archive.place(self.catalog, candidate, None, &mut self.monitor)?;
        self.monitor.record(&placement);
        self.archive.set_generation(g + 1);
        self.after_progress(g, g + 1)?;
        Ok(placement)
    }

    /// Run until `total_candidates` have been processed.
    pub fn run_to_end(&mut self) -> Result<(), EvolveError> {
        self.run_until(self.total())
    }

    /// Run until `limit` candidates (capped at the configured total) have
    /// been processed.
    pub fn run_until(&mut self, limit: u64) -> Result<(), EvolveError> {
        let limit = limit.min(self.total());
        let threads = self.archive.config().threads;
        if threads <= 1 {
            while self.archive.generation() < limit {
                self.step()?;
            }
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| EvolveError::Config(e.to_string()))?;
            while self.archive.generation() < limit {
                let start = self.archive.generation();
                let end = (start + self.archive.config().batch_size as u64).min(limit);
                pool.install(|| self.batch(start, end))?;
            }
        }
        self.check()
    }

    /// Candidates `start..end` generated from one archive snapshot, evaluated
    /// in parallel, then placed in order. Incumbents are re-played in the same
    /// parallel pass when the snapshot still holds them at placement time.
    fn batch(&mut self, start: u64, end: u64) -> Result<(), EvolveError> {
        let snapshot = &self.archive;
        let catalog = self.catalog;
        let game = snapshot.config().game;
        let evaluated: Vec<Result<(Evaluated, Option<Evaluated>), GameError>> = (start..end)
            .into_par_iter()
            .map(|g| {
                let chromosome = new_chromosome(snapshot, g, catalog.len());
                let seeds = generation_seeds(snapshot.config(), g);
                let cand = Evaluated::evaluate(catalog, chromosome, seeds, game)?;
                let incumbent = match cand.result.descriptor() {
                    Some(d) if cand.result.summary.mean > 0.0 => snapshot.get(niche(&d, snapshot.bins())),
                    _ => None,
                };
                let pre = incumbent
                    .map(|e| Evaluated::evaluate(catalog, e.chromosome.clone(), cand.seeds.clone(), game))
                    .transpose()?;
                Ok((cand, pre))
            })
            .collect();
        for (offset, item) in evaluated.into_iter().enumerate() {
            let (cand, pre) = item?;
            let placement = self.archive.place(self.catalog, cand, pre, &mut self.monitor)?;
            self.monitor.record(&placement);
            let g = start + offset as u64;
            self.archive.set_generation(g + 1);
            self.after_progress(g, g + 1)?;
        }
        Ok(())
    }

    fn after_progress(&mut self, before: u64, after: u64) -> Result<(), EvolveError> {
        let every = self.archive.config().checkpoint_every;
        if let Some(path) = &self.checkpoint {
            if every > 0 && before / every != after / every {
                crate::io::write_atomic(path, self.archive.to_json().as_bytes())
                    .map_err(crate::io::FormatError::from)?;
            }
        }
        Ok(())
    }

    fn check(&self) -> Result<(), EvolveError> {
        if let Some(v) = self.monitor.violations.first() {
            return Err(EvolveError::Invariant(v.clone()));
        }
        self.archive.check_invariants()
    }
}

/// Run a full search from scratch.
pub fn run(config: EvolutionConfig, catalog: &RuleCatalog) -> Result<Archive, EvolveError> {
    let mut evolver = Evolver::new(config, catalog)?;
    evolver.run_to_end()?;
    Ok(evolver.into_archive())
}
