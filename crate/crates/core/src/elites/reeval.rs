use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::Archive;
use super::evolve::fitness;
use super::EvolveError;
use crate::metrics::NicheIndex;
use crate::rules::RuleCatalog;
use crate::seed::{self, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReevalEntry {
    pub niche: NicheIndex,
    pub mean: f64,
    pub sd: f64,
    pub sem: f64,
    pub games: u64,
}

/// Fresh-seed self-play scores for every elite. The archive is not modified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReevalReport {
    pub games_per_elite: usize,
    pub seed: u64,
    pub coverage: usize,
    pub entries: Vec<ReevalEntry>,
}

impl ReevalReport {
    pub fn best(&self) -> Option<&ReevalEntry> {
        self.entries.iter().fold(None, |best: Option<&ReevalEntry>, e| match best {
            Some(b) if b.mean >= e.mean => Some(b),
            _ => Some(e),
        })
    }

    pub fn average_score(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.mean).sum::<f64>() / self.entries.len() as f64
    }

    pub fn max_sd(&self) -> f64 {
        self.entries.iter().map(|e| e.sd).fold(0.0, f64::max)
    }

    pub fn max_sem(&self) -> f64 {
        self.entries.iter().map(|e| e.sem).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = crate::io::csv_schema_line("hanabi-qd/reevaluation");
        out.push_str("i,j,mean,sd,sem,games\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{},{},{}\n", e.niche.i, e.niche.j, e.mean, e.sd, e.sem, e.games));
        }
        out
    }
}

/// Re-play each elite for `games` self-play games on seeds derived from `seed`
/// and the elite's cell.
pub fn reevaluate(archive: &Archive, catalog: &RuleCatalog, games: usize, seed: u64) -> Result<ReevalReport, EvolveError> {
    if archive.is_empty() {
        return Err(EvolveError::EmptyArchive);
    }
    let game = archive.config().game;
    let elites: Vec<_> = archive.occupied().collect();
    let entries = elites
        .par_iter()
        .map(|(n, e)| {
            let seeds = seed::seed_list(seed, Stream::Reevaluation, archive.cell_index(*n) as u64, games);
            let r = fitness(catalog, &e.chromosome, &seeds, game)?;
            Ok(ReevalEntry { niche: *n, mean: r.summary.mean, sd: r.summary.sd, sem: r.summary.sem(), games: r.summary.n })
        })
        .collect::<Result<Vec<_>, EvolveError>>()?;
    Ok(ReevalReport { games_per_elite: games, seed, coverage: archive.coverage(), entries })
}
