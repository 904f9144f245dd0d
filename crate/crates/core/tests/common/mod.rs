#![allow(dead_code)]

use hanabi_qd_core::elites::{run, Archive, EvolutionConfig};
use hanabi_qd_core::rules::{Chromosome, Gate, RuleCatalog, RuleKind, CHROMOSOME_LEN};

pub fn small_config(total: u64, seed: u64) -> EvolutionConfig {
    EvolutionConfig {
        total_candidates: total,
        random_phase: total / 3,
        games_per_eval: 8,
        master_seed: seed,
        checkpoint_every: 50,
        ..EvolutionConfig::default()
    }
}

pub fn small_archive(cat: &RuleCatalog, total: u64, seed: u64) -> Archive {
    run(small_config(total, seed), cat).unwrap()
}

/// Chromosome made of the given rules (ungated), padded with the last one.
pub fn chromosome(cat: &RuleCatalog, kinds: &[RuleKind]) -> Chromosome {
    let mut genes: Vec<u16> = kinds.iter().map(|&k| cat.find(k, Gate::Always).unwrap().0).collect();
    let last = *genes.last().unwrap();
    genes.resize(CHROMOSOME_LEN, last);
    Chromosome::from_ids(&genes, cat).unwrap()
}

pub fn decent(cat: &RuleCatalog) -> Chromosome {
    chromosome(
        cat,
        &[
            RuleKind::PlayIfCertain,
            RuleKind::PlayProbability { tenths: 6 },
            RuleKind::TellAboutPlayableCard,
            RuleKind::DiscardUseless,
            RuleKind::TellAboutOnes,
            RuleKind::DiscardOldestUnhinted,
            RuleKind::DiscardOldest,
            RuleKind::TellMostInformation,
        ],
    )
}

pub fn hinter(cat: &RuleCatalog) -> Chromosome {
    chromosome(
        cat,
        &[
            RuleKind::PlayIfCertain,
            RuleKind::TellAboutPlayableCard,
            RuleKind::TellMostInformation,
            RuleKind::DiscardOldestUnhinted,
            RuleKind::DiscardOldest,
        ],
    )
}
