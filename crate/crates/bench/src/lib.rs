//! Fixtures shared by the benchmarks.

use hanabi_qd_core::rules::{Chromosome, Gate, RuleCatalog, RuleKind, CHROMOSOME_LEN};

/// A reasonable hand-written chromosome: play safe cards, hint playable ones,
/// discard what is known to be useless.
pub fn reference_chromosome(catalog: &RuleCatalog) -> Chromosome {
    let kinds = [
        RuleKind::PlayIfCertain,
        RuleKind::PlayProbability { tenths: 6 },
        RuleKind::TellAboutPlayableCard,
        RuleKind::DiscardUseless,
        RuleKind::TellAboutOnes,
        RuleKind::DiscardOldestUnhinted,
        RuleKind::TellMostInformation,
        RuleKind::DiscardOldest,
    ];
    let mut genes: Vec<u16> = kinds.iter().map(|&k| catalog.find(k, Gate::Always).expect("standard rule").0).collect();
    genes.resize(CHROMOSOME_LEN, genes[genes.len() - 1]);
    Chromosome::from_ids(&genes, catalog).expect("valid ids")
}
