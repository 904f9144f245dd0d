//! Rule catalog and chromosome-driven agents.
//!
//! An agent is an ordered list of rule ids. On each turn the rules are tried
//! in order and the first one that fires decides the action.

mod belief;
mod catalog;
mod eval;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use belief::{identity_mask, playability, Beliefs, Fraction, TableFacts};
pub use catalog::{Family, Gate, Rule, RuleCatalog, RuleKind, CATALOG_SCHEMA, CATALOG_VERSION};
pub use eval::{agent_act, evaluate_rule, ChromosomeAgent};

/// Default number of genes per chromosome.
pub const CHROMOSOME_LEN: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(pub u16);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {id} is not in a catalog of {size} rules", id = .0.0, size = .1)]
    UnknownRule(RuleId, usize),
    #[error("chromosome must have at least one gene")]
    EmptyChromosome,
    #[error("chromosomes differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Ordered rule ids. Duplicates and rules that never fire are allowed and are
/// inherited like any other gene.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chromosome(Vec<RuleId>);

impl Chromosome {
    pub fn new(genes: Vec<RuleId>, catalog: &RuleCatalog) -> Result<Chromosome, RuleError> {
        if genes.is_empty() {
            return Err(RuleError::EmptyChromosome);
        }
        if let Some(bad) = genes.iter().find(|g| g.0 as usize >= catalog.len()) {
            return Err(RuleError::UnknownRule(*bad, catalog.len()));
        }
        Ok(Chromosome(genes))
    }

    pub fn from_ids(ids: &[u16], catalog: &RuleCatalog) -> Result<Chromosome, RuleError> {
        Chromosome::new(ids.iter().map(|&i| RuleId(i)).collect(), catalog)
    }

    /// Genes drawn uniformly from the catalog.
    pub fn random<R: Rng + ?Sized>(len: usize, catalog_len: usize, rng: &mut R) -> Chromosome {
        Chromosome((0..len).map(|_| RuleId(rng.random_range(0..catalog_len) as u16)).collect())
    }

    pub fn genes(&self) -> &[RuleId] {
        &self.0
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [RuleId] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", g.0)?;
        }
        write!(f, "]")
    }
}
