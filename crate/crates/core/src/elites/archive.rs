use serde::{Deserialize, Serialize};

use super::{EvolutionConfig, EvolveError};
use crate::io::{check_schema, FormatError, SCHEMA_VERSION};
use crate::metrics::{niche, BehaviorDescriptor, NicheIndex, PlayStats};
use crate::rules::Chromosome;

pub const ARCHIVE_SCHEMA: &str = "hanabi-qd/archive";

/// The elite of one niche together with the evaluation that placed it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub chromosome: Chromosome,
    /// Mean self-play score over `eval_seeds`.
    pub fitness: f64,
    pub descriptor: BehaviorDescriptor,
    pub stats: PlayStats,
    pub eval_seeds: Vec<u64>,
    /// Games played by this elite across all its evaluations.
    pub games_played: u64,
}

/// A `bins x bins` grid of elites, row-major in `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Archive {
    bins: usize,
    cells: Vec<Option<ArchiveEntry>>,
    coverage: usize,
    generation: u64,
    config: EvolutionConfig,
    catalog_hash: String,
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    i: usize,
    j: usize,
    #[serde(flatten)]
    entry: ArchiveEntry,
}

#[derive(Serialize, Deserialize)]
struct ArchiveDoc {
    schema: String,
    version: u32,
    bins: usize,
    generation: u64,
    coverage: usize,
    catalog_hash: String,
    config: EvolutionConfig,
    entries: Vec<CellDoc>,
}

impl Archive {
    pub fn new(config: EvolutionConfig, catalog_hash: impl Into<String>) -> Archive {
        Archive {
            bins: config.bins,
            cells: vec![None; config.bins * config.bins],
            coverage: 0,
            generation: 0,
            config,
            catalog_hash: catalog_hash.into(),
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Candidates processed so far.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub(crate) fn set_generation(&mut self, generation: u64) {
        self.generation = generation;
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub(crate) fn config_mut(&mut self) -> &mut EvolutionConfig {
        &mut self.config
    }

    pub fn master_seed(&self) -> u64 {
        self.config.master_seed
    }

    pub fn catalog_hash(&self) -> &str {
        &self.catalog_hash
    }

    /// Number of occupied niches.
    pub fn coverage(&self) -> usize {
        self.coverage
    }

    pub fn is_empty(&self) -> bool {
        self.coverage == 0
    }

    pub fn cell_index(&self, n: NicheIndex) -> usize {
        n.i * self.bins + n.j
    }

    pub fn get(&self, n: NicheIndex) -> Option<&ArchiveEntry> {
        if n.i >= self.bins || n.j >= self.bins {
            return None;
        }
        self.cells[self.cell_index(n)].as_ref()
    }

    /// Occupied niches in lexicographic `(i, j)` order.
    pub fn occupied(&self) -> impl Iterator<Item = (NicheIndex, &ArchiveEntry)> + '_ {
        let bins = self.bins;
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(k, c)| c.as_ref().map(|e| (NicheIndex::new(k / bins, k % bins), e)))
    }

    pub fn niches(&self) -> Vec<NicheIndex> {
        self.occupied().map(|(n, _)| n).collect()
    }

    pub(crate) fn put(&mut self, n: NicheIndex, entry: ArchiveEntry) {
        let k = self.cell_index(n);
        if self.cells[k].is_none() {
            self.coverage += 1;
        }
        self.cells[k] = Some(entry);
    }

    pub(crate) fn entry_mut(&mut self, n: NicheIndex) -> Option<&mut ArchiveEntry> {
        let k = self.cell_index(n);
        self.cells[k].as_mut()
    }

    /// Insert an entry at the niche its descriptor maps to. Intended for
    /// building archives outside of evolution (tests, imports).
    pub fn insert_entry(&mut self, entry: ArchiveEntry) -> Result<NicheIndex, EvolveError> {
        if entry.fitness <= 0.0 {
            return Err(EvolveError::Invariant("elite fitness must be positive".into()));
        }
        let n = niche(&entry.descriptor, self.bins);
        self.put(n, entry);
        Ok(n)
    }

    /// Every elite has positive fitness and sits in the cell its descriptor maps to.
    pub fn check_invariants(&self) -> Result<(), EvolveError> {
        let mut count = 0;
        for (n, e) in self.occupied() {
            count += 1;
            if e.fitness <= 0.0 {
                return Err(EvolveError::Invariant(format!("non-positive fitness at {n}")));
            }
            if niche(&e.descriptor, self.bins) != n {
                return Err(EvolveError::Invariant(format!("descriptor of {n} maps elsewhere")));
            }
        }
        if count != self.coverage {
            return Err(EvolveError::Invariant("coverage counter out of sync".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = ArchiveDoc {
            schema: ARCHIVE_SCHEMA.to_string(),
            version: SCHEMA_VERSION,
            bins: self.bins,
            generation: self.generation,
            coverage: self.coverage,
            catalog_hash: self.catalog_hash.clone(),
            config: self.config.clone(),
            entries: self.occupied().map(|(n, e)| CellDoc { i: n.i, j: n.j, entry: e.clone() }).collect(),
        };
        let mut s = serde_json::to_string(&doc).expect("archive serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Archive, FormatError> {
        let doc: ArchiveDoc = serde_json::from_str(text)?;
        check_schema(ARCHIVE_SCHEMA, &doc.schema, doc.version)?;
        let mut archive = Archive::new(EvolutionConfig { bins: doc.bins, ..doc.config }, doc.catalog_hash);
        archive.generation = doc.generation;
        for cell in doc.entries {
            if cell.i >= doc.bins || cell.j >= doc.bins {
                return Err(FormatError::Malformed(format!("cell ({}, {}) outside grid", cell.i, cell.j)));
            }
            archive.put(NicheIndex::new(cell.i, cell.j), cell.entry);
        }
        if archive.coverage != doc.coverage {
            return Err(FormatError::Malformed("coverage does not match entries".into()));
        }
        Ok(archive)
    }

    /// Flat view: `i,j,ipp,communicativeness,fitness,chromosome`.
    pub fn to_csv(&self) -> String {
        let mut out = crate::io::csv_schema_line("hanabi-qd/archive-flat");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["i", "j", "ipp", "communicativeness", "fitness", "chromosome"])
            .expect("in-memory write");
        for (n, e) in self.occupied() {
            let genes: Vec<String> = e.chromosome.genes().iter().map(|g| g.0.to_string()).collect();
            w.write_record([
                n.i.to_string(),
                n.j.to_string(),
                e.descriptor.ipp.to_string(),
                e.descriptor.communicativeness.to_string(),
                e.fitness.to_string(),
                genes.join(" "),
            ])
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        out
    }

    /// `bins x bins` fitness grid for heatmaps. Row `i` is the IPP bin,
    /// column `j` the communicativeness bin; empty cells are blank.
    pub fn heatmap_csv(&self) -> String {
        let mut out = crate::io::csv_schema_line("hanabi-qd/heatmap");
        let header: Vec<String> = std::iter::once("ipp_bin".to_string())
            .chain((0..self.bins).map(|j| format!("c{j}")))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.bins {
            let mut row = vec![i.to_string()];
            for j in 0..self.bins {
                row.push(self.get(NicheIndex::new(i, j)).map_or(String::new(), |e| e.fitness.to_string()));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
