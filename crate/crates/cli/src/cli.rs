use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hanabi-qd", version, about = "Quality-diversity search and ad-hoc teamwork evaluation for Hanabi")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run MAP-Elites and write the resulting archive.
    Evolve(EvolveArgs),
    /// Re-play every elite of an archive with fresh seeds.
    Reeval(ReevalArgs),
    /// Match-up matrix of one archive, or corresponding pairs of two.
    Crossplay(CrossplayArgs),
    /// Generalist and best-response table from a match-up matrix.
    Respond(RespondArgs),
    /// Evaluate the meta-agent against the elites of a partner archive.
    MetaEval(MetaEvalArgs),
    /// Heatmaps, Hamming distances and action agreement.
    Analyze(AnalyzeArgs),
    /// Play recorded games between archive elites.
    Play(PlayArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, env = "HANABI_QD_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads. 1 gives bit-reproducible evolution.
    #[arg(long, env = "HANABI_QD_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Rule catalog JSON; the built-in catalog when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Evolution config JSON. Missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total candidates; overrides the config.
    #[arg(long)]
    pub generations: Option<u64>,
    /// Games per fitness evaluation; overrides the config.
    #[arg(long)]
    pub games_per_eval: Option<usize>,
    /// Continue from a checkpoint or archive instead of starting fresh.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReevalArgs {
    #[arg(long)]
    pub archive: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub games: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CrossplayArgs {
    #[arg(long)]
    pub archive: PathBuf,
    /// Second population; switches to corresponding-pair mode.
    #[arg(long)]
    pub archive_b: Option<PathBuf>,
    /// Games per pair. Defaults to 400 for matrices and 1000 for corresponding pairs.
    #[arg(long)]
    pub games: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Population label stored in the matrix.
    #[arg(long, default_value = "population")]
    pub population: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RespondArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Archive the matrix was computed from.
    #[arg(long)]
    pub archive: PathBuf,
    /// Output table. Defaults to `response-table.json` under `$HANABI_QD_OUT`
    /// (or `out/`). Segment data is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Oracle,
    Generalist,
    Adaptive,
}

#[derive(Debug, Args)]
pub struct MetaEvalArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub table: PathBuf,
    /// Archive the table refers to.
    #[arg(long)]
    pub archive: PathBuf,
    /// Archive whose elites act as partners.
    #[arg(long)]
    pub opponents: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub games: usize,
    /// Partner turns to observe before specializing, or `inf` to never specialize.
    #[arg(long, default_value = "0")]
    pub threshold: String,
    /// Do not tell the meta-agent who its partner is; observations reset every game.
    #[arg(long)]
    pub no_partner_id: bool,
    /// Evaluate a uniform sample of this many partners instead of all.
    #[arg(long)]
    pub partners: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMode {
    Hamming,
    Agreement,
    Heatmap,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub mode: AnalyzeMode,
    #[arg(long)]
    pub archive: PathBuf,
    #[arg(long)]
    pub archive_b: Option<PathBuf>,
    /// Existing state corpus for agreement; collected from `--archive` otherwise.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Self-play games per elite when collecting a corpus.
    #[arg(long, default_value_t = 1)]
    pub games: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long)]
    pub archive: PathBuf,
    /// Niche `i,j` of the elite in each seat. A single niche fills every seat.
    #[arg(long = "niche", required = true, value_parser = parse_niche)]
    pub niches: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 1)]
    pub games: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

fn parse_niche(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected i,j, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(i)?, parse(j)?))
}

pub fn parse_threshold(s: &str) -> Result<Option<u64>, String> {
    match s {
        "inf" | "infinity" | "never" => Ok(None),
        _ => s.parse().map(Some).map_err(|_| format!("threshold must be a turn count or `inf`, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn niche_and_threshold_parsing() {
        assert_eq!(parse_niche("14,10"), Ok((14, 10)));
        assert_eq!(parse_niche(" 3, 4"), Ok((3, 4)));
        assert!(parse_niche("3").is_err());
        assert_eq!(parse_threshold("inf"), Ok(None));
        assert_eq!(parse_threshold("12"), Ok(Some(12)));
        assert!(parse_threshold("-1").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
