use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use hanabi_qd_core::analysis::{action_agreement, collect_states, hamming_csv, hamming_report, StateCorpus};
use hanabi_qd_core::elites::{reevaluate, Archive, EvolutionConfig, Evolver};
use hanabi_qd_core::engine::{play_game_recorded, Agent};
use hanabi_qd_core::evaluation::{corresponding_pairs, MatchupMatrix, DEFAULT_GAMES_PER_PAIR};
use hanabi_qd_core::io::{write_atomic, SCHEMA_VERSION};
use hanabi_qd_core::meta::{meta_eval, response_table, MetaConfig, MetaMode, MetaPolicy, Partner, ResponseTable};
use hanabi_qd_core::metrics::NicheIndex;
use hanabi_qd_core::rules::{ChromosomeAgent, RuleCatalog};
use hanabi_qd_core::seed::{seed_list, Stream};

use crate::cli::{
    parse_threshold, AnalyzeArgs, AnalyzeMode, Command, Common, CrossplayArgs, EvolveArgs, MetaEvalArgs, Mode,
    PlayArgs, ReevalArgs, RespondArgs,
};

/// A problem with the invocation itself rather than with running it.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Evolve(a) => evolve(a),
        Command::Reeval(a) => reeval(a),
        Command::Crossplay(a) => crossplay(a),
        Command::Respond(a) => respond(a),
        Command::MetaEval(a) => meta(a),
        Command::Analyze(a) => analyze(a),
        Command::Play(a) => play(a),
    }
}

fn load_catalog(path: Option<&Path>) -> Result<RuleCatalog> {
    match path {
        None => Ok(RuleCatalog::standard()),
        Some(p) => {
            let text = read(p)?;
            RuleCatalog::from_json(&text).with_context(|| format!("loading catalog {}", p.display()))
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_archive(path: &Path, catalog: &RuleCatalog) -> Result<Archive> {
    let archive = Archive::from_json(&read(path)?).with_context(|| format!("loading archive {}", path.display()))?;
    if archive.catalog_hash() != catalog.hash() {
        bail!("archive {} was produced with a different rule catalog", path.display());
    }
    Ok(archive)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    write_atomic(path, contents.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn write_value(path: &Path, value: &serde_json::Value) -> Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

/// Record everything needed to rerun a command next to its outputs.
fn snapshot(dir: &Path, command: &str, catalog: &RuleCatalog, threads: usize, parameters: serde_json::Value) -> Result<()> {
    write_value(
        &dir.join("resolved-config.json"),
        &json!({
            "schema": "hanabi-qd/resolved-config",
            "version": SCHEMA_VERSION,
            "command": command,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "catalog_hash": catalog.hash(),
            "threads": threads,
            "parameters": parameters,
        }),
    )
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    if threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().context("starting worker threads")
}

fn prepare(common: &Common) -> Result<(RuleCatalog, rayon::ThreadPool)> {
    let pool = pool(common.threads)?;
    let catalog = load_catalog(common.catalog.as_deref())?;
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    Ok((catalog, pool))
}

fn evolve(a: EvolveArgs) -> Result<()> {
    let (catalog, _) = prepare(&a.common)?;
    let out = &a.common.out;
    let mut evolver = match &a.resume {
        Some(path) => {
            if a.config.is_some() || a.seed.is_some() || a.games_per_eval.is_some() {
                return Err(usage("--resume keeps the archived configuration; only --generations and --threads apply"));
            }
            let mut ev = Evolver::resume(load_archive(path, &catalog)?, &catalog).map_err(|e| usage(e.to_string()))?;
            if let Some(total) = a.generations {
                ev.set_total_candidates(total).map_err(|e| usage(e.to_string()))?;
            }
            ev.set_threads(a.common.threads).map_err(|e| usage(e.to_string()))?;
            ev
        }
        None => {
            let mut config: EvolutionConfig = match &a.config {
                Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => EvolutionConfig::default(),
            };
            if let Some(s) = a.seed {
                config.master_seed = s;
            }
            if let Some(g) = a.generations {
                config.total_candidates = g;
                config.random_phase = config.random_phase.min(g);
            }
            if let Some(n) = a.games_per_eval {
                config.games_per_eval = n;
            }
            config.threads = a.common.threads;
            Evolver::new(config, &catalog).map_err(|e| usage(e.to_string()))?
        }
    };
    let config = evolver.archive().config().clone();
    snapshot(
        out,
        "evolve",
        &catalog,
        config.threads,
        json!({ "evolution": config, "resumed_from": a.resume }),
    )?;

    evolver = evolver.with_checkpoint(out.join("checkpoint.json"));
    let step = config.checkpoint_every.max(1);
    while evolver.archive().generation() < config.total_candidates {
        let next = (evolver.archive().generation() / step + 1) * step;
        evolver.run_until(next)?;
        let archive = evolver.archive();
        eprintln!(
            "candidates {}/{}  coverage {}  best {:.3}",
            archive.generation(),
            config.total_candidates,
            archive.coverage(),
            best_fitness(archive)
        );
    }
    let (archive, monitor) = evolver.into_parts();
    write(&out.join("archive.json"), &archive.to_json())?;
    write(&out.join("archive.csv"), &archive.to_csv())?;
    write(&out.join("heatmap.csv"), &archive.heatmap_csv())?;
    println!(
        "coverage {}/{}  best fitness {:.3}  inserted {}  replaced {}  kept {}  rejected {}",
        archive.coverage(),
        archive.bins() * archive.bins(),
        best_fitness(&archive),
        monitor.inserted,
        monitor.replaced,
        monitor.kept,
        monitor.rejected
    );
    Ok(())
}

fn best_fitness(archive: &Archive) -> f64 {
    archive.occupied().map(|(_, e)| e.fitness).fold(0.0, f64::max)
}

fn reeval(a: ReevalArgs) -> Result<()> {
    let (catalog, pool) = prepare(&a.common)?;
    let archive = load_archive(&a.archive, &catalog)?;
    snapshot(&a.common.out, "reeval", &catalog, a.common.threads, json!({ "archive": a.archive, "games": a.games, "seed": a.seed }))?;
    let report = pool.install(|| reevaluate(&archive, &catalog, a.games, a.seed))?;
    write(&a.common.out.join("reevaluation.csv"), &report.to_csv())?;
    write(&a.common.out.join("reevaluation.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    let best = report.best().expect("non-empty report");
    println!(
        "elites {}  average {:.3}  best {:.3} +/- {:.3} at {}  max sd {:.3}",
        report.entries.len(),
        report.average_score(),
        best.mean,
        best.sem,
        best.niche,
        report.max_sd()
    );
    Ok(())
}

fn crossplay(a: CrossplayArgs) -> Result<()> {
    let (catalog, pool) = prepare(&a.common)?;
    let out = &a.common.out;
    let archive = load_archive(&a.archive, &catalog)?;
    match &a.archive_b {
        None => {
            let games = a.games.unwrap_or(DEFAULT_GAMES_PER_PAIR);
            snapshot(out, "crossplay", &catalog, a.common.threads, json!({
                "archive": a.archive, "games_per_pair": games, "seed": a.seed, "population": a.population,
            }))?;
            if archive.is_empty() {
                bail!("archive {} is empty", a.archive.display());
            }
            let m = pool.install(|| MatchupMatrix::compute(&archive, &catalog, games, a.seed, a.population.clone()))?;
            write(&out.join("matrix.csv"), &m.to_csv())?;
            let summary = m.summary();
            write(&out.join("matrix-summary.json"), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            println!(
                "niches {}  pairs {}  self-play {:.3}  cross-play {:.3}",
                summary.coverage, summary.pairs, summary.mean_self_play, summary.mean_cross_play
            );
        }
        Some(path_b) => {
            let games = a.games.unwrap_or(1000);
            snapshot(out, "crossplay", &catalog, a.common.threads, json!({
                "archive": a.archive, "archive_b": path_b, "games": games, "seed": a.seed,
            }))?;
            let b = load_archive(path_b, &catalog)?;
            let report = pool.install(|| corresponding_pairs(&archive, &b, &catalog, games, a.seed))?;
            write(&out.join("corresponding.csv"), &report.to_csv())?;
            write(&out.join("corresponding.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            println!(
                "corresponding pairs {}  mean cross-play {:.3}  mean hamming {:.2}",
                report.pairs.len(),
                report.mean_score(),
                report.mean_hamming()
            );
        }
    }
    Ok(())
}

fn respond(a: RespondArgs) -> Result<()> {
    let catalog = RuleCatalog::standard();
    let path = a.out.clone().unwrap_or_else(|| {
        std::env::var_os("HANABI_QD_OUT").map_or_else(|| PathBuf::from("out"), PathBuf::from).join("response-table.json")
    });
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    let m = MatchupMatrix::from_csv(&read(&a.matrix)?).with_context(|| format!("loading matrix {}", a.matrix.display()))?;
    let archive = Archive::from_json(&read(&a.archive)?).with_context(|| format!("loading archive {}", a.archive.display()))?;
    if let Some(n) = m.niches().iter().find(|n| archive.get(**n).is_none()) {
        bail!("matrix niche {n} is not occupied in {}", a.archive.display());
    }
    let table = response_table(&m, archive.bins())?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    snapshot(&dir, "respond", &catalog, 1, json!({ "matrix": a.matrix, "archive": a.archive, "out": path }))?;
    write(&path, &table.to_json())?;
    write(&dir.join("response-segments.csv"), &table.segments_csv())?;
    let specialized = table.responses.iter().filter(|r| r.response != table.generalist).count();
    println!(
        "generalist {}  partners {}  specialized responses {}",
        table.generalist,
        table.responses.len(),
        specialized
    );
    Ok(())
}

fn meta(a: MetaEvalArgs) -> Result<()> {
    let (catalog, pool) = prepare(&a.common)?;
    let out = &a.common.out;
    let threshold = parse_threshold(&a.threshold).map_err(usage)?;
    let table = ResponseTable::from_json(&read(&a.table)?).with_context(|| format!("loading table {}", a.table.display()))?;
    let archive = load_archive(&a.archive, &catalog)?;
    let opponents = load_archive(&a.opponents, &catalog)?;
    if opponents.bins() != table.bins {
        bail!("partner archive uses {} bins, the table {}", opponents.bins(), table.bins);
    }
    let policy = MetaPolicy::new(table, &archive)?;
    let mode = match a.mode {
        Mode::Oracle => MetaMode::Oracle,
        Mode::Generalist => MetaMode::Generalist,
        Mode::Adaptive => MetaMode::Adaptive,
    };
    let config = MetaConfig { mode, threshold, persist_across_games: !a.no_partner_id };
    let partners = match a.partners {
        Some(k) => Partner::sample(&opponents, k, a.seed),
        None => Partner::all(&opponents),
    };
    if partners.is_empty() {
        bail!("partner archive {} is empty", a.opponents.display());
    }
    snapshot(out, "meta-eval", &catalog, a.common.threads, json!({
        "meta": config, "table": a.table, "archive": a.archive, "opponents": a.opponents,
        "games": a.games, "partners": a.partners, "seed": a.seed,
    }))?;
    let game = opponents.config().game;
    let report = pool.install(|| meta_eval(&catalog, &policy, config, &partners, game, a.games, a.seed))?;
    write(&out.join("meta-eval.json"), &report.to_json())?;
    write(&out.join("meta-eval.csv"), &report.to_csv())?;
    let fmt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    println!(
        "partners {}  mean {:.3} +/- {:.3}  mae ipp {}  mae communicativeness {}",
        report.partners.len(),
        report.mean,
        report.sem,
        fmt(report.mae_ipp),
        fmt(report.mae_communicativeness)
    );
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let (catalog, pool) = prepare(&a.common)?;
    let out = &a.common.out;
    let archive = load_archive(&a.archive, &catalog)?;
    let second = |what: &str| -> Result<Archive> {
        let p = a.archive_b.as_ref().ok_or_else(|| usage(format!("--mode {what} needs --archive-b")))?;
        load_archive(p, &catalog)
    };
    match a.mode {
        AnalyzeMode::Heatmap => {
            snapshot(out, "analyze", &catalog, a.common.threads, json!({ "mode": "heatmap", "archive": a.archive }))?;
            write(&out.join("heatmap.csv"), &archive.heatmap_csv())?;
            println!("coverage {}/{}", archive.coverage(), archive.bins() * archive.bins());
        }
        AnalyzeMode::Hamming => {
            let b = second("hamming")?;
            snapshot(out, "analyze", &catalog, a.common.threads, json!({
                "mode": "hamming", "archive": a.archive, "archive_b": a.archive_b,
            }))?;
            let rows = hamming_report(&archive, &b)?;
            write(&out.join("hamming.csv"), &hamming_csv(&rows))?;
            let mean = if rows.is_empty() { 0.0 } else { rows.iter().map(|r| r.distance as f64).sum::<f64>() / rows.len() as f64 };
            println!("common niches {}  mean distance {:.2}", rows.len(), mean);
        }
        AnalyzeMode::Agreement => {
            let b = second("agreement")?;
            snapshot(out, "analyze", &catalog, a.common.threads, json!({
                "mode": "agreement", "archive": a.archive, "archive_b": a.archive_b,
                "corpus": a.corpus, "games": a.games, "seed": a.seed,
            }))?;
            let corpus = match &a.corpus {
                Some(p) => StateCorpus::from_jsonl(&read(p)?).with_context(|| format!("loading corpus {}", p.display()))?,
                None => {
                    let c = pool.install(|| collect_states(&archive, &catalog, a.games, a.seed))?;
                    write(&out.join("corpus.jsonl"), &c.to_jsonl())?;
                    c
                }
            };
            let report = pool.install(|| action_agreement(&archive, &b, &catalog, &corpus))?;
            write(&out.join("agreement.csv"), &report.to_csv())?;
            write(&out.join("agreement.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            println!(
                "states {}  niches {}  mean agreement {:.3}  random baseline {:.3}",
                report.snapshots,
                report.niches.len(),
                report.mean_agreement,
                report.random_baseline
            );
        }
    }
    Ok(())
}

fn play(a: PlayArgs) -> Result<()> {
    let (catalog, _) = prepare(&a.common)?;
    let out = &a.common.out;
    let archive = load_archive(&a.archive, &catalog)?;
    let game = archive.config().game;
    let players = game.players as usize;
    let niches: Vec<NicheIndex> = match a.niches.len() {
        1 => vec![NicheIndex::new(a.niches[0].0, a.niches[0].1); players],
        k if k == players => a.niches.iter().map(|&(i, j)| NicheIndex::new(i, j)).collect(),
        k => return Err(usage(format!("{k} niches given for a {players}-player game"))),
    };
    let mut seats = Vec::with_capacity(players);
    for n in &niches {
        let e = archive.get(*n).ok_or_else(|| usage(format!("niche {n} is not occupied")))?;
        seats.push(ChromosomeAgent::new(&catalog, e.chromosome.clone()).with_name(format!("elite-{}-{}", n.i, n.j)));
    }
    snapshot(out, "play", &catalog, 1, json!({
        "archive": a.archive, "niches": a.niches, "games": a.games, "seed": a.seed,
    }))?;
    let width = a.games.saturating_sub(1).to_string().len().max(3);
    for (k, s) in seed_list(a.seed, Stream::Play, 0, a.games).into_iter().enumerate() {
        let mut agents: Vec<&mut dyn Agent> = seats.iter_mut().map(|x| x as &mut dyn Agent).collect();
        let record = play_game_recorded(&mut agents, game, s)?;
        write(&out.join(format!("game-{k:0width$}.jsonl")), &record.to_jsonl())?;
        println!("game {k}  seed {s}  score {}  turns {}  lives {}", record.score, record.turns.len(), record.lives_left);
    }
    Ok(())
}
