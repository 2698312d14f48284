//! Subcommand implementations. Each returns a [`CliError`] whose class picks
//! the process exit code.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use cliquegan::eval::{self, ScorerConfig};
use cliquegan::graph::{self, load_edge_list};
use cliquegan::rng::stream;
use cliquegan::synth::{self, PlantedSpec};
use cliquegan::{CommunityAssignment, CoverSource, Error, Graph, TrainConfig, TrainState};
use serde_json::json;

use crate::manifest::{ConfigEntry, RunManifest};
use crate::{CliquePredArgs, DetectArgs, EvalArgs, StatsArgs, SynthArgs, TrainArgs};

const TAG_SPLIT: u64 = 0xC110E;
const TAG_SCORER: u64 = 0xC110F;
const TAG_STATS: u64 = 0x57A7;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs.
    Input(String),
    /// The request exceeds a size guard.
    Guard(String),
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Guard(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::TooLarge { .. } => CliError::Guard(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// `dir/name.ext` becomes `dir/name`; sibling outputs hang off this stem.
fn stem(path: &Path) -> PathBuf {
    path.with_extension("")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = stem(path).into_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn refuse_overwrite(inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
    for o in outputs {
        if let Some(i) = inputs.iter().find(|i| same_file(i, o)) {
            return Err(input_err(format!(
                "output {} would overwrite input {}",
                o.display(),
                i.display()
            )));
        }
    }
    Ok(())
}

/// Resolves training settings as flag, then config file, then default, and
/// records where each key came from. `defaults` supplies command-specific
/// defaults that replace the library ones.
pub fn resolve_config(
    args: &TrainArgs,
    defaults: &[(&str, String)],
) -> Result<(TrainConfig, Vec<ConfigEntry>)> {
    let mut cfg = TrainConfig::default();
    let mut source: HashMap<&str, &str> = HashMap::new();
    for (k, v) in defaults {
        cfg.set(k, v)?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)
            .map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if let Some((k, _)) = line.split_once('=') {
                if let Some(key) = TrainConfig::KEYS.iter().find(|x| **x == k.trim()) {
                    source.insert(key, "config");
                }
            }
        }
    }
    let flags: [(&str, Option<String>); 9] = [
        ("clique_size", args.clique_size.map(|x| x.to_string())),
        ("communities", args.num_communities.clone()),
        ("candidates", args.candidates.clone()),
        ("init", args.init.clone()),
        ("max_iters", args.iters.map(|x| x.to_string())),
        ("lr", args.lr.map(|x| x.to_string())),
        ("pretrain_epochs", args.pretrain_epochs.map(|x| x.to_string())),
        ("seed", args.seed.map(|x| x.to_string())),
        ("threads", args.threads.map(|x| x.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v)?;
            source.insert(k, "flag");
        }
    }
    cfg.validate()?;
    let values: HashMap<String, String> = cfg
        .to_text()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let entries = TrainConfig::KEYS
        .iter()
        .map(|k| ConfigEntry {
            key: k.to_string(),
            value: values[*k].clone(),
            source: source.get(k).unwrap_or(&"default").to_string(),
        })
        .collect();
    Ok((cfg, entries))
}

fn write_meta(path: &Path, cfg: &TrainConfig, det: &cliquegan::Detection) -> Result<()> {
    let s = &det.state;
    let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let scores: Vec<String> = det.count_scores.iter().map(|(c, x)| format!("{c}:{x}")).collect();
    let mut text = cfg.to_text();
    text.push_str(&format!(
        "community_count={}\niteration={}\nconverged={}\ndelta={}\nepsilon={}\n\
         count_scores={}\npretrain_history={}\nhistory={}\n",
        det.community_count,
        s.iteration,
        s.converged,
        det.threshold.delta,
        det.threshold.epsilon,
        scores.join(","),
        join(&s.pretrain_history),
        join(&s.history),
    ));
    std::fs::write(path, text).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn sorted_by_first_member(graph: &Graph, cover: &CommunityAssignment) -> Vec<Vec<usize>> {
    let mut out = cover.communities.clone();
    out.sort_by_key(|c| c.iter().map(|&v| graph.label(v)).collect::<Vec<_>>());
    out
}

pub fn detect(args: &DetectArgs, argv: &[String]) -> Result<()> {
    let (cfg, entries) = resolve_config(&args.train, &[])?;
    let out = &args.communities_out;
    let theta_g = sibling(out, ".theta_g.tsv");
    let theta_d = sibling(out, ".theta_d.tsv");
    let meta = sibling(out, ".meta.txt");
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(out, ".manifest.json"));
    let mut inputs = vec![args.graph.as_path()];
    if let Some(c) = &args.train.config {
        inputs.push(c.as_path());
    }
    refuse_overwrite(&inputs, &[out, &theta_g, &theta_d, &meta, &manifest_path])?;

    let mut manifest = RunManifest::start("detect", argv, cfg.seed);
    manifest.config = entries;
    for i in &inputs {
        manifest.input(i)?;
    }
    let graph = load_edge_list(&args.graph)?;
    log::info!(
        "loaded {} vertices, {} edges",
        graph.vertex_count(),
        graph.edge_count()
    );
    let det = cliquegan::detect(&graph, &cfg)?;

    graph::write_communities(&graph, &sorted_by_first_member(&graph, &det.communities), out)?;
    det.state.theta_g.write_tsv(&graph, &theta_g)?;
    det.state.theta_d.write_tsv(&graph, &theta_d)?;
    write_meta(&meta, &cfg, &det)?;
    for p in [out, &theta_g, &theta_d, &meta] {
        manifest.output(p);
    }
    report_detection(&mut manifest, &graph, &det);
    manifest.finish(&manifest_path)
}

fn report_detection(m: &mut RunManifest, graph: &Graph, det: &cliquegan::Detection) {
    let s: &TrainState = &det.state;
    let lines = [
        ("vertices", json!(graph.vertex_count())),
        ("edges", json!(graph.edge_count())),
        ("community_count", json!(det.community_count)),
        ("communities_found", json!(det.communities.len())),
        ("empty_dropped", json!(det.communities.empty_dropped)),
        (
            "mean_memberships",
            json!(det.communities.mean_memberships(graph.vertex_count())),
        ),
        ("iterations", json!(s.iteration)),
        ("converged", json!(s.converged)),
        ("delta", json!(det.threshold.delta)),
        ("final_objective", json!(s.history.last().copied().unwrap_or(f64::NAN))),
    ];
    for (k, v) in lines {
        println!("{k}={v}");
        m.metric(k, v);
    }
}

/// Reads both covers. Without a graph, ids are compacted over the union of
/// ids appearing in either file.
fn load_covers(
    truth: &Path,
    detected: &Path,
    graph: Option<&Graph>,
) -> Result<(CommunityAssignment, CommunityAssignment, usize)> {
    let (t, d, n) = match graph {
        Some(g) => (
            graph::load_communities(truth, g)?,
            graph::load_communities(detected, g)?,
            g.vertex_count(),
        ),
        None => {
            let t = graph::load_raw_communities(truth)?;
            let d = graph::load_raw_communities(detected)?;
            let labels: BTreeSet<u64> = t
                .iter()
                .chain(&d)
                .flat_map(|(_, ids)| ids.iter().copied())
                .collect();
            let index: HashMap<u64, usize> =
                labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
            let map = |raw: Vec<(usize, Vec<u64>)>| -> Vec<Vec<usize>> {
                raw.into_iter()
                    .map(|(_, ids)| ids.iter().map(|x| index[x]).collect())
                    .collect()
            };
            (map(t), map(d), labels.len())
        }
    };
    let truth_cover = CommunityAssignment::new(t, CoverSource::GroundTruth);
    let detected_cover = CommunityAssignment::new(d, CoverSource::Detected);
    for (name, cover, path) in [
        ("truth", &truth_cover, truth),
        ("detected", &detected_cover, detected),
    ] {
        if cover.is_empty() {
            return Err(input_err(format!(
                "{} cover {} has no communities",
                name,
                path.display()
            )));
        }
    }
    Ok((truth_cover, detected_cover, n))
}

fn append_csv(path: &Path, header: &[&str], row: &[String]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(file);
    let err = |e: csv::Error| CliError::Internal(format!("{}: {e}", path.display()));
    if fresh {
        w.write_record(header).map_err(err)?;
    }
    w.write_record(row).map_err(err)?;
    w.flush()
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

pub fn eval(args: &EvalArgs, argv: &[String]) -> Result<()> {
    let mut manifest = RunManifest::start("eval", argv, 0);
    let graph = match &args.graph {
        Some(p) => {
            manifest.input(p)?;
            Some(load_edge_list(p)?)
        }
        None => None,
    };
    manifest.input(&args.truth)?;
    manifest.input(&args.detected)?;
    let (truth, detected, n) = load_covers(&args.truth, &args.detected, graph.as_ref())?;
    let f1 = eval::f1_score(&truth, &detected)?;
    let nmi = eval::overlapping_nmi(&truth, &detected)?;
    println!("f1={f1}");
    println!("nmi={nmi}");
    println!("truth_communities={}", truth.len());
    println!("detected_communities={}", detected.len());
    println!("vertices={n}");
    manifest.metric("f1", f1);
    manifest.metric("nmi", nmi);
    if let Some(csv_path) = &args.csv {
        append_csv(
            csv_path,
            &["label", "f1", "nmi", "truth_communities", "detected_communities"],
            &[
                args.label.clone(),
                f1.to_string(),
                nmi.to_string(),
                truth.len().to_string(),
                detected.len().to_string(),
            ],
        )?;
        manifest.output(csv_path);
    }
    match &args.manifest {
        Some(p) => manifest.finish(p),
        None => Ok(()),
    }
}

pub fn synth(args: &SynthArgs, argv: &[String]) -> Result<()> {
    let spec = PlantedSpec {
        vertices: args.vertices,
        communities: args.communities,
        mean_memberships: args.memberships,
        heavy_tail: args.heavy_tail,
        p_in: args.p_in,
        p_out: args.p_out,
        seed: args.seed,
    };
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(&args.graph_out, ".manifest.json"));
    let mut manifest = RunManifest::start("synth", argv, args.seed);
    let (graph, truth) = synth::generate(&spec)?;
    graph::write_edge_list(&graph, &args.graph_out)?;
    graph::write_communities(&graph, &truth.communities, &args.truth_out)?;
    manifest.output(&args.graph_out);
    manifest.output(&args.truth_out);
    let lines = [
        ("vertices", json!(graph.vertex_count())),
        ("edges", json!(graph.edge_count())),
        ("communities", json!(truth.len())),
        ("mean_memberships", json!(truth.mean_memberships(graph.vertex_count()))),
        ("expected_edges", json!(spec.expected_edges())),
    ];
    for (k, v) in lines {
        println!("{k}={v}");
        manifest.metric(k, v);
    }
    manifest.finish(&manifest_path)
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| input_err(format!("bad clique size {t:?}")))
        })
        .collect()
}

pub fn stats(args: &StatsArgs, argv: &[String]) -> Result<()> {
    let sizes = parse_sizes(&args.sizes)?;
    let mut manifest = RunManifest::start("stats", argv, args.seed);
    manifest.input(&args.graph)?;
    manifest.input(&args.truth)?;
    let graph = load_edge_list(&args.graph)?;
    let truth = CommunityAssignment::new(
        graph::load_communities(&args.truth, &graph)?,
        CoverSource::GroundTruth,
    );
    if truth.is_empty() {
        return Err(input_err(format!(
            "truth cover {} has no communities",
            args.truth.display()
        )));
    }
    let mut rng = stream(args.seed, &[TAG_STATS]);
    let rows = eval::motif_community_stats(&graph, &truth, &sizes, args.trials, &mut rng)?;
    println!("k\twithin\tglobal\tratio");
    for r in &rows {
        let ratio = if r.global > 0.0 {
            r.within_community / r.global
        } else {
            f64::INFINITY
        };
        println!("{}\t{}\t{}\t{}", r.k, r.within_community, r.global, ratio);
        manifest.metric(&format!("within_k{}", r.k), r.within_community);
        manifest.metric(&format!("global_k{}", r.k), r.global);
    }
    for r in &rows {
        println!("# k={} shared\tsamples\tclique_rate\tnormalized", r.k);
        for b in &r.shared_bins {
            println!("{}\t{}\t{}\t{}", b.shared, b.samples, b.clique_rate, b.normalized);
        }
    }
    match &args.manifest {
        Some(p) => manifest.finish(p),
        None => Ok(()),
    }
}

pub fn cliquepred(args: &CliquePredArgs, argv: &[String]) -> Result<()> {
    let use_generator = match args.embedding.as_str() {
        "discriminator" | "d" => false,
        "generator" | "g" => true,
        other => {
            return Err(input_err(format!(
                "unknown embedding {other:?} (expected discriminator or generator)"
            )))
        }
    };
    let (cfg, entries) =
        resolve_config(&args.train, &[("clique_size", args.predict_size.to_string())])?;
    let mut manifest = RunManifest::start("cliquepred", argv, cfg.seed);
    manifest.config = entries;
    manifest.input(&args.graph)?;
    if let Some(c) = &args.train.config {
        manifest.input(c)?;
    }
    let graph = load_edge_list(&args.graph)?;
    let mut rng = stream(cfg.seed, &[TAG_SPLIT]);
    let split = eval::build_clique_split(&graph, args.predict_size, args.hide_fraction, &mut rng)?;
    let det = cliquegan::detect(&split.train, &cfg)?;
    let theta = if use_generator {
        &det.state.theta_g
    } else {
        &det.state.theta_d
    };
    let mut rng = stream(cfg.seed, &[TAG_SCORER]);
    let auc = eval::clique_prediction_auc(&split, theta, ScorerConfig::default(), &mut rng)?;
    let lines = [
        ("clique_size", json!(args.predict_size)),
        ("hidden_cliques", json!(split.positives.len())),
        ("negatives", json!(split.negatives.len())),
        ("removed_edges", json!(split.removed_edges)),
        ("achieved_fraction", json!(split.achieved_fraction)),
        ("embedding", json!(if use_generator { "generator" } else { "discriminator" })),
        ("auc", json!(auc)),
    ];
    for (k, v) in lines {
        println!("{k}={v}");
        manifest.metric(k, v);
    }
    match &args.manifest {
        Some(p) => manifest.finish(p),
        None => Ok(()),
    }
}
