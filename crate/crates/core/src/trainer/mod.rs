//! The adversarial training loop.
//!
//! After initialization, each outer iteration runs a generator step and a
//! discriminator step:
//!
//! * G-step: every vertex with a neighbor generates `gen_samples` subsets;
//!   the generator then moves along `-log(1 - D(s)) * grad log G(s | v_c)` for
//!   each sample, `inner_updates` passes over the batch.
//! * D-step: every vertex covered by a clique draws `disc_samples` observed
//!   cliques, every vertex with a neighbor generates `disc_samples` subsets,
//!   and the discriminator ascends `log D` on the former and `log(1 - D)` on
//!   the latter, again `inner_updates` passes.
//!
//! Sampling runs per vertex on independent random streams (optionally across
//! threads); updates are applied serially in vertex order, so results are
//! identical for any thread count.

mod config;
mod init;
mod pretrain;
mod select;

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

pub use config::{CommunityCount, InitMethod, TrainConfig};
pub use init::{closed_neighborhood, conductance, init_locally_minimal, rank_seeds, Seed};
pub use pretrain::{agm_objective, pretrain_agm, sample_non_clique, PretrainConfig, Pretrained};
pub use select::{select_community_count, CountSelection};

use crate::agm::{self, AffiliationMatrix};
use crate::cliques::CliqueIndex;
use crate::discriminator;
use crate::error::{Error, Result};
use crate::generator::{self, WalkLimits};
use crate::graph::{Graph, VertexId};
use crate::motif::MotifSample;
use crate::rng::stream;

const TAG_INIT: u64 = 1;
const TAG_PRETRAIN: u64 = 2;
const TAG_VALIDATION: u64 = 3;
const TAG_GSTEP: u64 = 4;
const TAG_DSTEP: u64 = 5;

#[derive(Debug, Clone)]
pub struct TrainState {
    pub theta_g: AffiliationMatrix,
    pub theta_d: AffiliationMatrix,
    /// Completed outer iterations.
    pub iteration: usize,
    /// Validation objective after initialization and after each iteration.
    pub history: Vec<f64>,
    pub pretrain_history: Vec<f64>,
    pub converged: bool,
    pub wall_clock_secs: f64,
}

/// Edge and non-edge pairs scored to monitor convergence.
#[derive(Debug, Clone)]
pub struct ValidationSet {
    pub edges: Vec<(VertexId, VertexId)>,
    pub non_edges: Vec<(VertexId, VertexId)>,
}

impl ValidationSet {
    pub fn sample<R: Rng + ?Sized>(graph: &Graph, pairs: usize, rng: &mut R) -> Self {
        let all: Vec<_> = graph.edges().collect();
        let edges: Vec<_> = if all.len() <= pairs {
            all
        } else {
            rand::seq::index::sample(rng, all.len(), pairs)
                .into_iter()
                .map(|i| all[i])
                .collect()
        };
        let non_edges = sample_non_edges(graph, edges.len(), rng);
        ValidationSet { edges, non_edges }
    }

    /// Mean log-likelihood of the pairs under the edge model of `theta`.
    pub fn objective(&self, theta: &AffiliationMatrix) -> f64 {
        edge_log_likelihood(theta, &self.edges, &self.non_edges)
    }
}

/// Uniform vertex pairs that are not edges.
pub fn sample_non_edges<R: Rng + ?Sized>(
    graph: &Graph,
    count: usize,
    rng: &mut R,
) -> Vec<(VertexId, VertexId)> {
    (0..count)
        .filter_map(|_| sample_non_clique(graph, 2, rng).map(|p| (p[0].min(p[1]), p[0].max(p[1]))))
        .collect()
}

/// `(sum log p(edge) + sum log(1 - p(non-edge))) / (#edges + #non-edges)`.
pub fn edge_log_likelihood(
    theta: &AffiliationMatrix,
    edges: &[(VertexId, VertexId)],
    non_edges: &[(VertexId, VertexId)],
) -> f64 {
    let pos: f64 = edges
        .iter()
        .map(|&(u, v)| agm::log_clique_prob(&[theta.row(u), theta.row(v)]))
        .sum();
    let neg: f64 = non_edges
        .iter()
        .map(|&(u, v)| agm::log_one_minus_clique_prob(&[theta.row(u), theta.row(v)]))
        .sum();
    let n = edges.len() + non_edges.len();
    if n == 0 {
        0.0
    } else {
        (pos + neg) / n as f64
    }
}

/// Moves the generator along the policy gradient of one sample:
/// `theta_g -= lr * reward * grad log G(s | v_c)` with
/// `reward = log(1 - D(s))`. The per-row step `-reward * grad` is clipped to
/// [`agm::MAX_STEP_NORM`].
pub fn policy_gradient_step(
    graph: &Graph,
    theta_g: &mut AffiliationMatrix,
    sample: &MotifSample,
    reward: f64,
    lr: f64,
) {
    if reward == 0.0 {
        return;
    }
    let grads = generator::grad_log_generation(graph, theta_g, sample);
    for (v, mut g) in grads {
        for x in &mut g {
            *x *= -reward;
        }
        theta_g.add_clipped_projected(v, lr, &g);
    }
}

struct Sampler<'a> {
    graph: &'a Graph,
    pool: Option<rayon::ThreadPool>,
    roots: Vec<VertexId>,
}

impl<'a> Sampler<'a> {
    fn new(graph: &'a Graph, threads: usize) -> Result<Self> {
        let pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        let roots = (0..graph.vertex_count()).filter(|&v| graph.degree(v) > 0).collect();
        Ok(Sampler { graph, pool, roots })
    }

    fn per_root<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(VertexId) -> T + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| self.roots.par_iter().map(|&v| f(v)).collect()),
            None => self.roots.iter().map(|&v| f(v)).collect(),
        }
    }

    fn generate(
        &self,
        theta_g: &AffiliationMatrix,
        m: usize,
        count: usize,
        limits: WalkLimits,
        seed: u64,
        tags: [u64; 2],
    ) -> Vec<Vec<MotifSample>> {
        self.per_root(|v| {
            let mut rng = stream(seed, &[tags[0], tags[1], v as u64]);
            (0..count)
                .filter_map(|_| generator::generate_subset(self.graph, theta_g, v, m, limits, &mut rng))
                .collect()
        })
    }
}

fn run_g_step(
    sampler: &Sampler<'_>,
    state: &mut TrainState,
    cfg: &TrainConfig,
    iteration: usize,
) {
    let batches = sampler.generate(
        &state.theta_g,
        cfg.clique_size,
        cfg.gen_samples,
        cfg.walk_limits(),
        cfg.seed,
        [TAG_GSTEP, iteration as u64],
    );
    for _ in 0..cfg.inner_updates {
        for sample in batches.iter().flatten() {
            let reward = agm::log_one_minus_clique_prob(&state.theta_d.gather(&sample.vertices));
            policy_gradient_step(sampler.graph, &mut state.theta_g, sample, reward, cfg.lr);
        }
    }
}

fn run_d_step(
    sampler: &Sampler<'_>,
    index: &CliqueIndex,
    state: &mut TrainState,
    cfg: &TrainConfig,
    iteration: usize,
) -> Result<()> {
    let theta_g = &state.theta_g;
    let batches: Vec<(Vec<MotifSample>, Vec<MotifSample>)> = sampler.per_root(|v| {
        let mut rng = stream(cfg.seed, &[TAG_DSTEP, iteration as u64, v as u64]);
        let positives: Vec<MotifSample> = (0..cfg.disc_samples)
            .map_while(|_| index.sample_covering(v, &mut rng))
            .collect();
        let negatives = (0..cfg.disc_samples)
            .filter_map(|_| {
                generator::generate_subset(
                    sampler.graph,
                    theta_g,
                    v,
                    cfg.clique_size,
                    cfg.walk_limits(),
                    &mut rng,
                )
            })
            .collect();
        (positives, negatives)
    });
    for _ in 0..cfg.inner_updates {
        for (pos, neg) in &batches {
            discriminator::update_from_batch(&mut state.theta_d, pos, neg, cfg.lr)?;
        }
    }
    Ok(())
}

/// Initializes both players for `communities` columns per `cfg.init`.
pub fn initialize(
    graph: &Graph,
    index: &CliqueIndex,
    communities: usize,
    cfg: &TrainConfig,
) -> Pretrained {
    let mut rng = stream(cfg.seed, &[TAG_INIT]);
    let seeded = init_locally_minimal(graph, communities, cfg.init_jitter, &mut rng);
    match cfg.init {
        InitMethod::LocallyMinimal => Pretrained {
            theta_g: seeded.0,
            theta_d: seeded.1,
            history: Vec::new(),
        },
        InitMethod::AgmPretrain => {
            let mut rng = stream(cfg.seed, &[TAG_PRETRAIN]);
            pretrain_agm(
                graph,
                index,
                seeded,
                PretrainConfig {
                    epochs: cfg.pretrain_epochs,
                    lr: cfg.pretrain_lr,
                },
                &mut rng,
            )
        }
    }
}

/// Runs initialization and the adversarial loop for a fixed community count.
pub fn train(graph: &Graph, index: &CliqueIndex, cfg: &TrainConfig) -> Result<TrainState> {
    let communities = check_train_args(index, cfg)?;
    let start = Instant::now();
    let init = initialize(graph, index, communities, cfg);
    let mut state = train_from(graph, index, cfg, init)?;
    state.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(state)
}

pub(crate) fn check_train_args(index: &CliqueIndex, cfg: &TrainConfig) -> Result<usize> {
    cfg.validate()?;
    let CommunityCount::Fixed(communities) = cfg.communities else {
        return Err(Error::Parameter(
            "train needs a fixed community count; resolve \"auto\" with select_community_count"
                .into(),
        ));
    };
    if index.clique_size() != cfg.clique_size {
        return Err(Error::Parameter(format!(
            "clique index holds {}-cliques but config asks for {}",
            index.clique_size(),
            cfg.clique_size
        )));
    }
    if index.is_empty() {
        return Err(Error::NoCliques(cfg.clique_size));
    }
    Ok(communities)
}

/// The adversarial loop alone, starting from already initialized players.
/// The reported wall-clock covers only this loop.
pub fn train_from(
    graph: &Graph,
    index: &CliqueIndex,
    cfg: &TrainConfig,
    init: Pretrained,
) -> Result<TrainState> {
    let communities = check_train_args(index, cfg)?;
    let shape = (graph.vertex_count(), communities);
    for m in [&init.theta_g, &init.theta_d] {
        if (m.rows(), m.cols()) != shape {
            return Err(Error::Shape(format!(
                "initial matrix is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                shape.0,
                shape.1
            )));
        }
    }
    let start = Instant::now();
    let validation = ValidationSet::sample(
        graph,
        cfg.validation_pairs,
        &mut stream(cfg.seed, &[TAG_VALIDATION]),
    );
    let mut state = TrainState {
        history: vec![validation.objective(&init.theta_g)],
        theta_g: init.theta_g,
        theta_d: init.theta_d,
        iteration: 0,
        pretrain_history: init.history,
        converged: false,
        wall_clock_secs: 0.0,
    };
    let sampler = Sampler::new(graph, cfg.threads)?;
    for iteration in 1..=cfg.max_iters {
        run_g_step(&sampler, &mut state, cfg, iteration);
        run_d_step(&sampler, index, &mut state, cfg, iteration)?;
        state.iteration = iteration;
        let objective = validation.objective(&state.theta_g);
        state.history.push(objective);
        log::debug!("iteration {iteration}: validation objective {objective:.6}");
        if has_converged(&state.history, cfg.convergence_window, cfg.convergence_tol) {
            state.converged = true;
            break;
        }
    }
    state.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(state)
}

/// Relative change between the last value and the one `window` steps earlier.
pub fn has_converged(history: &[f64], window: usize, tol: f64) -> bool {
    if window == 0 || history.len() <= window {
        return false;
    }
    let last = history[history.len() - 1];
    let before = history[history.len() - 1 - window];
    (last - before).abs() / before.abs().max(f64::MIN_POSITIVE) < tol
}
