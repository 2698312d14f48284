//! Fitting the clique affiliation model directly, used to initialize both
//! players before adversarial training.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agm::{self, AffiliationMatrix};
use crate::cliques::CliqueIndex;
use crate::graph::{Graph, VertexId};

const NEGATIVE_DRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct Pretrained {
    pub theta_g: AffiliationMatrix,
    pub theta_d: AffiliationMatrix,
    /// Mean per-sample objective of each epoch.
    pub history: Vec<f64>,
}

/// Draws `m` distinct vertices uniformly that do not form a clique. Gives up
/// after a bounded number of draws (only possible on near-complete graphs).
pub fn sample_non_clique<R: Rng + ?Sized>(graph: &Graph, m: usize, rng: &mut R) -> Option<Vec<VertexId>> {
    let n = graph.vertex_count();
    if n < m {
        return None;
    }
    for _ in 0..NEGATIVE_DRAWS {
        let subset = rand::seq::index::sample(rng, n, m).into_vec();
        if !graph.is_clique(&subset) {
            return Some(subset);
        }
    }
    None
}

/// Per-column power sums `p_k = sum_v F_vc^k` for `k = 1..=m`.
struct PowerSums {
    m: usize,
    sums: Vec<f64>,
}

impl PowerSums {
    fn new(f: &AffiliationMatrix, m: usize) -> Self {
        let mut ps = PowerSums {
            m,
            sums: vec![0.0; f.cols() * m],
        };
        for v in 0..f.rows() {
            ps.add_row(f.row(v), 1.0);
        }
        ps
    }

    fn add_row(&mut self, row: &[f64], sign: f64) {
        for (c, &x) in row.iter().enumerate() {
            let mut pow = 1.0;
            for k in 0..self.m {
                pow *= x;
                self.sums[c * self.m + k] += sign * pow;
            }
        }
    }

    /// Elementary symmetric polynomials `e_0..=e_m` of column `c`, through
    /// Newton's identities.
    fn elementary(&self, c: usize) -> Vec<f64> {
        let p = &self.sums[c * self.m..(c + 1) * self.m];
        let mut e = vec![0.0; self.m + 1];
        e[0] = 1.0;
        for k in 1..=self.m {
            let mut acc = 0.0;
            for i in 1..=k {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                acc += sign * e[k - i] * p[i - 1];
            }
            // rounding can leave tiny negatives when a column is nearly empty
            e[k] = (acc / k as f64).max(0.0);
        }
        e
    }
}

/// `log(exp(S) - 1)`, the clique term once the all-subsets sum is split off.
#[inline]
fn log_expm1(s: f64) -> f64 {
    let s = s.max(agm::AFFINITY_FLOOR);
    if s > 30.0 {
        s + (-(-s).exp()).ln_1p()
    } else {
        s.exp_m1().ln()
    }
}

/// Terms of the objective that involve row `u` when every other row is fixed.
/// Partner-row products are stored sparsely in one flat buffer, one segment
/// per clique containing `u`.
#[derive(Default)]
struct RowProblem {
    entries: Vec<(usize, f64)>,
    offsets: Vec<usize>,
    /// `e_{m-1}` of every column with `u` removed.
    penalty: Vec<f64>,
}

#[inline]
fn sparse_dot(p: &[(usize, f64)], x: &[f64]) -> f64 {
    p.iter().map(|&(c, a)| a * x[c]).sum()
}

impl RowProblem {
    fn rebuild(&mut self, f: &AffiliationMatrix, support: &[Vec<usize>], index: &CliqueIndex, u: VertexId) {
        self.entries.clear();
        self.offsets.clear();
        self.offsets.push(0);
        for &i in index.covering(u) {
            let clique = &index.cliques()[i];
            let sparsest = clique
                .iter()
                .copied()
                .filter(|&v| v != u)
                .min_by_key(|&v| support[v].len());
            if let Some(lead) = sparsest {
                for &c in &support[lead] {
                    let prod: f64 = clique.iter().filter(|&&v| v != u).map(|&v| f.get(v, c)).product();
                    if prod > 0.0 {
                        self.entries.push((c, prod));
                    }
                }
            }
            self.offsets.push(self.entries.len());
        }
    }

    fn partners(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.offsets.windows(2).map(|w| &self.entries[w[0]..w[1]])
    }

    fn value(&self, x: &[f64]) -> f64 {
        let cliques: f64 = self.partners().map(|p| log_expm1(sparse_dot(p, x))).sum();
        cliques - self.penalty.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self.penalty.iter().map(|p| -p).collect();
        for p in self.partners() {
            let s = sparse_dot(p, x);
            // d/dS log(e^S - 1) = 1 / (1 - e^-S)
            let slope = 1.0 / -(-s.max(agm::AFFINITY_FLOOR)).exp_m1();
            for &(c, a) in p {
                g[c] += slope * a;
            }
        }
        g
    }
}

fn support_of(row: &[f64]) -> Vec<usize> {
    (0..row.len()).filter(|&c| row[c] > 0.0).collect()
}

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 20;
/// An entry may lose at most half its value per visit. Without this the
/// first rows visited see a penalty inflated by everyone's initial noise,
/// drop to zero, and can never recover since their clique gradients are
/// products of each other.
const SHRINK_LIMIT: f64 = 0.5;
/// Entries below this may drop straight to zero, which keeps rows sparse.
const SNAP: f64 = 1e-3;

/// Exact objective `sum log p(clique) + sum log(1 - p(non-clique))` over all
/// `m`-subsets, via `sum_{non-cliques} S = sum_c e_m(F_c) - sum_{cliques} S`.
pub fn agm_objective(index: &CliqueIndex, f: &AffiliationMatrix) -> f64 {
    let m = index.clique_size();
    let ps = PowerSums::new(f, m);
    let all: f64 = (0..f.cols()).map(|c| ps.elementary(c)[m]).sum();
    let cliques: f64 = index
        .cliques()
        .iter()
        .map(|k| log_expm1(agm::affinity(&f.gather(k))))
        .sum();
    cliques - all
}

/// Block-coordinate projected gradient ascent on the clique affiliation
/// likelihood, starting from `init`.
///
/// Every epoch visits the vertices in a shuffled order and takes one
/// backtracking step on that vertex's row, starting from a step that moves
/// no entry by more than `lr`,
/// and never shrinking an entry above `1e-3` below half its value.
/// The non-clique term covers every `m`-subset that is not an observed
/// clique, so no negatives are sampled. The objective never decreases.
///
/// Returns the starting matrices untouched when `epochs == 0`; otherwise both
/// outputs are copies of the fitted matrix.
pub fn pretrain_agm<R: Rng + ?Sized>(
    graph: &Graph,
    index: &CliqueIndex,
    init: (AffiliationMatrix, AffiliationMatrix),
    cfg: PretrainConfig,
    rng: &mut R,
) -> Pretrained {
    if cfg.epochs == 0 {
        return Pretrained {
            theta_g: init.0,
            theta_d: init.1,
            history: Vec::new(),
        };
    }
    let mut f = init.0;
    f.project_all();
    let m = index.clique_size();
    let mut order: Vec<VertexId> = (0..graph.vertex_count()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let scale = index.len().max(1) as f64;
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        // rebuilt every epoch so incremental updates cannot drift
        let mut ps = PowerSums::new(&f, m);
        let mut support: Vec<Vec<usize>> = (0..f.rows()).map(|v| support_of(f.row(v))).collect();
        let mut problem = RowProblem::default();
        for &u in &order {
            problem.rebuild(&f, &support, index, u);
            ascend_row(&mut f, &mut ps, &mut problem, m, u, cfg.lr);
            support[u] = support_of(f.row(u));
        }
        history.push(agm_objective(index, &f) / scale);
    }
    Pretrained {
        theta_d: f.clone(),
        theta_g: f,
        history,
    }
}

/// One Armijo backtracking step on row `u`.
fn ascend_row(
    f: &mut AffiliationMatrix,
    ps: &mut PowerSums,
    problem: &mut RowProblem,
    m: usize,
    u: VertexId,
    lr: f64,
) {
    let old = f.row(u).to_vec();
    ps.add_row(&old, -1.0);
    problem.penalty = (0..f.cols()).map(|c| ps.elementary(c)[m - 1]).collect();
    let grad = problem.gradient(&old);
    let base = problem.value(&old);
    // first trial moves no entry by more than `lr`; near the affinity floor
    // the gradient is huge and a plain `lr * grad` step lands on the box bound
    let steepest = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let mut step = if steepest > 1.0 { lr / steepest } else { lr };
    let mut accepted = None;
    for _ in 0..MAX_BACKTRACKS {
        let cand: Vec<f64> = old
            .iter()
            .zip(&grad)
            .map(|(&x, g)| {
                let floor = if x < SNAP { 0.0 } else { x * SHRINK_LIMIT };
                (x + step * g).clamp(floor, agm::MAX_AFFILIATION)
            })
            .collect();
        let gain: f64 = grad.iter().zip(cand.iter().zip(&old)).map(|(g, (a, b))| g * (a - b)).sum();
        if gain <= 0.0 {
            break;
        }
        if problem.value(&cand) >= base + ARMIJO * gain {
            accepted = Some(cand);
            break;
        }
        step *= BACKTRACK;
    }
    if let Some(row) = accepted {
        f.row_mut(u).copy_from_slice(&row);
    }
    ps.add_row(f.row(u), 1.0);
}
