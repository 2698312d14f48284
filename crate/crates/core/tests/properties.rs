//! Invariants checked over randomized inputs.

use std::collections::{BTreeSet, HashMap};

use cliquegan::agm::{self, AffiliationMatrix};
use cliquegan::discriminator::{batch_objective, update_from_batch};
use cliquegan::eval::{auc, f1_score, overlapping_nmi, set_f1};
use cliquegan::generator::{relevance_distribution, VirtualVertex};
use cliquegan::rng::stream;
use cliquegan::{CliqueIndex, CommunityAssignment, CoverSource, Graph, MotifSample};
use proptest::prelude::*;
use rand::Rng;

fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = stream(seed, &[7]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Every `m`-subset checked pairwise.
fn exhaustive_cliques(g: &Graph, m: usize) -> BTreeSet<Vec<usize>> {
    fn rec(g: &Graph, m: usize, start: usize, cur: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if cur.len() == m {
            if g.is_clique(cur) {
                out.insert(cur.clone());
            }
            return;
        }
        for v in start..g.vertex_count() {
            cur.push(v);
            rec(g, m, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = BTreeSet::new();
    rec(g, m, 0, &mut Vec::new(), &mut out);
    out
}

fn random_matrix(rows: usize, cols: usize, zero_rate: f64, seed: u64) -> AffiliationMatrix {
    let mut rng = stream(seed, &[8]);
    let data = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(zero_rate) { 0.0 } else { rng.gen_range(0.0..2.0) })
                .collect()
        })
        .collect();
    AffiliationMatrix::from_rows(data).unwrap()
}

fn random_cover(n: usize, k: usize, seed: u64) -> CommunityAssignment {
    let mut rng = stream(seed, &[9]);
    let communities = (0..k)
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.1)).collect())
        .collect();
    CommunityAssignment::new(communities, CoverSource::Detected)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn clique_enumeration_matches_exhaustive(n in 2usize..=20, p in 0.1f64..0.9, m in 2usize..=5, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let idx = CliqueIndex::enumerate(&g, m).unwrap();
        let found: BTreeSet<Vec<usize>> = idx.cliques().iter().cloned().collect();
        prop_assert_eq!(found.len(), idx.len(), "duplicates in enumeration");
        prop_assert_eq!(found, exhaustive_cliques(&g, m));
        for v in 0..n {
            for &i in idx.covering(v) {
                prop_assert!(idx.cliques()[i].contains(&v));
            }
        }
    }

    #[test]
    fn clique_prob_identity_and_range(m in 1usize..=5, c in 1usize..=8, seed in any::<u64>()) {
        let theta = random_matrix(m, c, 0.2, seed);
        let rows: Vec<usize> = (0..m).collect();
        let view = theta.gather(&rows);
        let p = agm::clique_prob(&view);
        let complement: f64 = (0..c).map(|k| 1.0 - agm::clique_prob_per_community(&view, k)).product();
        prop_assert!((p - (1.0 - complement)).abs() <= 1e-12);
        prop_assert!((0.0..1.0 + 1e-15).contains(&p));
    }

    #[test]
    fn clique_prob_monotone_in_entries(m in 2usize..=5, c in 1usize..=6, seed in any::<u64>(), bump in 0.01f64..1.0) {
        let theta = random_matrix(m, c, 0.0, seed);
        let rows: Vec<usize> = (0..m).collect();
        let before = agm::clique_prob(&theta.gather(&rows));
        let mut raised = theta.clone();
        raised.set(0, 0, theta.get(0, 0) + bump);
        prop_assert!(agm::clique_prob(&raised.gather(&rows)) >= before);
    }

    #[test]
    fn relevance_sums_to_one(n in 3usize..=15, seed in any::<u64>(), members in 1usize..=3) {
        let g = random_graph(n, 0.4, seed);
        let theta = random_matrix(n, 4, 0.4, seed);
        let chosen: Vec<usize> = (0..members.min(n)).collect();
        let root = VirtualVertex::new(&g, &theta, &chosen);
        let mut positions = vec![None];
        positions.extend((0..n).map(Some));
        for pos in positions {
            if let Some(d) = relevance_distribution(&g, &theta, &root, pos) {
                let total: f64 = d.probabilities.iter().sum();
                prop_assert!((total - 1.0).abs() <= 1e-9);
                prop_assert!(d.candidates.iter().all(|u| !chosen.contains(u)));
            }
        }
    }

    #[test]
    fn f1_is_symmetric_and_bounded(seed in any::<u64>(), k1 in 1usize..6, k2 in 1usize..6) {
        let a = random_cover(40, k1, seed);
        let b = random_cover(40, k2, seed.wrapping_add(1));
        prop_assume!(!a.is_empty() && !b.is_empty());
        let ab = f1_score(&a, &b).unwrap();
        let ba = f1_score(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((f1_score(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn set_f1_symmetric(a in prop::collection::btree_set(0usize..30, 1..10), b in prop::collection::btree_set(0usize..30, 1..10)) {
        let a: Vec<usize> = a.into_iter().collect();
        let b: Vec<usize> = b.into_iter().collect();
        prop_assert!((set_f1(&a, &b) - set_f1(&b, &a)).abs() < 1e-15);
    }

    #[test]
    fn nmi_bounded_and_symmetric(seed in any::<u64>()) {
        let a = random_cover(60, 5, seed);
        let b = random_cover(60, 4, seed ^ 0xabc);
        prop_assume!(!a.is_empty() && !b.is_empty());
        let x = overlapping_nmi(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert!((x - overlapping_nmi(&b, &a).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn discriminator_ascent_increases_batch_objective() {
    let g = random_graph(30, 0.3, 3);
    let idx = CliqueIndex::enumerate(&g, 3).unwrap();
    let mut improved = 0;
    for trial in 0..50u64 {
        let mut rng = stream(trial, &[10]);
        let mut theta = random_matrix(30, 4, 0.3, trial + 100);
        let positives: Vec<MotifSample> = (0..5)
            .filter_map(|_| idx.sample_covering(rng.gen_range(0..30), &mut rng))
            .collect();
        let negatives: Vec<MotifSample> = (0..5)
            .map(|_| MotifSample::observed(rand::seq::index::sample(&mut rng, 30, 3).into_vec()))
            .collect();
        let before = batch_objective(&theta, &positives, &negatives);
        update_from_batch(&mut theta, &positives, &negatives, 1e-4).unwrap();
        assert!(theta.is_valid());
        if batch_objective(&theta, &positives, &negatives) >= before {
            improved += 1;
        }
    }
    assert_eq!(improved, 50);
}

#[test]
fn sample_covering_is_uniform() {
    // vertex 0 lies in 6 triangles of K5
    let mut e = Vec::new();
    for u in 0..5 {
        for v in u + 1..5 {
            e.push((u, v));
        }
    }
    let g = Graph::from_edges(5, &e).unwrap();
    let idx = CliqueIndex::enumerate(&g, 3).unwrap();
    let mut rng = stream(11, &[]);
    let draws = 60_000;
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..draws {
        let mut s = idx.sample_covering(0, &mut rng).unwrap().vertices;
        assert_eq!(s[0], 0);
        s.sort_unstable();
        *counts.entry(s).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let expected = draws as f64 / 6.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 5 degrees of freedom, 99.9% quantile 20.5
    assert!(chi2 < 20.5, "chi2 {chi2}");
}

#[test]
fn first_hop_frequencies_match_relevance() {
    use cliquegan::generator::{walk, WalkLimits};
    let g = random_graph(12, 0.5, 21);
    let theta = random_matrix(12, 3, 0.0, 22);
    let root_vertex = (0..12).max_by_key(|&v| g.degree(v)).unwrap();
    let root = VirtualVertex::new(&g, &theta, &[root_vertex]);
    let dist = relevance_distribution(&g, &theta, &root, None).unwrap();
    let mut rng = stream(23, &[]);
    let draws = 40_000;
    let mut counts = vec![0usize; dist.candidates.len()];
    for _ in 0..draws {
        let rec = walk(&g, &theta, &root, WalkLimits { max_walk: 50, max_restarts: 5 }, &mut rng).unwrap();
        let first = dist.candidates.iter().position(|&c| c == rec.path[0]).unwrap();
        counts[first] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&dist.probabilities)
        .map(|(&c, &p)| (c as f64 - p * draws as f64).powi(2) / (p * draws as f64))
        .sum();
    let dof = counts.len() - 1;
    // generous bound: mean dof, sd sqrt(2 dof)
    assert!(chi2 < dof as f64 + 6.0 * (2.0 * dof as f64).sqrt() + 10.0, "chi2 {chi2} dof {dof}");
}

#[test]
fn random_covers_have_low_nmi() {
    let n = 2000;
    let mut hits = Vec::new();
    for seed in 0..5 {
        let mut rng = stream(seed, &[12]);
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
            let communities: Vec<Vec<usize>> = (0..20)
                .map(|_| {
                    let size = rng.gen_range(50..150);
                    rand::seq::index::sample(rng, n, size).into_vec()
                })
                .collect();
            CommunityAssignment::new(communities, CoverSource::Detected)
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        hits.push(overlapping_nmi(&a, &b).unwrap());
    }
    assert!(hits.iter().all(|&x| x < 0.05), "{hits:?}");
}

#[test]
fn random_scores_have_auc_near_half() {
    let mut rng = stream(13, &[]);
    let pos: Vec<f64> = (0..5000).map(|_| rng.gen()).collect();
    let neg: Vec<f64> = (0..5000).map(|_| rng.gen()).collect();
    let a = auc(&pos, &neg).unwrap();
    assert!((a - 0.5).abs() < 0.03, "{a}");
}
