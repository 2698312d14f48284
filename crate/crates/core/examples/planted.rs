//! Recovers a planted overlapping cover and compares the initialization with
//! full training.
//!
//! `cargo run --release -p cliquegan-core --example planted -- [A] [iters] [seed]`

use cliquegan::agm::{assign_communities, compute_threshold};
use cliquegan::eval::{f1_score, overlapping_nmi};
use cliquegan::synth::{generate, PlantedSpec};
use cliquegan::trainer::{initialize, train_from};
use cliquegan::{CliqueIndex, CommunityCount, TrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).map_or(d, String::as_str).to_string();
    let a: f64 = arg(0, "3").parse().expect("A is a number");
    let iters: usize = arg(1, "5").parse().expect("iters is a count");
    let seed: u64 = arg(2, "0").parse().expect("seed is an integer");

    let spec = PlantedSpec {
        vertices: 1000,
        communities: 200,
        mean_memberships: a,
        heavy_tail: false,
        p_in: 0.95,
        p_out: 0.002,
        seed: 1,
    };
    let (g, truth) = generate(&spec).expect("valid planted spec");
    println!("V={} E={} C={} A={:.2}", g.vertex_count(), g.edge_count(), truth.len(), truth.mean_memberships(g.vertex_count()));

    let cfg = TrainConfig {
        communities: CommunityCount::Fixed(truth.len()),
        max_iters: iters,
        seed,
        ..TrainConfig::default()
    };
    let index = CliqueIndex::enumerate(&g, cfg.clique_size).expect("clique size in range");
    let threshold = compute_threshold(&g).expect("graph has edges");
    let init = initialize(&g, &index, truth.len(), &cfg);
    let pre = assign_communities(&init.theta_g, &init.theta_d, threshold).unwrap();
    let state = train_from(&g, &index, &cfg, init).expect("training runs");
    let full = assign_communities(&state.theta_g, &state.theta_d, threshold).unwrap();
    for (name, cover) in [("pretrain", &pre), ("full", &full)] {
        println!(
            "{name:>8}: F1 {:.4} NMI {:.4} communities {}",
            f1_score(&truth, cover).unwrap_or(0.0),
            overlapping_nmi(&truth, cover).unwrap_or(0.0),
            cover.len()
        );
    }
}
