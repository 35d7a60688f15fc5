use proptest::prelude::*;
use rand::Rng;

use linkshroud::apps::attack_probability;
use linkshroud::cluster::{classify_communities, cluster_static, modularity, recluster_dynamic, MergeKind};
use linkshroud::markov::{matrix_power, transition_matrix, tv_distance};
use linkshroud::perturb::{inter_edge_groups, linkmirage_trace};
use linkshroud::privacy::{estimation_error_bound_check_matrices, indistinguishability};
use linkshroud::rng::stream;
use linkshroud::synth::{gnp, overlap_sequence, PlantedPartition};
use linkshroud::utility::{pagerank, slem, utility_distance};
use linkshroud::{linkmirage_sequence, Graph, PerturbParams, TemporalGraphSequence};

/// `G(n, p)` drawn from a seeded stream so cases shrink on `(n, p, seed)`.
fn graph() -> impl Strategy<Value = Graph> {
    (2usize..=16, 0.05f64..0.8, any::<u64>()).prop_map(|(n, p, seed)| gnp(n, p, 0, &mut stream(seed, &[])))
}

fn graph_pair() -> impl Strategy<Value = (Graph, Graph)> {
    (2usize..=16, 0.05f64..0.8, 0.0f64..0.5, any::<u64>()).prop_map(|(n, p, q, seed)| {
        let mut rng = stream(seed, &[]);
        let g = gnp(n, p, 0, &mut rng);
        (g.clone(), flip(&g, q, &mut rng))
    })
}

fn flip<R: Rng>(g: &Graph, q: f64, rng: &mut R) -> Graph {
    let ids = g.ids().to_vec();
    let mut edges = Vec::new();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            if g.has_edge(a, b) != (rng.random::<f64>() < q) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(ids, edges).unwrap()
}

fn small_sequence() -> impl Strategy<Value = TemporalGraphSequence> {
    (2usize..=4, 4usize..=10, 2usize..=4, any::<u64>()).prop_map(|(blocks, size, len, seed)| {
        let model = PlantedPartition::new(blocks, size, 0.5, 0.05);
        overlap_sequence(&model, len, 0.8, &mut stream(seed, &[]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rows_are_stochastic(g in graph()) {
        for row in transition_matrix(&g).rows() {
            let s: f64 = row.iter().map(|e| e.1).sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn powers_compose(g in graph(), a in 1usize..=4, b in 1usize..=4) {
        let p = transition_matrix(&g);
        let whole = matrix_power(&p, a + b).unwrap().to_dense();
        let parts = matrix_power(&p, a).unwrap().multiply(&matrix_power(&p, b).unwrap()).unwrap().to_dense();
        for (x, y) in whole.iter().flatten().zip(parts.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn tv_is_a_metric((g, h) in graph_pair(), q in 0.0f64..0.5, seed in any::<u64>()) {
        let third = flip(&g, q, &mut stream(seed, &[]));
        let (a, b, c) = (transition_matrix(&g), transition_matrix(&h), transition_matrix(&third));
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!(tv_distance(&a, &a).unwrap() < 1e-15);
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn walk_distance_grows_at_most_linearly((g, h) in graph_pair(), l in 1usize..=5) {
        let (p, q) = (transition_matrix(&g), transition_matrix(&h));
        let lhs = tv_distance(&matrix_power(&p, l).unwrap(), &matrix_power(&q, l).unwrap()).unwrap();
        prop_assert!(lhs <= l as f64 * tv_distance(&p, &q).unwrap() + 1e-9);
    }

    #[test]
    fn estimate_error_telescopes((g, h) in graph_pair(), k in 1usize..=5) {
        let p_hat = transition_matrix(&h);
        let p_prime = matrix_power(&p_hat, k).unwrap();
        let check = estimation_error_bound_check_matrices(&transition_matrix(&g), &p_prime, &p_hat, k).unwrap();
        prop_assert!(check.holds, "{check:?}");
    }

    #[test]
    fn history_replays_to_the_clustering(g in graph()) {
        let (c, h) = cluster_static(&g);
        prop_assert_eq!(h.replay().unwrap(), c);
        for ev in &h.events {
            prop_assert_eq!(ev.kind, MergeKind::Greedy);
            prop_assert!(ev.delta > 0.0);
        }
    }

    #[test]
    fn reclustering_without_changes_is_identity(g in graph()) {
        let (c, h) = cluster_static(&g);
        let (c2, h2) = recluster_dynamic(&g, (&c, &h), &[], 2).unwrap();
        prop_assert_eq!(c2, c);
        prop_assert_eq!(h2, h);
    }

    #[test]
    fn reclustering_never_loses_to_the_frozen_partition(
        n in 2usize..=8, p in 0.1f64..0.8, q in 0.0f64..0.4, m in 0usize..=3, seed in any::<u64>(),
    ) {
        let mut rng = stream(seed, &[]);
        let g0 = gnp(n, p, 0, &mut rng);
        let g1 = flip(&g0, q, &mut rng);
        prop_assume!(g1.edge_count() > 0);
        let (c0, h0) = cluster_static(&g0);
        let changed: Vec<_> = g0.raw_edge_set().symmetric_difference(&g1.raw_edge_set()).copied().collect();
        let (c1, h1) = recluster_dynamic(&g1, (&c0, &h0), &changed, m).unwrap();
        prop_assert!(modularity(&g1, &c1).unwrap() >= modularity(&g1, &c0).unwrap() - 1e-12);
        prop_assert_eq!(h1.replay().unwrap(), c1.clone());
        let diff = classify_communities(Some(&c0), &c1, 0.8).unwrap();
        prop_assert_eq!(diff.unchanged.len() + diff.changed.len(), c1.community_count());
    }

    #[test]
    fn selective_perturbation_invariants(seq in small_sequence(), k in 1usize..=4, seed in any::<u64>()) {
        let params = PerturbParams { k, seed, ..Default::default() };
        let trace = linkmirage_trace(&seq, &params).unwrap();
        prop_assert_eq!(linkmirage_sequence(&seq, &params).unwrap(), trace.iter().map(|o| o.graph.clone()).collect::<Vec<_>>());
        for (t, out) in trace.iter().enumerate() {
            prop_assert_eq!(out.graph.ids(), seq[t].ids());
            let c = &out.record.clustering;
            let pairs = inter_edge_groups(&seq[t], c).unwrap();
            for (a, b) in out.graph.raw_edges() {
                prop_assert!(a != b);
                let (ca, cb) = (c.community_of(a).unwrap(), c.community_of(b).unwrap());
                if ca != cb {
                    prop_assert!(pairs.contains_key(&(ca.min(cb), ca.max(cb))), "edge ({a},{b}) joins unrelated communities");
                }
            }
            if t > 0 {
                // Reused edges are the previous ones among current members;
                // with the same members that is the whole previous set.
                let before = &trace[t - 1].record;
                for &(prev, cur) in &out.diff.unchanged {
                    let inside = |&&(a, b): &&(u64, u64)| c.community_of(a) == Some(cur) && c.community_of(b) == Some(cur);
                    let kept: Vec<_> = before.community_edges(prev).unwrap().iter().filter(inside).copied().collect();
                    prop_assert_eq!(out.record.community_edges(cur).unwrap(), &kept[..]);
                    if before.clustering.members_raw(prev) == c.members_raw(cur) {
                        prop_assert_eq!(out.record.community_edges(cur).unwrap(), before.community_edges(prev).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn utility_distance_properties(seq in small_sequence(), l in 1usize..=4, seed in any::<u64>()) {
        let same = utility_distance(&seq, seq.snapshots(), l).unwrap();
        prop_assert_eq!(same.aggregate, 0.0);
        let perturbed = linkmirage_sequence(&seq, &PerturbParams { k: 2, seed, ..Default::default() }).unwrap();
        let one = utility_distance(&seq, &perturbed, 1).unwrap().aggregate;
        prop_assert!(utility_distance(&seq, &perturbed, l).unwrap().aggregate <= l as f64 * one + 1e-9);
    }

    #[test]
    fn pagerank_is_a_distribution(g in graph(), d in 0.5f64..0.95) {
        let pr = pagerank(&g, d, 1e-12).unwrap();
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(pr.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn slem_in_unit_interval(g in graph()) {
        prop_assume!(g.edge_count() > 0 && g.is_connected() && g.vertex_count() > 2);
        let s = slem(&g).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        if !g.is_bipartite() {
            prop_assert!(s < 1.0);
        }
    }

    #[test]
    fn entropy_symmetric_and_peaked(p in 0.0f64..=1.0) {
        prop_assert!((indistinguishability(p) - indistinguishability(1.0 - p)).abs() < 1e-12);
        prop_assert!(indistinguishability(p) <= indistinguishability(0.5) + 1e-15);
        let (a, b) = ((p * 0.5).max(0.0), (p * 0.5 + 0.5).min(1.0));
        let mid = indistinguishability((a + b) / 2.0);
        prop_assert!(mid + 1e-12 >= (indistinguishability(a) + indistinguishability(b)) / 2.0);
    }

    #[test]
    fn attack_probability_monotone(seq in small_sequence(), f in 0.0f64..=1.0, seed in any::<u64>()) {
        let perturbed = linkmirage_sequence(&seq, &PerturbParams { k: 2, seed, ..Default::default() }).unwrap();
        let v = seq[0].ids()[0];
        let series = attack_probability(&perturbed, v, f).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for (t, &x) in series.iter().enumerate() {
            let g = &perturbed[t];
            seen.extend(g.neighbors(g.index_of(v).unwrap()).iter().map(|&j| g.id(j as usize)));
            prop_assert_eq!(x, 1.0 - (1.0 - f).powi(seen.len() as i32));
            if t > 0 {
                prop_assert!(x >= series[t - 1]);
            }
        }
    }
}

#[test]
fn product_kernel_sampling_matches_its_probabilities() {
    let model = PlantedPartition::new(2, 15, 0.4, 0.15);
    let g = model.sample(&mut stream(2, &[]));
    let (c, _) = cluster_static(&g);
    let groups = inter_edge_groups(&g, &c).unwrap();
    let (pair, cross) = groups.iter().next().expect("fixture has cross edges");
    let kernel = linkshroud::perturb::inter_kernel(&c, *pair, cross, Default::default());
    let pairs = kernel.pairs();
    let trials = 20_000;
    let mut hits = std::collections::HashMap::new();
    let mut rng = stream(2, &[1]);
    for _ in 0..trials {
        for e in kernel.sample(&mut rng) {
            *hits.entry(e).or_insert(0usize) += 1;
        }
    }
    assert!(hits.len() <= pairs.len());
    for (u, v, p) in pairs {
        let freq = *hits.get(&(u, v)).unwrap_or(&0) as f64 / trials as f64;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sd + 1e-12, "({u},{v}) {freq} vs {p}");
    }
}
