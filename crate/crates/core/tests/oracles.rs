//! Library results against small independent computations: dense linear
//! algebra, brute-force enumeration and textbook formulas.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use linkshroud::cluster::{cluster_static, modularity, Clustering};
use linkshroud::markov::{matrix_power, random_walk, transition_matrix};
use linkshroud::perturb::walk_kernel;
use linkshroud::rng::stream;
use linkshroud::synth::{gnp, random_connected};
use linkshroud::utility::{mixing_time, pagerank, slem, structural_metrics, MixingTime};
use linkshroud::{Graph, VertexId};

fn complete(n: u64) -> Graph {
    Graph::from_edges((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
}

fn adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut a = vec![vec![0.0; n]; n];
    for (x, y) in g.edges() {
        a[x as usize][y as usize] = 1.0;
        a[y as usize][x as usize] = 1.0;
    }
    a
}

fn dense_walk(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let a = adjacency(g);
    (0..n)
        .map(|i| {
            let d: f64 = a[i].iter().sum();
            if d == 0.0 {
                (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
            } else {
                a[i].iter().map(|x| x / d).collect()
            }
        })
        .collect()
}

fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn dense_power(p: &[Vec<f64>], l: usize) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut out: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..l {
        out = mul(&out, p);
    }
    out
}

/// SLEM from a full eigendecomposition of `D^{-1/2} A D^{-1/2}`.
fn eigen_slem(g: &Graph) -> f64 {
    let n = g.vertex_count();
    let a = adjacency(g);
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| a[i][j] / (d[i] * d[j]).sqrt());
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev[1].abs().max(ev[n - 1].abs())
}

#[test]
fn slem_matches_eigendecomposition() {
    assert!((slem(&complete(3)).unwrap() - 0.5).abs() < 1e-6);
    for n in 4..9 {
        assert!((slem(&complete(n)).unwrap() - 1.0 / (n as f64 - 1.0)).abs() < 1e-6, "K{n}");
    }
    for seed in 0..15 {
        let g = random_connected(18, 0.2, &mut stream(seed, &[]));
        let ours = slem(&g).unwrap();
        let oracle = eigen_slem(&g);
        assert!((ours - oracle).abs() < 1e-5, "seed {seed}: {ours} vs {oracle}");
    }
}

/// Smallest `r` whose `P^r` rows are all within `eps` of stationarity.
fn scan_mixing(g: &Graph, eps: f64) -> usize {
    let p = dense_walk(g);
    let two_m: f64 = adjacency(g).iter().flatten().sum();
    let pi: Vec<f64> = adjacency(g).iter().map(|r| r.iter().sum::<f64>() / two_m).collect();
    let mut pr = p.clone();
    for r in 1..10_000 {
        let worst =
            pr.iter().map(|row| 0.5 * row.iter().zip(&pi).map(|(x, y)| (x - y).abs()).sum::<f64>()).fold(0.0, f64::max);
        if worst < eps {
            return r;
        }
        pr = mul(&pr, &p);
    }
    unreachable!()
}

#[test]
fn mixing_time_matches_power_scan() {
    assert_eq!(mixing_time(&complete(3), 0.01, false).unwrap(), MixingTime::Converged(scan_mixing(&complete(3), 0.01)));
    // K3 rows are 2/3 from uniform after one step, then halve each step
    assert_eq!(scan_mixing(&complete(3), 0.01), 7);
    for seed in 0..10 {
        let g = random_connected(12, 0.3, &mut stream(seed, &[1]));
        if g.is_bipartite() {
            continue;
        }
        for eps in [0.01, 0.05, 0.2] {
            assert_eq!(
                mixing_time(&g, eps, false).unwrap().steps(),
                Some(scan_mixing(&g, eps)),
                "seed {seed} eps {eps}"
            );
        }
    }
    let square = Graph::from_edges([(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    assert_eq!(mixing_time(&square, 0.05, false).unwrap(), MixingTime::NotConverged);
    assert!(mixing_time(&square, 0.05, true).unwrap().steps().is_some());
}

#[test]
fn matrix_power_matches_dense_products() {
    let mut rng = stream(3, &[]);
    for _ in 0..20 {
        let n = rng.random_range(2..16);
        let g = gnp(n, 0.3, 0, &mut rng);
        let dense = dense_walk(&g);
        for l in 1..6 {
            let ours = matrix_power(&transition_matrix(&g), l).unwrap().to_dense();
            let oracle = dense_power(&dense, l);
            for (a, b) in ours.iter().flatten().zip(oracle.iter().flatten()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn random_walk_endpoints_follow_matrix_power() {
    let g = random_connected(10, 0.25, &mut stream(4, &[]));
    let row = &matrix_power(&transition_matrix(&g), 3).unwrap().to_dense()[0];
    let mut counts = vec![0usize; g.vertex_count()];
    let mut rng = stream(4, &[1]);
    let trials = 10_000;
    for _ in 0..trials {
        counts[g.index_of(random_walk(&g, 0, 3, &mut rng).unwrap()).unwrap()] += 1;
    }
    for (c, &p) in counts.iter().zip(row) {
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((*c as f64 / trials as f64 - p).abs() <= 3.0 * sd + 1e-12);
    }
}

fn brute_modularity(g: &Graph, labels: &[u32]) -> f64 {
    let a = adjacency(g);
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = d.iter().sum();
    let mut q = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if labels[i] == labels[j] {
                q += a[i][j] - d[i] * d[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `0..n` as restricted-growth label strings.
fn partitions(n: usize) -> Vec<Vec<u32>> {
    fn grow(prefix: &mut Vec<u32>, n: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let top = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for l in 0..=top {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

#[test]
fn modularity_matches_definition() {
    let mut rng = stream(5, &[]);
    for _ in 0..10 {
        let g = gnp(12, 0.3, 0, &mut rng);
        if g.edge_count() == 0 {
            continue;
        }
        let labels: Vec<u32> = (0..12).map(|_| rng.random_range(0..3)).collect();
        let c = Clustering::from_labels(g.ids().to_vec(), &labels).unwrap();
        assert!((modularity(&g, &c).unwrap() - brute_modularity(&g, &labels)).abs() < 1e-12);
    }
}

#[test]
fn greedy_clustering_finds_the_best_split_of_two_cliques() {
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((3, 4));
    let g = Graph::from_edges(edges).unwrap();
    let best = partitions(8).iter().map(|l| brute_modularity(&g, l)).fold(f64::NEG_INFINITY, f64::max);
    let (c, _) = cluster_static(&g);
    assert!((modularity(&g, &c).unwrap() - best).abs() < 1e-12);
    assert_eq!(c.community_count(), 2);
    assert_eq!(c.community_of(0), c.community_of(3));
    assert_ne!(c.community_of(3), c.community_of(4));
}

#[test]
fn structural_metrics_match_enumeration() {
    for seed in 0..5 {
        let g = gnp(20, 0.25, 0, &mut stream(seed, &[6]));
        let a = adjacency(&g);
        let n = a.len();
        let (mut closed, mut triples) = (0.0, 0.0);
        for v in 0..n {
            for x in 0..n {
                for y in 0..n {
                    if x != y && a[v][x] > 0.0 && a[v][y] > 0.0 {
                        triples += 1.0;
                        closed += a[x][y];
                    }
                }
            }
        }
        // degree pairs at both ends of every edge
        let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
        let pairs: Vec<(f64, f64)> =
            (0..n).flat_map(|i| (0..n).filter(|&j| a[i][j] > 0.0).map(|j| (d[i], d[j])).collect::<Vec<_>>()).collect();
        let k = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
        let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - mx)).sum::<f64>() / k;
        let var = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / k;
        let s = structural_metrics(&g);
        assert!((s.clustering_coefficient - closed / triples).abs() < 1e-12);
        assert!((s.assortativity - cov / var).abs() < 1e-9);
    }
    assert_eq!(structural_metrics(&complete(3)).clustering_coefficient, 1.0);
    let star = Graph::from_edges([(0, 1), (0, 2), (0, 3)]).unwrap();
    assert_eq!(structural_metrics(&star).clustering_coefficient, 0.0);
    let cycle = Graph::from_edges([(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    assert!(structural_metrics(&cycle).assortativity_degenerate);
}

#[test]
fn pagerank_matches_linear_solve() {
    let g = gnp(15, 0.2, 0, &mut stream(7, &[]));
    let n = g.vertex_count();
    let d = 0.85;
    let p = dense_walk(&g);
    // dangling rows jump uniformly
    let deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let step = if deg[j] == 0 { 1.0 / n as f64 } else { p[j][i] };
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - d * step
    });
    let rhs = DMatrix::from_element(n, 1, (1.0 - d) / n as f64);
    let x = m.lu().solve(&rhs).unwrap();
    let total: f64 = x.iter().sum();
    for (ours, exact) in pagerank(&g, d, 1e-13).unwrap().iter().zip(x.iter()) {
        assert!((ours - exact / total).abs() < 1e-9);
    }
}

#[test]
fn two_step_kernel_on_a_path() {
    // Path 0-1-2-3. Each edge is crossed in a random direction and then one
    // more step is taken, avoiding a return to the walk's origin when
    // possible.
    let g = Graph::from_edges([(0, 1), (1, 2), (2, 3)]).unwrap();
    let mut pairs = walk_kernel(&g, 2).pairs();
    pairs.sort_by_key(|a| (a.0, a.1));
    let got: Vec<(VertexId, VertexId)> = pairs.iter().map(|&(u, v, _)| (u, v)).collect();
    assert_eq!(got, vec![(0, 2), (1, 3)]);
    for (_, _, p) in pairs {
        assert!(p > 0.0 && p <= 1.0);
    }
}

#[test]
fn frozen_reference_values() {
    // Values recorded from a dense linear solve.
    let petersen = Graph::from_edges([
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 0),
        (0, 5),
        (1, 6),
        (2, 7),
        (3, 8),
        (4, 9),
        (5, 7),
        (7, 9),
        (9, 6),
        (6, 8),
        (8, 5),
    ])
    .unwrap();
    // eigenvalues of the Petersen adjacency are 3, 1, -2
    assert!((slem(&petersen).unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert!((eigen_slem(&petersen) - 2.0 / 3.0).abs() < 1e-12);
    let lollipop = Graph::from_edges([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap();
    let pr = pagerank(&lollipop, 0.85, 1e-13).unwrap();
    for (a, b) in pr.iter().zip(LOLLIPOP_PAGERANK) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

const LOLLIPOP_PAGERANK: [f64; 5] =
    [0.19182178689838988, 0.1918217868983899, 0.2834030381173207, 0.21259886883221008, 0.12035451925368928];
