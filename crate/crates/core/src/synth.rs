//! Synthetic graphs and sequences for experiments and tests.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Graph, TemporalGraphSequence, VertexId};
use crate::perturb::Edge;

/// Stochastic block model with equal in/out probabilities across blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPartition {
    pub sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
}

impl PlantedPartition {
    pub fn new(blocks: usize, size: usize, p_in: f64, p_out: f64) -> Self {
        PlantedPartition { sizes: vec![size; blocks], p_in, p_out }
    }

    pub fn vertex_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Block label of every vertex `0..n`.
    pub fn labels(&self) -> Vec<u32> {
        self.sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b as u32, s)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Graph {
        let labels = self.labels();
        let n = labels.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if labels[i] == labels[j] { self.p_in } else { self.p_out };
                if rng.random::<f64>() < p {
                    edges.push((i as VertexId, j as VertexId));
                }
            }
        }
        Graph::new(0..n as VertexId, edges).expect("generated edges are simple")
    }
}

/// Erdős–Rényi `G(n, p)` over ids `offset..offset + n`.
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, offset: VertexId, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n as VertexId {
        for j in i + 1..n as VertexId {
            if rng.random::<f64>() < p {
                edges.push((offset + i, offset + j));
            }
        }
    }
    Graph::new(offset..offset + n as VertexId, edges).expect("generated edges are simple")
}

/// Random recursive tree plus independent extra edges with probability `p`;
/// always connected.
pub fn random_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges: HashSet<Edge> = HashSet::new();
    for i in 1..n as VertexId {
        let j = rng.random_range(0..i);
        edges.insert((j, i));
    }
    for i in 0..n as VertexId {
        for j in i + 1..n as VertexId {
            if rng.random::<f64>() < p {
                edges.insert((i, j));
            }
        }
    }
    let mut edges: Vec<Edge> = edges.into_iter().collect();
    edges.sort_unstable();
    Graph::new(0..n as VertexId, edges).expect("generated edges are simple")
}

/// Sequence whose consecutive snapshots share about `overlap` of their
/// edges. Each step picks blocks in random order until their internal edges
/// cover the churn budget, then swaps that many internal edges of those
/// blocks for new internal pairs, so change stays local to a few
/// communities.
pub fn overlap_sequence<R: Rng + ?Sized>(
    model: &PlantedPartition,
    snapshots: usize,
    overlap: f64,
    rng: &mut R,
) -> TemporalGraphSequence {
    assert!(snapshots >= 1);
    let labels = model.labels();
    let n = labels.len();
    let mut starts = vec![0usize];
    for s in &model.sizes {
        starts.push(starts.last().unwrap() + s);
    }
    let mut cur = model.sample(rng);
    let mut out = vec![cur.clone()];
    for _ in 1..snapshots {
        let edges = cur.raw_edges();
        let budget = ((1.0 - overlap) * edges.len() as f64).round() as usize;
        let mut blocks: Vec<u32> = (0..model.sizes.len() as u32).collect();
        blocks.shuffle(rng);
        let mut chosen = HashSet::new();
        let mut pool: Vec<Edge> = Vec::new();
        for b in blocks {
            if pool.len() >= budget {
                break;
            }
            chosen.insert(b);
            pool.extend(edges.iter().filter(|&&(u, v)| labels[u as usize] == b && labels[v as usize] == b));
        }
        let r = budget.min(pool.len());
        pool.shuffle(rng);
        let removed: HashSet<Edge> = pool[..r].iter().copied().collect();
        let existing: HashSet<Edge> = edges.iter().copied().collect();
        let mut next: HashSet<Edge> = existing.difference(&removed).copied().collect();
        let chosen: Vec<u32> = {
            let mut c: Vec<u32> = chosen.into_iter().collect();
            c.sort_unstable();
            c
        };
        let capacity: usize = chosen.iter().map(|&b| model.sizes[b as usize] * (model.sizes[b as usize] - 1) / 2).sum();
        let mut added = 0;
        let mut attempts = 0;
        while added < r && attempts < 100 * (r + 1) && next.len() < edges.len() - r + capacity {
            attempts += 1;
            let b = chosen[rng.random_range(0..chosen.len())] as usize;
            let (lo, hi) = (starts[b], starts[b + 1]);
            if hi - lo < 2 {
                continue;
            }
            let i = rng.random_range(lo..hi) as VertexId;
            let j = rng.random_range(lo..hi) as VertexId;
            if i == j {
                continue;
            }
            let e = (i.min(j), i.max(j));
            if existing.contains(&e) || next.contains(&e) {
                continue;
            }
            next.insert(e);
            added += 1;
        }
        let mut next: Vec<Edge> = next.into_iter().collect();
        next.sort_unstable();
        cur = Graph::new(0..n as VertexId, next).expect("generated edges are simple");
        out.push(cur.clone());
    }
    TemporalGraphSequence::new(out).expect("non-empty")
}
