use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::{walk_kernel, Edge, PairKernel};
use crate::error::{Error, Result};
use crate::graph::{Graph, TemporalGraphSequence};
use crate::rng::{stream, TAG_HAY, TAG_STATIC};

/// Replacement probabilities of whole-graph walk perturbation.
pub fn static_plan(g: &Graph, k: usize) -> Result<PairKernel> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    Ok(walk_kernel(g, k))
}

/// Replaces the edges of `g` with walk-sampled fake edges; the vertex set is
/// kept.
pub fn perturb_static<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Result<Graph> {
    let edges = static_plan(g, k)?.sample(rng);
    Graph::new(g.ids().iter().copied(), edges)
}

/// Perturbs every snapshot independently with its own stream.
pub fn perturb_static_baseline_sequence(seq: &TemporalGraphSequence, k: usize, seed: u64) -> Result<Vec<Graph>> {
    seq.snapshots()
        .par_iter()
        .enumerate()
        .map(|(t, g)| perturb_static(g, k, &mut stream(seed, &[TAG_STATIC, t as u64])))
        .collect()
}

/// Deletes `r` uniformly chosen edges and inserts `r` uniformly chosen pairs
/// that were not edges, so the edge count is unchanged. `r` defaults to half
/// the edge count, rounded.
pub fn hay_perturb<R: Rng + ?Sized>(g: &Graph, r: Option<usize>, rng: &mut R) -> Result<Graph> {
    let edges = g.raw_edges();
    let m = edges.len();
    let r = r.unwrap_or_else(|| (m as f64 * 0.5).round() as usize);
    let n = g.vertex_count();
    let capacity = n * n.saturating_sub(1) / 2 - m;
    if r > m || r > capacity {
        return Err(Error::invalid(format!(
            "cannot swap {r} edges in a graph with {m} edges and {capacity} non-edges"
        )));
    }
    let deleted: HashSet<usize> = index::sample(rng, m, r).into_iter().collect();
    let mut kept: Vec<Edge> = edges.iter().enumerate().filter(|(i, _)| !deleted.contains(i)).map(|(_, &e)| e).collect();
    let original: HashSet<Edge> = edges.into_iter().collect();
    let ids = g.ids();
    let mut inserted: HashSet<Edge> = HashSet::with_capacity(r);
    let mut order = Vec::with_capacity(r);
    while inserted.len() < r {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let e = super::edge(ids[a], ids[b]);
        if !original.contains(&e) && inserted.insert(e) {
            order.push(e);
        }
    }
    kept.extend(order);
    Graph::new(ids.iter().copied(), kept)
}

/// Delete/insert baseline applied to every snapshot independently.
pub fn hay_baseline_sequence(seq: &TemporalGraphSequence, r: Option<usize>, seed: u64) -> Result<Vec<Graph>> {
    seq.snapshots()
        .par_iter()
        .enumerate()
        .map(|(t, g)| hay_perturb(g, r, &mut stream(seed, &[TAG_HAY, t as u64])))
        .collect()
}
