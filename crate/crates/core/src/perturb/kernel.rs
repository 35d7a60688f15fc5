use rand::Rng;
use rayon::prelude::*;

use super::Edge;
use crate::graph::{Graph, VertexId};

/// Independent inclusion probabilities over candidate vertex pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairKernel {
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `(u, v, p)` with `u < v`, sorted, `0 < p ≤ 1`.
    Listed(Vec<(VertexId, VertexId, f64)>),
    /// Every `(i, j)` across two disjoint sides with probability
    /// `min(1, w_i · w_j · scale)`. Each side is sorted by descending weight,
    /// then id.
    Product { left: Vec<(VertexId, f64)>, right: Vec<(VertexId, f64)>, scale: f64 },
}

impl Default for Repr {
    fn default() -> Self {
        Repr::Listed(Vec::new())
    }
}

fn by_weight(side: &mut [(VertexId, f64)]) {
    side.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

impl PairKernel {
    pub(crate) fn from_sorted(pairs: Vec<(VertexId, VertexId, f64)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        PairKernel { repr: Repr::Listed(pairs) }
    }

    /// Bipartite kernel between two disjoint vertex sets with weights.
    pub(crate) fn product(mut left: Vec<(VertexId, f64)>, mut right: Vec<(VertexId, f64)>, scale: f64) -> Self {
        by_weight(&mut left);
        by_weight(&mut right);
        PairKernel { repr: Repr::Product { left, right, scale } }
    }

    /// All `(u, v, p)` with `u < v` and `p > 0`, sorted.
    pub fn pairs(&self) -> Vec<(VertexId, VertexId, f64)> {
        match &self.repr {
            Repr::Listed(p) => p.clone(),
            Repr::Product { left, right, scale } => {
                let mut out: Vec<_> = left
                    .iter()
                    .flat_map(|&(i, wi)| {
                        right.iter().map(move |&(j, wj)| (i.min(j), i.max(j), (wi * wj * scale).min(1.0)))
                    })
                    .filter(|p| p.2 > 0.0)
                    .collect();
                out.sort_by_key(|a| (a.0, a.1));
                out
            }
        }
    }

    /// Pairs with `u` or `v` as an endpoint.
    pub fn pairs_touching(&self, u: VertexId, v: VertexId) -> Vec<(VertexId, VertexId, f64)> {
        match &self.repr {
            Repr::Listed(p) => p.iter().copied().filter(|p| p.0 == u || p.1 == u || p.0 == v || p.1 == v).collect(),
            Repr::Product { left, right, scale } => {
                let mut out = Vec::new();
                for (second, (side, other)) in [(left, right), (right, left)].into_iter().enumerate() {
                    for &(i, wi) in side.iter().filter(|x| x.0 == u || x.0 == v) {
                        for &(j, wj) in other {
                            let p = (wi * wj * scale).min(1.0);
                            // a pair with both endpoints queried is listed once
                            if p > 0.0 && !(second == 1 && (j == u || j == v)) {
                                out.push((i.min(j), i.max(j), p));
                            }
                        }
                    }
                }
                out.sort_by_key(|a| (a.0, a.1));
                out
            }
        }
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Listed(p) => p.len(),
            Repr::Product { left, right, .. } => left.len() * right.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Expected number of sampled pairs touching each vertex.
    pub fn expected_degree(&self, v: VertexId) -> f64 {
        match &self.repr {
            Repr::Listed(p) => p.iter().filter(|p| p.0 == v || p.1 == v).map(|p| p.2).sum(),
            Repr::Product { left, right, scale } => {
                let row = |side: &[(VertexId, f64)], other: &[(VertexId, f64)]| -> f64 {
                    side.iter()
                        .filter(|x| x.0 == v)
                        .map(|&(_, wi)| other.iter().map(|&(_, wj)| (wi * wj * scale).min(1.0)).sum::<f64>())
                        .sum()
                };
                row(left, right) + row(right, left)
            }
        }
    }

    /// Independent draws, returned sorted. A listed kernel takes one draw
    /// per pair in order; a product kernel skips geometrically along each
    /// left vertex's row, so its cost follows the number of edges drawn.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Edge> {
        match &self.repr {
            Repr::Listed(pairs) => {
                let mut out = Vec::new();
                for &(u, v, p) in pairs {
                    if rng.random::<f64>() < p {
                        out.push((u, v));
                    }
                }
                out
            }
            Repr::Product { left, right, scale } => {
                let mut out = Vec::new();
                for &(i, wi) in left {
                    // probabilities along the row never increase
                    let prob = |j: usize| (wi * right[j].1 * scale).min(1.0);
                    let mut j = 0;
                    let mut p = if right.is_empty() { 0.0 } else { prob(0) };
                    while j < right.len() && p > 0.0 {
                        if p < 1.0 {
                            let r: f64 = 1.0 - rng.random::<f64>();
                            let skip = (r.ln() / (1.0 - p).ln()).floor();
                            if skip >= (right.len() - j) as f64 {
                                break;
                            }
                            j += skip as usize;
                        }
                        let q = prob(j);
                        if q >= p || rng.random::<f64>() < q / p {
                            let x = right[j].0;
                            out.push((i.min(x), i.max(x)));
                        }
                        p = q;
                        j += 1;
                    }
                }
                out.sort_unstable();
                out
            }
        }
    }
}

/// Edge-replacement kernel of length-`k` walks on `h`.
///
/// Every edge is oriented by a fair coin; from its origin `o` the walk
/// crosses the edge, takes `k − 2` simple steps, and a final step to a
/// neighbour other than `o`, proposing the fake edge `(o, end)`. Each pair
/// is then kept independently with probability equal to its expected number
/// of proposals (capped at 1), so a vertex keeps its degree in expectation
/// while only the marginal law of the walk matters. `k = 1` returns the
/// original edges.
pub fn walk_kernel(h: &Graph, k: usize) -> PairKernel {
    assert!(k >= 1, "walk length must be positive");
    let ids = h.ids();
    if k == 1 {
        return PairKernel::from_sorted(h.edges().map(|(a, b)| (ids[a as usize], ids[b as usize], 1.0)).collect());
    }
    let n = h.vertex_count();
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; n], vec![0.0f64; n], Vec::<u32>::new(), Vec::<u32>::new()),
            |(cur, next, support, next_support), o| proposal_row(h, o, k, cur, next, support, next_support),
        )
        .collect();

    // Rows are sorted by target, so walking a's row for b > a emits pairs in
    // order; the reverse mass comes from b's row. Sum order is row order.
    let lookup = |a: usize, b: u32| rows[a].binary_search_by_key(&b, |e| e.0).ok().map(|i| rows[a][i].1);
    let mut pairs: Vec<(VertexId, VertexId, f64)> = Vec::new();
    let mut orphans = false;
    for (a, row) in rows.iter().enumerate() {
        for &(b, x) in row {
            if (b as usize) < a {
                // support is symmetric for walks; guard anyway
                if lookup(b as usize, a as u32).is_none() && x > 0.0 {
                    pairs.push((ids[b as usize], ids[a], x.min(1.0)));
                    orphans = true;
                }
                continue;
            }
            let x = x + lookup(b as usize, a as u32).unwrap_or(0.0);
            if x > 0.0 {
                pairs.push((ids[a], ids[b as usize], x.min(1.0)));
            }
        }
    }
    if orphans {
        pairs.sort_by_key(|e| (e.0, e.1));
    }
    PairKernel::from_sorted(pairs)
}

/// Expected proposal counts from origin `o`: `deg(o)/2 · P^{k−1}(o, ·)`
/// followed by one step that avoids `o`.
fn proposal_row(
    h: &Graph,
    o: usize,
    k: usize,
    cur: &mut [f64],
    next: &mut [f64],
    support: &mut Vec<u32>,
    next_support: &mut Vec<u32>,
) -> Vec<(u32, f64)> {
    let deg_o = h.degree(o);
    if deg_o == 0 {
        return Vec::new();
    }
    support.clear();
    support.push(o as u32);
    cur[o] = deg_o as f64 / 2.0;
    for _ in 0..k - 1 {
        for &x in support.iter() {
            let mass = cur[x as usize];
            cur[x as usize] = 0.0;
            let nbrs = h.neighbors(x as usize);
            let share = mass / nbrs.len() as f64;
            for &y in nbrs {
                if next[y as usize] == 0.0 {
                    next_support.push(y);
                }
                next[y as usize] += share;
            }
        }
        support.clear();
        std::mem::swap(support, next_support);
        // cur is all zero again; swap buffers
        for &y in support.iter() {
            cur[y as usize] = next[y as usize];
            next[y as usize] = 0.0;
        }
    }
    support.sort_unstable();
    let mut out_support: Vec<u32> = Vec::new();
    for &x in support.iter() {
        let mass = cur[x as usize];
        cur[x as usize] = 0.0;
        let x = x as usize;
        let options = h.degree(x) - usize::from(h.has_edge_index(x, o));
        if options == 0 {
            continue;
        }
        let share = mass / options as f64;
        for &z in h.neighbors(x) {
            if z as usize == o {
                continue;
            }
            if next[z as usize] == 0.0 {
                out_support.push(z);
            }
            next[z as usize] += share;
        }
    }
    out_support.sort_unstable();
    out_support
        .into_iter()
        .map(|z| {
            let x = next[z as usize];
            next[z as usize] = 0.0;
            (z, x)
        })
        .collect()
}
