//! Greedy modularity agglomeration with a replayable merge history, the
//! backtracking re-clustering step for a new snapshot, and matching of
//! communities across snapshots.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Partition of a vertex set into non-empty communities.
///
/// Labels are canonical: `0..K` numbered in order of each community's
/// smallest member, so equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ClusteringRepr", into = "ClusteringRepr")]
pub struct Clustering {
    ids: Vec<VertexId>,
    labels: Vec<u32>,
    members: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct ClusteringRepr {
    vertices: Vec<VertexId>,
    communities: Vec<u32>,
}

impl From<Clustering> for ClusteringRepr {
    fn from(c: Clustering) -> Self {
        ClusteringRepr { vertices: c.ids, communities: c.labels }
    }
}

impl TryFrom<ClusteringRepr> for Clustering {
    type Error = Error;

    fn try_from(r: ClusteringRepr) -> Result<Self> {
        Clustering::from_labels(r.vertices, &r.communities)
    }
}

impl Clustering {
    /// Builds a clustering from arbitrary labels over sorted unique ids.
    pub fn from_labels(ids: Vec<VertexId>, labels: &[u32]) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::DimensionMismatch { left: ids.len(), right: labels.len() });
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("clustering vertex ids must be sorted and unique"));
        }
        let mut remap: HashMap<u32, u32> = HashMap::new();
        let mut canon = Vec::with_capacity(labels.len());
        let mut members: Vec<Vec<u32>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            let next = remap.len() as u32;
            let c = *remap.entry(l).or_insert(next);
            if c as usize == members.len() {
                members.push(Vec::new());
            }
            members[c as usize].push(i as u32);
            canon.push(c);
        }
        Ok(Clustering { ids, labels: canon, members })
    }

    pub fn singletons(ids: Vec<VertexId>) -> Self {
        let labels: Vec<u32> = (0..ids.len() as u32).collect();
        Self::from_labels(ids, &labels).expect("valid singleton labels")
    }

    pub fn whole(ids: Vec<VertexId>) -> Self {
        let labels = vec![0; ids.len()];
        Self::from_labels(ids, &labels).expect("valid labels")
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    /// Members of every community as dense positions into [`Self::ids`].
    pub fn communities(&self) -> &[Vec<u32>] {
        &self.members
    }

    pub fn members_raw(&self, c: u32) -> Vec<VertexId> {
        self.members[c as usize].iter().map(|&i| self.ids[i as usize]).collect()
    }

    pub fn community_of(&self, raw: VertexId) -> Option<u32> {
        self.ids.binary_search(&raw).ok().map(|i| self.labels[i])
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Checks that this clustering covers exactly the vertices of `g`.
    pub fn check_aligned(&self, g: &Graph) -> Result<()> {
        if self.ids != g.ids() {
            return Err(Error::VertexSetMismatch);
        }
        Ok(())
    }

    /// The partition restricted to `ids`; vertices unknown here become
    /// singletons.
    pub fn restricted_to(&self, ids: &[VertexId]) -> Clustering {
        let base = self.community_count() as u32;
        let mut fresh = base;
        let labels: Vec<u32> = ids
            .iter()
            .map(|&v| {
                self.community_of(v).unwrap_or_else(|| {
                    fresh += 1;
                    fresh - 1
                })
            })
            .collect();
        Clustering::from_labels(ids.to_vec(), &labels).expect("sorted ids")
    }

    /// `vertex,community` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("vertex,community\n");
        for (v, c) in self.ids.iter().zip(&self.labels) {
            s.push_str(&format!("{v},{c}\n"));
        }
        s
    }
}

/// Why two dendrogram nodes were joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeKind {
    /// Picked by the greedy modularity search.
    Greedy,
    /// Copied from the previous snapshot's history (untouched subtree).
    Retained,
    /// Joins the untouched remainder of a previous community into one
    /// virtual node.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub left: u32,
    pub right: u32,
    pub parent: u32,
    pub delta: f64,
    pub kind: MergeKind,
}

/// Dendrogram over `leaves` (node `i < leaves.len()` is leaf `leaves[i]`,
/// node `leaves.len() + e` is the parent created by event `e`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MergeHistory {
    pub leaves: Vec<VertexId>,
    pub events: Vec<MergeEvent>,
}

impl MergeHistory {
    /// Replays all events from singletons.
    pub fn replay(&self) -> Result<Clustering> {
        let n = self.leaves.len();
        let total = n + self.events.len();
        let mut uf: Vec<u32> = (0..n as u32).collect();
        // representative leaf of every dendrogram node
        let mut rep: Vec<u32> = (0..n as u32).collect();
        rep.reserve(self.events.len());
        for (e, ev) in self.events.iter().enumerate() {
            if ev.parent as usize != n + e || ev.left as usize >= n + e || ev.right as usize >= n + e {
                return Err(Error::Contract(format!("merge event {e} references an invalid node")));
            }
            let a = find(&mut uf, rep[ev.left as usize]);
            let b = find(&mut uf, rep[ev.right as usize]);
            if a == b {
                return Err(Error::Contract(format!("merge event {e} joins a node with itself")));
            }
            uf[b as usize] = a;
            rep.push(a);
        }
        debug_assert_eq!(rep.len(), total);
        let labels: Vec<u32> = (0..n as u32).map(|i| find(&mut uf, i)).collect();
        Clustering::from_labels(self.leaves.clone(), &labels)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("history serializes")
    }
}

fn find(uf: &mut [u32], mut x: u32) -> u32 {
    while uf[x as usize] != x {
        uf[x as usize] = uf[uf[x as usize] as usize];
        x = uf[x as usize];
    }
    x
}

/// Newman modularity of `c` on `g`; zero for an edgeless graph.
pub fn modularity(g: &Graph, c: &Clustering) -> Result<f64> {
    c.check_aligned(g)?;
    let m = g.edge_count();
    if m == 0 {
        return Ok(0.0);
    }
    let k = c.community_count();
    let mut intra = vec![0u64; k];
    let mut degree = vec![0u64; k];
    for i in 0..g.vertex_count() {
        let ci = c.label(i) as usize;
        degree[ci] += g.degree(i) as u64;
        for &j in g.neighbors(i) {
            if (j as usize) > i && c.label(j as usize) as usize == ci {
                intra[ci] += 1;
            }
        }
    }
    let m = m as f64;
    Ok((0..k).map(|x| intra[x] as f64 / m - (degree[x] as f64 / (2.0 * m)).powi(2)).sum())
}

/// Weighted agglomeration state over the vertices of one graph.
///
/// Node ids follow the merge history (leaves `0..n`, then one id per event).
/// A merged node reuses the storage slot of the side with more neighbours,
/// so only the smaller side's adjacency is rewritten.
#[derive(Clone)]
struct Agglomerator {
    two_m: i64,
    cells: Vec<NodeCell>,
    /// Node id to slot; `u32::MAX` once the node has been merged away.
    slot_of: Vec<u32>,
    history: MergeHistory,
    /// Union-find over leaves so a node's membership can be queried.
    uf: Vec<u32>,
}

#[derive(Clone)]
struct NodeCell {
    id: u32,
    degree: i64,
    /// Keyed by slot.
    neighbors: HashMap<u32, i64>,
    alive: bool,
    leaf: u32,
}

/// Gain key, tie-break on node ids, then the two slots the entry refers to.
type HeapEntry = (i64, Reverse<(u32, u32)>, u32, u32);

const DEAD: u32 = u32::MAX;

impl Agglomerator {
    fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        let cells = (0..n)
            .map(|i| NodeCell {
                id: i as u32,
                degree: g.degree(i) as i64,
                neighbors: g.neighbors(i).iter().map(|&j| (j, 1)).collect(),
                alive: true,
                leaf: i as u32,
            })
            .collect();
        Agglomerator {
            two_m: 2 * g.edge_count() as i64,
            cells,
            slot_of: (0..n as u32).collect(),
            history: MergeHistory { leaves: g.ids().to_vec(), events: Vec::new() },
            uf: (0..n as u32).collect(),
        }
    }

    /// Alive nodes as `(id, representative leaf)`.
    fn alive(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.slot_of
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s != DEAD)
            .map(|(id, &s)| (id as u32, self.cells[s as usize].leaf))
    }

    /// Modularity gain of joining two slots, scaled by `2m²` so it is an
    /// exact integer.
    fn gain_key(&self, a: u32, b: u32, weight: i64) -> i64 {
        self.two_m * weight - self.cells[a as usize].degree * self.cells[b as usize].degree
    }

    fn delta(&self, key: i64) -> f64 {
        if self.two_m == 0 {
            0.0
        } else {
            let m = self.two_m as f64 / 2.0;
            key as f64 / (2.0 * m * m)
        }
    }

    fn entry(&self, a: u32, b: u32) -> Option<HeapEntry> {
        let w = *self.cells[a as usize].neighbors.get(&b)?;
        let key = self.gain_key(a, b, w);
        let (ia, ib) = (self.cells[a as usize].id, self.cells[b as usize].id);
        (key > 0).then_some((key, Reverse((ia.min(ib), ia.max(ib))), a, b))
    }

    /// Merges nodes `a` and `b` (by id) and returns the new node's id.
    fn force_merge(&mut self, a: u32, b: u32, kind: MergeKind) -> u32 {
        let (sa, sb) = (self.slot_of[a as usize], self.slot_of[b as usize]);
        debug_assert!(a != b && sa != DEAD && sb != DEAD);
        self.merge_slots(sa, sb, kind, &mut Vec::new())
    }

    /// Merges two slots, appending the slots whose pair with the result
    /// gained weight to `touched`.
    fn merge_slots(&mut self, sa: u32, sb: u32, kind: MergeKind, touched: &mut Vec<u32>) -> u32 {
        let weight = self.cells[sa as usize].neighbors.get(&sb).copied().unwrap_or(0);
        let key = self.gain_key(sa, sb, weight);
        let (a, b) = (self.cells[sa as usize].id, self.cells[sb as usize].id);
        let parent = self.slot_of.len() as u32;
        let (big, small) = if self.cells[sa as usize].neighbors.len() >= self.cells[sb as usize].neighbors.len() {
            (sa, sb)
        } else {
            (sb, sa)
        };
        let small_map = std::mem::take(&mut self.cells[small as usize].neighbors);
        self.cells[big as usize].neighbors.remove(&small);
        for (x, w) in small_map {
            if x == big {
                continue;
            }
            *self.cells[big as usize].neighbors.entry(x).or_insert(0) += w;
            let nm = &mut self.cells[x as usize].neighbors;
            nm.remove(&small);
            *nm.entry(big).or_insert(0) += w;
            touched.push(x);
        }
        let la = find(&mut self.uf, self.cells[sa as usize].leaf);
        let lb = find(&mut self.uf, self.cells[sb as usize].leaf);
        self.uf[lb as usize] = la;
        let degree = self.cells[sa as usize].degree + self.cells[sb as usize].degree;
        self.cells[small as usize].alive = false;
        let cell = &mut self.cells[big as usize];
        cell.degree = degree;
        cell.id = parent;
        cell.leaf = la;
        self.slot_of[a as usize] = DEAD;
        self.slot_of[b as usize] = DEAD;
        self.slot_of.push(big);
        self.history.events.push(MergeEvent { left: a, right: b, parent, delta: self.delta(key), kind });
        parent
    }

    /// Repeatedly merges the connected pair with the largest positive gain,
    /// ties going to the smallest `(min, max)` node ids.
    ///
    /// Merging only lowers the key of pairs whose weight is unchanged and
    /// raises their ids, so stale heap entries are upper bounds; a popped
    /// entry is used only if it is still exact, and re-queued otherwise.
    fn run_greedy(&mut self) {
        let mut heap = BinaryHeap::new();
        for a in 0..self.cells.len() as u32 {
            if self.cells[a as usize].alive {
                for &b in self.cells[a as usize].neighbors.keys() {
                    if b > a {
                        heap.extend(self.entry(a, b));
                    }
                }
            }
        }
        let mut touched = Vec::new();
        while let Some(top) = heap.pop() {
            let (_, _, sa, sb) = top;
            if !(self.cells[sa as usize].alive && self.cells[sb as usize].alive) {
                continue;
            }
            match self.entry(sa, sb) {
                Some(cur) if cur == top => {}
                Some(cur) => {
                    heap.push(cur);
                    continue;
                }
                None => continue,
            }
            touched.clear();
            let (sa, sb) = if self.cells[sa as usize].id < self.cells[sb as usize].id { (sa, sb) } else { (sb, sa) };
            let parent = self.merge_slots(sa, sb, MergeKind::Greedy, &mut touched);
            let p = self.slot_of[parent as usize];
            for &x in &touched {
                heap.extend(self.entry(p, x));
            }
        }
    }

    fn finish(mut self) -> (Clustering, MergeHistory) {
        let n = self.history.leaves.len() as u32;
        let labels: Vec<u32> = (0..n).map(|i| find(&mut self.uf, i)).collect();
        let c = Clustering::from_labels(self.history.leaves.clone(), &labels).expect("aligned");
        (c, self.history)
    }
}

/// Greedy agglomerative modularity clustering from singletons.
pub fn cluster_static(g: &Graph) -> (Clustering, MergeHistory) {
    let mut agg = Agglomerator::new(g);
    agg.run_greedy();
    agg.finish()
}

/// Re-clusters snapshot `g_t` starting from the previous snapshot's result.
///
/// Vertices within `m` hops (in `g_t`) of a changed link, and new vertices,
/// are freed as singletons. What remains of each previous community is frozen
/// into one virtual node, whose internal merge events are kept where the
/// subtree is untouched. Greedy agglomeration then runs over virtual nodes
/// and freed vertices. If simply keeping the previous partition scores higher
/// modularity on `g_t`, that partition is returned instead.
pub fn recluster_dynamic(
    g_t: &Graph,
    prev: (&Clustering, &MergeHistory),
    changed_links: &[(VertexId, VertexId)],
    m: usize,
) -> Result<(Clustering, MergeHistory)> {
    let (prev_c, prev_h) = prev;
    if prev_h.leaves != prev_c.ids() {
        return Err(Error::Contract("merge history does not match its clustering".into()));
    }
    let ids = g_t.ids();
    let new_vertices: Vec<usize> = (0..ids.len()).filter(|&i| prev_c.community_of(ids[i]).is_none()).collect();
    let removed = prev_c.ids().iter().any(|&v| !g_t.contains(v));
    if changed_links.is_empty() && new_vertices.is_empty() && !removed {
        return Ok((prev_c.clone(), prev_h.clone()));
    }

    let mut freed = vec![false; ids.len()];
    for &i in &new_vertices {
        freed[i] = true;
    }
    // One BFS from every changed endpoint, out to m hops.
    let mut dist = vec![usize::MAX; ids.len()];
    let mut frontier: Vec<usize> = Vec::new();
    for &(u, v) in changed_links {
        for x in [u, v] {
            if let Some(s) = g_t.index_of(x) {
                if dist[s] == usize::MAX {
                    dist[s] = 0;
                    frontier.push(s);
                }
            }
        }
    }
    for hop in 1..=m {
        let mut next = Vec::new();
        for &x in &frontier {
            for &y in g_t.neighbors(x) {
                if dist[y as usize] == usize::MAX {
                    dist[y as usize] = hop;
                    next.push(y as usize);
                }
            }
        }
        frontier = next;
    }
    for (i, &d) in dist.iter().enumerate() {
        if d != usize::MAX {
            freed[i] = true;
        }
    }

    // Previous dendrogram nodes whose subtree touches a freed or removed vertex.
    let prev_n = prev_h.leaves.len();
    let mut tainted: Vec<bool> = prev_h.leaves.iter().map(|&v| g_t.index_of(v).is_none_or(|i| freed[i])).collect();
    for ev in &prev_h.events {
        let t = tainted[ev.left as usize] || tainted[ev.right as usize];
        tainted.push(t);
    }

    let mut agg = Agglomerator::new(g_t);
    let mut node_map: Vec<u32> =
        prev_h.leaves.iter().map(|&v| g_t.index_of(v).map_or(u32::MAX, |i| i as u32)).collect();
    for (e, ev) in prev_h.events.iter().enumerate() {
        if tainted[prev_n + e] {
            node_map.push(u32::MAX);
        } else {
            let p = agg.force_merge(node_map[ev.left as usize], node_map[ev.right as usize], MergeKind::Retained);
            node_map.push(p);
        }
    }

    // One virtual node per previous community from its untouched pieces.
    let mut pieces: Vec<Vec<u32>> = vec![Vec::new(); prev_c.community_count()];
    for (node, leaf) in agg.alive() {
        let leaf = leaf as usize;
        if freed[leaf] {
            continue;
        }
        let c = prev_c.community_of(ids[leaf]).expect("non-freed vertex existed before");
        pieces[c as usize].push(node);
    }
    let mut virtual_of: Vec<Option<u32>> = vec![None; prev_c.community_count()];
    for (c, nodes) in pieces.iter().enumerate() {
        let mut it = nodes.iter().copied();
        if let Some(first) = it.next() {
            let v = it.fold(first, |acc, x| agg.force_merge(acc, x, MergeKind::Frozen));
            virtual_of[c] = Some(v);
        }
    }

    // Frozen candidate: freed members rejoin their previous community.
    let mut frozen = agg.clone();
    for (i, &is_freed) in freed.iter().enumerate() {
        if !is_freed {
            continue;
        }
        if let Some(c) = prev_c.community_of(ids[i]) {
            let c = c as usize;
            virtual_of[c] = Some(match virtual_of[c] {
                Some(v) => frozen.force_merge(v, i as u32, MergeKind::Frozen),
                None => i as u32,
            });
        }
    }

    agg.run_greedy();
    let (greedy_c, greedy_h) = agg.finish();
    let (frozen_c, frozen_h) = frozen.finish();
    let q_greedy = modularity(g_t, &greedy_c)?;
    let q_frozen = modularity(g_t, &frozen_c)?;
    Ok(if q_frozen > q_greedy { (frozen_c, frozen_h) } else { (greedy_c, greedy_h) })
}

/// Outcome of matching current communities against the previous snapshot's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityDiff {
    /// `(previous id, current id)` pairs whose vertex Jaccard reaches θ.
    pub unchanged: Vec<(u32, u32)>,
    /// Current ids that must be perturbed afresh.
    pub changed: Vec<u32>,
    pub overlap_threshold: f64,
}

impl CommunityDiff {
    pub fn previous_of(&self, cur: u32) -> Option<u32> {
        self.unchanged.iter().find(|&&(_, c)| c == cur).map(|&(p, _)| p)
    }

    pub fn is_unchanged(&self, cur: u32) -> bool {
        self.previous_of(cur).is_some()
    }
}

/// Greedy one-to-one matching of current to previous communities by
/// descending vertex Jaccard; matches at or above `theta` are unchanged.
/// With no previous clustering everything is changed.
pub fn classify_communities(prev: Option<&Clustering>, cur: &Clustering, theta: f64) -> Result<CommunityDiff> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid(format!("overlap threshold must be in (0, 1], got {theta}")));
    }
    let k = cur.community_count() as u32;
    let Some(prev) = prev else {
        return Ok(CommunityDiff { unchanged: Vec::new(), changed: (0..k).collect(), overlap_threshold: theta });
    };
    let mut overlap: HashMap<(u32, u32), usize> = HashMap::new();
    for (i, &v) in cur.ids().iter().enumerate() {
        if let Some(p) = prev.community_of(v) {
            *overlap.entry((cur.label(i), p)).or_insert(0) += 1;
        }
    }
    let mut scored: Vec<(f64, u32, u32)> = overlap
        .into_iter()
        .map(|((c, p), inter)| {
            let union = cur.communities()[c as usize].len() + prev.communities()[p as usize].len() - inter;
            (inter as f64 / union as f64, c, p)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut cur_used = vec![false; k as usize];
    let mut prev_used = HashSet::new();
    let mut unchanged = Vec::new();
    for (j, c, p) in scored {
        if j < theta {
            break;
        }
        if cur_used[c as usize] || prev_used.contains(&p) {
            continue;
        }
        cur_used[c as usize] = true;
        prev_used.insert(p);
        unchanged.push((p, c));
    }
    unchanged.sort_by_key(|&(_, c)| c);
    let changed = (0..k).filter(|&c| !cur_used[c as usize]).collect();
    Ok(CommunityDiff { unchanged, changed, overlap_threshold: theta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_k4_bridge() -> Graph {
        let mut e = Vec::new();
        for base in [0u64, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    e.push((base + i, base + j));
                }
            }
        }
        e.push((3, 4));
        Graph::from_edges(e).unwrap()
    }

    #[test]
    fn canonical_labels() {
        let c = Clustering::from_labels(vec![1, 2, 3, 4], &[9, 5, 9, 5]).unwrap();
        assert_eq!(c.labels(), &[0, 1, 0, 1]);
        assert_eq!(c.members_raw(1), vec![2, 4]);
        assert!(Clustering::from_labels(vec![2, 1], &[0, 0]).is_err());
    }

    #[test]
    fn single_edge_merges() {
        let g = Graph::from_edges([(0, 1)]).unwrap();
        let (c, h) = cluster_static(&g);
        assert_eq!(c.community_count(), 1);
        // Q(merged) = 1 - 1 = 0, Q(singletons) = -(1/2)^2 * 2 = -0.5
        assert!((h.events[0].delta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn edgeless_stays_singletons() {
        let g = Graph::new([1, 2, 3], []).unwrap();
        let (c, h) = cluster_static(&g);
        assert_eq!(c.community_count(), 3);
        assert!(h.events.is_empty());
        assert_eq!(modularity(&g, &c).unwrap(), 0.0);
    }

    #[test]
    fn cliques_found_and_history_replays() {
        let g = two_k4_bridge();
        let (c, h) = cluster_static(&g);
        assert_eq!(c.community_count(), 2);
        assert_eq!(c.members_raw(0), vec![0, 1, 2, 3]);
        assert_eq!(h.replay().unwrap(), c);
        assert!(h.events.iter().all(|e| e.delta > 0.0));
    }

    #[test]
    fn whole_graph_modularity_is_zero() {
        let g = two_k4_bridge();
        let q = modularity(&g, &Clustering::whole(g.ids().to_vec())).unwrap();
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn recluster_identity_on_no_change() {
        let g = two_k4_bridge();
        let (c, h) = cluster_static(&g);
        let (c2, h2) = recluster_dynamic(&g, (&c, &h), &[], 2).unwrap();
        assert_eq!(c2, c);
        assert_eq!(h2, h);
    }

    #[test]
    fn recluster_history_replays() {
        let g = two_k4_bridge();
        let (c, h) = cluster_static(&g);
        let g2 = g.with_edge(0, 5, true).unwrap().with_vertices(&[20]);
        let (c2, h2) = recluster_dynamic(&g2, (&c, &h), &[(0, 5)], 0).unwrap();
        assert_eq!(h2.replay().unwrap(), c2);
        assert_eq!(c2.ids(), g2.ids());
        assert!(h2.events.iter().any(|e| e.kind == MergeKind::Retained || e.kind == MergeKind::Frozen));
    }

    #[test]
    fn classify_examples() {
        let c = Clustering::from_labels((0..10).collect(), &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]).unwrap();
        let d = classify_communities(Some(&c), &c, 0.8).unwrap();
        assert_eq!(d.unchanged, vec![(0, 0), (1, 1)]);
        assert!(d.changed.is_empty());
        let d0 = classify_communities(None, &c, 0.8).unwrap();
        assert_eq!(d0.changed, vec![0, 1]);
        // 10-vertex community keeps 7 members, gains 3: Jaccard 7/13
        let prev = Clustering::from_labels((0..13).collect(), &[0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1]).unwrap();
        let cur = Clustering::from_labels((0..13).collect(), &[0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0]).unwrap();
        let d = classify_communities(Some(&prev), &cur, 0.8).unwrap();
        assert!(d.changed.contains(&0));
        assert!(classify_communities(None, &c, 0.0).is_err());
    }

    #[test]
    fn clustering_serde_round_trip() {
        let c = Clustering::from_labels(vec![3, 8, 11], &[1, 0, 1]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Clustering>(&s).unwrap(), c);
        assert_eq!(c.to_csv(), "vertex,community\n3,0\n8,1\n11,0\n");
    }
}
