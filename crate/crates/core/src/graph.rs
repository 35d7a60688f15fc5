//! Undirected snapshot graphs, temporal sequences and edge-list I/O.
//!
//! Raw vertex ids are arbitrary `u64` labels that denote the same user in
//! every snapshot. Inside a [`Graph`] they are remapped to dense indices
//! (`u32`, position in the sorted id list) so adjacency is plain CSR.

use std::collections::{HashSet, VecDeque};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub type VertexId = u64;

/// Immutable simple undirected graph.
///
/// Invariants: no self-loops, no duplicate edges, every adjacency row sorted,
/// `j ∈ adj(i) ⇔ i ∈ adj(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    ids: Vec<VertexId>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Graph {
    pub fn empty() -> Self {
        Graph { ids: Vec::new(), offsets: vec![0], targets: Vec::new() }
    }

    /// Builds a graph from an explicit vertex list plus an edge list. Edge
    /// endpoints are added to the vertex set; duplicates (in either
    /// orientation) collapse. Self-loops are rejected.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let edges: Vec<(VertexId, VertexId)> = edges.into_iter().collect();
        if let Some(&(u, _)) = edges.iter().find(|(u, v)| u == v) {
            return Err(Error::SelfLoop { line: 0, vertex: u });
        }
        let mut ids: Vec<VertexId> = vertices.into_iter().collect();
        ids.extend(edges.iter().flat_map(|&(u, v)| [u, v]));
        ids.sort_unstable();
        ids.dedup();
        let idx = |raw: VertexId| ids.binary_search(&raw).expect("endpoint registered") as u32;
        let pairs: Vec<(u32, u32)> = edges.iter().map(|&(u, v)| (idx(u), idx(v))).collect();
        Ok(Self::from_index_edges(ids, pairs))
    }

    pub fn from_edges<E>(edges: E) -> Result<Self>
    where
        E: IntoIterator<Item = (VertexId, VertexId)>,
    {
        Self::new(std::iter::empty(), edges)
    }

    /// Fast path for callers that already hold dense indices into `ids`
    /// (which must be sorted and unique). Duplicate pairs collapse.
    pub(crate) fn from_index_edges(ids: Vec<VertexId>, edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let n = ids.len();
        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            debug_assert_ne!(a, b, "self-loop in index edge list");
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        for &(a, b) in &edges {
            targets[fill[a as usize]] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        // sort + dedup each row, then compact
        let mut compact_offsets = Vec::with_capacity(n + 1);
        compact_offsets.push(0);
        let mut write = 0;
        for i in 0..n {
            let row = &mut targets[offsets[i]..offsets[i + 1]];
            row.sort_unstable();
            let mut last = None;
            for r in offsets[i]..offsets[i + 1] {
                let t = targets[r];
                if last != Some(t) {
                    targets[write] = t;
                    write += 1;
                    last = Some(t);
                }
            }
            compact_offsets.push(write);
        }
        targets.truncate(write);
        Graph { ids, offsets: compact_offsets, targets }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Sorted raw ids; position is the dense index.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn index_of(&self, raw: VertexId) -> Option<usize> {
        self.ids.binary_search(&raw).ok()
    }

    pub fn contains(&self, raw: VertexId) -> bool {
        self.index_of(raw).is_some()
    }

    pub fn degree(&self, index: usize) -> usize {
        self.offsets[index + 1] - self.offsets[index]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|i| self.degree(i)).collect()
    }

    pub fn neighbors(&self, index: usize) -> &[u32] {
        &self.targets[self.offsets[index]..self.offsets[index + 1]]
    }

    pub fn has_edge_index(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.has_edge_index(a, b),
            _ => false,
        }
    }

    /// Edges as dense index pairs with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count()).flat_map(move |a| {
            self.neighbors(a).iter().filter(move |&&b| (b as usize) > a).map(move |&b| (a as u32, b))
        })
    }

    /// Edges as raw id pairs with `u < v`, sorted.
    pub fn raw_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.edges().map(|(a, b)| (self.ids[a as usize], self.ids[b as usize])).collect()
    }

    pub fn raw_edge_set(&self) -> HashSet<(VertexId, VertexId)> {
        self.raw_edges().into_iter().collect()
    }

    /// Subgraph induced by the given dense indices. Raw ids are preserved.
    pub fn induced_subgraph(&self, members: &[u32]) -> Graph {
        let mut sorted: Vec<u32> = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let ids: Vec<VertexId> = sorted.iter().map(|&i| self.ids[i as usize]).collect();
        let mut local = vec![u32::MAX; self.vertex_count()];
        for (pos, &i) in sorted.iter().enumerate() {
            local[i as usize] = pos as u32;
        }
        let mut edges = Vec::new();
        for (pos, &i) in sorted.iter().enumerate() {
            for &j in self.neighbors(i as usize) {
                let lj = local[j as usize];
                if lj != u32::MAX && (lj as usize) > pos {
                    edges.push((pos as u32, lj));
                }
            }
        }
        Graph::from_index_edges(ids, edges)
    }

    /// Same edges, with extra (isolated) vertices added to the vertex set.
    pub fn with_vertices(&self, extra: &[VertexId]) -> Graph {
        Graph::new(self.ids.iter().copied().chain(extra.iter().copied()), self.raw_edges())
            .expect("edges of a valid graph")
    }

    /// Copy of the graph with one edge forced present or absent.
    pub fn with_edge(&self, u: VertexId, v: VertexId, present: bool) -> Result<Graph> {
        if u == v {
            return Err(Error::SelfLoop { line: 0, vertex: u });
        }
        let key = (u.min(v), u.max(v));
        let mut edges = self.raw_edges();
        edges.retain(|&e| e != key);
        if present {
            edges.push(key);
        }
        Graph::new(self.ids.iter().copied().chain([u, v]), edges)
    }

    /// Dense indices reachable from `source` within `radius` hops, with their
    /// hop distance, in BFS order.
    pub fn ball(&self, source: usize, radius: usize) -> Vec<(u32, usize)> {
        // visited set sized by the ball, not the graph
        let mut seen: HashSet<u32> = HashSet::from([source as u32]);
        let mut out = vec![(source as u32, 0)];
        let mut next = 0;
        while next < out.len() {
            let (x, d) = out[next];
            next += 1;
            if d == radius {
                continue;
            }
            for &y in self.neighbors(x as usize) {
                if seen.insert(y) {
                    out.push((y, d + 1));
                }
            }
        }
        out
    }

    /// Connected components as lists of dense indices.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s as u32];
            let mut head = 0;
            while head < comp.len() {
                let x = comp[head] as usize;
                head += 1;
                for &y in self.neighbors(x) {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        comp.push(y);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() <= 1 || self.components().len() == 1
    }

    /// Two-colourability of every component.
    pub fn is_bipartite(&self) -> bool {
        let n = self.vertex_count();
        let mut colour = vec![u8::MAX; n];
        for s in 0..n {
            if colour[s] != u8::MAX {
                continue;
            }
            colour[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in self.neighbors(x) {
                    let y = y as usize;
                    if colour[y] == u8::MAX {
                        colour[y] = 1 - colour[x];
                        queue.push_back(y);
                    } else if colour[y] == colour[x] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Union of vertex sets and edge sets.
pub fn union_graph(graphs: &[Graph]) -> Result<Graph> {
    if graphs.is_empty() {
        return Err(Error::EmptySequence);
    }
    if graphs.len() == 1 {
        return Ok(graphs[0].clone());
    }
    let vertices = graphs.iter().flat_map(|g| g.ids().iter().copied());
    let edges: Vec<_> = graphs.iter().flat_map(|g| g.raw_edges()).collect();
    Graph::new(vertices, edges)
}

/// Graph connecting every pair of vertices at hop distance `1..=k`.
pub fn k_hop_graph(g: &Graph, k: usize) -> Graph {
    let mut edges = Vec::new();
    for s in 0..g.vertex_count() {
        for (y, d) in g.ball(s, k) {
            if d > 0 && (y as usize) > s {
                edges.push((s as u32, y));
            }
        }
    }
    Graph::from_index_edges(g.ids().to_vec(), edges)
}

/// Ordered snapshots `G_0..G_T` over a shared raw-id namespace.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraphSequence {
    snapshots: Vec<Graph>,
    labels: Vec<String>,
}

impl TemporalGraphSequence {
    pub fn new(snapshots: Vec<Graph>) -> Result<Self> {
        let labels = (0..snapshots.len()).map(|t| t.to_string()).collect();
        Self::with_labels(snapshots, labels)
    }

    pub fn with_labels(snapshots: Vec<Graph>, labels: Vec<String>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptySequence);
        }
        if labels.len() != snapshots.len() {
            return Err(Error::DimensionMismatch { left: snapshots.len(), right: labels.len() });
        }
        Ok(TemporalGraphSequence { snapshots, labels })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Graph] {
        &self.snapshots
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, t: usize) -> Option<&Graph> {
        self.snapshots.get(t)
    }

    pub fn into_snapshots(self) -> Vec<Graph> {
        self.snapshots
    }
}

impl std::ops::Index<usize> for TemporalGraphSequence {
    type Output = Graph;

    fn index(&self, t: usize) -> &Graph {
        &self.snapshots[t]
    }
}

/// Parses the whitespace-separated edge-list format. `#` starts a comment;
/// a line holding a single id declares a (possibly isolated) vertex.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<VertexId>()
                .map_err(|e| Error::Parse { line: line_no, message: format!("bad vertex id {s:?}: {e}") })
        };
        match fields.as_slice() {
            [v] => vertices.push(parse(v)?),
            [u, v] => {
                let (u, v) = (parse(u)?, parse(v)?);
                if u == v {
                    return Err(Error::SelfLoop { line: line_no, vertex: u });
                }
                edges.push((u, v));
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected \"u v\", found {} fields", fields.len()),
                })
            }
        }
    }
    Graph::new(vertices, edges)
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_edge_list(&text)
}

/// Resolves the snapshot paths listed in a manifest (relative to the
/// manifest's directory), skipping blank and `#` lines.
pub fn manifest_entries(manifest: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let manifest = manifest.as_ref();
    let text = fs::read_to_string(manifest).map_err(|source| Error::Io { path: manifest.to_path_buf(), source })?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let entries: Vec<PathBuf> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| base.join(l))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyManifest);
    }
    Ok(entries)
}

pub fn load_sequence(manifest: impl AsRef<Path>) -> Result<TemporalGraphSequence> {
    let entries = manifest_entries(manifest)?;
    let mut snapshots = Vec::with_capacity(entries.len());
    let mut labels = Vec::with_capacity(entries.len());
    for path in &entries {
        snapshots.push(load_edge_list(path)?);
        labels.push(path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    }
    TemporalGraphSequence::with_labels(snapshots, labels)
}

/// Writes `u v` lines (sorted, `u < v`) followed by one line per isolated
/// vertex. `header` lines are emitted as `#` comments.
pub fn write_edge_list<W: Write>(g: &Graph, header: &[String], mut out: W) -> std::io::Result<()> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    for (u, v) in g.raw_edges() {
        writeln!(out, "{u} {v}")?;
    }
    for i in 0..g.vertex_count() {
        if g.degree(i) == 0 {
            writeln!(out, "{}", g.id(i))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_list() {
        let g = parse_edge_list("0 1\n1 2").unwrap();
        assert_eq!(g.ids(), &[0, 1, 2]);
        assert_eq!(g.raw_edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn duplicates_collapse() {
        let g = parse_edge_list("0 1\n1 0\n0 1").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn self_loop_rejected_with_line() {
        let err = parse_edge_list("0 1\n# c\n3 3\n").unwrap_err();
        assert!(matches!(err, Error::SelfLoop { line: 3, vertex: 3 }), "{err:?}");
    }

    #[test]
    fn parse_error_reports_line() {
        let err = parse_edge_list("0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_edge_list("0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn comments_and_isolated_vertices() {
        let g = parse_edge_list("# header\n5 7 # trailing\n\n9\n").unwrap();
        assert_eq!(g.ids(), &[5, 7, 9]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn write_then_parse_keeps_isolated_vertices() {
        let g = Graph::new([4, 10], [(1, 2), (2, 3)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &["seed 1".to_string()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# seed 1\n1 2\n2 3\n"));
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn union_of_graphs() {
        let a = Graph::from_edges([(0, 1)]).unwrap();
        let b = Graph::from_edges([(1, 2)]).unwrap();
        assert_eq!(union_graph(std::slice::from_ref(&a)).unwrap(), a);
        let u = union_graph(&[a, b]).unwrap();
        assert_eq!(u.raw_edges(), vec![(0, 1), (1, 2)]);
        let c = Graph::from_edges([(10, 11), (11, 12)]).unwrap();
        let d = Graph::from_edges([(20, 21)]).unwrap();
        assert_eq!(union_graph(&[c, d]).unwrap().edge_count(), 3);
        assert!(union_graph(&[]).is_err());
    }

    #[test]
    fn k_hop_of_path() {
        let g = Graph::from_edges([(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(k_hop_graph(&g, 1), g);
        let g2 = k_hop_graph(&g, 2);
        assert_eq!(g2.raw_edges(), vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn induced_subgraph_keeps_raw_ids() {
        let g = Graph::from_edges([(10, 20), (20, 30), (30, 10), (30, 40)]).unwrap();
        let s = g.induced_subgraph(&[0, 2, 3]);
        assert_eq!(s.ids(), &[10, 30, 40]);
        assert_eq!(s.raw_edges(), vec![(10, 30), (30, 40)]);
    }

    #[test]
    fn bipartite_and_connectivity() {
        let c4 = Graph::from_edges([(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(c4.is_bipartite());
        assert!(c4.is_connected());
        let k3 = Graph::from_edges([(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(!k3.is_bipartite());
        let split = Graph::new([9], [(0, 1)]).unwrap();
        assert!(!split.is_connected());
    }

    #[test]
    fn sequence_requires_snapshots() {
        assert!(matches!(TemporalGraphSequence::new(vec![]), Err(Error::EmptySequence)));
    }
}
