use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inter_kernel, intercluster::inter_edge_groups, walk_kernel, Edge, PairKernel, PerturbParams};
use crate::cluster::{
    classify_communities, cluster_static, recluster_dynamic, Clustering, CommunityDiff, MergeHistory,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, TemporalGraphSequence, VertexId};
use crate::rng::{stream, TAG_INTER, TAG_INTRA, TAG_STEP};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityEdges {
    pub community: u32,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEdges {
    pub a: u32,
    pub b: u32,
    pub edges: Vec<Edge>,
}

/// Perturbed edges of one snapshot split by the community (or community
/// pair) that produced them, plus the clustering they were produced under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRecord {
    pub t: usize,
    pub clustering: Clustering,
    pub history: MergeHistory,
    /// Sorted by community id.
    pub intra: Vec<CommunityEdges>,
    /// Sorted by `(a, b)`; one entry per pair that had original cross edges,
    /// even when nothing was sampled.
    pub inter: Vec<PairEdges>,
}

impl PerturbationRecord {
    pub fn community_edges(&self, c: u32) -> Option<&[Edge]> {
        self.intra.binary_search_by_key(&c, |e| e.community).ok().map(|i| self.intra[i].edges.as_slice())
    }

    pub fn pair_edges(&self, a: u32, b: u32) -> Option<&[Edge]> {
        let key = (a.min(b), a.max(b));
        self.inter.binary_search_by_key(&key, |e| (e.a, e.b)).ok().map(|i| self.inter[i].edges.as_slice())
    }

    pub fn graph(&self) -> Graph {
        let edges = self
            .intra
            .iter()
            .flat_map(|c| c.edges.iter().copied())
            .chain(self.inter.iter().flat_map(|p| p.edges.iter().copied()));
        Graph::new(self.clustering.ids().iter().copied(), edges.collect::<Vec<_>>()).expect("recorded edges are simple")
    }

    /// Splits an observed perturbed graph by `clustering`. `pairs` lists the
    /// community pairs that had original cross edges.
    pub fn from_observed(
        t: usize,
        observed: &Graph,
        clustering: Clustering,
        history: MergeHistory,
        pairs: &[(u32, u32)],
    ) -> Result<Self> {
        clustering.check_aligned(observed)?;
        let mut intra: Vec<CommunityEdges> = (0..clustering.community_count() as u32)
            .map(|c| CommunityEdges { community: c, edges: Vec::new() })
            .collect();
        let mut inter: std::collections::BTreeMap<(u32, u32), Vec<Edge>> =
            pairs.iter().map(|&(a, b)| ((a.min(b), a.max(b)), Vec::new())).collect();
        for (u, v) in observed.raw_edges() {
            let (a, b) = (clustering.community_of(u).unwrap(), clustering.community_of(v).unwrap());
            if a == b {
                intra[a as usize].edges.push((u, v));
            } else {
                inter.entry((a.min(b), a.max(b))).or_default().push((u, v));
            }
        }
        let inter = inter.into_iter().map(|((a, b), edges)| PairEdges { a, b, edges }).collect();
        Ok(PerturbationRecord { t, clustering, history, intra, inter })
    }
}

/// How one community (or community pair) is filled at a timestamp.
#[derive(Debug, Clone, PartialEq)]
pub enum Part {
    /// Reused verbatim from the previous timestamp.
    Fixed(Vec<Edge>),
    /// Drawn afresh.
    Sampled(PairKernel),
    /// Outside the requested focus; not computed.
    Skipped,
}

/// Deterministic part of one selective-perturbation step: clustering,
/// classification and, per community and community pair, either the edges
/// to reuse or the probabilities to sample from.
#[derive(Debug, Clone)]
pub struct StepPlan {
    pub t: usize,
    pub vertices: Vec<VertexId>,
    pub clustering: Clustering,
    pub history: MergeHistory,
    pub diff: CommunityDiff,
    pub intra: Vec<(u32, Part)>,
    pub inter: Vec<((u32, u32), Part)>,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub graph: Graph,
    pub record: PerturbationRecord,
    pub diff: CommunityDiff,
}

/// Raw-id symmetric difference of two edge sets.
pub(crate) fn changed_links(prev: &Graph, cur: &Graph) -> Vec<Edge> {
    let a = prev.raw_edge_set();
    let b = cur.raw_edge_set();
    let mut out: Vec<Edge> = a.symmetric_difference(&b).copied().collect();
    out.sort_unstable();
    out
}

/// Builds the plan for timestamp `t`. With `focus`, only communities that
/// contain a focus vertex (and pairs touching them) are planned.
pub fn plan_step(
    g_t: &Graph,
    prev: Option<(&Graph, &PerturbationRecord)>,
    params: &PerturbParams,
    t: usize,
    focus: Option<&[VertexId]>,
) -> Result<StepPlan> {
    params.validate()?;
    let (clustering, history) = match (t, prev) {
        (0, None) => cluster_static(g_t),
        (0, Some(_)) => return Err(Error::Contract("previous state supplied at t = 0".into())),
        (_, None) => return Err(Error::Contract(format!("previous state missing at t = {t}"))),
        (_, Some((g_prev, rec))) => {
            if rec.clustering.ids() != g_prev.ids() {
                return Err(Error::Contract("previous record does not match the previous snapshot".into()));
            }
            recluster_dynamic(g_t, (&rec.clustering, &rec.history), &changed_links(g_prev, g_t), params.m)?
        }
    };
    let prev_rec = prev.map(|p| p.1);
    let diff = classify_communities(prev_rec.map(|r| &r.clustering), &clustering, params.theta)?;
    let focus: Option<HashSet<u32>> = focus.map(|f| f.iter().filter_map(|&v| clustering.community_of(v)).collect());
    let wanted = |c: u32| focus.as_ref().is_none_or(|f| f.contains(&c));

    let k = params.k;
    let intra: Vec<(u32, Part)> = (0..clustering.community_count() as u32)
        .into_par_iter()
        .map(|c| {
            if !wanted(c) {
                return (c, Part::Skipped);
            }
            if let (Some(p), Some(rec)) = (diff.previous_of(c), prev_rec) {
                let kept = rec
                    .community_edges(p)
                    .unwrap_or(&[])
                    .iter()
                    .copied()
                    .filter(|&(u, v)| clustering.community_of(u) == Some(c) && clustering.community_of(v) == Some(c))
                    .collect();
                return (c, Part::Fixed(kept));
            }
            let sub = g_t.induced_subgraph(&clustering.communities()[c as usize]);
            (c, Part::Sampled(walk_kernel(&sub, k)))
        })
        .collect();

    let groups: Vec<((u32, u32), Vec<Edge>)> = inter_edge_groups(g_t, &clustering)?.into_iter().collect();
    let inter: Vec<((u32, u32), Part)> = groups
        .into_par_iter()
        .map(|((a, b), cross)| {
            if !(wanted(a) || wanted(b)) {
                return ((a, b), Part::Skipped);
            }
            let reused = match (diff.previous_of(a), diff.previous_of(b), prev_rec) {
                (Some(pa), Some(pb), Some(rec)) => rec.pair_edges(pa, pb).map(|edges| {
                    edges
                        .iter()
                        .copied()
                        .filter(|&(u, v)| {
                            let (cu, cv) = (clustering.community_of(u), clustering.community_of(v));
                            (cu == Some(a) && cv == Some(b)) || (cu == Some(b) && cv == Some(a))
                        })
                        .collect()
                }),
                _ => None,
            };
            let part = match reused {
                Some(edges) => Part::Fixed(edges),
                None => Part::Sampled(inter_kernel(&clustering, (a, b), &cross, params.inter_form)),
            };
            ((a, b), part)
        })
        .collect();

    Ok(StepPlan { t, vertices: g_t.ids().to_vec(), clustering, history, diff, intra, inter })
}

impl StepPlan {
    /// Draws the random parts. Each community and pair has its own stream
    /// keyed by `(seed, t, id)`, so the result does not depend on scheduling.
    pub fn realize(&self, seed: u64) -> StepOutput {
        let t = self.t as u64;
        let intra: Vec<CommunityEdges> = self
            .intra
            .par_iter()
            .filter_map(|(c, part)| {
                let edges = match part {
                    Part::Fixed(e) => e.clone(),
                    Part::Sampled(kern) => kern.sample(&mut stream(seed, &[TAG_STEP, t, TAG_INTRA, *c as u64])),
                    Part::Skipped => return None,
                };
                Some(CommunityEdges { community: *c, edges })
            })
            .collect();
        let inter: Vec<PairEdges> = self
            .inter
            .par_iter()
            .filter_map(|&((a, b), ref part)| {
                let edges = match part {
                    Part::Fixed(e) => e.clone(),
                    Part::Sampled(kern) => {
                        kern.sample(&mut stream(seed, &[TAG_STEP, t, TAG_INTER, a as u64, b as u64]))
                    }
                    Part::Skipped => return None,
                };
                Some(PairEdges { a, b, edges })
            })
            .collect();
        let record = PerturbationRecord {
            t: self.t,
            clustering: self.clustering.clone(),
            history: self.history.clone(),
            intra,
            inter,
        };
        StepOutput { graph: record.graph(), record, diff: self.diff.clone() }
    }
}

impl StepPlan {
    /// Degrees of the realization [`Self::realize`] would produce for
    /// `seed`, without building the graph.
    pub fn sample_degrees(&self, seed: u64) -> Vec<u32> {
        let t = self.t as u64;
        let mut deg = vec![0u32; self.vertices.len()];
        let mut bump = |(u, v): Edge| {
            for x in [u, v] {
                let i = self.vertices.binary_search(&x).expect("planned vertex");
                deg[i] += 1;
            }
        };
        for (c, part) in &self.intra {
            match part {
                Part::Fixed(e) => e.iter().copied().for_each(&mut bump),
                Part::Sampled(kern) => {
                    kern.sample(&mut stream(seed, &[TAG_STEP, t, TAG_INTRA, *c as u64])).into_iter().for_each(&mut bump)
                }
                Part::Skipped => {}
            }
        }
        for &((a, b), ref part) in &self.inter {
            match part {
                Part::Fixed(e) => e.iter().copied().for_each(&mut bump),
                Part::Sampled(kern) => kern
                    .sample(&mut stream(seed, &[TAG_STEP, t, TAG_INTER, a as u64, b as u64]))
                    .into_iter()
                    .for_each(&mut bump),
                Part::Skipped => {}
            }
        }
        deg
    }
}

/// One timestamp of the selective pipeline: re-cluster, reuse unchanged
/// communities and pairs, perturb the rest.
pub fn linkmirage_step(
    g_t: &Graph,
    prev: Option<(&Graph, &PerturbationRecord)>,
    params: &PerturbParams,
    t: usize,
) -> Result<StepOutput> {
    Ok(plan_step(g_t, prev, params, t, None)?.realize(params.seed))
}

/// Runs the selective pipeline over a whole sequence, keeping every step's
/// record and classification.
pub fn linkmirage_trace(seq: &TemporalGraphSequence, params: &PerturbParams) -> Result<Vec<StepOutput>> {
    let mut out: Vec<StepOutput> = Vec::with_capacity(seq.len());
    for (t, g) in seq.snapshots().iter().enumerate() {
        let prev = (t > 0).then(|| (&seq[t - 1], &out[t - 1].record));
        let step = linkmirage_step(g, prev, params, t)?;
        out.push(step);
    }
    Ok(out)
}

pub fn linkmirage_sequence(seq: &TemporalGraphSequence, params: &PerturbParams) -> Result<Vec<Graph>> {
    Ok(linkmirage_trace(seq, params)?.into_iter().map(|s| s.graph).collect())
}
