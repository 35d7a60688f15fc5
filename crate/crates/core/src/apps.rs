//! Application-level evaluations on perturbed sequences: worst-case
//! anonymity attack probability, de-anonymization sampling probability and a
//! simplified random-route Sybil defense.

use std::collections::{BTreeSet, HashSet};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{k_hop_graph, Graph, TemporalGraphSequence, VertexId};
use crate::perturb::{edge, Edge};
use crate::rng::{derive_seed, stream, Stream};

/// `1 − (1 − f)^{|∪_{s≤t} N'_s(v)|}` for every `t`.
pub fn attack_probability(perturbed: &[Graph], v: VertexId, f: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::invalid(format!("malicious fraction {f} outside [0, 1]")));
    }
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    perturbed
        .iter()
        .map(|g| {
            let i = g.index_of(v).ok_or(Error::UnknownVertex(v))?;
            seen.extend(g.neighbors(i).iter().map(|&j| g.id(j as usize)));
            Ok(1.0 - (1.0 - f).powi(seen.len() as i32))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingProbability {
    pub value: f64,
    pub perturbed_edges: usize,
    pub envelope_edges: usize,
    /// Perturbed edges joining vertices more than `k` hops apart in the
    /// original snapshot.
    pub out_of_envelope: usize,
}

/// Union of perturbed edges over the union of `k`-hop edges.
pub fn sampling_probability(perturbed: &[Graph], seq: &TemporalGraphSequence, k: usize) -> Result<SamplingProbability> {
    if perturbed.len() != seq.len() {
        return Err(Error::DimensionMismatch { left: seq.len(), right: perturbed.len() });
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let envelopes: Vec<HashSet<Edge>> = seq.snapshots().par_iter().map(|g| k_hop_graph(g, k).raw_edge_set()).collect();
    let mut envelope: HashSet<Edge> = HashSet::new();
    let mut union: HashSet<Edge> = HashSet::new();
    let mut outside: HashSet<Edge> = HashSet::new();
    for (env, gp) in envelopes.iter().zip(perturbed) {
        for e in gp.raw_edges() {
            if !env.contains(&e) {
                outside.insert(e);
            }
            union.insert(e);
        }
        envelope.extend(env.iter().copied());
    }
    if envelope.is_empty() {
        return Err(Error::invalid("the k-hop envelope is empty"));
    }
    Ok(SamplingProbability {
        value: union.len() as f64 / envelope.len() as f64,
        perturbed_edges: union.len(),
        envelope_edges: envelope.len(),
        out_of_envelope: outside.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SybilScenario {
    pub honest: Graph,
    pub sybil_size: usize,
    pub attack_edges: usize,
    pub walk_length: usize,
    pub routes: usize,
    /// Number of honest verifiers to average over (all when larger).
    pub verifiers: usize,
}

/// Honest region, a random Sybil region with matching average degree, and
/// the attack edges between them.
#[derive(Debug, Clone, PartialEq)]
pub struct SybilWorld {
    pub graph: Graph,
    pub honest: Vec<VertexId>,
    pub sybil: Vec<VertexId>,
    pub attack_edges_before: usize,
    pub honest_connected: bool,
}

impl SybilWorld {
    pub fn is_sybil(&self, v: VertexId) -> bool {
        self.sybil.binary_search(&v).is_ok()
    }
}

impl SybilScenario {
    pub fn validate(&self) -> Result<()> {
        if self.attack_edges == 0 || self.walk_length == 0 || self.routes == 0 || self.verifiers == 0 {
            return Err(Error::invalid("attack edges, walk length, routes and verifiers must be positive"));
        }
        if self.honest.vertex_count() == 0 || self.sybil_size == 0 {
            return Err(Error::invalid("both regions need vertices"));
        }
        if self.attack_edges > self.honest.vertex_count() * self.sybil_size {
            return Err(Error::invalid("more attack edges than honest-Sybil pairs"));
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<SybilWorld> {
        self.validate()?;
        let mut rng = stream(seed, &[0x5942]);
        let honest = self.honest.ids().to_vec();
        let offset = honest.last().copied().unwrap_or(0) + 1;
        let s = self.sybil_size;
        let avg_degree = 2.0 * self.honest.edge_count() as f64 / honest.len() as f64;
        let p = if s > 1 { (avg_degree / (s - 1) as f64).min(1.0) } else { 0.0 };
        let sybil_region = crate::synth::gnp(s, p, offset, &mut rng);
        let mut edges = self.honest.raw_edges();
        edges.extend(sybil_region.raw_edges());
        let mut attack: HashSet<Edge> = HashSet::new();
        while attack.len() < self.attack_edges {
            let h = honest[rng.random_range(0..honest.len())];
            let y = offset + rng.random_range(0..s) as VertexId;
            attack.insert(edge(h, y));
        }
        let mut attack: Vec<Edge> = attack.into_iter().collect();
        attack.sort_unstable();
        edges.extend(attack);
        let graph = Graph::new(honest.iter().copied().chain(sybil_region.ids().iter().copied()), edges)?;
        Ok(SybilWorld {
            graph,
            sybil: sybil_region.ids().to_vec(),
            honest,
            attack_edges_before: self.attack_edges,
            honest_connected: self.honest.is_connected(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SybilResult {
    pub false_positive_rate: f64,
    pub attack_edges_before: usize,
    pub attack_edges_after: usize,
    pub honest_connected: bool,
}

/// Per-vertex routing table: a random permutation of neighbour slots. A
/// route entering through slot `i` leaves through `table[i]`.
fn routing_tables(g: &Graph, rng: &mut Stream) -> Vec<Vec<u32>> {
    (0..g.vertex_count())
        .map(|v| {
            let mut perm: Vec<u32> = (0..g.degree(v) as u32).collect();
            perm.shuffle(rng);
            perm
        })
        .collect()
}

/// Undirected last edge of each of `r` routes of length `w` from `start`.
fn route_tails(g: &Graph, tables: &[Vec<u32>], start: usize, w: usize, r: usize, rng: &mut Stream) -> HashSet<Edge> {
    let mut tails = HashSet::new();
    let d = g.degree(start);
    if d == 0 {
        return tails;
    }
    for _ in 0..r {
        let mut prev = start;
        let mut cur = g.neighbors(start)[rng.random_range(0..d)] as usize;
        for _ in 1..w {
            let slot = g.neighbors(cur).binary_search(&(prev as u32)).expect("symmetric adjacency");
            let next = g.neighbors(cur)[tables[cur][slot] as usize] as usize;
            prev = cur;
            cur = next;
        }
        tails.insert(edge(g.id(prev), g.id(cur)));
    }
    tails
}

/// Runs random routes on `g_prime` (the perturbed honest + Sybil graph) and
/// measures how many honest suspects each honest verifier rejects.
pub fn sybil_eval(scenario: &SybilScenario, world: &SybilWorld, g_prime: &Graph, seed: u64) -> Result<SybilResult> {
    scenario.validate()?;
    if g_prime.ids() != world.graph.ids() {
        return Err(Error::VertexSetMismatch);
    }
    let tables = routing_tables(g_prime, &mut stream(seed, &[0x7AB1E5]));
    let honest_idx: Vec<usize> = world.honest.iter().map(|&v| g_prime.index_of(v).expect("honest vertex")).collect();
    let tails: Vec<HashSet<Edge>> = honest_idx
        .par_iter()
        .map(|&i| {
            let mut rng = stream(seed, &[0x7A11, i as u64]);
            route_tails(g_prime, &tables, i, scenario.walk_length, scenario.routes, &mut rng)
        })
        .collect();
    let h = honest_idx.len();
    let verifiers: Vec<usize> = if scenario.verifiers >= h {
        (0..h).collect()
    } else {
        let mut rng = stream(derive_seed(seed, &[0x7E41]), &[]);
        let mut v = index::sample(&mut rng, h, scenario.verifiers).into_vec();
        v.sort_unstable();
        v
    };
    let rates: Vec<f64> = verifiers
        .par_iter()
        .map(|&vi| {
            let mine = &tails[vi];
            let rejected = (0..h).filter(|&si| si != vi && tails[si].is_disjoint(mine)).count();
            rejected as f64 / h as f64
        })
        .collect();
    let attack_edges_after =
        g_prime.raw_edges().into_iter().filter(|&(a, b)| world.is_sybil(a) != world.is_sybil(b)).count();
    Ok(SybilResult {
        false_positive_rate: crate::markov::mean(&rates),
        attack_edges_before: world.attack_edges_before,
        attack_edges_after,
        honest_connected: world.honest_connected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_probability_examples() {
        let g0 = Graph::from_edges([(0, 1), (2, 3)]).unwrap();
        let g1 = Graph::from_edges([(0, 2), (1, 3)]).unwrap();
        let s = attack_probability(&[g0.clone(), g1], 0, 0.1).unwrap();
        assert!((s[0] - 0.1).abs() < 1e-15);
        assert!((s[1] - 0.19).abs() < 1e-15);
        assert!(attack_probability(&[g0], 9, 0.1).is_err());
    }

    #[test]
    fn sampling_probability_of_identity() {
        let g = Graph::from_edges([(0, 1), (1, 2), (2, 3)]).unwrap();
        let seq = TemporalGraphSequence::new(vec![g.clone()]).unwrap();
        let sp = sampling_probability(&[g], &seq, 1).unwrap();
        assert_eq!(sp.value, 1.0);
        assert_eq!(sp.out_of_envelope, 0);
    }

    #[test]
    fn verifier_accepts_itself_and_fp_in_range() {
        let honest = crate::synth::random_connected(30, 0.15, &mut stream(1, &[]));
        let sc = SybilScenario { honest, sybil_size: 10, attack_edges: 3, walk_length: 8, routes: 5, verifiers: 100 };
        let world = sc.build(2).unwrap();
        assert_eq!(world.graph.vertex_count(), 40);
        let res = sybil_eval(&sc, &world, &world.graph, 3).unwrap();
        assert!((0.0..1.0).contains(&res.false_positive_rate));
        assert_eq!(res.attack_edges_after, 3);
    }
}
