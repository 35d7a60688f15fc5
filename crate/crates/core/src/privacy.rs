//! Privacy metrics: Bayesian posterior of a link given the perturbed
//! sequence, its entropy, and the TV distance between the original k-step
//! walk and the perturbed graph.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{union_graph, Graph, TemporalGraphSequence, VertexId};
use crate::markov::{matrix_power, transition_matrix, tv_distance, tv_distance_common, TransitionMatrix};
use crate::perturb::{
    hay_perturb, inter_edge_groups, plan_step, static_plan, Edge, Mechanism, PairKernel, Part, PerturbParams,
    PerturbationRecord, StepPlan,
};
use crate::rng::{derive_seed, stream, TAG_SAMPLE};

const PRIOR_FLOOR: f64 = 0.01;
const PRIOR_CEILING: f64 = 0.99;
const BOOTSTRAP_REPLICATES: usize = 200;

/// The link `(u, v)` at timestamp `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkQuery {
    pub t: usize,
    pub u: VertexId,
    pub v: VertexId,
    pub truth: Option<bool>,
}

impl LinkQuery {
    pub fn new(t: usize, u: VertexId, v: VertexId) -> Self {
        LinkQuery { t, u, v, truth: None }
    }

    fn validate<'s>(&self, seq: &'s TemporalGraphSequence) -> Result<&'s Graph> {
        if self.u == self.v {
            return Err(Error::invalid("a link query needs two distinct vertices"));
        }
        let g = seq
            .get(self.t)
            .ok_or_else(|| Error::invalid(format!("timestamp {} is past the end of the sequence", self.t)))?;
        for x in [self.u, self.v] {
            if !g.contains(x) {
                return Err(Error::UnknownVertex(x));
            }
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scorer {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriorModel {
    /// The adversary knows the snapshot except the queried link and scores
    /// it by calibrated common neighbours.
    WorstCase,
    /// Same calibration with another similarity score.
    LinkPrediction(Scorer),
    /// A fixed prior, mostly for experiments.
    Fixed(f64),
}

fn pair_score(g: &Graph, a: usize, b: usize, scorer: Scorer) -> f64 {
    let (na, nb) = (g.neighbors(a), g.neighbors(b));
    let (mut i, mut j) = (0, 0);
    let (mut common, mut aa) = (0usize, 0.0);
    while i < na.len() && j < nb.len() {
        match na[i].cmp(&nb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                let d = g.degree(na[i] as usize) as f64;
                if d > 1.0 {
                    aa += 1.0 / d.ln();
                }
                i += 1;
                j += 1;
            }
        }
    }
    match scorer {
        Scorer::CommonNeighbors => common as f64,
        Scorer::Jaccard => {
            let union = na.len() + nb.len() - common;
            if union == 0 {
                0.0
            } else {
                common as f64 / union as f64
            }
        }
        Scorer::AdamicAdar => aa,
    }
}

/// Logistic map from a pair score to an edge probability, fitted on every
/// vertex pair of one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub scorer: Scorer,
    pub intercept: f64,
    pub slope: f64,
}

impl Calibration {
    /// Weighted logistic regression of edge presence on the score. Pairs
    /// with no common neighbour all score 0 and are folded into two
    /// weighted points, so every pair is used without enumerating them.
    pub fn fit(g: &Graph, scorer: Scorer) -> Self {
        let n = g.vertex_count();
        let mut points: Vec<(f64, f64, f64)> = Vec::new(); // (score, label, weight)
        let mut seen = vec![u32::MAX; n];
        let mut positive_pairs = 0usize;
        let mut positive_edges = 0usize;
        for a in 0..n {
            let mut partners: Vec<u32> = Vec::new();
            for &w in g.neighbors(a) {
                for &b in g.neighbors(w as usize) {
                    if (b as usize) > a && seen[b as usize] != a as u32 {
                        seen[b as usize] = a as u32;
                        partners.push(b);
                    }
                }
            }
            for b in partners {
                let label = g.has_edge_index(a, b as usize);
                points.push((pair_score(g, a, b as usize, scorer), f64::from(u8::from(label)), 1.0));
                positive_pairs += 1;
                positive_edges += usize::from(label);
            }
        }
        let total_pairs = n * n.saturating_sub(1) / 2;
        let zero_pairs = total_pairs - positive_pairs;
        let zero_edges = g.edge_count() - positive_edges;
        if zero_edges > 0 {
            points.push((0.0, 1.0, zero_edges as f64));
        }
        if zero_pairs > zero_edges {
            points.push((0.0, 0.0, (zero_pairs - zero_edges) as f64));
        }
        let (intercept, slope) = logistic_fit(&points);
        Calibration { scorer, intercept, slope }
    }

    pub fn probability(&self, score: f64) -> f64 {
        let z = self.intercept + self.slope * score;
        (1.0 / (1.0 + (-z).exp())).clamp(PRIOR_FLOOR, PRIOR_CEILING)
    }

    pub fn predict(&self, g: &Graph, u: VertexId, v: VertexId) -> Result<f64> {
        let a = g.index_of(u).ok_or(Error::UnknownVertex(u))?;
        let b = g.index_of(v).ok_or(Error::UnknownVertex(v))?;
        Ok(self.probability(pair_score(g, a, b, self.scorer)))
    }
}

/// Newton iterations for a two-parameter weighted logistic regression with
/// a small ridge on the slope.
fn logistic_fit(points: &[(f64, f64, f64)]) -> (f64, f64) {
    const RIDGE: f64 = 1e-3;
    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, -RIDGE * b1, 0.0, 0.0, RIDGE);
        for &(x, y, w) in points {
            let p = 1.0 / (1.0 + (-(b0 + b1 * x)).exp());
            let r = w * (y - p);
            let s = w * p * (1.0 - p);
            g0 += r;
            g1 += r * x;
            h00 += s;
            h01 += s * x;
            h11 += s * x * x;
        }
        let h00 = h00 + 1e-12;
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-300 {
            break;
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        // damp very large steps on (nearly) separable data
        let scale = (10.0 / d0.abs().max(d1.abs()).max(10.0)).min(1.0);
        b0 += scale * d0;
        b1 += scale * d1;
        if d0.abs().max(d1.abs()) < 1e-10 {
            break;
        }
    }
    (b0, b1)
}

/// Prior belief in the queried link, from snapshot `t` with the link itself
/// removed, clipped to `[0.01, 0.99]`.
pub fn prior_probability(query: &LinkQuery, model: &PriorModel, seq: &TemporalGraphSequence) -> Result<f64> {
    let g = query.validate(seq)?;
    let scorer = match *model {
        PriorModel::Fixed(p) => {
            return if p > 0.0 && p < 1.0 {
                Ok(p)
            } else {
                Err(Error::invalid(format!("fixed prior {p} outside (0, 1)")))
            };
        }
        PriorModel::WorstCase => Scorer::CommonNeighbors,
        PriorModel::LinkPrediction(s) => s,
    };
    let without = g.with_edge(query.u, query.v, false)?;
    Calibration::fit(&without, scorer).predict(&without, query.u, query.v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEstimate {
    pub probability: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub prior: f64,
    /// Some snapshot matched the observation in neither hypothesis; the
    /// error was widened.
    pub degenerate: bool,
}

impl PosteriorEstimate {
    /// `|posterior − prior|`.
    pub fn prior_gap(&self) -> f64 {
        (self.probability - self.prior).abs()
    }
}

/// What the adversary observes about the queried pair in one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct LocalFeature {
    present: bool,
    deg_u: u32,
    deg_v: u32,
}

fn observe(g: &Graph, u: VertexId, v: VertexId) -> Option<LocalFeature> {
    let a = g.index_of(u)?;
    let b = g.index_of(v)?;
    Some(LocalFeature { present: g.has_edge_index(a, b), deg_u: g.degree(a) as u32, deg_v: g.degree(b) as u32 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Touch {
    Both,
    U,
    V,
}

/// Independent pairs that can change the local feature, plus the edges
/// that are certain.
#[derive(Debug, Clone, Default)]
struct LocalModel {
    fixed: (bool, u32, u32),
    random: Vec<(Touch, f64)>,
}

impl LocalModel {
    fn touch(u: VertexId, v: VertexId, e: Edge) -> Option<Touch> {
        let hits_u = e.0 == u || e.1 == u;
        let hits_v = e.0 == v || e.1 == v;
        match (hits_u, hits_v) {
            (true, true) => Some(Touch::Both),
            (true, false) => Some(Touch::U),
            (false, true) => Some(Touch::V),
            _ => None,
        }
    }

    fn add_fixed(&mut self, u: VertexId, v: VertexId, edges: &[Edge]) {
        for &e in edges {
            match Self::touch(u, v, e) {
                Some(Touch::Both) => {
                    self.fixed.0 = true;
                    self.fixed.1 += 1;
                    self.fixed.2 += 1;
                }
                Some(Touch::U) => self.fixed.1 += 1,
                Some(Touch::V) => self.fixed.2 += 1,
                None => {}
            }
        }
    }

    fn add_kernel(&mut self, u: VertexId, v: VertexId, kern: &PairKernel) {
        for (a, b, p) in kern.pairs_touching(u, v) {
            if let Some(t) = Self::touch(u, v, (a, b)) {
                if p >= 1.0 {
                    self.add_fixed(u, v, &[(a, b)]);
                } else {
                    self.random.push((t, p));
                }
            }
        }
    }

    fn from_plan(plan: &StepPlan, u: VertexId, v: VertexId) -> Self {
        let mut m = LocalModel::default();
        let parts = plan.intra.iter().map(|(_, p)| p).chain(plan.inter.iter().map(|(_, p)| p));
        for part in parts {
            match part {
                Part::Fixed(e) => m.add_fixed(u, v, e),
                Part::Sampled(k) => m.add_kernel(u, v, k),
                Part::Skipped => {}
            }
        }
        m
    }

    fn matches<R: Rng + ?Sized>(&self, target: LocalFeature, n: usize, rng: &mut R) -> usize {
        let mut hits = 0;
        for _ in 0..n {
            let (mut present, mut du, mut dv) = self.fixed;
            for &(t, p) in &self.random {
                if rng.random::<f64>() < p {
                    match t {
                        Touch::Both => {
                            present = true;
                            du += 1;
                            dv += 1;
                        }
                        Touch::U => du += 1,
                        Touch::V => dv += 1,
                    }
                }
            }
            hits += usize::from(LocalFeature { present, deg_u: du, deg_v: dv } == target);
        }
        hits
    }
}

/// Everything a posterior computation needs besides the query.
#[derive(Debug, Clone, Copy)]
pub struct PosteriorSetup<'a> {
    pub seq: &'a TemporalGraphSequence,
    /// Observed perturbed snapshots, aligned with `seq`.
    pub perturbed: &'a [Graph],
    pub mechanism: Mechanism,
    pub params: PerturbParams,
    pub n_samples: usize,
}

/// `seq` with the link forced present (or absent) wherever both endpoints
/// exist.
fn hypothesis_world(seq: &TemporalGraphSequence, u: VertexId, v: VertexId, present: bool) -> Result<Vec<Graph>> {
    seq.snapshots()
        .iter()
        .map(|g| if g.contains(u) && g.contains(v) { g.with_edge(u, v, present) } else { Ok(g.clone()) })
        .collect()
}

/// Local models for every snapshot of one hypothesis world. Selective
/// perturbation at `t` is conditioned on the observed output at `t − 1`,
/// split by the world's own clustering.
fn world_models(
    world: &[Graph],
    observed: &[Graph],
    mechanism: Mechanism,
    params: &PerturbParams,
    u: VertexId,
    v: VertexId,
) -> Result<Vec<Option<LocalModel>>> {
    match mechanism {
        Mechanism::Selective => {
            let mut out = Vec::with_capacity(world.len());
            let mut prev: Option<(Graph, PerturbationRecord)> = None;
            for (t, g) in world.iter().enumerate() {
                let plan = plan_step(g, prev.as_ref().map(|(g, r)| (g, r)), params, t, Some(&[u, v]))?;
                out.push((g.contains(u) && g.contains(v)).then(|| LocalModel::from_plan(&plan, u, v)));
                let pairs: Vec<(u32, u32)> = inter_edge_groups(g, &plan.clustering)?.into_keys().collect();
                let obs = &observed[t];
                if obs.ids() != g.ids() {
                    return Err(Error::VertexSetMismatch);
                }
                let rec = PerturbationRecord::from_observed(t, obs, plan.clustering, plan.history, &pairs)?;
                prev = Some((g.clone(), rec));
            }
            Ok(out)
        }
        Mechanism::Static => world
            .par_iter()
            .map(|g| {
                if !(g.contains(u) && g.contains(v)) {
                    return Ok(None);
                }
                let mut m = LocalModel::default();
                m.add_kernel(u, v, &static_plan(g, params.k)?);
                Ok(Some(m))
            })
            .collect(),
        Mechanism::DeleteInsert => Ok(vec![None; world.len()]),
    }
}

/// Posterior of the queried pair at every timestamp `0..=last`, each using
/// the observations up to that timestamp.
pub fn posterior_series(
    setup: &PosteriorSetup<'_>,
    u: VertexId,
    v: VertexId,
    last: usize,
    model: &PriorModel,
    seed: u64,
) -> Result<Vec<PosteriorEstimate>> {
    let PosteriorSetup { seq, perturbed, mechanism, params, n_samples } = *setup;
    if n_samples < 100 {
        return Err(Error::invalid("posterior estimation needs at least 100 samples"));
    }
    if perturbed.len() < last + 1 || seq.len() < last + 1 {
        return Err(Error::DimensionMismatch { left: seq.len().min(perturbed.len()), right: last + 1 });
    }
    LinkQuery::new(last, u, v).validate(seq)?;
    let horizon = last + 1;
    let truncated = TemporalGraphSequence::new(seq.snapshots()[..horizon].to_vec())?;
    let observed = &perturbed[..horizon];

    // hits[h][t]: samples matching the observation under hypothesis h
    let mut hits = [vec![None; horizon], vec![None; horizon]];
    for (h, present) in [(0usize, false), (1usize, true)] {
        let world = hypothesis_world(&truncated, u, v, present)?;
        let targets: Vec<Option<LocalFeature>> = observed.iter().map(|g| observe(g, u, v)).collect();
        let counts: Vec<Option<usize>> = if mechanism == Mechanism::DeleteInsert {
            world
                .par_iter()
                .enumerate()
                .map(|(t, g)| -> Result<Option<usize>> {
                    let (Some(target), true) = (targets[t], g.contains(u) && g.contains(v)) else {
                        return Ok(None);
                    };
                    let mut rng = stream(seed, &[TAG_SAMPLE, h as u64, t as u64]);
                    let mut c = 0;
                    for _ in 0..n_samples {
                        let s = hay_perturb(g, None, &mut rng)?;
                        c += usize::from(observe(&s, u, v) == Some(target));
                    }
                    Ok(Some(c))
                })
                .collect::<Result<_>>()?
        } else {
            let models = world_models(&world, observed, mechanism, &params, u, v)?;
            models
                .par_iter()
                .enumerate()
                .map(|(t, m)| match (m, targets[t]) {
                    (Some(m), Some(target)) => {
                        Some(m.matches(target, n_samples, &mut stream(seed, &[TAG_SAMPLE, h as u64, t as u64])))
                    }
                    _ => None,
                })
                .collect()
        };
        hits[h] = counts;
    }

    let mut out = Vec::with_capacity(horizon);
    let mut boot_rng = stream(seed, &[TAG_SAMPLE, 0xB007]);
    for t in 0..horizon {
        let query = LinkQuery::new(t, u, v);
        let prior = if truncated[t].contains(u) && truncated[t].contains(v) {
            prior_probability(&query, model, &truncated)?
        } else {
            continue;
        };
        let factors: Vec<(usize, usize)> = (0..=t).filter_map(|s| Some((hits[0][s]?, hits[1][s]?))).collect();
        let n = n_samples as f64;
        let smooth = |c: usize| ((c as f64 + 1.0) / (n + 2.0)).ln();
        let log_ratio: f64 = factors.iter().map(|&(c0, c1)| smooth(c1) - smooth(c0)).sum();
        let probability = bayes(prior, log_ratio);
        let degenerate = factors.iter().any(|&(c0, c1)| c0 == 0 && c1 == 0);

        let mut replicates = Vec::with_capacity(BOOTSTRAP_REPLICATES);
        for _ in 0..BOOTSTRAP_REPLICATES {
            let mut lr = 0.0;
            for &(c0, c1) in &factors {
                let draw = |c: usize, rng: &mut crate::rng::Stream| {
                    let p = (c as f64 + 1.0) / (n + 2.0);
                    Binomial::new(n_samples as u64, p).expect("valid binomial").sample(rng) as usize
                };
                let b1 = draw(c1, &mut boot_rng);
                let b0 = draw(c0, &mut boot_rng);
                lr += smooth(b1) - smooth(b0);
            }
            replicates.push(bayes(prior, lr));
        }
        let mu = replicates.iter().sum::<f64>() / replicates.len() as f64;
        let mut se = (replicates.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (replicates.len() - 1) as f64).sqrt();
        let band = 0.5 * probability.min(1.0 - probability);
        if degenerate {
            se = se.max(band + 0.02);
        }
        // keep probability ± 2·se inside [−0.05, 1.05]
        se = se.min(band + 0.025);
        out.push(PosteriorEstimate { probability, standard_error: se, samples: n_samples, prior, degenerate });
    }
    Ok(out)
}

fn bayes(prior: f64, log_likelihood_ratio: f64) -> f64 {
    let logit = (prior / (1.0 - prior)).ln() + log_likelihood_ratio;
    1.0 / (1.0 + (-logit).exp())
}

/// Posterior of `query` given the perturbed snapshots up to `query.t`.
pub fn posterior_probability(
    query: &LinkQuery,
    setup: &PosteriorSetup<'_>,
    model: &PriorModel,
    seed: u64,
) -> Result<PosteriorEstimate> {
    posterior_series(setup, query.u, query.v, query.t, model, seed)?.pop().ok_or(Error::UnknownVertex(query.u))
}

/// Binary entropy in bits.
pub fn indistinguishability(posterior: f64) -> f64 {
    if posterior <= 0.0 || posterior >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - posterior;
    -(posterior * posterior.log2() + q * q.log2())
}

/// Delta-method standard error of the entropy of an estimate.
fn entropy_se(est: &PosteriorEstimate) -> f64 {
    let p = est.probability.clamp(1e-12, 1.0 - 1e-12);
    ((1.0 - p) / p).log2().abs() * est.standard_error
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub t: usize,
    pub mechanism: Mechanism,
    pub posterior: f64,
    pub entropy: f64,
    pub entropy_se: f64,
}

/// Entropy of the queried link over time for each supplied mechanism's
/// perturbed sequence.
#[allow(clippy::too_many_arguments)]
pub fn indistinguishability_series(
    seq: &TemporalGraphSequence,
    runs: &[(Mechanism, &[Graph])],
    u: VertexId,
    v: VertexId,
    model: &PriorModel,
    params: &PerturbParams,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<EntropyRow>> {
    let mut rows = Vec::new();
    for &(mechanism, perturbed) in runs {
        let setup = PosteriorSetup { seq, perturbed, mechanism, params: *params, n_samples };
        let last = seq.len().min(perturbed.len()) - 1;
        let series = posterior_series(&setup, u, v, last, model, derive_seed(seed, &[mechanism as u64]))?;
        let present = (0..=last).filter(|&t| seq[t].contains(u) && seq[t].contains(v));
        for (t, est) in present.zip(&series) {
            rows.push(EntropyRow {
                t,
                mechanism,
                posterior: est.probability,
                entropy: indistinguishability(est.probability),
                entropy_se: entropy_se(est),
            });
        }
    }
    Ok(rows)
}

/// `‖P^k − P'‖_TV` for graphs over the same vertices.
pub fn anti_aggregation(g: &Graph, g_prime: &Graph, k: usize) -> Result<f64> {
    if g.ids() != g_prime.ids() {
        return Err(Error::VertexSetMismatch);
    }
    tv_distance(&matrix_power(&transition_matrix(g), k)?, &transition_matrix(g_prime))
}

/// Anti-aggregation against the union of all perturbed snapshots so far,
/// compared over the vertices both sides share. Returns the distance and
/// the number of shared vertices.
pub fn anti_aggregation_aggregated(perturbed: &[Graph], g_t: &Graph, k: usize) -> Result<(f64, usize)> {
    let union = union_graph(perturbed)?;
    let p_k = matrix_power(&transition_matrix(g_t), k)?;
    Ok(tv_distance_common(&p_k, &transition_matrix(&union)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `‖P^k − P'‖_TV ≤ k‖P − P̂‖_TV` for an estimate `P̂` with `P̂^k ≈ P'`.
pub fn estimation_error_bound_check_matrices(
    p: &TransitionMatrix,
    p_prime: &TransitionMatrix,
    p_hat: &TransitionMatrix,
    k: usize,
) -> Result<BoundCheck> {
    let hat_k = matrix_power(p_hat, k)?;
    let (a, b) = (hat_k.to_dense(), p_prime.to_dense());
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let gap = a.iter().zip(&b).flat_map(|(x, y)| x.iter().zip(y).map(|(s, t)| (s - t).abs())).fold(0.0, f64::max);
    if gap > 1e-6 {
        return Err(Error::invalid(format!("estimate does not reproduce the perturbed matrix (max gap {gap:e})")));
    }
    let lhs = tv_distance(&matrix_power(p, k)?, p_prime)?;
    let rhs = k as f64 * tv_distance(p, p_hat)?;
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

pub fn estimation_error_bound_check(
    g: &Graph,
    g_prime: &Graph,
    p_hat: &TransitionMatrix,
    k: usize,
) -> Result<BoundCheck> {
    if g.ids() != g_prime.ids() {
        return Err(Error::VertexSetMismatch);
    }
    estimation_error_bound_check_matrices(&transition_matrix(g), &transition_matrix(g_prime), p_hat, k)
}

/// Frequency of each feature over a set of graphs, used by small exact
/// checks.
#[doc(hidden)]
pub fn feature_histogram(graphs: &[(Graph, f64)], u: VertexId, v: VertexId) -> HashMap<(bool, u32, u32), f64> {
    let mut h = HashMap::new();
    for (g, w) in graphs {
        if let Some(f) = observe(g, u, v) {
            *h.entry((f.present, f.deg_u, f.deg_v)).or_insert(0.0) += w;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(indistinguishability(0.5), 1.0);
        assert_eq!(indistinguishability(0.0), 0.0);
        assert_eq!(indistinguishability(1.0), 0.0);
        assert!((indistinguishability(0.1) - 0.4689955935892812).abs() < 1e-12);
    }

    #[test]
    fn bayes_with_equal_likelihoods_is_prior() {
        for p in [0.01, 0.3, 0.77] {
            assert!((bayes(p, 0.0) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn prior_clips() {
        // sparse path: no common neighbours
        let path = Graph::from_edges((0..300u64).map(|i| (i, i + 1))).unwrap();
        let seq = TemporalGraphSequence::new(vec![path]).unwrap();
        let p = prior_probability(&LinkQuery::new(0, 0, 17), &PriorModel::WorstCase, &seq).unwrap();
        assert_eq!(p, 0.01);
        // dense clique: every pair shares all other vertices
        let clique = Graph::from_edges((0..12u64).flat_map(|i| (i + 1..12).map(move |j| (i, j)))).unwrap();
        let seq = TemporalGraphSequence::new(vec![clique]).unwrap();
        let p = prior_probability(&LinkQuery::new(0, 0, 1), &PriorModel::WorstCase, &seq).unwrap();
        assert!(p > 0.95, "{p}");
        assert!(prior_probability(&LinkQuery::new(0, 0, 99), &PriorModel::WorstCase, &seq).is_err());
    }

    #[test]
    fn k1_identity_anti_aggregation_is_zero() {
        let g = Graph::from_edges([(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        assert_eq!(anti_aggregation(&g, &g, 1).unwrap(), 0.0);
        let (agg, common) = anti_aggregation_aggregated(std::slice::from_ref(&g), &g, 1).unwrap();
        assert_eq!((agg, common), (0.0, 4));
    }
}
