//! Utility distance and its bound, degree preservation checks, spectral
//! diagnostics and standard graph analytics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::error::{Error, Result};
use crate::graph::{Graph, TemporalGraphSequence, VertexId};
use crate::markov::{mean, row_tv, transition_matrix, tv_distance, TransitionMatrix};
use crate::perturb::{plan_step, PerturbParams};
use crate::rng::{derive_seed, stream, TAG_SAMPLE};

pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub l: usize,
    pub per_t: Vec<f64>,
    pub aggregate: f64,
    /// Ratio cut of each snapshot under its clustering, when supplied.
    pub deltas: Vec<f64>,
    pub epsilon: Option<f64>,
    pub bound: Option<f64>,
}

impl UtilityReport {
    /// Attaches the per-community distance and ratio cuts, and the bound
    /// they imply.
    pub fn with_bound(mut self, epsilon: f64, deltas: Vec<f64>) -> Result<Self> {
        self.bound = Some(ud_upper_bound(epsilon, &deltas, self.l)?);
        self.epsilon = Some(epsilon);
        self.deltas = deltas;
        Ok(self)
    }
}

/// Mean row TV between `l`-step walks on `g` and on `g_prime`.
pub fn utility_distance_at(g: &Graph, g_prime: &Graph, l: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::invalid("l must be at least 1"));
    }
    if g.ids() != g_prime.ids() {
        return Err(Error::VertexSetMismatch);
    }
    let p = crate::markov::matrix_power(&transition_matrix(g), l)?;
    let q = crate::markov::matrix_power(&transition_matrix(g_prime), l)?;
    tv_distance(&p, &q)
}

pub fn utility_distance(seq: &TemporalGraphSequence, perturbed: &[Graph], l: usize) -> Result<UtilityReport> {
    if seq.len() != perturbed.len() {
        return Err(Error::DimensionMismatch { left: seq.len(), right: perturbed.len() });
    }
    let per_t: Vec<f64> = seq
        .snapshots()
        .par_iter()
        .zip(perturbed)
        .map(|(g, gp)| utility_distance_at(g, gp, l))
        .collect::<Result<_>>()?;
    Ok(UtilityReport { l, aggregate: mean(&per_t), per_t, deltas: Vec::new(), epsilon: None, bound: None })
}

/// Inter-community edge count over vertex count.
pub fn ratio_cut(g: &Graph, c: &Clustering) -> Result<f64> {
    c.check_aligned(g)?;
    if g.vertex_count() == 0 {
        return Ok(0.0);
    }
    let cut = g.edges().filter(|&(a, b)| c.label(a as usize) != c.label(b as usize)).count();
    Ok(cut as f64 / g.vertex_count() as f64)
}

/// `(1/(T+1)) Σ_t 2l(ε + δ_t)`.
pub fn ud_upper_bound(epsilon: f64, deltas: &[f64], l: usize) -> Result<f64> {
    if epsilon < 0.0 || deltas.iter().any(|&d| d < 0.0) {
        return Err(Error::invalid("epsilon and ratio cuts must be nonnegative"));
    }
    if deltas.is_empty() {
        return Ok(0.0);
    }
    Ok(deltas.iter().map(|d| 2.0 * l as f64 * (epsilon + d)).sum::<f64>() / deltas.len() as f64)
}

/// Largest one-step TV distance between a community's induced subgraph in
/// `g` and the same vertices' induced subgraph in `g_prime`.
pub fn max_community_distance(g: &Graph, g_prime: &Graph, c: &Clustering) -> Result<f64> {
    c.check_aligned(g)?;
    if g.ids() != g_prime.ids() {
        return Err(Error::VertexSetMismatch);
    }
    let mut worst: f64 = 0.0;
    for members in c.communities() {
        let a = transition_matrix(&g.induced_subgraph(members));
        let b = transition_matrix(&g_prime.induced_subgraph(members));
        worst = worst.max(tv_distance(&a, &b)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStat {
    pub vertex: VertexId,
    pub degree: usize,
    pub mean: f64,
    pub sd: f64,
    pub z: f64,
}

/// Monte Carlo check that one selective perturbation of `g` (a single
/// snapshot) keeps every vertex's degree in expectation.
pub fn expected_degree_report(g: &Graph, params: &PerturbParams, trials: usize) -> Result<Vec<DegreeStat>> {
    if trials < 2 {
        return Err(Error::invalid("need at least two trials"));
    }
    let plan = plan_step(g, None, params, 0, None)?;
    let n = g.vertex_count();
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .fold(
            || (vec![0u64; n], vec![0u64; n]),
            |(mut s, mut s2), i| {
                let degs = plan.sample_degrees(derive_seed(params.seed, &[TAG_SAMPLE, i as u64]));
                for (v, &d) in degs.iter().enumerate() {
                    s[v] += d as u64;
                    s2[v] += (d as u64) * (d as u64);
                }
                (s, s2)
            },
        )
        .reduce(
            || (vec![0u64; n], vec![0u64; n]),
            |(mut a, mut a2), (b, b2)| {
                for v in 0..n {
                    a[v] += b[v];
                    a2[v] += b2[v];
                }
                (a, a2)
            },
        );
    let tn = trials as f64;
    Ok((0..n)
        .map(|v| {
            let mean = sum[v] as f64 / tn;
            let var = ((sum_sq[v] as f64 - tn * mean * mean) / (tn - 1.0)).max(0.0);
            let sd = var.sqrt();
            let degree = g.degree(v);
            let diff = mean - degree as f64;
            let z = if sd > 0.0 {
                diff / (sd / tn.sqrt())
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            };
            DegreeStat { vertex: g.id(v), degree, mean, sd, z }
        })
        .collect())
}

/// PageRank by power iteration; dangling vertices spread uniformly.
pub fn pagerank(g: &Graph, damping: f64, tol: f64) -> Result<Vec<f64>> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::invalid(format!("damping must be in (0, 1), got {damping}")));
    }
    let n = g.vertex_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    for _ in 0..MAX_ITERATIONS {
        let dangling: f64 = (0..n).filter(|&v| g.degree(v) == 0).map(|v| x[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let next: Vec<f64> = (0..n)
            .map(|v| {
                base + damping
                    * g.neighbors(v).iter().map(|&u| x[u as usize] / g.degree(u as usize) as f64).sum::<f64>()
            })
            .collect();
        let residual: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if residual < tol {
            let total: f64 = x.iter().sum();
            return Ok(x.into_iter().map(|v| v / total).collect());
        }
    }
    Err(Error::NonConvergence { what: "pagerank", iterations: MAX_ITERATIONS })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralMetrics {
    pub clustering_coefficient: f64,
    pub assortativity: f64,
    /// Assortativity was 0/0 (all edge endpoints share one degree, or fewer
    /// than two edges) and is reported as 0.
    pub assortativity_degenerate: bool,
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Global clustering coefficient and degree assortativity.
pub fn structural_metrics(g: &Graph) -> StructuralMetrics {
    // each triangle is seen once per edge
    let closed: usize =
        g.edges().map(|(a, b)| sorted_intersection(g.neighbors(a as usize), g.neighbors(b as usize))).sum();
    let triples: usize = (0..g.vertex_count()).map(|v| g.degree(v) * g.degree(v).saturating_sub(1) / 2).sum();
    let clustering_coefficient = if triples == 0 { 0.0 } else { closed as f64 / triples as f64 };

    let m = g.edge_count();
    let (mut sx, mut sxx, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in g.edges() {
        let (x, y) = (g.degree(a as usize) as f64, g.degree(b as usize) as f64);
        sx += x + y;
        sxx += x * x + y * y;
        sxy += 2.0 * x * y;
    }
    let count = 2.0 * m as f64;
    let (assortativity, degenerate) = if m < 2 {
        (0.0, true)
    } else {
        let mu = sx / count;
        let var = sxx / count - mu * mu;
        let cov = sxy / count - mu * mu;
        if var <= 1e-12 * mu * mu.max(1.0) {
            (0.0, true)
        } else {
            (cov / var, false)
        }
    };
    StructuralMetrics { clustering_coefficient, assortativity, assortativity_degenerate: degenerate }
}

/// `deg(v) / 2|E|`.
pub fn stationary_distribution(g: &Graph) -> Vec<f64> {
    let two_m = 2.0 * g.edge_count() as f64;
    (0..g.vertex_count()).map(|v| g.degree(v) as f64 / two_m).collect()
}

/// Second largest eigenvalue modulus of the walk matrix of a connected
/// graph, by power iteration on the square of its symmetrized form with the
/// top eigenvector projected out.
pub fn slem(g: &Graph) -> Result<f64> {
    let n = g.vertex_count();
    if n < 2 || g.edge_count() == 0 {
        return Err(Error::invalid("SLEM needs at least one edge"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let top: Vec<f64> = {
        let pi = stationary_distribution(g);
        pi.iter().map(|p| p.sqrt()).collect()
    };
    let apply = |x: &[f64]| -> Vec<f64> {
        // S = D^{-1/2} A D^{-1/2}
        (0..n)
            .map(|v| inv_sqrt[v] * g.neighbors(v).iter().map(|&u| inv_sqrt[u as usize] * x[u as usize]).sum::<f64>())
            .collect()
    };
    let deflate = |x: &mut Vec<f64>| {
        let d: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        for (xi, ti) in x.iter_mut().zip(&top) {
            *xi -= d * ti;
        }
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|a| *a /= norm);
        }
        norm
    };
    let mut rng = stream(0x51E4, &[n as u64]);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    if deflate(&mut x) == 0.0 {
        return Ok(0.0);
    }
    let mut estimate = 0.0;
    for _ in 0..200_000 {
        let mut y = apply(&apply(&x));
        let rayleigh: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        let norm = deflate(&mut y);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let converged = (rayleigh - estimate).abs() <= 1e-15 * rayleigh.abs().max(1e-300);
        estimate = rayleigh;
        x = y;
        if converged {
            break;
        }
    }
    Ok(estimate.max(0.0).sqrt().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixingTime {
    Converged(usize),
    /// Periodic chain or cap reached.
    NotConverged,
}

impl MixingTime {
    pub fn steps(self) -> Option<usize> {
        match self {
            MixingTime::Converged(r) => Some(r),
            MixingTime::NotConverged => None,
        }
    }
}

/// Smallest `r` with `max_v ‖P^r(v) − π‖_TV < ε`, by iterating all rows.
pub fn mixing_time(g: &Graph, epsilon: f64, lazy: bool) -> Result<MixingTime> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must be in (0, 1), got {epsilon}")));
    }
    if g.edge_count() == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !lazy && g.is_bipartite() {
        return Ok(MixingTime::NotConverged);
    }
    let mut p = transition_matrix(g);
    if lazy {
        p = p.lazy();
    }
    Ok(mixing_time_of(&p, &stationary_distribution(g), epsilon))
}

fn mixing_time_of(p: &TransitionMatrix, pi: &[f64], epsilon: f64) -> MixingTime {
    let n = p.dimension();
    let pi_row: Vec<(u32, f64)> = pi.iter().enumerate().map(|(i, &x)| (i as u32, x)).collect();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            let mut r = vec![0.0; n];
            r[v] = 1.0;
            r
        })
        .collect();
    for r in 1..=MAX_ITERATIONS {
        rows.par_iter_mut().for_each(|row| {
            let mut next = vec![0.0; n];
            for (k, &mass) in row.iter().enumerate() {
                if mass != 0.0 {
                    for &(j, q) in p.row(k) {
                        next[j as usize] += mass * q;
                    }
                }
            }
            *row = next;
        });
        let worst = rows
            .par_iter()
            .map(|row| {
                let sparse: Vec<(u32, f64)> =
                    row.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (i as u32, x)).collect();
                row_tv(&sparse, &pi_row)
            })
            .reduce(|| 0.0, f64::max);
        if worst < epsilon {
            return MixingTime::Converged(r);
        }
    }
    MixingTime::NotConverged
}

/// Both sides of the mixing-time and SLEM relations between an original
/// graph and its perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingBoundCheck {
    pub epsilon: f64,
    pub tau_original: usize,
    pub utility_distance: f64,
    /// `None` when `UD − ε ≤ 0` and the relations say nothing.
    pub evaluated: Option<MixingBoundSides>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingBoundSides {
    /// Mixing time of the perturbed graph at `UD − ε`; `None` if it never
    /// gets there.
    pub tau_perturbed: Option<usize>,
    pub mixing_holds: bool,
    pub slem_perturbed: f64,
    pub slem_lower_bound: f64,
    pub slem_holds: bool,
}

impl MixingBoundCheck {
    pub fn is_vacuous(&self) -> bool {
        self.evaluated.is_none()
    }
}

/// Evaluates `τ_{G'}(UD(G, G', τ_G(ε)) − ε) ≥ τ_G(ε)` and
/// `μ_{G'} ≥ 1 − (ln n + ln(1/(UD − ε))) / τ_G(ε)`.
///
/// A disconnected or periodic perturbed graph never mixes and has SLEM 1.
pub fn mixing_bound_check(g: &Graph, g_prime: &Graph, epsilon: f64, lazy: bool) -> Result<MixingBoundCheck> {
    let tau = mixing_time(g, epsilon, lazy)?
        .steps()
        .ok_or(Error::NonConvergence { what: "mixing time of the original graph", iterations: MAX_ITERATIONS })?;
    let ud = utility_distance_at(g, g_prime, tau)?;
    let arg = ud - epsilon;
    if arg <= 0.0 {
        return Ok(MixingBoundCheck { epsilon, tau_original: tau, utility_distance: ud, evaluated: None });
    }
    let mixes = g_prime.edge_count() > 0 && g_prime.is_connected() && (lazy || !g_prime.is_bipartite());
    let tau_perturbed = if mixes && arg < 1.0 {
        mixing_time(g_prime, arg, lazy)?.steps()
    } else if arg >= 1.0 {
        Some(0)
    } else {
        None
    };
    let mixing_holds = tau_perturbed.is_none_or(|r| r >= tau);
    let slem_perturbed = if mixes {
        let s = slem(g_prime)?;
        if lazy {
            (1.0 + s) / 2.0
        } else {
            s
        }
    } else {
        1.0
    };
    let n = g.vertex_count() as f64;
    let slem_lower_bound = 1.0 - (n.ln() + (1.0 / arg).ln()) / tau as f64;
    Ok(MixingBoundCheck {
        epsilon,
        tau_original: tau,
        utility_distance: ud,
        evaluated: Some(MixingBoundSides {
            tau_perturbed,
            mixing_holds,
            slem_perturbed,
            slem_lower_bound,
            slem_holds: slem_perturbed >= slem_lower_bound - 1e-12,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u64) -> Graph {
        Graph::from_edges((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn ud_zero_on_identity_and_bound_examples() {
        let g = complete(5);
        assert_eq!(utility_distance_at(&g, &g, 3).unwrap(), 0.0);
        assert_eq!(ud_upper_bound(0.0, &[0.0, 0.0], 4).unwrap(), 0.0);
        assert!((ud_upper_bound(0.1, &[0.2], 2).unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn ratio_cut_two_triangles() {
        let g = Graph::from_edges([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap();
        let c = Clustering::from_labels(g.ids().to_vec(), &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!((ratio_cut(&g, &c).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(ratio_cut(&g, &Clustering::whole(g.ids().to_vec())).unwrap(), 0.0);
    }

    #[test]
    fn pagerank_symmetric_cases() {
        let pr = pagerank(&Graph::from_edges([(0, 1)]).unwrap(), 0.85, 1e-12).unwrap();
        assert!((pr[0] - 0.5).abs() < 1e-12 && (pr[1] - 0.5).abs() < 1e-12);
        let cycle = Graph::from_edges((0..7u64).map(|i| (i, (i + 1) % 7))).unwrap();
        for x in pagerank(&cycle, 0.85, 1e-12).unwrap() {
            assert!((x - 1.0 / 7.0).abs() < 1e-10);
        }
        assert!(pagerank(&cycle, 1.0, 1e-12).is_err());
    }

    #[test]
    fn structural_examples() {
        let k3 = structural_metrics(&complete(3));
        assert_eq!(k3.clustering_coefficient, 1.0);
        assert!(k3.assortativity_degenerate);
        let star = structural_metrics(&Graph::from_edges((1..6u64).map(|i| (0, i))).unwrap());
        assert_eq!(star.clustering_coefficient, 0.0);
        assert!((star.assortativity + 1.0).abs() < 1e-12);
    }

    #[test]
    fn slem_of_complete_graphs() {
        for n in 3..8 {
            let s = slem(&complete(n)).unwrap();
            assert!((s - 1.0 / (n as f64 - 1.0)).abs() < 1e-9, "K{n}: {s}");
        }
        let path = Graph::from_edges([(0, 1), (1, 2)]).unwrap();
        assert!((slem(&path).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(slem(&Graph::from_edges([(0, 1), (2, 3)]).unwrap()), Err(Error::Disconnected)));
    }

    #[test]
    fn mixing_time_of_triangle() {
        // P^r(v, v) = 1/3 + (2/3)(-1/2)^r, TV to uniform = (2/3)·2^{-r}
        let tau = mixing_time(&complete(3), 0.01, false).unwrap();
        assert_eq!(tau, MixingTime::Converged(7));
        let c4 = Graph::from_edges([(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(mixing_time(&c4, 0.1, false).unwrap(), MixingTime::NotConverged);
        assert!(matches!(mixing_time(&c4, 0.1, true).unwrap(), MixingTime::Converged(_)));
    }

    #[test]
    fn single_edge_degree_report() {
        let g = Graph::from_edges([(0, 1)]).unwrap();
        let rep = expected_degree_report(&g, &PerturbParams::new(1, 3), 1000).unwrap();
        for s in rep {
            assert_eq!(s.mean, 1.0);
            assert_eq!(s.z, 0.0);
        }
    }
}
