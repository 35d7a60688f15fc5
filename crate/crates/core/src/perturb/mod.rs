//! Link perturbation: walk-based rewiring inside a (sub)graph, probabilistic
//! rewiring between communities, the selective temporal pipeline, and the
//! static and delete/insert baselines.

mod baselines;
mod intercluster;
mod kernel;
mod selective;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, TemporalGraphSequence, VertexId};

pub use baselines::{
    hay_baseline_sequence, hay_perturb, perturb_static, perturb_static_baseline_sequence, static_plan,
};
pub use intercluster::{inter_edge_groups, inter_kernel, perturb_intercluster};
pub use kernel::{walk_kernel, PairKernel};
pub use selective::{
    linkmirage_sequence, linkmirage_step, linkmirage_trace, plan_step, CommunityEdges, PairEdges, Part,
    PerturbationRecord, StepOutput, StepPlan,
};

/// Undirected edge as raw ids with `u < v`.
pub type Edge = (VertexId, VertexId);

pub(crate) fn edge(u: VertexId, v: VertexId) -> Edge {
    (u.min(v), u.max(v))
}

/// Probability used when rewiring edges between two communities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InterClusterForm {
    /// `deg(i)·deg(j) / |E_ab|`: preserves each marginal node's expected
    /// cross-community degree.
    #[default]
    #[serde(rename = "appendixC")]
    DegreeProduct,
    /// `deg(i)·deg(j)·|v_a| / (|E_ab|·(|v_a| + |v_b|))` with `a` the lower
    /// community id and `|v_·|` the marginal node counts.
    #[serde(rename = "algorithm1")]
    SizeWeighted,
}

impl std::str::FromStr for InterClusterForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "appendixC" | "appendix-c" => Ok(InterClusterForm::DegreeProduct),
            "algorithm1" | "algorithm-1" => Ok(InterClusterForm::SizeWeighted),
            other => Err(Error::invalid(format!("unknown inter-cluster form {other:?}"))),
        }
    }
}

impl std::fmt::Display for InterClusterForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InterClusterForm::DegreeProduct => "appendixC",
            InterClusterForm::SizeWeighted => "algorithm1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbParams {
    /// Random-walk length.
    pub k: usize,
    /// Hop radius freed around changed links when re-clustering.
    pub m: usize,
    /// Jaccard overlap at which a community counts as unchanged.
    pub theta: f64,
    pub seed: u64,
    pub inter_form: InterClusterForm,
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams { k: 2, m: 2, theta: 0.8, seed: 0, inter_form: InterClusterForm::DegreeProduct }
    }
}

impl PerturbParams {
    pub fn new(k: usize, seed: u64) -> Self {
        PerturbParams { k, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::invalid(format!("theta must be in (0, 1], got {}", self.theta)));
        }
        Ok(())
    }
}

/// Which obfuscation produced a perturbed sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    #[serde(rename = "linkmirage")]
    Selective,
    #[serde(rename = "static-baseline")]
    Static,
    #[serde(rename = "hay-baseline")]
    DeleteInsert,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::Selective, Mechanism::Static, Mechanism::DeleteInsert];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Selective => "linkmirage",
            Mechanism::Static => "static-baseline",
            Mechanism::DeleteInsert => "hay-baseline",
        }
    }

    /// Perturbs a whole sequence with this mechanism.
    pub fn run(self, seq: &TemporalGraphSequence, params: &PerturbParams) -> Result<Vec<Graph>> {
        params.validate()?;
        match self {
            Mechanism::Selective => linkmirage_sequence(seq, params),
            Mechanism::Static => perturb_static_baseline_sequence(seq, params.k, params.seed),
            Mechanism::DeleteInsert => hay_baseline_sequence(seq, None, params.seed),
        }
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mechanism::ALL
            .into_iter()
            .find(|m| {
                m.name() == s
                    || (s == "static" && *m == Mechanism::Static)
                    || (s == "hay" && *m == Mechanism::DeleteInsert)
            })
            .ok_or_else(|| Error::invalid(format!("unknown mechanism {s:?}")))
    }
}
