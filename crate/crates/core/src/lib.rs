//! Link obfuscation for temporal social graphs.
//!
//! Snapshots are clustered with a greedy modularity agglomeration that is
//! updated incrementally over time; communities that did not change reuse
//! their previous perturbation, changed ones are re-perturbed with
//! random-walk rewiring, and edges between communities are resampled with
//! degree-preserving probabilities. Privacy and utility metrics quantify the
//! result.

pub mod apps;
pub mod cluster;
pub mod error;
pub mod graph;
pub mod markov;
pub mod perturb;
pub mod privacy;
pub mod report;
pub mod rng;
pub mod synth;
pub mod utility;

pub use cluster::{
    classify_communities, cluster_static, modularity, recluster_dynamic, Clustering, CommunityDiff, MergeHistory,
};
pub use error::{Error, Result};
pub use graph::{load_edge_list, load_sequence, union_graph, Graph, TemporalGraphSequence, VertexId};
pub use markov::{matrix_power, random_walk, transition_matrix, tv_distance, TransitionMatrix};
pub use perturb::{
    linkmirage_sequence, linkmirage_step, perturb_static, InterClusterForm, PerturbParams, PerturbationRecord,
};
