use std::collections::BTreeMap;

use rand::Rng;

use super::{edge, Edge, InterClusterForm, PairKernel};
use crate::cluster::Clustering;
use crate::error::Result;
use crate::graph::{Graph, VertexId};

/// Original edges between each pair of communities `(a, b)`, `a < b`.
pub fn inter_edge_groups(g: &Graph, c: &Clustering) -> Result<BTreeMap<(u32, u32), Vec<Edge>>> {
    c.check_aligned(g)?;
    let mut groups: BTreeMap<(u32, u32), Vec<Edge>> = BTreeMap::new();
    for (a, b) in g.edges() {
        let (la, lb) = (c.label(a as usize), c.label(b as usize));
        if la != lb {
            groups.entry((la.min(lb), la.max(lb))).or_default().push(edge(g.id(a as usize), g.id(b as usize)));
        }
    }
    Ok(groups)
}

/// Rewiring probabilities between the marginal nodes of communities `a` and
/// `b`, given the original edges between them. Degrees and the edge count
/// only consider those cross edges.
pub fn inter_kernel(c: &Clustering, pair: (u32, u32), cross: &[Edge], form: InterClusterForm) -> PairKernel {
    if cross.is_empty() {
        return PairKernel::default();
    }
    let (a, _) = pair;
    let mut deg_a: BTreeMap<VertexId, u64> = BTreeMap::new();
    let mut deg_b: BTreeMap<VertexId, u64> = BTreeMap::new();
    for &(u, v) in cross {
        let (x, y) = if c.community_of(u) == Some(a) { (u, v) } else { (v, u) };
        *deg_a.entry(x).or_insert(0) += 1;
        *deg_b.entry(y).or_insert(0) += 1;
    }
    let e_ab = cross.len() as f64;
    let scale = match form {
        InterClusterForm::DegreeProduct => 1.0 / e_ab,
        InterClusterForm::SizeWeighted => deg_a.len() as f64 / (e_ab * (deg_a.len() + deg_b.len()) as f64),
    };
    let side = |d: BTreeMap<VertexId, u64>| d.into_iter().map(|(v, w)| (v, w as f64)).collect();
    PairKernel::product(side(deg_a), side(deg_b), scale)
}

/// Samples replacement cross-community edges for every community pair that
/// has at least one original edge between them.
pub fn perturb_intercluster<R: Rng + ?Sized>(
    g: &Graph,
    c: &Clustering,
    form: InterClusterForm,
    rng: &mut R,
) -> Result<Vec<Edge>> {
    let mut out = Vec::new();
    for (pair, cross) in inter_edge_groups(g, c)? {
        out.extend(inter_kernel(c, pair, &cross, form).sample(rng));
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cross_edge_forms() {
        let g = Graph::from_edges([(0, 1)]).unwrap();
        let c = Clustering::singletons(g.ids().to_vec());
        let groups = inter_edge_groups(&g, &c).unwrap();
        let cross = &groups[&(0, 1)];
        let appendix = inter_kernel(&c, (0, 1), cross, InterClusterForm::DegreeProduct);
        assert_eq!(appendix.pairs(), &[(0, 1, 1.0)]);
        let literal = inter_kernel(&c, (0, 1), cross, InterClusterForm::SizeWeighted);
        assert_eq!(literal.pairs(), &[(0, 1, 0.5)]);
    }

    #[test]
    fn degree_product_preserves_expected_cross_degree() {
        // a = {0,1,2}, b = {3,4,5}; cross edges 0-3, 0-4, 1-5
        let g = Graph::from_edges([(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (0, 4), (1, 5)]).unwrap();
        let c = Clustering::from_labels(g.ids().to_vec(), &[0, 0, 0, 1, 1, 1]).unwrap();
        let groups = inter_edge_groups(&g, &c).unwrap();
        let k = inter_kernel(&c, (0, 1), &groups[&(0, 1)], InterClusterForm::DegreeProduct);
        for (v, d) in [(0, 2.0), (1, 1.0), (3, 1.0), (4, 1.0), (5, 1.0)] {
            assert!((k.expected_degree(v) - d).abs() < 1e-12, "vertex {v}");
        }
        assert_eq!(k.expected_degree(2), 0.0);
    }
}
