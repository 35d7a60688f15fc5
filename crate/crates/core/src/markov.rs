//! Sparse row-stochastic matrices for simple random walks, their powers, and
//! the row-averaged total-variation distance.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

const ROW_TOLERANCE: f64 = 1e-9;

/// One sparse row: `(column, probability)` sorted by column, no zeros.
pub type Row = Vec<(u32, f64)>;

/// Row-stochastic matrix indexed by dense vertex positions; `ids` keeps the
/// raw vertex id of every position so matrices from different graphs can be
/// aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    ids: Vec<VertexId>,
    rows: Vec<Row>,
}

impl TransitionMatrix {
    /// Validates sortedness and stochasticity of every row.
    pub fn from_rows(ids: Vec<VertexId>, rows: Vec<Row>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::DimensionMismatch { left: ids.len(), right: rows.len() });
        }
        let n = ids.len();
        for (i, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for (pos, &(c, p)) in row.iter().enumerate() {
                if c as usize >= n || !(p.is_finite() && p >= 0.0) {
                    return Err(Error::invalid(format!("row {i}: bad entry ({c}, {p})")));
                }
                if pos > 0 && row[pos - 1].0 >= c {
                    return Err(Error::invalid(format!("row {i}: columns not strictly increasing")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::invalid(format!("row {i} sums to {sum}")));
            }
        }
        Ok(TransitionMatrix { ids, rows })
    }

    /// Dense constructor, mostly for tests and small estimates.
    pub fn from_dense(ids: Vec<VertexId>, dense: &[Vec<f64>]) -> Result<Self> {
        let rows = dense
            .iter()
            .map(|r| {
                if r.len() != dense.len() {
                    return Err(Error::DimensionMismatch { left: dense.len(), right: r.len() });
                }
                Ok(r.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(c, &p)| (c as u32, p)).collect())
            })
            .collect::<Result<Vec<Row>>>()?;
        Self::from_rows(ids, rows)
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&(j as u32), |e| e.0).map(|k| row[k].1).unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0.0; n];
                for &(c, p) in row {
                    d[c as usize] = p;
                }
                d
            })
            .collect()
    }

    /// `(P + I) / 2`.
    pub fn lazy(&self) -> TransitionMatrix {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut out: Row = row.iter().map(|&(c, p)| (c, p / 2.0)).collect();
                match out.binary_search_by_key(&(i as u32), |e| e.0) {
                    Ok(k) => out[k].1 += 0.5,
                    Err(k) => out.insert(k, (i as u32, 0.5)),
                }
                out
            })
            .collect();
        TransitionMatrix { ids: self.ids.clone(), rows }
    }

    /// Sparse product `self · other`.
    pub fn multiply(&self, other: &TransitionMatrix) -> Result<TransitionMatrix> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch { left: self.dimension(), right: other.dimension() });
        }
        let n = self.dimension();
        let rows = self
            .rows
            .par_iter()
            .map_init(
                || (vec![0.0f64; n], vec![false; n], Vec::<u32>::new()),
                |(acc, hit, touched), row| {
                    for &(k, a) in row {
                        for &(j, b) in &other.rows[k as usize] {
                            if !hit[j as usize] {
                                hit[j as usize] = true;
                                touched.push(j);
                            }
                            acc[j as usize] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let out: Row = touched
                        .iter()
                        .filter_map(|&j| {
                            let p = acc[j as usize];
                            acc[j as usize] = 0.0;
                            hit[j as usize] = false;
                            (p != 0.0).then_some((j, p))
                        })
                        .collect();
                    touched.clear();
                    out
                },
            )
            .collect();
        Ok(TransitionMatrix { ids: self.ids.clone(), rows })
    }
}

/// Simple random walk matrix: `1/deg(i)` on each neighbour, and a
/// probability-one self row for isolated vertices.
pub fn transition_matrix(g: &Graph) -> TransitionMatrix {
    let rows = (0..g.vertex_count())
        .map(|i| {
            let nbrs = g.neighbors(i);
            if nbrs.is_empty() {
                vec![(i as u32, 1.0)]
            } else {
                let p = 1.0 / nbrs.len() as f64;
                nbrs.iter().map(|&j| (j, p)).collect()
            }
        })
        .collect();
    TransitionMatrix { ids: g.ids().to_vec(), rows }
}

/// `p^l` for `l ≥ 1`.
pub fn matrix_power(p: &TransitionMatrix, l: usize) -> Result<TransitionMatrix> {
    if l == 0 {
        return Err(Error::invalid("matrix power needs l >= 1"));
    }
    let mut acc = p.clone();
    for _ in 1..l {
        acc = acc.multiply(p)?;
    }
    Ok(acc)
}

/// Half the L1 distance between two sorted sparse rows.
pub fn row_tv(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(u32::MAX, |e| e.0);
        let cb = b.get(j).map_or(u32::MAX, |e| e.0);
        if ca == cb {
            sum += (a[i].1 - b[j].1).abs();
            i += 1;
            j += 1;
        } else if ca < cb {
            sum += a[i].1;
            i += 1;
        } else {
            sum += b[j].1;
            j += 1;
        }
    }
    0.5 * sum
}

/// Per-row TV values for two matrices over the same vertex ordering.
pub fn row_tv_distances(p: &TransitionMatrix, q: &TransitionMatrix) -> Result<Vec<f64>> {
    if p.dimension() != q.dimension() {
        return Err(Error::DimensionMismatch { left: p.dimension(), right: q.dimension() });
    }
    if p.ids != q.ids {
        return Err(Error::VertexSetMismatch);
    }
    Ok(p.rows.iter().zip(&q.rows).map(|(a, b)| row_tv(a, b)).collect())
}

/// Mean over rows of the row TV distance.
pub fn tv_distance(p: &TransitionMatrix, q: &TransitionMatrix) -> Result<f64> {
    let rows = row_tv_distances(p, q)?;
    Ok(mean(&rows))
}

/// TV distance restricted to the vertices both matrices share (matched by raw
/// id). Rows are compared as distributions over raw ids. Returns the distance
/// and the number of common vertices.
pub fn tv_distance_common(p: &TransitionMatrix, q: &TransitionMatrix) -> (f64, usize) {
    if p.ids == q.ids {
        return (tv_distance(p, q).expect("aligned"), p.dimension());
    }
    let mut per_row = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < p.ids.len() && j < q.ids.len() {
        match p.ids[i].cmp(&q.ids[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let a: Vec<(VertexId, f64)> = p.rows[i].iter().map(|&(c, x)| (p.ids[c as usize], x)).collect();
                let b: Vec<(VertexId, f64)> = q.rows[j].iter().map(|&(c, x)| (q.ids[c as usize], x)).collect();
                per_row.push(raw_row_tv(&a, &b));
                i += 1;
                j += 1;
            }
        }
    }
    (mean(&per_row), per_row.len())
}

fn raw_row_tv(a: &[(VertexId, f64)], b: &[(VertexId, f64)]) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(VertexId::MAX, |e| e.0);
        let cb = b.get(j).map_or(VertexId::MAX, |e| e.0);
        if i < a.len() && j < b.len() && ca == cb {
            sum += (a[i].1 - b[j].1).abs();
            i += 1;
            j += 1;
        } else if j >= b.len() || (i < a.len() && ca < cb) {
            sum += a[i].1;
            i += 1;
        } else {
            sum += b[j].1;
            j += 1;
        }
    }
    0.5 * sum
}

/// Pairwise summation mean, so the result does not depend on how callers
/// chunked the work.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    pairwise_sum(xs) / xs.len() as f64
}

pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Terminal dense index of a `length`-step simple random walk.
pub fn walk_index<R: Rng + ?Sized>(g: &Graph, start: usize, length: usize, rng: &mut R) -> usize {
    let mut x = start;
    for _ in 0..length {
        let nbrs = g.neighbors(x);
        if nbrs.is_empty() {
            return x;
        }
        x = nbrs[rng.random_range(0..nbrs.len())] as usize;
    }
    x
}

/// Terminal raw id of a `length`-step simple random walk from `start`.
pub fn random_walk<R: Rng + ?Sized>(g: &Graph, start: VertexId, length: usize, rng: &mut R) -> Result<VertexId> {
    let s = g.index_of(start).ok_or(Error::UnknownVertex(start))?;
    Ok(g.id(walk_index(g, s, length, rng)))
}
