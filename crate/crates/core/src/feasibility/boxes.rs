//! Local feasibility on a multiset of edges as a box-cover question.
//!
//! A choice of one center per edge is a point of the product of the edges'
//! parameter ranges. Each uncertain point forbids the union of the products of
//! its open forbidden segments; a feasible choice exists iff these boxes leave
//! part of the product uncovered. The open boxes are replaced by slightly
//! shrunk closed ones so the question becomes a union-volume comparison.

use itertools::Itertools;
use rayon::prelude::*;

use super::klee::klee_measure;
use super::{covers, Cover};
use crate::error::{Error, Result};
use crate::graph::EdgeId;
use crate::pwl::Interval;
use crate::scalar::{sort_values, Scalar};
use crate::uncertain::Instance;

/// Closed axis-parallel box `[lo_1, hi_1] x ... x [lo_k, hi_k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> KBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Internal("box with lo > hi".into()));
        }
        Ok(KBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> T {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(T::one(), |acc, (a, b)| acc * (b.clone() - a.clone()))
    }

    /// Common part of two boxes, `None` when they are disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo: Vec<T> = self.lo.iter().zip(&other.lo).map(|(a, b)| T::max_value(a, b)).collect();
        let hi: Vec<T> = self.hi.iter().zip(&other.hi).map(|(a, b)| T::min_value(a, b)).collect();
        lo.iter().zip(&hi).all(|(a, b)| a <= b).then_some(KBox { lo, hi })
    }
}

/// Open segments of `edge` where `w_i * Ed(P_i, .) > lambda`. Ends that fall
/// on the edge's endpoints are flagged closed.
pub fn forbidden_segments<T: Scalar>(
    instance: &Instance<T>,
    i: usize,
    edge: EdgeId,
    lambda: &T,
) -> Vec<Interval<T>> {
    instance
        .weighted_function(i, edge)
        .superlevel_open_set(lambda, instance.tolerance())
}

/// Half the smallest positive gap between forbidden-segment endpoints, taken
/// over all edges. `segments[s]` pools every segment on the `s`-th edge and
/// `lengths[s]` is that edge's length. Gaps within `eps` count as zero. When
/// no edge has a positive gap, half the shortest edge length is used.
pub fn shrink_delta<T: Scalar>(segments: &[Vec<Interval<T>>], lengths: &[T], eps: &T) -> T {
    let mut best: Option<T> = None;
    for per_edge in segments {
        let mut ends: Vec<T> = per_edge
            .iter()
            .flat_map(|iv| [iv.lo.clone(), iv.hi.clone()])
            .collect();
        sort_values(&mut ends);
        for pair in ends.windows(2) {
            let gap = pair[1].clone() - pair[0].clone();
            if gap > *eps && best.as_ref().is_none_or(|b| gap < *b) {
                best = Some(gap);
            }
        }
    }
    match best {
        Some(gap) => gap.half(),
        None => lengths
            .iter()
            .fold(None, |acc: Option<T>, len| {
                Some(acc.map_or(len.clone(), |a| T::min_value(&a, len)))
            })
            .expect("at least one edge")
            .half(),
    }
}

/// Shrunk boxes for a local test.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSystem<T> {
    /// Uncertain points that take part (not pruned), ascending.
    pub points: Vec<usize>,
    /// `boxes[r]` are the shrunk boxes of `points[r]`.
    pub boxes: Vec<Vec<KBox<T>>>,
    /// The closed product of the edges' parameter ranges.
    pub domain: KBox<T>,
    pub delta: T,
}

impl<T: Scalar> BoxSystem<T> {
    pub fn all_boxes(&self) -> impl Iterator<Item = &KBox<T>> {
        self.boxes.iter().flatten()
    }
}

/// Forbidden segments for every `(edge, point)` pair at one `lambda`.
pub(crate) struct SegmentTable<T> {
    /// Indexed `[edge][point]`.
    segments: Vec<Vec<Vec<Interval<T>>>>,
}

impl<T: Scalar> SegmentTable<T> {
    pub(crate) fn new(instance: &Instance<T>, lambda: &T) -> Self {
        let segments = (0..instance.graph().edge_count())
            .into_par_iter()
            .map(|e| {
                (0..instance.point_count())
                    .map(|i| forbidden_segments(instance, i, e, lambda))
                    .collect()
            })
            .collect();
        SegmentTable { segments }
    }

    fn get(&self, edge: EdgeId, i: usize) -> &[Interval<T>] {
        &self.segments[edge][i]
    }
}

/// Builds the shrunk boxes on `edges` for the points in `active`. A point
/// with no forbidden segment on some edge is covered by any center on that
/// edge and is pruned.
pub(crate) fn build_boxes_from<T: Scalar>(
    instance: &Instance<T>,
    table: &SegmentTable<T>,
    edges: &[EdgeId],
    active: &[usize],
) -> BoxSystem<T> {
    let graph = instance.graph();
    let lengths: Vec<T> = edges.iter().map(|&e| graph.edges()[e].length.clone()).collect();
    let domain = KBox {
        lo: vec![T::zero(); edges.len()],
        hi: lengths.clone(),
    };
    let points: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| edges.iter().all(|&e| !table.get(e, i).is_empty()))
        .collect();
    let pooled: Vec<Vec<Interval<T>>> = edges
        .iter()
        .map(|&e| {
            points
                .iter()
                .flat_map(|&i| table.get(e, i).iter().cloned())
                .collect()
        })
        .collect();
    let delta = shrink_delta(&pooled, &lengths, instance.tolerance().eps());

    let boxes = points
        .iter()
        .map(|&i| {
            let shrunk: Vec<Vec<(T, T)>> = edges
                .iter()
                .zip(&lengths)
                .map(|(&e, len)| {
                    table
                        .get(e, i)
                        .iter()
                        .filter_map(|iv| {
                            let alpha = if iv.lo.is_zero() {
                                iv.lo.clone()
                            } else {
                                iv.lo.clone() + delta.clone()
                            };
                            let beta = if iv.hi == *len {
                                iv.hi.clone()
                            } else {
                                iv.hi.clone() - delta.clone()
                            };
                            (alpha <= beta).then_some((alpha, beta))
                        })
                        .collect()
                })
                .collect();
            shrunk
                .iter()
                .map(|segs| segs.iter())
                .multi_cartesian_product()
                .map(|sides| KBox {
                    lo: sides.iter().map(|(a, _)| a.clone()).collect(),
                    hi: sides.iter().map(|(_, b)| b.clone()).collect(),
                })
                .collect()
        })
        .collect();
    BoxSystem {
        points,
        boxes,
        domain,
        delta,
    }
}

/// Shrunk boxes of every uncertain point for centers on `edges` at `lambda`.
pub fn build_boxes<T: Scalar>(instance: &Instance<T>, edges: &[EdgeId], lambda: &T) -> BoxSystem<T> {
    let table = SegmentTable::new(instance, lambda);
    let all: Vec<usize> = (0..instance.point_count()).collect();
    build_boxes_from(instance, &table, edges, &all)
}

/// Whether the shrunk boxes leave part of the domain uncovered.
///
/// A genuinely uncovered region contains a corner cube of side `delta`, so
/// the float comparison uses a margin below `delta^k`; exact arithmetic
/// compares strictly.
pub(crate) fn leaves_gap<T: Scalar>(system: &BoxSystem<T>, eps: &T) -> Result<bool> {
    if system.points.is_empty() {
        return Ok(true);
    }
    let k = system.domain.dim();
    let boxes: Vec<KBox<T>> = system.all_boxes().cloned().collect();
    if boxes.is_empty() {
        return Ok(true);
    }
    let covered = klee_measure(&boxes, k)?;
    let total = system.domain.volume();
    let corner = (0..k).fold(T::one(), |acc, _| acc * system.delta.clone());
    let margin = T::min_value(&(eps.clone() * total.clone()), &corner.half());
    Ok(total - covered > margin)
}

/// Can one center per listed edge (repeats allowed) cover every uncertain
/// point under `lambda`?
pub fn local_feasible_on_edges<T: Scalar>(instance: &Instance<T>, edges: &[EdgeId], lambda: &T) -> Result<bool> {
    for &e in edges {
        instance.graph().edge(e)?;
    }
    if edges.is_empty() {
        return Err(Error::InvalidK);
    }
    let system = build_boxes(instance, edges, lambda);
    leaves_gap(&system, instance.tolerance().eps())
}

/// Tries every split of `k` into vertex centers and edge centers, every
/// vertex subset and every edge multiset, stopping at the first success.
pub fn feasible_by_boxes<T: Scalar>(instance: &Instance<T>, k: usize, lambda: &T) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let graph = instance.graph();
    let n = instance.point_count();
    let table = SegmentTable::new(instance, lambda);
    let vertex_cover: Vec<Cover> = (0..graph.vertex_count())
        .map(|v| {
            let q = graph.vertex_point(v);
            let mut c = Cover::empty(n);
            for i in 0..n {
                if covers(instance, i, &q, lambda) {
                    c.insert(i);
                }
            }
            c
        })
        .collect();
    let eps = instance.tolerance().eps();

    for on_vertices in (0..=k.min(graph.vertex_count())).rev() {
        let on_edges = k - on_vertices;
        let vertex_sets: Vec<Vec<usize>> = (0..graph.vertex_count()).combinations(on_vertices).collect();
        let found = vertex_sets.par_iter().map(|vs| -> Result<bool> {
            let mut covered = Cover::empty(n);
            for &v in vs {
                covered.union_with(&vertex_cover[v]);
            }
            let rest: Vec<usize> = (0..n).filter(|&i| !covered.contains(i)).collect();
            if rest.is_empty() {
                return Ok(true);
            }
            if on_edges == 0 {
                return Ok(false);
            }
            for edges in (0..graph.edge_count()).combinations_with_replacement(on_edges) {
                let system = build_boxes_from(instance, &table, &edges, &rest);
                if leaves_gap(&system, eps)? {
                    return Ok(true);
                }
            }
            Ok(false)
        });
        if found.try_reduce(|| false, |a, b| Ok(a || b))? {
            return Ok(true);
        }
    }
    Ok(false)
}
