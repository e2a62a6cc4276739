//! Decision procedures: can `k` centers keep every weighted expected distance
//! at or below `lambda`?

pub mod boxes;
pub mod klee;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::GraphPoint;
use crate::scalar::Scalar;
use crate::uncertain::Instance;

pub use boxes::{
    build_boxes, feasible_by_boxes, forbidden_segments, local_feasible_on_edges, shrink_delta, BoxSystem,
    KBox,
};
pub use klee::klee_measure;

/// Which decision procedure to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Enumerate k-subsets of vertices and feasible-interval endpoints.
    Candidates,
    /// Enumerate edge multisets and test box covers by their union volume.
    Boxes,
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "candidates" => Ok(Engine::Candidates),
            "boxes" => Ok(Engine::Boxes),
            other => Err(format!("unknown engine `{other}` (expected candidates or boxes)")),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Candidates => "candidates",
            Engine::Boxes => "boxes",
        })
    }
}

/// Fixed-width set of uncertain-point indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Cover(Vec<u64>);

impl Cover {
    pub(crate) fn empty(n: usize) -> Self {
        Cover(vec![0; n.div_ceil(64).max(1)])
    }

    pub(crate) fn full(n: usize) -> Self {
        let mut c = Cover::empty(n);
        for i in 0..n {
            c.insert(i);
        }
        c
    }

    pub(crate) fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    pub(crate) fn union(&self, other: &Cover) -> Cover {
        Cover(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    pub(crate) fn union_with(&mut self, other: &Cover) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

/// Does `q` cover `P_i` under `lambda`, judged on the prebuilt edge function?
pub(crate) fn covers<T: Scalar>(instance: &Instance<T>, i: usize, q: &GraphPoint<T>, lambda: &T) -> bool {
    let w = &instance.points()[i].weight;
    let value = w.clone() * instance.expected_distance(i, q.edge).function.value_at(&q.t);
    instance.tolerance().le(&value, lambda)
}

pub(crate) fn cover_of<T: Scalar>(instance: &Instance<T>, q: &GraphPoint<T>, lambda: &T) -> Cover {
    let mut c = Cover::empty(instance.point_count());
    for i in 0..instance.point_count() {
        if covers(instance, i, q, lambda) {
            c.insert(i);
        }
    }
    c
}

/// Every vertex plus every endpoint of every feasible interval at `lambda`.
///
/// Vertices come first in index order, followed by interior points sorted by
/// edge and offset. Points within tolerance of an edge end are folded into the
/// vertex, and interior points within tolerance of each other are merged.
pub fn candidate_point_set<T: Scalar>(instance: &Instance<T>, lambda: &T) -> Vec<GraphPoint<T>> {
    let graph = instance.graph();
    let tol = instance.tolerance();
    let mut interior: Vec<GraphPoint<T>> = (0..graph.edge_count())
        .into_par_iter()
        .flat_map_iter(|e| {
            let mut found = Vec::new();
            for i in 0..instance.point_count() {
                for iv in instance.weighted_function(i, e).sublevel_set(lambda, tol) {
                    for t in [iv.lo, iv.hi] {
                        let p = GraphPoint::new(e, t);
                        if graph.vertex_at(&p, tol).is_none() {
                            found.push(p);
                        }
                    }
                }
            }
            found
        })
        .collect();
    interior.sort_by(|a, b| a.edge.cmp(&b.edge).then_with(|| a.t.cmp_value(&b.t)));
    let mut out: Vec<GraphPoint<T>> = (0..graph.vertex_count()).map(|v| graph.vertex_point(v)).collect();
    let vertices = out.len();
    for p in interior {
        if let Some(last) = out[vertices..].last() {
            if last.edge == p.edge && tol.eq(&last.t, &p.t) {
                continue;
            }
        }
        out.push(p);
    }
    out
}

/// Searches k-subsets of the candidate point set in lexicographic order and
/// returns the first that covers every uncertain point.
///
/// With fewer candidates than `k`, the whole set is tried and the witness is
/// padded by repeating its last point.
pub fn feasible_by_candidates<T: Scalar>(
    instance: &Instance<T>,
    k: usize,
    lambda: &T,
) -> Result<Option<Vec<GraphPoint<T>>>> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let candidates = candidate_point_set(instance, lambda);
    let n = instance.point_count();
    let covers: Vec<Cover> = candidates
        .par_iter()
        .map(|q| cover_of(instance, q, lambda))
        .collect();
    let full = Cover::full(n);
    let size = k.min(candidates.len());

    let found = (0..candidates.len()).into_par_iter().find_map_first(|first| {
        let mut chosen = vec![first];
        search(&covers, &full, size, &mut chosen, covers[first].clone()).then_some(chosen)
    });
    Ok(found.map(|idx| {
        let mut witness: Vec<GraphPoint<T>> = idx.iter().map(|&c| candidates[c].clone()).collect();
        while witness.len() < k {
            witness.push(witness[witness.len() - 1].clone());
        }
        witness
    }))
}

fn search(covers: &[Cover], full: &Cover, size: usize, chosen: &mut Vec<usize>, acc: Cover) -> bool {
    if chosen.len() == size {
        return acc == *full;
    }
    let start = chosen[chosen.len() - 1] + 1;
    // Leave room for the remaining picks.
    let stop = covers.len() + chosen.len() + 1 - size;
    for next in start..stop {
        chosen.push(next);
        if search(covers, full, size, chosen, acc.union(&covers[next])) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Feasibility of `lambda` for `k` centers with the chosen engine.
pub fn feasible<T: Scalar>(instance: &Instance<T>, k: usize, lambda: &T, engine: Engine) -> Result<bool> {
    match engine {
        Engine::Candidates => Ok(feasible_by_candidates(instance, k, lambda)?.is_some()),
        Engine::Boxes => feasible_by_boxes(instance, k, lambda),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Graph};
    use crate::uncertain::{objective, Settings, UncertainPoint};

    fn triangle_instance() -> Instance<f64> {
        let g = Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)]).unwrap();
        let points = (0..3)
            .map(|v| UncertainPoint::deterministic(1.0, g.vertex_point(v)))
            .collect();
        Instance::new(g, points, Settings::default()).unwrap()
    }

    #[test]
    fn candidate_set_examples() {
        let inst = triangle_instance();
        let q = candidate_point_set(&inst, &10.0);
        assert_eq!(q.len(), 3);
        assert_eq!(candidate_point_set(&inst, &-1.0).len(), 3);
        let q = candidate_point_set(&inst, &0.5);
        for e in 0..3 {
            assert!(q.iter().any(|p| p.edge == e && (p.t - 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn candidate_engine_examples() {
        let inst = triangle_instance();
        let w = feasible_by_candidates(&inst, 1, &1.0).unwrap().unwrap();
        assert_eq!(w, vec![inst.graph().vertex_point(0)]);
        assert!(feasible_by_candidates(&inst, 1, &0.9).unwrap().is_none());
        let w = feasible_by_candidates(&inst, 2, &0.5).unwrap().unwrap();
        assert!(objective(&inst, &w).unwrap().0 <= 0.5 + 1e-9);
        assert!(feasible_by_candidates(&inst, 2, &0.49).unwrap().is_none());
        assert_eq!(feasible_by_candidates(&inst, 0, &1.0), Err(Error::InvalidK));
    }

    #[test]
    fn more_centers_than_candidates_pads_witness() {
        let inst = triangle_instance();
        let w = feasible_by_candidates(&inst, 5, &0.0).unwrap().unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(objective(&inst, &w).unwrap().0, 0.0);
    }

    #[test]
    fn engines_parse_and_print() {
        assert_eq!("boxes".parse::<Engine>().unwrap(), Engine::Boxes);
        assert_eq!(Engine::Candidates.to_string(), "candidates");
        assert!("grid".parse::<Engine>().is_err());
    }
}
