//! Brute-force reference solvers for cross-checking at small sizes.
//!
//! Nothing here uses the piecewise-linear machinery: distances come from
//! direct sums over locations, and searches are exhaustive.

use crate::error::{Error, Result};
use crate::feasibility::{forbidden_segments, KBox};
use crate::graph::{EdgeId, GraphPoint};
use crate::scalar::{sort_values, Scalar};
use crate::uncertain::Instance;

/// Largest grid the oracle will evaluate.
pub const MAX_GRID_POINTS: usize = 400_000;

/// Largest point count the subset search accepts.
pub const MAX_ORACLE_POINTS: usize = 16;

/// Largest box count for inclusion-exclusion.
pub const MAX_INCLUSION_EXCLUSION_BOXES: usize = 20;

const MAX_OPEN_BOX_GRID: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution<T> {
    pub lambda: T,
    pub centers: Vec<GraphPoint<T>>,
    pub grid_points: usize,
}

/// Offsets `0, step, 2 step, ...` on every edge, plus the far end. Vertices
/// are listed once.
pub fn grid_points<T: Scalar>(instance: &Instance<T>, step: &T) -> Result<Vec<GraphPoint<T>>> {
    if *step <= T::zero() {
        return Err(Error::InvalidPoint(format!("grid step must be positive, found {step}")));
    }
    let graph = instance.graph();
    let mut seen_vertex = vec![false; graph.vertex_count()];
    let mut out = Vec::new();
    for (e, edge) in graph.edges().iter().enumerate() {
        let steps = (edge.length.clone() / step.clone()).to_float().floor() as usize;
        if out.len() + steps > MAX_GRID_POINTS {
            return Err(Error::SizeGuard(format!(
                "grid exceeds {MAX_GRID_POINTS} points; use a coarser step"
            )));
        }
        let mut offsets: Vec<T> = (0..=steps).map(|j| step.clone() * T::from_count(j)).collect();
        offsets.retain(|t| *t <= edge.length);
        if offsets.last() != Some(&edge.length) {
            offsets.push(edge.length.clone());
        }
        for t in offsets {
            let vertex = if t.is_zero() {
                Some(edge.u)
            } else if t == edge.length {
                Some(edge.v)
            } else {
                None
            };
            if let Some(v) = vertex {
                if std::mem::replace(&mut seen_vertex[v], true) {
                    continue;
                }
            }
            out.push(GraphPoint::new(e, t));
        }
    }
    Ok(out)
}

fn cover_masks<T: Scalar>(costs: &[Vec<T>], lambda: &T) -> Vec<u32> {
    let mut masks: Vec<u32> = costs
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| *c <= lambda)
                .fold(0u32, |m, (i, _)| m | (1 << i))
        })
        .collect();
    masks.sort_unstable();
    masks.dedup();
    masks
}

/// Picks at most `k` masks whose union is everything; returns their indices
/// into `masks`.
fn cover_with(masks: &[u32], n: usize, k: usize) -> Option<Vec<usize>> {
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // parent[level][state] = (previous state, mask index)
    let states = 1usize << n;
    let mut reached = vec![false; states];
    reached[0] = true;
    let mut parents: Vec<Vec<Option<(u32, usize)>>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut next = reached.clone();
        let mut parent = vec![None; states];
        for s in 0..states {
            if !reached[s] {
                continue;
            }
            for (mi, &m) in masks.iter().enumerate() {
                let t = s | m as usize;
                if !next[t] {
                    next[t] = true;
                    parent[t] = Some((s as u32, mi));
                }
            }
        }
        reached = next;
        parents.push(parent);
        if reached[full as usize] {
            let mut picks = Vec::new();
            let mut state = full as usize;
            for parent in parents.iter().rev() {
                if let Some((prev, mi)) = parent[state] {
                    picks.push(mi);
                    state = prev as usize;
                }
            }
            return Some(picks);
        }
    }
    None
}

fn check_point_count<T: Scalar>(instance: &Instance<T>) -> Result<()> {
    if instance.point_count() > MAX_ORACLE_POINTS {
        return Err(Error::SizeGuard(format!(
            "oracle handles at most {MAX_ORACLE_POINTS} uncertain points"
        )));
    }
    Ok(())
}

/// Best `k` centers restricted to grid points with spacing `step`.
///
/// Every optimal center is within `step / 2` of a grid point on its edge and
/// expected distances change at most at unit rate, so the result exceeds the
/// true optimum by at most `max_i w_i * step / 2`.
pub fn grid_k_center<T: Scalar>(instance: &Instance<T>, k: usize, step: &T) -> Result<GridSolution<T>> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    check_point_count(instance)?;
    let grid = grid_points(instance, step)?;
    let n = instance.point_count();
    let costs: Vec<Vec<T>> = {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|q| (0..n).map(|i| instance.weighted_distance_at(i, q)).collect())
            .collect()
    };
    let mut levels: Vec<T> = costs.iter().flatten().cloned().collect();
    sort_values(&mut levels);
    levels.dedup();

    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if cover_with(&cover_masks(&costs, &levels[mid]), n, k).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let lambda = levels[hi].clone();
    let masks = cover_masks(&costs, &lambda);
    let picks = cover_with(&masks, n, k).ok_or_else(|| Error::Internal("grid cover vanished".into()))?;
    let mut centers: Vec<GraphPoint<T>> = picks
        .iter()
        .map(|&mi| {
            let g = costs
                .iter()
                .position(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, c)| **c <= lambda)
                        .fold(0u32, |m, (i, _)| m | (1 << i))
                        == masks[mi]
                })
                .expect("mask comes from a grid point");
            grid[g].clone()
        })
        .collect();
    while centers.len() < k {
        centers.push(centers.last().cloned().unwrap_or_else(|| grid[0].clone()));
    }
    Ok(GridSolution {
        lambda,
        centers,
        grid_points: grid.len(),
    })
}

/// Samples per edge used by [`feasibility_oracle`].
const SAMPLES_PER_EDGE: usize = 256;
const BISECTION_STEPS: usize = 60;

/// Feasibility by sampling. Each weighted function is sampled along every
/// edge; every change of side is bisected to a point on the feasible side,
/// and feasible local minima of the samples are kept as well. A `true`
/// verdict is always correct; `false` is reliable when `lambda` is clearly
/// below the optimum.
pub fn feasibility_oracle<T: Scalar>(instance: &Instance<T>, k: usize, lambda: &T) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    check_point_count(instance)?;
    let graph = instance.graph();
    let n = instance.point_count();
    let mut points: Vec<GraphPoint<T>> = (0..graph.vertex_count()).map(|v| graph.vertex_point(v)).collect();
    for (e, edge) in graph.edges().iter().enumerate() {
        let ts: Vec<T> = (0..=SAMPLES_PER_EDGE)
            .map(|j| edge.length.clone() * T::from_ratio(j as i64, SAMPLES_PER_EDGE as i64))
            .collect();
        for i in 0..n {
            let value = |t: &T| instance.weighted_distance_at(i, &GraphPoint::new(e, t.clone()));
            let ys: Vec<T> = ts.iter().map(&value).collect();
            for j in 0..ts.len() {
                if ys[j] <= *lambda {
                    let left_higher = j == 0 || ys[j - 1] >= ys[j];
                    let right_higher = j + 1 == ts.len() || ys[j + 1] >= ys[j];
                    if left_higher && right_higher {
                        points.push(GraphPoint::new(e, ts[j].clone()));
                    }
                }
                if j + 1 < ts.len() && (ys[j] <= *lambda) != (ys[j + 1] <= *lambda) {
                    let (mut good, mut bad) = if ys[j] <= *lambda {
                        (ts[j].clone(), ts[j + 1].clone())
                    } else {
                        (ts[j + 1].clone(), ts[j].clone())
                    };
                    for _ in 0..BISECTION_STEPS {
                        let mid = (good.clone() + bad.clone()).half();
                        if value(&mid) <= *lambda {
                            good = mid;
                        } else {
                            bad = mid;
                        }
                    }
                    points.push(GraphPoint::new(e, good));
                }
            }
        }
    }
    let costs: Vec<Vec<T>> = points
        .iter()
        .map(|q| (0..n).map(|i| instance.weighted_distance_at(i, q)).collect())
        .collect();
    Ok(cover_with(&cover_masks(&costs, lambda), n, k).is_some())
}

/// Union volume by inclusion-exclusion over all non-empty subsets.
pub fn inclusion_exclusion_volume<T: Scalar>(boxes: &[KBox<T>]) -> Result<T> {
    if boxes.len() > MAX_INCLUSION_EXCLUSION_BOXES {
        return Err(Error::SizeGuard(format!(
            "inclusion-exclusion handles at most {MAX_INCLUSION_EXCLUSION_BOXES} boxes"
        )));
    }
    fn walk<T: Scalar>(boxes: &[KBox<T>], from: usize, current: &KBox<T>, size: usize, total: &mut T) {
        for j in from..boxes.len() {
            if let Some(next) = current.intersect(&boxes[j]) {
                let v = next.volume();
                if size % 2 == 0 {
                    *total = total.clone() + v;
                } else {
                    *total = total.clone() - v;
                }
                walk(boxes, j + 1, &next, size + 1, total);
            }
        }
    }
    let mut total = T::zero();
    for (j, b) in boxes.iter().enumerate() {
        total = total + b.volume();
        walk(boxes, j + 1, b, 1, &mut total);
    }
    Ok(total)
}

/// Whether some point strictly inside the product of `edges` avoids every
/// uncertain point's open forbidden boxes at `lambda`.
///
/// Coverage is constant on each cell of the arrangement of segment ends, so
/// it suffices to test, per coordinate, every end and the points half a
/// minimal gap to either side of it.
pub fn open_box_cover_oracle<T: Scalar>(instance: &Instance<T>, edges: &[EdgeId], lambda: &T) -> Result<bool> {
    let graph = instance.graph();
    let n = instance.point_count();
    let segments: Vec<Vec<_>> = edges
        .iter()
        .map(|&e| (0..n).map(|i| forbidden_segments(instance, i, e, lambda)).collect())
        .collect();
    let mut axes: Vec<Vec<T>> = Vec::with_capacity(edges.len());
    for (s, &e) in edges.iter().enumerate() {
        let len = graph.edge(e)?.length.clone();
        let mut ends: Vec<T> = vec![T::zero(), len.clone()];
        for per_point in &segments[s] {
            for iv in per_point {
                ends.push(iv.lo.clone());
                ends.push(iv.hi.clone());
            }
        }
        sort_values(&mut ends);
        ends.dedup();
        let gap = ends
            .windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .fold(len.clone(), |a, g| T::min_value(&a, &g));
        let quarter = gap.half().half();
        let mut coords: Vec<T> = ends
            .iter()
            .flat_map(|x| [x.clone() - quarter.clone(), x.clone(), x.clone() + quarter.clone()])
            .filter(|x| *x > T::zero() && *x < len)
            .collect();
        sort_values(&mut coords);
        coords.dedup();
        axes.push(coords);
    }
    let cells = axes.iter().map(Vec::len).product::<usize>();
    if cells > MAX_OPEN_BOX_GRID {
        return Err(Error::SizeGuard(format!("open-box grid has {cells} cells")));
    }
    let inside_some = |s: usize, i: usize, x: &T| segments[s][i].iter().any(|iv| iv.lo < *x && *x < iv.hi);
    let mut index = vec![0usize; edges.len()];
    loop {
        let x: Vec<&T> = index.iter().enumerate().map(|(s, &j)| &axes[s][j]).collect();
        let covered = (0..n).any(|i| (0..edges.len()).all(|s| inside_some(s, i, x[s])));
        if !covered {
            return Ok(true);
        }
        let mut s = 0;
        loop {
            if s == edges.len() {
                return Ok(false);
            }
            index[s] += 1;
            if index[s] < axes[s].len() {
                break;
            }
            index[s] = 0;
            s += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Graph};
    use crate::uncertain::{Settings, UncertainPoint};

    fn triangle_instance() -> Instance<f64> {
        let g = Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)]).unwrap();
        let points = (0..3)
            .map(|v| UncertainPoint::deterministic(1.0, g.vertex_point(v)))
            .collect();
        Instance::new(g, points, Settings::default()).unwrap()
    }

    #[test]
    fn grid_on_triangle() {
        let inst = triangle_instance();
        let g1 = grid_k_center(&inst, 1, &1e-3).unwrap();
        assert!((1.0..=1.0005).contains(&g1.lambda));
        let g2 = grid_k_center(&inst, 2, &1e-3).unwrap();
        assert!(g2.lambda <= g1.lambda);
        let g3 = grid_k_center(&inst, 3, &1e-3).unwrap();
        assert_eq!(g3.lambda, 0.0);
        assert_eq!(g3.centers.len(), 3);
        assert!(grid_k_center(&inst, 1, &1e-7).is_err());
    }

    #[test]
    fn sampled_feasibility() {
        let inst = triangle_instance();
        assert!(feasibility_oracle(&inst, 1, &1.2).unwrap());
        assert!(!feasibility_oracle(&inst, 1, &0.8).unwrap());
        assert!(feasibility_oracle(&inst, 2, &0.5).unwrap());
        assert!(!feasibility_oracle(&inst, 2, &0.45).unwrap());
    }

    #[test]
    fn inclusion_exclusion_examples() {
        let b = |lo: &[f64], hi: &[f64]| KBox::new(lo.to_vec(), hi.to_vec()).unwrap();
        let boxes = [b(&[0.0, 0.0], &[1.0, 1.0]), b(&[0.5, 0.0], &[1.5, 1.0])];
        assert_eq!(inclusion_exclusion_volume(&boxes).unwrap(), 1.5);
        let many = vec![b(&[0.0], &[1.0]); 21];
        assert!(inclusion_exclusion_volume(&many).is_err());
    }

    #[test]
    fn open_boxes_on_triangle() {
        let inst = triangle_instance();
        assert!(!open_box_cover_oracle(&inst, &[1], &1.0).unwrap());
        assert!(open_box_cover_oracle(&inst, &[1], &1.5).unwrap());
        assert!(open_box_cover_oracle(&inst, &[0, 1], &0.5).unwrap());
    }
}
