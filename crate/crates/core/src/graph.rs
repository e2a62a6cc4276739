//! Undirected weighted graphs, points on their edges, and distances between points.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::pwl::{Line, PwlFunction};
use crate::scalar::{Scalar, Tolerance};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub u: VertexId,
    pub v: VertexId,
    pub length: T,
}

impl<T> Edge<T> {
    pub fn new(u: VertexId, v: VertexId, length: T) -> Self {
        Edge { u, v, length }
    }
}

/// A point on edge `edge` at distance `t` from the edge's `u` end.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPoint<T> {
    pub edge: EdgeId,
    pub t: T,
}

impl<T> GraphPoint<T> {
    pub fn new(edge: EdgeId, t: T) -> Self {
        GraphPoint { edge, t }
    }
}

/// Turning points of `d(p, .)` along an edge, as offsets on that edge.
#[derive(Clone, Debug, PartialEq)]
pub struct SemicircularPoints<T> {
    /// `p'`: the switch between the route through `u` and the route through
    /// `v` (or, for `p` inside the edge, the direct route back to `p`).
    pub first: Option<T>,
    /// `p''`: only for `p` inside the edge, between `p` and `v`.
    pub second: Option<T>,
}

impl<T> SemicircularPoints<T> {
    pub fn none() -> Self {
        SemicircularPoints {
            first: None,
            second: None,
        }
    }
}

/// `d(p, x)` for `x` on one edge, split into linear pieces of slope `+1` or `-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceProfile<T> {
    /// `(start offset, line)` pairs; each line holds until the next start.
    pieces: Vec<(T, Line<T>)>,
    length: T,
}

impl<T: Scalar> DistanceProfile<T> {
    pub fn pieces(&self) -> &[(T, Line<T>)] {
        &self.pieces
    }

    /// Interior offsets where the profile changes slope.
    pub fn turning_points(&self) -> impl Iterator<Item = &T> {
        self.pieces.iter().skip(1).map(|(t, _)| t)
    }

    /// Line in effect at `t`; at a turning point, the line to its right.
    pub fn line_at(&self, t: &T) -> &Line<T> {
        let idx = self.pieces.partition_point(|(start, _)| start <= t);
        &self.pieces[idx.saturating_sub(1)].1
    }

    pub fn value_at(&self, t: &T) -> T {
        self.line_at(t).eval(t)
    }

    pub fn to_pwl(&self, tol: &Tolerance<T>) -> Result<PwlFunction<T>> {
        let mut points: Vec<(T, T)> = self
            .pieces
            .iter()
            .map(|(start, line)| (start.clone(), line.eval(start)))
            .collect();
        let last = &self.pieces[self.pieces.len() - 1].1;
        points.push((self.length.clone(), last.eval(&self.length)));
        PwlFunction::from_breakpoints(points, tol)
    }
}

/// Undirected simple graph with positive edge lengths and a dense all-pairs
/// shortest-path matrix.
#[derive(Clone, Debug)]
pub struct Graph<T> {
    vertex_count: usize,
    edges: Vec<Edge<T>>,
    incident: Vec<Vec<EdgeId>>,
    dist: Vec<T>,
}

impl<T: Scalar> Graph<T> {
    /// Validates the edge list and computes all shortest vertex distances.
    pub fn new(vertex_count: usize, edges: Vec<Edge<T>>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if edges.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        let mut seen = HashSet::new();
        let mut incident = vec![Vec::new(); vertex_count];
        for (id, e) in edges.iter().enumerate() {
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} references a vertex outside 0..{vertex_count}"
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("edge {id} is a loop")));
            }
            if !e.length.is_finite_value() || e.length <= T::zero() {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} must have a positive finite length, found {}",
                    e.length
                )));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} duplicates an earlier edge between {} and {}",
                    e.u, e.v
                )));
            }
            incident[e.u].push(id);
            incident[e.v].push(id);
        }
        let dist = build_distance_matrix(vertex_count, &edges, &incident)?;
        Ok(Graph {
            vertex_count,
            edges,
            incident,
            dist,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Result<&Edge<T>> {
        self.edges
            .get(id)
            .ok_or_else(|| Error::InvalidPoint(format!("edge {id} does not exist")))
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    /// Shortest-path length between two vertices.
    pub fn dist(&self, u: VertexId, v: VertexId) -> &T {
        &self.dist[u * self.vertex_count + v]
    }

    pub fn point(&self, edge: EdgeId, t: T) -> Result<GraphPoint<T>> {
        let p = GraphPoint::new(edge, t);
        self.validate_point(&p)?;
        Ok(p)
    }

    pub fn validate_point(&self, p: &GraphPoint<T>) -> Result<()> {
        let e = self.edge(p.edge)?;
        if !p.t.is_finite_value() || p.t < T::zero() || p.t > e.length {
            return Err(Error::InvalidPoint(format!(
                "offset {} outside [0, {}] on edge {}",
                p.t, e.length, p.edge
            )));
        }
        Ok(())
    }

    /// Canonical point for vertex `v`: an end of its lowest-numbered incident edge.
    pub fn vertex_point(&self, v: VertexId) -> GraphPoint<T> {
        let edge = self.incident[v][0];
        let e = &self.edges[edge];
        let t = if e.u == v { T::zero() } else { e.length.clone() };
        GraphPoint::new(edge, t)
    }

    /// The vertex `p` sits on, if its offset is within tolerance of an edge end.
    pub fn vertex_at(&self, p: &GraphPoint<T>, tol: &Tolerance<T>) -> Option<VertexId> {
        let e = &self.edges[p.edge];
        if tol.is_zero(&p.t) {
            Some(e.u)
        } else if tol.eq(&p.t, &e.length) {
            Some(e.v)
        } else {
            None
        }
    }

    /// Rewrites vertex points into their canonical representation.
    pub fn canonical(&self, p: &GraphPoint<T>, tol: &Tolerance<T>) -> GraphPoint<T> {
        match self.vertex_at(p, tol) {
            Some(v) => self.vertex_point(v),
            None => p.clone(),
        }
    }

    /// Distance from a point to a vertex.
    pub fn distance_to_vertex(&self, p: &GraphPoint<T>, w: VertexId) -> T {
        let e = &self.edges[p.edge];
        let via_u = p.t.clone() + self.dist(e.u, w).clone();
        let via_v = e.length.clone() - p.t.clone() + self.dist(e.v, w).clone();
        T::min_value(&via_u, &via_v)
    }

    /// Shortest-path distance `d(p, q)` between two validated points.
    pub fn point_distance(&self, p: &GraphPoint<T>, q: &GraphPoint<T>) -> Result<T> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        Ok(self.distance(p, q))
    }

    pub(crate) fn distance(&self, p: &GraphPoint<T>, q: &GraphPoint<T>) -> T {
        let ep = &self.edges[p.edge];
        if p.edge == q.edge {
            let len = ep.length.clone();
            let direct = (p.t.clone() - q.t.clone()).abs();
            let around_u = p.t.clone() + self.dist(ep.u, ep.v).clone() + len.clone() - q.t.clone();
            let around_v = len - p.t.clone() + self.dist(ep.v, ep.u).clone() + q.t.clone();
            return T::min_value(&direct, &T::min_value(&around_u, &around_v));
        }
        let eq = &self.edges[q.edge];
        let to_qu = self.distance_to_vertex(p, eq.u) + q.t.clone();
        let to_qv = self.distance_to_vertex(p, eq.v) + eq.length.clone() - q.t.clone();
        T::min_value(&to_qu, &to_qv)
    }

    fn is_interior(&self, p: &GraphPoint<T>, edge: EdgeId, tol: &Tolerance<T>) -> bool {
        p.edge == edge && self.vertex_at(p, tol).is_none()
    }

    /// Points of edge `edge` where `d(p, .)` turns.
    ///
    /// For `p` off the edge (or on one of its ends) there is at most one, the
    /// balance point of the routes through `u` and `v`. For `p` inside the edge
    /// `first` lies between `u` and `p` and exists iff `d(p, u) < t(p)`;
    /// `second` lies between `p` and `v` and exists iff `d(p, v) < len - t(p)`.
    pub fn semicircular_points(
        &self,
        p: &GraphPoint<T>,
        edge: EdgeId,
        tol: &Tolerance<T>,
    ) -> Result<SemicircularPoints<T>> {
        self.validate_point(p)?;
        let e = self.edge(edge)?;
        let len = e.length.clone();
        let two = T::one() + T::one();
        if !self.is_interior(p, edge, tol) {
            let du = self.distance_to_vertex(p, e.u);
            let dv = self.distance_to_vertex(p, e.v);
            let first = (tol.lt(&dv, &(du.clone() + len.clone()))
                && tol.lt(&du, &(dv.clone() + len.clone())))
            .then(|| (dv + len - du) / two);
            return Ok(SemicircularPoints {
                first,
                second: None,
            });
        }
        let tp = p.t.clone();
        let du = self.distance_to_vertex(p, e.u);
        let dv = self.distance_to_vertex(p, e.v);
        let first = tol.lt(&du, &tp).then(|| (tp.clone() - du) / two.clone());
        let second = tol
            .lt(&dv, &(len.clone() - tp.clone()))
            .then(|| (tp + dv + len) / two);
        Ok(SemicircularPoints { first, second })
    }

    /// `d(p, .)` along `edge` as explicit slope `+-1` pieces.
    pub fn distance_profile(
        &self,
        p: &GraphPoint<T>,
        edge: EdgeId,
        tol: &Tolerance<T>,
    ) -> Result<DistanceProfile<T>> {
        let semi = self.semicircular_points(p, edge, tol)?;
        let e = &self.edges[edge];
        let len = e.length.clone();
        let du = self.distance_to_vertex(p, e.u);
        let dv = self.distance_to_vertex(p, e.v);
        let rising_from_u = Line::new(T::one(), du.clone());
        let falling_to_v = Line::new(-T::one(), dv.clone() + len.clone());

        let mut pieces: Vec<(T, Line<T>)> = Vec::with_capacity(4);
        if !self.is_interior(p, edge, tol) {
            match semi.first {
                Some(turn) => {
                    pieces.push((T::zero(), rising_from_u));
                    pieces.push((turn, falling_to_v));
                }
                // One route dominates the whole edge.
                None if du <= dv => pieces.push((T::zero(), rising_from_u)),
                None => pieces.push((T::zero(), falling_to_v)),
            }
        } else {
            let tp = p.t.clone();
            let toward_p = Line::new(-T::one(), tp.clone());
            let away_from_p = Line::new(T::one(), -tp.clone());
            match semi.first {
                Some(turn) => {
                    pieces.push((T::zero(), rising_from_u));
                    pieces.push((turn, toward_p));
                }
                None => pieces.push((T::zero(), toward_p)),
            }
            pieces.push((tp, away_from_p));
            if let Some(turn) = semi.second {
                pieces.push((turn, falling_to_v));
            }
        }
        // Drop slivers narrower than the tolerance; the neighbour absorbs them.
        let mut kept: Vec<(T, Line<T>)> = Vec::with_capacity(pieces.len());
        for (idx, (start, line)) in pieces.iter().enumerate() {
            let next = pieces.get(idx + 1).map(|(s, _)| s.clone()).unwrap_or_else(|| len.clone());
            let width = next - start.clone();
            if width > *tol.eps() || pieces.len() == 1 {
                if kept.is_empty() {
                    kept.push((T::zero(), line.clone()));
                } else {
                    kept.push((start.clone(), line.clone()));
                }
            }
        }
        if kept.is_empty() {
            kept.push((T::zero(), pieces[0].1.clone()));
        }
        Ok(DistanceProfile {
            pieces: kept,
            length: len,
        })
    }

    /// `d(p, x)` for `x = (edge, t)`, `t` in `[0, len]`, as a piecewise-linear function.
    pub fn location_distance_function(
        &self,
        p: &GraphPoint<T>,
        edge: EdgeId,
        tol: &Tolerance<T>,
    ) -> Result<PwlFunction<T>> {
        self.distance_profile(p, edge, tol)?.to_pwl(tol)
    }
}

struct HeapEntry<T> {
    dist: T,
    vertex: VertexId,
}

impl<T: Scalar> PartialEq for HeapEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for HeapEntry<T> {}

impl<T: Scalar> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for HeapEntry<T> {
    // Reversed so the max-heap pops the closest vertex first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .cmp_value(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// One Dijkstra run per vertex; the matrix is stored row-major.
pub fn build_distance_matrix<T: Scalar>(
    vertex_count: usize,
    edges: &[Edge<T>],
    incident: &[Vec<EdgeId>],
) -> Result<Vec<T>> {
    let mut matrix = Vec::with_capacity(vertex_count * vertex_count);
    for source in 0..vertex_count {
        let mut best: Vec<Option<T>> = vec![None; vertex_count];
        let mut done = vec![false; vertex_count];
        let mut heap = BinaryHeap::new();
        best[source] = Some(T::zero());
        heap.push(HeapEntry {
            dist: T::zero(),
            vertex: source,
        });
        while let Some(HeapEntry { dist, vertex }) = heap.pop() {
            if done[vertex] {
                continue;
            }
            done[vertex] = true;
            for &id in &incident[vertex] {
                let e = &edges[id];
                let next = if e.u == vertex { e.v } else { e.u };
                let candidate = dist.clone() + e.length.clone();
                if best[next].as_ref().is_none_or(|b| candidate < *b) {
                    best[next] = Some(candidate.clone());
                    heap.push(HeapEntry {
                        dist: candidate,
                        vertex: next,
                    });
                }
            }
        }
        for d in best {
            matrix.push(d.ok_or(Error::Disconnected)?);
        }
    }
    // Rounding can differ between the two directions; keep the smaller one.
    for u in 0..vertex_count {
        for v in u + 1..vertex_count {
            let d = T::min_value(&matrix[u * vertex_count + v], &matrix[v * vertex_count + u]);
            matrix[u * vertex_count + v] = d.clone();
            matrix[v * vertex_count + u] = d;
        }
    }
    Ok(matrix)
}
