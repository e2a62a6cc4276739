//! Random connected instances with rational-friendly coordinates.

use std::collections::HashSet;

use rand::Rng;

use crate::error::Result;
use crate::graph::{Edge, Graph, GraphPoint};
use crate::scalar::Scalar;
use crate::uncertain::{Instance, Location, Settings, UncertainPoint};

/// Offsets are multiples of `1 / OFFSET_STEPS` of the edge length.
const OFFSET_STEPS: i64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub vertices: usize,
    pub edges: usize,
    pub points: usize,
    pub locations: usize,
}

impl Shape {
    /// A random shape within `max`: at least two vertices, a connected edge
    /// count, and at least one point with one location.
    pub fn sample<R: Rng>(rng: &mut R, max: &Shape) -> Shape {
        let vertices = rng.gen_range(2..=max.vertices.max(2));
        let complete = vertices * (vertices - 1) / 2;
        let edges = rng.gen_range(vertices - 1..=max.edges.clamp(vertices - 1, complete));
        Shape {
            vertices,
            edges,
            points: rng.gen_range(1..=max.points.max(1)),
            locations: rng.gen_range(1..=max.locations.max(1)),
        }
    }
}

/// Random spanning tree plus extra distinct edges. Lengths are multiples of
/// 1/8 in `[1/4, 5]`.
pub fn random_graph<T: Scalar, R: Rng>(rng: &mut R, vertices: usize, edges: usize) -> Result<Graph<T>> {
    let complete = vertices * (vertices - 1) / 2;
    let target = edges.clamp(vertices.saturating_sub(1), complete.max(1));
    let mut used = HashSet::new();
    let mut list = Vec::with_capacity(target);
    let length = |rng: &mut R| T::from_ratio(rng.gen_range(2..=40), 8);
    for v in 1..vertices {
        let u = rng.gen_range(0..v);
        used.insert((u, v));
        list.push(Edge::new(u, v, length(rng)));
    }
    let mut spare: Vec<(usize, usize)> = (0..vertices)
        .flat_map(|u| (u + 1..vertices).map(move |v| (u, v)))
        .filter(|pair| !used.contains(pair))
        .collect();
    while list.len() < target && !spare.is_empty() {
        let (u, v) = spare.swap_remove(rng.gen_range(0..spare.len()));
        list.push(Edge::new(u, v, length(rng)));
    }
    Graph::new(vertices, list)
}

/// Random uncertain points on `graph`. Weights are multiples of 1/4 in
/// `[1/2, 2]`; probabilities are integer counts over their sum; about a
/// quarter of the locations sit on vertices.
pub fn random_points<T: Scalar, R: Rng>(
    rng: &mut R,
    graph: &Graph<T>,
    points: usize,
    locations: usize,
) -> Vec<UncertainPoint<T>> {
    (0..points)
        .map(|_| {
            let counts: Vec<i64> = (0..locations).map(|_| rng.gen_range(1..=5)).collect();
            let total: i64 = counts.iter().sum();
            let locs = counts
                .iter()
                .map(|&c| {
                    let edge = rng.gen_range(0..graph.edge_count());
                    let steps = if rng.gen_bool(0.25) {
                        if rng.gen_bool(0.5) { 0 } else { OFFSET_STEPS }
                    } else {
                        rng.gen_range(1..OFFSET_STEPS)
                    };
                    let t = graph.edges()[edge].length.clone() * T::from_ratio(steps, OFFSET_STEPS);
                    Location::new(GraphPoint::new(edge, t), T::from_ratio(c, total))
                })
                .collect();
            UncertainPoint::new(T::from_ratio(rng.gen_range(2..=8), 4), locs)
        })
        .collect()
}

pub fn random_instance<T: Scalar, R: Rng>(rng: &mut R, shape: &Shape, settings: Settings<T>) -> Result<Instance<T>> {
    let graph = random_graph(rng, shape.vertices, shape.edges)?;
    let points = random_points(rng, &graph, shape.points, shape.locations);
    Instance::new(graph, points, settings)
}
