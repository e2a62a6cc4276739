//! Uncertain points, their expected-distance functions along edges, and the
//! k-center objective.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DistanceProfile, EdgeId, Graph, GraphPoint};
use crate::pwl::{Line, PwlFunction};
use crate::scalar::{Scalar, Tolerance, PROBABILITY_SUM_TOLERANCE};

#[derive(Clone, Debug, PartialEq)]
pub struct Location<T> {
    pub point: GraphPoint<T>,
    pub probability: T,
}

impl<T> Location<T> {
    pub fn new(point: GraphPoint<T>, probability: T) -> Self {
        Location { point, probability }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertainPoint<T> {
    pub weight: T,
    pub locations: Vec<Location<T>>,
}

impl<T: Scalar> UncertainPoint<T> {
    pub fn new(weight: T, locations: Vec<Location<T>>) -> Self {
        UncertainPoint { weight, locations }
    }

    /// A point that sits at `point` with certainty.
    pub fn deterministic(weight: T, point: GraphPoint<T>) -> Self {
        UncertainPoint::new(weight, vec![Location::new(point, T::one())])
    }

    pub fn probability_mass(&self) -> T {
        self.locations
            .iter()
            .fold(T::zero(), |acc, loc| acc + loc.probability.clone())
    }
}

/// A turning point `x_s` of one expected-distance function.
#[derive(Clone, Debug, PartialEq)]
pub struct TurningPoint<T> {
    pub t: T,
    /// Indices of the locations whose distance functions turn here. The
    /// first turning point lists every location.
    pub locations: Vec<usize>,
    /// `Ed` on `[t, next t]`; on the last turning point, the final piece.
    pub line: Line<T>,
}

/// `Ed(P_i, .)` restricted to one edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeExpectedDistance<T> {
    pub point: usize,
    pub edge: EdgeId,
    pub function: PwlFunction<T>,
    pub turning_points: Vec<TurningPoint<T>>,
}

impl<T: Scalar> EdgeExpectedDistance<T> {
    /// Line of `Ed` on the interval that starts at turning point `s`.
    pub fn line(&self, s: usize) -> &Line<T> {
        &self.turning_points[s].line
    }
}

/// Builds `Ed(P, .)` on `edge` by sweeping the sorted turning points of all
/// locations and updating the current line only for the locations that turn.
pub fn expected_distance_function<T: Scalar>(
    graph: &Graph<T>,
    point_id: usize,
    point: &UncertainPoint<T>,
    edge: EdgeId,
    tol: &Tolerance<T>,
) -> Result<EdgeExpectedDistance<T>> {
    let len = graph.edge(edge)?.length.clone();
    let profiles: Vec<DistanceProfile<T>> = point
        .locations
        .iter()
        .map(|loc| graph.distance_profile(&loc.point, edge, tol))
        .collect::<Result<_>>()?;

    let mut events: Vec<(T, usize)> = profiles
        .iter()
        .enumerate()
        .flat_map(|(j, prof)| prof.turning_points().map(move |t| (t.clone(), j)))
        .collect();
    events.sort_by(|a, b| a.0.cmp_value(&b.0).then(a.1.cmp(&b.1)));

    let mut turning: Vec<(T, Vec<usize>)> = vec![(T::zero(), (0..profiles.len()).collect())];
    for (t, j) in events {
        let last = turning.last_mut().expect("starts non-empty");
        if tol.eq(&t, &last.0) {
            if !last.1.contains(&j) {
                last.1.push(j);
            }
        } else if tol.lt(&t, &len) {
            turning.push((t, vec![j]));
        }
    }
    // The first entry already carries every location; anything merged into it
    // is redundant.
    turning[0].1 = (0..profiles.len()).collect();

    let contribution = |j: usize, at: &T| -> Line<T> {
        profiles[j].line_at(at).scale(&point.locations[j].probability)
    };
    let mut current = Line::constant(T::zero());
    let mut out: Vec<TurningPoint<T>> = Vec::with_capacity(turning.len() + 1);
    for s in 0..turning.len() {
        let lo = &turning[s].0;
        let hi = turning.get(s + 1).map(|x| &x.0).unwrap_or(&len);
        let mid = (lo.clone() + hi.clone()).half();
        if s > 0 {
            let prev_lo = &turning[s - 1].0;
            let prev_mid = (prev_lo.clone() + lo.clone()).half();
            for &j in &turning[s].1 {
                current = current.sub(&contribution(j, &prev_mid));
            }
        }
        for &j in &turning[s].1 {
            current = current.add(&contribution(j, &mid));
        }
        out.push(TurningPoint {
            t: lo.clone(),
            locations: turning[s].1.clone(),
            line: current.clone(),
        });
    }
    out.push(TurningPoint {
        t: len.clone(),
        locations: Vec::new(),
        line: current.clone(),
    });

    let mut breakpoints: Vec<(T, T)> = out[..out.len() - 1]
        .iter()
        .map(|tp| (tp.t.clone(), tp.line.eval(&tp.t)))
        .collect();
    breakpoints.push((len.clone(), current.eval(&len)));
    let function = PwlFunction::from_breakpoints(breakpoints, tol)?;
    Ok(EdgeExpectedDistance {
        point: point_id,
        edge,
        function,
        turning_points: out,
    })
}

/// `Ed(P, q)` as the direct sum over locations.
pub fn expected_distance_at<T: Scalar>(graph: &Graph<T>, point: &UncertainPoint<T>, q: &GraphPoint<T>) -> T {
    point.locations.iter().fold(T::zero(), |acc, loc| {
        acc + loc.probability.clone() * graph.distance(&loc.point, q)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings<T> {
    pub tolerance: Tolerance<T>,
    /// Require every point's probabilities to sum to one.
    pub enforce_probability_sum: bool,
}

impl<T: Scalar> Default for Settings<T> {
    fn default() -> Self {
        Settings {
            tolerance: Tolerance::default(),
            enforce_probability_sum: true,
        }
    }
}

/// A validated problem instance with every `Ed(P_i, .)` prebuilt on every edge.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    graph: Graph<T>,
    points: Vec<UncertainPoint<T>>,
    settings: Settings<T>,
    /// Indexed `[edge][point]`.
    functions: Vec<Vec<EdgeExpectedDistance<T>>>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(graph: Graph<T>, points: Vec<UncertainPoint<T>>, settings: Settings<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidUncertainPoint {
                point: 0,
                reason: "instance has no uncertain points".into(),
            });
        }
        let prob_tol = T::from_float(PROBABILITY_SUM_TOLERANCE).expect("finite constant");
        for (i, p) in points.iter().enumerate() {
            validate_point(&graph, i, p, settings.enforce_probability_sum, &prob_tol)?;
        }
        let tol = &settings.tolerance;
        let functions = (0..graph.edge_count())
            .into_par_iter()
            .map(|e| {
                points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| expected_distance_function(&graph, i, p, e, tol))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance {
            graph,
            points,
            settings,
            functions,
        })
    }

    pub fn graph(&self) -> &Graph<T> {
        &self.graph
    }

    pub fn points(&self) -> &[UncertainPoint<T>] {
        &self.points
    }

    pub fn settings(&self) -> &Settings<T> {
        &self.settings
    }

    pub fn tolerance(&self) -> &Tolerance<T> {
        &self.settings.tolerance
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn expected_distance(&self, point: usize, edge: EdgeId) -> &EdgeExpectedDistance<T> {
        &self.functions[edge][point]
    }

    pub fn edge_functions(&self, edge: EdgeId) -> &[EdgeExpectedDistance<T>] {
        &self.functions[edge]
    }

    /// `w_i * Ed(P_i, .)` on `edge`.
    pub fn weighted_function(&self, point: usize, edge: EdgeId) -> PwlFunction<T> {
        self.functions[edge][point]
            .function
            .scale(&self.points[point].weight)
    }

    /// `w_i * Ed(P_i, q)` by direct summation.
    pub fn weighted_distance_at(&self, point: usize, q: &GraphPoint<T>) -> T {
        self.points[point].weight.clone() * expected_distance_at(&self.graph, &self.points[point], q)
    }

    pub fn max_weight(&self) -> T {
        self.points
            .iter()
            .fold(T::zero(), |acc, p| T::max_value(&acc, &p.weight))
    }
}

fn validate_point<T: Scalar>(
    graph: &Graph<T>,
    i: usize,
    p: &UncertainPoint<T>,
    enforce_sum: bool,
    prob_tol: &T,
) -> Result<()> {
    if !p.weight.is_finite_value() || p.weight < T::zero() {
        return Err(Error::InvalidUncertainPoint {
            point: i,
            reason: format!("weight must be finite and non-negative, found {}", p.weight),
        });
    }
    if p.locations.is_empty() {
        return Err(Error::InvalidUncertainPoint {
            point: i,
            reason: "needs at least one location".into(),
        });
    }
    for (j, loc) in p.locations.iter().enumerate() {
        if !loc.probability.is_finite_value() || loc.probability < T::zero() {
            return Err(Error::InvalidLocation {
                point: i,
                location: j,
                reason: format!(
                    "probability must be finite and non-negative, found {}",
                    loc.probability
                ),
            });
        }
        graph
            .validate_point(&loc.point)
            .map_err(|err| Error::InvalidLocation {
                point: i,
                location: j,
                reason: err.to_string(),
            })?;
    }
    let mass = p.probability_mass();
    if enforce_sum && (mass.clone() - T::one()).abs() > *prob_tol {
        return Err(Error::InvalidUncertainPoint {
            point: i,
            reason: format!("probabilities sum to {mass}, expected 1"),
        });
    }
    Ok(())
}

/// `max_i min_q w_i * Ed(P_i, q)` together with the chosen center index per
/// point (lowest index on ties).
pub fn objective<T: Scalar>(instance: &Instance<T>, centers: &[GraphPoint<T>]) -> Result<(T, Vec<usize>)> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    for c in centers {
        instance.graph.validate_point(c)?;
    }
    let mut value = T::zero();
    let mut assignment = Vec::with_capacity(instance.point_count());
    for i in 0..instance.point_count() {
        let mut best = (instance.weighted_distance_at(i, &centers[0]), 0);
        for (c, q) in centers.iter().enumerate().skip(1) {
            let d = instance.weighted_distance_at(i, q);
            if d < best.0 {
                best = (d, c);
            }
        }
        value = T::max_value(&value, &best.0);
        assignment.push(best.1);
    }
    Ok((value, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn triangle() -> Graph<f64> {
        Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)]).unwrap()
    }

    fn at_vertices(g: &Graph<f64>) -> Instance<f64> {
        let points = (0..3)
            .map(|v| UncertainPoint::deterministic(1.0, g.vertex_point(v)))
            .collect();
        Instance::new(g.clone(), points, Settings::default()).unwrap()
    }

    #[test]
    fn two_location_point_on_far_edge() {
        let g = triangle();
        let p = UncertainPoint::new(
            1.0,
            vec![Location::new(g.vertex_point(0), 0.5), Location::new(g.vertex_point(1), 0.5)],
        );
        let ed = expected_distance_function(&g, 0, &p, 1, &Tolerance::default()).unwrap();
        assert_eq!(ed.function.breakpoints(), &[(0.0, 0.5), (0.5, 1.0), (1.0, 1.0)]);
        assert_eq!(expected_distance_at(&g, &p, &g.vertex_point(2)), 1.0);
        let ts: Vec<f64> = ed.turning_points.iter().map(|tp| tp.t).collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0]);
        assert_eq!(ed.turning_points[0].locations, vec![0, 1]);
        assert_eq!(ed.turning_points[1].locations, vec![0]);
        assert!(ed.turning_points[2].locations.is_empty());
    }

    #[test]
    fn single_location_at_edge_end() {
        let g = triangle();
        let p = UncertainPoint::deterministic(1.0, GraphPoint::new(0, 0.0));
        let ed = expected_distance_function(&g, 0, &p, 0, &Tolerance::default()).unwrap();
        assert_eq!(ed.function.breakpoints(), &[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(expected_distance_at(&g, &p, &GraphPoint::new(0, 0.0)), 0.0);
    }

    #[test]
    fn objective_examples() {
        let g = triangle();
        let inst = at_vertices(&g);
        assert_eq!(objective(&inst, &[g.vertex_point(0)]).unwrap().0, 1.0);
        let (value, assignment) = objective(&inst, &[g.vertex_point(0), GraphPoint::new(1, 0.5)]).unwrap();
        assert_eq!(value, 0.5);
        assert_eq!(assignment, vec![0, 1, 1]);
        assert_eq!(objective(&inst, &[]).unwrap_err(), Error::EmptyCenters);
    }

    #[test]
    fn zero_weight_contributes_nothing() {
        let g = triangle();
        let p = UncertainPoint::new(
            0.0,
            vec![Location::new(g.vertex_point(0), 0.25), Location::new(GraphPoint::new(1, 0.5), 0.75)],
        );
        let inst = Instance::new(g.clone(), vec![p], Settings::default()).unwrap();
        let (value, _) = objective(&inst, &[g.vertex_point(2)]).unwrap();
        assert_eq!(value, 0.0);
    }

    #[test]
    fn validation_errors_name_the_field() {
        let g = triangle();
        let bad_prob = UncertainPoint::new(
            1.0,
            vec![Location::new(g.vertex_point(0), -0.5), Location::new(g.vertex_point(1), 1.5)],
        );
        assert!(matches!(
            Instance::new(g.clone(), vec![bad_prob], Settings::default()),
            Err(Error::InvalidLocation { point: 0, location: 0, .. })
        ));
        let short = UncertainPoint::new(1.0, vec![Location::new(g.vertex_point(0), 0.5)]);
        assert!(Instance::new(g.clone(), vec![short.clone()], Settings::default()).is_err());
        let relaxed = Settings {
            enforce_probability_sum: false,
            ..Settings::default()
        };
        assert!(Instance::new(g.clone(), vec![short], relaxed).is_ok());
        let off_edge = UncertainPoint::deterministic(1.0, GraphPoint::new(0, 2.0));
        assert!(matches!(
            Instance::new(g.clone(), vec![off_edge], Settings::default()),
            Err(Error::InvalidLocation { point: 0, location: 0, .. })
        ));
        let negative = UncertainPoint::deterministic(-1.0, g.vertex_point(0));
        assert!(Instance::new(g, vec![negative], Settings::default()).is_err());
    }
}
