//! One center: the lowest point of the upper envelope of all weighted
//! expected-distance functions, edge by edge.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphPoint};
use crate::optimizer::{Diagnostics, Method, Solution};
use crate::pwl::Line;
use crate::scalar::Scalar;
use crate::uncertain::{objective, Instance};

/// A turning point of the envelope sweep and the uncertain points whose
/// functions turn there, each with its weighted line on the following
/// interval.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeEvent<T> {
    pub t: T,
    pub points: Vec<(usize, Line<T>)>,
}

/// Merged, sorted turning points of every `w_i * Ed(P_i, .)` on `edge`. The
/// first event lists every point and the last one, at the far end, none.
pub fn envelope_events<T: Scalar>(instance: &Instance<T>, edge: EdgeId) -> Vec<EnvelopeEvent<T>> {
    let tol = instance.tolerance();
    let len = instance.graph().edges()[edge].length.clone();
    let mut raw: Vec<(T, usize, Line<T>)> = Vec::new();
    for (i, ed) in instance.edge_functions(edge).iter().enumerate() {
        let w = &instance.points()[i].weight;
        let last = ed.turning_points.len() - 1;
        for tp in &ed.turning_points[..last] {
            raw.push((tp.t.clone(), i, tp.line.scale(w)));
        }
    }
    raw.sort_by(|a, b| a.0.cmp_value(&b.0).then(a.1.cmp(&b.1)));

    let mut events: Vec<EnvelopeEvent<T>> = Vec::new();
    for (t, i, line) in raw {
        match events.last_mut() {
            Some(ev) if tol.eq(&ev.t, &t) => match ev.points.iter_mut().find(|(j, _)| *j == i) {
                Some(slot) => slot.1 = line,
                None => ev.points.push((i, line)),
            },
            _ => events.push(EnvelopeEvent {
                t,
                points: vec![(i, line)],
            }),
        }
    }
    events.push(EnvelopeEvent {
        t: len,
        points: Vec::new(),
    });
    events
}

/// Lowest point of an edge's envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeMinimum<T> {
    pub t: T,
    pub value: T,
    /// An uncertain point whose weighted function attains the value.
    pub point: usize,
    pub intervals: usize,
}

/// Lowest point of `max_i w_i * Ed(P_i, .)` on `edge`; the leftmost one on
/// ties.
pub fn lowest_envelope_point_on_edge<T: Scalar>(instance: &Instance<T>, edge: EdgeId) -> Result<EnvelopeMinimum<T>> {
    instance.graph().edge(edge)?;
    let events = envelope_events(instance, edge);
    let n = instance.point_count();
    let mut current: Vec<Option<Line<T>>> = vec![None; n];
    let mut best: Option<EnvelopeMinimum<T>> = None;
    for pair in events.windows(2) {
        for (i, line) in &pair[0].points {
            current[*i] = Some(line.clone());
        }
        let lines: Vec<(usize, Line<T>)> = current
            .iter()
            .enumerate()
            .map(|(i, l)| l.clone().map(|l| (i, l)))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Internal("first envelope event misses a point".into()))?;
        let (t, value, point) = interval_minimum(&lines, &pair[0].t, &pair[1].t);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(EnvelopeMinimum {
                t,
                value,
                point,
                intervals: 0,
            });
        }
    }
    let mut best = best.ok_or_else(|| Error::Internal("edge without envelope intervals".into()))?;
    best.intervals = events.len() - 1;
    Ok(best)
}

/// Minimum over `[a, b]` of the upper envelope of `lines`.
fn interval_minimum<T: Scalar>(lines: &[(usize, Line<T>)], a: &T, b: &T) -> (T, T, usize) {
    let hull = upper_hull(lines);
    let at_end = |t: &T| -> (T, T, usize) {
        let mut top = (lines[0].1.eval(t), lines[0].0);
        for (i, l) in &lines[1..] {
            let y = l.eval(t);
            if y > top.0 {
                top = (y, *i);
            }
        }
        (t.clone(), top.0, top.1)
    };
    // The envelope is convex: its minimum is where the hull slope first
    // becomes non-negative.
    let Some(turn) = hull.iter().position(|(_, l)| l.slope >= T::zero()) else {
        return at_end(b);
    };
    if turn == 0 {
        return at_end(a);
    }
    let (left_owner, left) = &hull[turn - 1];
    let (right_owner, right) = &hull[turn];
    let t = left.intersection_t(right).expect("hull neighbours are not parallel");
    if t <= *a {
        at_end(a)
    } else if t >= *b {
        at_end(b)
    } else {
        let y = left.intersection_y(right).expect("hull neighbours are not parallel");
        (t, y, (*left_owner).min(*right_owner))
    }
}

/// Upper envelope over the whole real line, as lines in increasing slope.
fn upper_hull<T: Scalar>(lines: &[(usize, Line<T>)]) -> Vec<(usize, Line<T>)> {
    let mut sorted: Vec<&(usize, Line<T>)> = lines.iter().collect();
    sorted.sort_by(|x, y| {
        x.1.slope
            .cmp_value(&y.1.slope)
            .then(y.1.intercept.cmp_value(&x.1.intercept))
            .then(x.0.cmp(&y.0))
    });
    let mut hull: Vec<(usize, Line<T>)> = Vec::with_capacity(sorted.len());
    for entry in sorted {
        if let Some(last) = hull.last() {
            if last.1.slope == entry.1.slope {
                continue;
            }
        }
        while hull.len() >= 2 {
            let l1 = &hull[hull.len() - 2].1;
            let l2 = &hull[hull.len() - 1].1;
            // l2 is hidden if the new line overtakes l1 no later than l2 does.
            let x12 = l1.intersection_t(l2).expect("distinct slopes");
            let x13 = l1.intersection_t(&entry.1).expect("distinct slopes");
            if x13 <= x12 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(entry.clone());
    }
    hull
}

/// Minimum over all edges; ties go to the smaller edge index.
pub fn solve_one_center<T: Scalar>(instance: &Instance<T>) -> Result<Solution<T>> {
    let minima: Vec<EnvelopeMinimum<T>> = (0..instance.graph().edge_count())
        .into_par_iter()
        .map(|e| lowest_envelope_point_on_edge(instance, e))
        .collect::<Result<_>>()?;
    let intervals = minima.iter().map(|m| m.intervals).sum();
    let (edge, best) = minima
        .into_iter()
        .enumerate()
        .reduce(|acc, next| if next.1.value < acc.1.value { next } else { acc })
        .ok_or_else(|| Error::Internal("graph without edges".into()))?;
    let len = &instance.graph().edges()[edge].length;
    let t = T::min_value(&T::max_value(&best.t, &T::zero()), len);
    let center = instance
        .graph()
        .canonical(&GraphPoint::new(edge, t), instance.tolerance());
    let centers = vec![center];
    let (_, assignment) = objective(instance, &centers)?;
    Ok(Solution {
        lambda: best.value,
        centers,
        assignment,
        diagnostics: Diagnostics {
            method: Method::OneCenter,
            candidate_count: 0,
            feasibility_calls: 0,
            envelope_intervals: intervals,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Graph};
    use crate::uncertain::{Location, Settings, UncertainPoint};

    fn triangle_instance(weights: [f64; 3]) -> Instance<f64> {
        let g = Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)]).unwrap();
        let points = (0..3)
            .map(|v| UncertainPoint::deterministic(weights[v], g.vertex_point(v)))
            .collect();
        Instance::new(g, points, Settings::default()).unwrap()
    }

    #[test]
    fn event_list_shape() {
        let inst = triangle_instance([1.0; 3]);
        let ev = envelope_events(&inst, 1);
        assert_eq!(ev.first().unwrap().points.len(), 3);
        assert!(ev.last().unwrap().points.is_empty());
        assert_eq!(ev.iter().map(|e| e.t).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert!(ev.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn triangle_far_edge() {
        let inst = triangle_instance([1.0; 3]);
        let m = lowest_envelope_point_on_edge(&inst, 1).unwrap();
        assert_eq!((m.t, m.value), (0.0, 1.0));
    }

    #[test]
    fn triangle_one_center() {
        let inst = triangle_instance([1.0; 3]);
        let s = solve_one_center(&inst).unwrap();
        assert_eq!(s.lambda, 1.0);
        assert_eq!(s.centers, vec![inst.graph().vertex_point(0)]);
        assert_eq!(s.assignment, vec![0, 0, 0]);
    }

    #[test]
    fn single_point_is_its_own_minimum() {
        let g = Graph::new(3, vec![Edge::new(0, 1, 2.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 2.0)]).unwrap();
        let p = UncertainPoint::new(
            1.0,
            vec![Location::new(g.point(0, 0.5).unwrap(), 0.5), Location::new(g.point(0, 1.5).unwrap(), 0.5)],
        );
        let inst = Instance::new(g, vec![p], Settings::default()).unwrap();
        let s = solve_one_center(&inst).unwrap();
        // Anywhere between the two locations gives 0.5; the leftmost is 0.5.
        assert_eq!(s.lambda, 0.5);
        assert_eq!(s.centers, vec![GraphPoint::new(0, 0.5)]);

        let g = Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)]).unwrap();
        let inst = Instance::new(
            g.clone(),
            vec![UncertainPoint::deterministic(1.0, g.point(1, 0.25).unwrap())],
            Settings::default(),
        )
        .unwrap();
        let s = solve_one_center(&inst).unwrap();
        assert_eq!(s.lambda, 0.0);
        assert_eq!(s.centers, vec![GraphPoint::new(1, 0.25)]);
    }

    #[test]
    fn zero_weights_give_zero_at_start() {
        let inst = triangle_instance([0.0; 3]);
        let s = solve_one_center(&inst).unwrap();
        assert_eq!(s.lambda, 0.0);
        let m = lowest_envelope_point_on_edge(&inst, 2).unwrap();
        assert_eq!((m.t, m.value), (0.0, 0.0));
    }

    #[test]
    fn interior_minimum_at_crossing() {
        // Two deterministic points at the ends of a single long edge path.
        let g = Graph::new(2, vec![Edge::new(0, 1, 3.0)]).unwrap();
        let points = vec![
            UncertainPoint::deterministic(1.0, g.vertex_point(0)),
            UncertainPoint::deterministic(2.0, g.vertex_point(1)),
        ];
        let inst = Instance::new(g, points, Settings::default()).unwrap();
        let s = solve_one_center(&inst).unwrap();
        // t = 2 (3 - t) at t = 2.
        assert_eq!(s.lambda, 2.0);
        assert_eq!(s.centers, vec![GraphPoint::new(0, 2.0)]);
    }
}
