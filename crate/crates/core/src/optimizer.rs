//! Exact `lambda*` by binary search over a finite candidate set.
//!
//! Along an edge every `w_i * Ed(P_i, .)` is piecewise linear, and the
//! optimum is attained where two pieces cross or at a piece end. Collecting
//! the heights of all such points gives a sorted list that contains
//! `lambda*`; feasibility is monotone along it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feasibility::{feasible, feasible_by_candidates, Engine};
use crate::graph::GraphPoint;
use crate::pwl::Line;
use crate::scalar::{sort_values, Scalar, Tolerance};
use crate::uncertain::{objective, Instance};

/// How a solution was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    OneCenter,
    Search(Engine),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics {
    pub method: Method,
    pub candidate_count: usize,
    pub feasibility_calls: usize,
    /// Envelope intervals scanned by the one-center sweep.
    pub envelope_intervals: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub lambda: T,
    pub centers: Vec<GraphPoint<T>>,
    /// Index into `centers` serving each uncertain point.
    pub assignment: Vec<usize>,
    pub diagnostics: Diagnostics,
}

/// Weighted lines of every piece of every `w_i * Ed(P_i, .)` on one edge,
/// paired with the piece's extent.
pub(crate) fn edge_lines<T: Scalar>(instance: &Instance<T>, edge: usize) -> Vec<(Line<T>, T, T)> {
    let mut lines = Vec::new();
    for (i, ed) in instance.edge_functions(edge).iter().enumerate() {
        let w = &instance.points()[i].weight;
        for pair in ed.turning_points.windows(2) {
            lines.push((pair[0].line.scale(w), pair[0].t.clone(), pair[1].t.clone()));
        }
    }
    lines
}

/// Sorts and merges values closer than the tolerance. Each cluster starts at
/// its smallest value and absorbs everything within `eps` of that start; the
/// start represents the cluster.
pub fn dedup_values<T: Scalar>(values: &mut Vec<T>, tol: &Tolerance<T>) {
    sort_values(values);
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for v in values.drain(..) {
        match out.last() {
            Some(start) if tol.le(&v, start) => {}
            _ => out.push(v),
        }
    }
    *values = out;
}

/// Every height at which `lambda*` can occur, sorted and deduplicated.
///
/// Per edge: each line at both edge ends, each piece at both of its ends, and
/// every pairwise intersection of the edge's lines. Negative values are
/// dropped.
pub fn candidate_values<T: Scalar>(instance: &Instance<T>) -> Vec<T> {
    let tol = instance.tolerance();
    let graph = instance.graph();
    let mut values: Vec<T> = (0..graph.edge_count())
        .into_par_iter()
        .flat_map_iter(|e| {
            let len = graph.edges()[e].length.clone();
            let pieces = edge_lines(instance, e);
            let mut lines: Vec<Line<T>> = pieces.iter().map(|(l, _, _)| l.clone()).collect();
            lines.sort_by(|a, b| a.slope.cmp_value(&b.slope).then(a.intercept.cmp_value(&b.intercept)));
            lines.dedup();
            let mut out = Vec::with_capacity(pieces.len() * 2 + lines.len() * (lines.len() + 3) / 2);
            for (line, lo, hi) in &pieces {
                out.push(line.eval(lo));
                out.push(line.eval(hi));
            }
            for (a, la) in lines.iter().enumerate() {
                out.push(la.eval(&T::zero()));
                out.push(la.eval(&len));
                for lb in &lines[a + 1..] {
                    if let Some(y) = la.intersection_y(lb) {
                        out.push(y);
                    }
                }
            }
            out.retain(|v| !tol.lt(v, &T::zero()));
            out
        })
        .collect();
    dedup_values(&mut values, tol);
    values
}

/// Smallest feasible candidate value and witness centers.
pub fn solve_k_center<T: Scalar>(instance: &Instance<T>, k: usize, engine: Engine) -> Result<Solution<T>> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let candidates = candidate_values(instance);
    if candidates.is_empty() {
        return Err(Error::Internal("no candidate values".into()));
    }
    let mut calls = 0usize;
    let mut test = |lambda: &T| -> Result<bool> {
        calls += 1;
        feasible(instance, k, lambda, engine)
    };

    let top = candidates.len() - 1;
    if !test(&candidates[top])? {
        return Err(Error::Internal(format!(
            "largest candidate {} is infeasible",
            candidates[top]
        )));
    }
    // Invariant: candidates[hi] feasible, everything below lo infeasible.
    let (mut lo, mut hi) = (0usize, top);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if test(&candidates[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let lambda = candidates[hi].clone();
    let centers = feasible_by_candidates(instance, k, &lambda)?.ok_or_else(|| {
        Error::Internal(format!("no witness at feasible value {lambda}"))
    })?;
    let tol = instance.tolerance();
    let centers: Vec<GraphPoint<T>> = centers.iter().map(|c| instance.graph().canonical(c, tol)).collect();
    let (_, assignment) = objective(instance, &centers)?;
    Ok(Solution {
        lambda,
        centers,
        assignment,
        diagnostics: Diagnostics {
            method: Method::Search(engine),
            candidate_count: candidates.len(),
            feasibility_calls: calls,
            envelope_intervals: 0,
        },
    })
}

/// A contract a solution fails.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Recomputed objective differs from the reported value.
    ObjectiveMismatch { reported: f64, recomputed: f64 },
    /// The reported value is not a candidate value.
    NotACandidate { lambda: f64 },
    /// The reported value is not feasible.
    Infeasible { lambda: f64 },
    /// A smaller candidate is already feasible.
    NotMinimal { smaller: f64 },
    WrongCenterCount { expected: usize, found: usize },
    AssignmentMismatch,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ObjectiveMismatch { reported, recomputed } => {
                write!(f, "objective mismatch: reported {reported}, recomputed {recomputed}")
            }
            Violation::NotACandidate { lambda } => write!(f, "value {lambda} is not a candidate value"),
            Violation::Infeasible { lambda } => write!(f, "value {lambda} is infeasible"),
            Violation::NotMinimal { smaller } => write!(f, "smaller candidate {smaller} is feasible"),
            Violation::WrongCenterCount { expected, found } => {
                write!(f, "expected {expected} centers, found {found}")
            }
            Violation::AssignmentMismatch => f.write_str("assignment does not match nearest centers"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Rechecks a solution from scratch: objective by direct summation,
/// candidate membership, feasibility of the value, and infeasibility of the
/// next smaller candidate.
pub fn verify_solution<T: Scalar>(
    instance: &Instance<T>,
    k: usize,
    solution: &Solution<T>,
    engine: Engine,
) -> Result<VerificationReport> {
    let tol = instance.tolerance();
    let mut violations = Vec::new();
    if solution.centers.len() != k {
        violations.push(Violation::WrongCenterCount {
            expected: k,
            found: solution.centers.len(),
        });
    }
    let (value, assignment) = objective(instance, &solution.centers)?;
    if !tol.eq(&value, &solution.lambda) {
        violations.push(Violation::ObjectiveMismatch {
            reported: solution.lambda.to_float(),
            recomputed: value.to_float(),
        });
    }
    if assignment != solution.assignment {
        violations.push(Violation::AssignmentMismatch);
    }
    let candidates = candidate_values(instance);
    let at = candidates.partition_point(|c| tol.lt(c, &solution.lambda));
    if !candidates.get(at).is_some_and(|c| tol.eq(c, &solution.lambda)) {
        violations.push(Violation::NotACandidate {
            lambda: solution.lambda.to_float(),
        });
    }
    if !feasible(instance, k, &solution.lambda, engine)? {
        violations.push(Violation::Infeasible {
            lambda: solution.lambda.to_float(),
        });
    }
    if at > 0 && feasible(instance, k, &candidates[at - 1], engine)? {
        violations.push(Violation::NotMinimal {
            smaller: candidates[at - 1].to_float(),
        });
    }
    Ok(VerificationReport { violations })
}
