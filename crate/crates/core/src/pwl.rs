//! Continuous piecewise-linear functions over a closed edge interval `[0, len]`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};

/// The line `y = slope * t + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct Line<T> {
    pub slope: T,
    pub intercept: T,
}

impl<T: Scalar> Line<T> {
    pub fn new(slope: T, intercept: T) -> Self {
        Line { slope, intercept }
    }

    pub fn constant(value: T) -> Self {
        Line::new(T::zero(), value)
    }

    /// Line through two points with distinct abscissae.
    pub fn through(t0: &T, y0: &T, t1: &T, y1: &T) -> Self {
        let slope = (y1.clone() - y0.clone()) / (t1.clone() - t0.clone());
        let intercept = y0.clone() - slope.clone() * t0.clone();
        Line { slope, intercept }
    }

    pub fn eval(&self, t: &T) -> T {
        self.slope.clone() * t.clone() + self.intercept.clone()
    }

    pub fn scale(&self, w: &T) -> Self {
        Line::new(self.slope.clone() * w.clone(), self.intercept.clone() * w.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Line::new(
            self.slope.clone() + other.slope.clone(),
            self.intercept.clone() + other.intercept.clone(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Line::new(
            self.slope.clone() - other.slope.clone(),
            self.intercept.clone() - other.intercept.clone(),
        )
    }

    /// Height of the intersection with `other`; `None` for parallel lines.
    ///
    /// Every stage that needs an intersection height goes through this
    /// function so equal inputs always produce bit-identical values.
    pub fn intersection_y(&self, other: &Self) -> Option<T> {
        let denom = self.slope.clone() - other.slope.clone();
        if denom.is_zero() {
            return None;
        }
        Some(
            (self.slope.clone() * other.intercept.clone()
                - other.slope.clone() * self.intercept.clone())
                / denom,
        )
    }

    /// Abscissa of the intersection with `other`; `None` for parallel lines.
    pub fn intersection_t(&self, other: &Self) -> Option<T> {
        let denom = self.slope.clone() - other.slope.clone();
        if denom.is_zero() {
            return None;
        }
        Some((other.intercept.clone() - self.intercept.clone()) / denom)
    }
}

/// Interval on an edge with explicit closedness at each end.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn closed(lo: T, hi: T) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn open(lo: T, hi: T) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn contains(&self, t: &T) -> bool {
        let above = if self.lo_closed { *t >= self.lo } else { *t > self.lo };
        let below = if self.hi_closed { *t <= self.hi } else { *t < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match (self.lo_closed, self.hi_closed) {
            (true, true) => self.lo > self.hi,
            _ => self.lo >= self.hi,
        }
    }

    pub fn length(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

/// One linear piece `[lo, hi]` of a [`PwlFunction`].
#[derive(Clone, Debug, PartialEq)]
pub struct Piece<T> {
    pub lo: T,
    pub hi: T,
    pub line: Line<T>,
}

/// Continuous piecewise-linear function on `[0, len]` stored as breakpoints.
///
/// The first breakpoint sits at `t = 0`, the last at `t = len`, offsets are
/// strictly increasing, and consecutive pieces never share a slope.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlFunction<T> {
    points: Vec<(T, T)>,
}

impl<T: Scalar> PwlFunction<T> {
    /// Builds a function from breakpoints.
    ///
    /// Offsets closer than the tolerance to their predecessor are dropped (the
    /// domain end always survives) and colinear neighbours are merged.
    pub fn from_breakpoints(points: Vec<(T, T)>, tol: &Tolerance<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPoint(
                "a piecewise-linear function needs at least two breakpoints".into(),
            ));
        }
        if !points[0].0.is_zero() {
            return Err(Error::InvalidPoint(format!(
                "first breakpoint must be at 0, found {}",
                points[0].0
            )));
        }
        if points.iter().any(|(t, y)| !t.is_finite_value() || !y.is_finite_value()) {
            return Err(Error::InvalidPoint("breakpoints must be finite".into()));
        }
        for pair in points.windows(2) {
            if pair[1].0 < pair[0].0 {
                return Err(Error::InvalidPoint(format!(
                    "breakpoint offsets must increase ({} after {})",
                    pair[1].0, pair[0].0
                )));
            }
        }
        let end = points[points.len() - 1].0.clone();
        if end <= T::zero() {
            return Err(Error::InvalidPoint("domain must have positive length".into()));
        }

        let last_index = points.len() - 1;
        let mut kept: Vec<(T, T)> = Vec::with_capacity(points.len());
        for (index, point) in points.into_iter().enumerate() {
            let Some(prev) = kept.last() else {
                kept.push(point);
                continue;
            };
            let gap = point.0.clone() - prev.0.clone();
            if index == last_index {
                if gap <= *tol.eps() && kept.len() > 1 {
                    kept.pop();
                }
                kept.push(point);
            } else if gap > *tol.eps() && tol.lt(&point.0, &end) {
                kept.push(point);
            }
        }

        let mut merged: Vec<(T, T)> = Vec::with_capacity(kept.len());
        for point in kept {
            if merged.len() >= 2 {
                let a = &merged[merged.len() - 2];
                let b = &merged[merged.len() - 1];
                let left = Line::through(&a.0, &a.1, &b.0, &b.1).slope;
                let right = Line::through(&b.0, &b.1, &point.0, &point.1).slope;
                if tol.eq(&left, &right) {
                    merged.pop();
                }
            }
            merged.push(point);
        }
        Ok(PwlFunction { points: merged })
    }

    pub fn constant(len: T, value: T) -> Self {
        PwlFunction {
            points: vec![(T::zero(), value.clone()), (len, value)],
        }
    }

    pub fn linear(len: T, line: &Line<T>) -> Self {
        PwlFunction {
            points: vec![(T::zero(), line.intercept.clone()), (len.clone(), line.eval(&len))],
        }
    }

    pub fn breakpoints(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn domain_end(&self) -> &T {
        &self.points[self.points.len() - 1].0
    }

    pub fn piece_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece<T>> + '_ {
        self.points.windows(2).map(|w| Piece {
            lo: w[0].0.clone(),
            hi: w[1].0.clone(),
            line: Line::through(&w[0].0, &w[0].1, &w[1].0, &w[1].1),
        })
    }

    /// Value at `t`; errors outside `[0, len]`.
    pub fn evaluate(&self, t: &T) -> Result<T> {
        if *t < T::zero() || t > self.domain_end() {
            return Err(Error::OutOfDomain {
                t: t.to_float(),
                end: self.domain_end().to_float(),
            });
        }
        Ok(self.value_at(t))
    }

    /// Value at `t`, clamping `t` into the domain.
    pub fn value_at(&self, t: &T) -> T {
        let idx = self.points.partition_point(|(x, _)| x <= t);
        if idx == 0 {
            return self.points[0].1.clone();
        }
        let (x0, y0) = &self.points[idx - 1];
        if x0 == t || idx == self.points.len() {
            return y0.clone();
        }
        let (x1, y1) = &self.points[idx];
        y0.clone() + (y1.clone() - y0.clone()) * (t.clone() - x0.clone()) / (x1.clone() - x0.clone())
    }

    pub fn min_value(&self) -> T {
        self.points
            .iter()
            .map(|(_, y)| y)
            .fold(self.points[0].1.clone(), |acc, y| T::min_value(&acc, y))
    }

    pub fn max_value(&self) -> T {
        self.points
            .iter()
            .map(|(_, y)| y)
            .fold(self.points[0].1.clone(), |acc, y| T::max_value(&acc, y))
    }

    /// Pointwise `w * f`.
    pub fn scale(&self, w: &T) -> Self {
        if w.is_zero() {
            return PwlFunction::constant(self.domain_end().clone(), T::zero());
        }
        PwlFunction {
            points: self
                .points
                .iter()
                .map(|(t, y)| (t.clone(), y.clone() * w.clone()))
                .collect(),
        }
    }

    /// Adds `line` over `[lo, hi]`; outside that range the line is continued
    /// as the constant `line(lo)` (left) or `line(hi)` (right), which keeps the
    /// result continuous. With `[lo, hi] = [0, len]` this is plain addition.
    pub fn add_linear(&self, line: &Line<T>, lo: &T, hi: &T, tol: &Tolerance<T>) -> Result<Self> {
        self.combine_linear(line, lo, hi, tol, false)
    }

    /// Inverse of [`PwlFunction::add_linear`].
    pub fn subtract_linear(
        &self,
        line: &Line<T>,
        lo: &T,
        hi: &T,
        tol: &Tolerance<T>,
    ) -> Result<Self> {
        self.combine_linear(line, lo, hi, tol, true)
    }

    fn combine_linear(
        &self,
        line: &Line<T>,
        lo: &T,
        hi: &T,
        tol: &Tolerance<T>,
        negate: bool,
    ) -> Result<Self> {
        let end = self.domain_end().clone();
        if *lo < T::zero() || hi > &end || lo > hi {
            return Err(Error::OutOfDomain {
                t: if *lo < T::zero() || lo > hi { lo.to_float() } else { hi.to_float() },
                end: end.to_float(),
            });
        }
        let mut offsets: Vec<T> = self.points.iter().map(|(t, _)| t.clone()).collect();
        offsets.push(lo.clone());
        offsets.push(hi.clone());
        crate::scalar::sort_values(&mut offsets);
        offsets.dedup();
        let points = offsets
            .into_iter()
            .map(|t| {
                let clamped = if t < *lo {
                    lo.clone()
                } else if t > *hi {
                    hi.clone()
                } else {
                    t.clone()
                };
                let delta = line.eval(&clamped);
                let base = self.value_at(&t);
                let y = if negate { base - delta } else { base + delta };
                (t, y)
            })
            .collect();
        PwlFunction::from_breakpoints(points, tol)
    }

    /// Maximal closed intervals on which `f(t) <= lambda`, sorted.
    ///
    /// Breakpoints within the tolerance above `lambda` count as inside. An
    /// isolated touching point comes out as the degenerate interval `[t, t]`.
    pub fn sublevel_set(&self, lambda: &T, tol: &Tolerance<T>) -> Vec<Interval<T>> {
        let inside = |y: &T| tol.le(y, lambda);
        let mut out: Vec<Interval<T>> = Vec::new();
        let mut start: Option<T> = inside(&self.points[0].1).then(|| self.points[0].0.clone());
        for w in self.points.windows(2) {
            let ((t0, y0), (t1, y1)) = (&w[0], &w[1]);
            match (inside(y0), inside(y1)) {
                (true, false) => {
                    let exit = crossing(t0, y0, t1, y1, lambda);
                    let lo = start.take().unwrap_or_else(|| t0.clone());
                    push_merged(&mut out, Interval::closed(lo, exit));
                }
                (false, true) => start = Some(crossing(t0, y0, t1, y1, lambda)),
                _ => {}
            }
        }
        if let Some(lo) = start {
            push_merged(&mut out, Interval::closed(lo, self.domain_end().clone()));
        }
        out
    }

    /// Maximal intervals on which `f(t) > lambda`: the complement of the
    /// sublevel set. Ends at the domain boundary are marked closed, every
    /// other end is open.
    pub fn superlevel_open_set(&self, lambda: &T, tol: &Tolerance<T>) -> Vec<Interval<T>> {
        complement(&self.sublevel_set(lambda, tol), self.domain_end())
    }
}

/// Complement within `[0, end]` of sorted disjoint closed intervals.
pub fn complement<T: Scalar>(closed: &[Interval<T>], end: &T) -> Vec<Interval<T>> {
    let mut out = Vec::new();
    let mut cursor = T::zero();
    let mut cursor_closed = true;
    for iv in closed {
        if iv.lo > cursor {
            out.push(Interval {
                lo: cursor.clone(),
                hi: iv.lo.clone(),
                lo_closed: cursor_closed,
                hi_closed: false,
            });
        }
        cursor = T::max_value(&cursor, &iv.hi);
        cursor_closed = false;
    }
    if cursor < *end {
        out.push(Interval {
            lo: cursor,
            hi: end.clone(),
            lo_closed: cursor_closed,
            hi_closed: true,
        });
    }
    out
}

fn crossing<T: Scalar>(t0: &T, y0: &T, t1: &T, y1: &T, level: &T) -> T {
    let t = t0.clone()
        + (level.clone() - y0.clone()) * (t1.clone() - t0.clone()) / (y1.clone() - y0.clone());
    if t < *t0 {
        t0.clone()
    } else if t > *t1 {
        t1.clone()
    } else {
        t
    }
}

fn push_merged<T: Scalar>(out: &mut Vec<Interval<T>>, iv: Interval<T>) {
    if let Some(last) = out.last_mut() {
        if iv.lo <= last.hi {
            last.hi = T::max_value(&last.hi, &iv.hi);
            return;
        }
    }
    out.push(iv);
}
