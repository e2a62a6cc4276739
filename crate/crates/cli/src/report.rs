//! JSON and TSV renderings of solver results.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use ukcenter::optimizer::VerificationReport;
use ukcenter::oracle::GridSolution;
use ukcenter::{GraphPoint, Instance, Method, Scalar, Solution};

/// Float value, plus the exact fraction when `exact` is set.
fn number<T: Scalar>(out: &mut Map<String, Value>, key: &str, value: &T, exact: bool) {
    out.insert(key.into(), json!(value.to_float()));
    if exact {
        out.insert(format!("{key}_exact"), json!(value.to_string()));
    }
}

fn point<T: Scalar>(instance: &Instance<T>, p: &GraphPoint<T>, exact: bool) -> Value {
    let mut out = Map::new();
    out.insert("edge".into(), json!(p.edge));
    number(&mut out, "t", &p.t, exact);
    if let Some(v) = instance.graph().vertex_at(p, instance.tolerance()) {
        out.insert("vertex".into(), json!(v));
    }
    Value::Object(out)
}

fn method_name(method: Method) -> String {
    match method {
        Method::OneCenter => "one-center".into(),
        Method::Search(engine) => engine.to_string(),
    }
}

pub fn solution<T: Scalar>(
    instance: &Instance<T>,
    k: usize,
    solution: &Solution<T>,
    report: &VerificationReport,
    exact: bool,
) -> Value {
    let mut out = Map::new();
    out.insert("k".into(), json!(k));
    number(&mut out, "lambda", &solution.lambda, exact);
    out.insert(
        "centers".into(),
        solution.centers.iter().map(|c| point(instance, c, exact)).collect(),
    );
    out.insert("assignment".into(), json!(solution.assignment));
    let d = &solution.diagnostics;
    out.insert(
        "diagnostics".into(),
        json!({
            "method": method_name(d.method),
            "candidate_count": d.candidate_count,
            "feasibility_calls": d.feasibility_calls,
            "envelope_intervals": d.envelope_intervals,
        }),
    );
    out.insert(
        "verification".into(),
        json!({
            "consistent": report.is_consistent(),
            "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        }),
    );
    Value::Object(out)
}

pub fn verdict<T: Scalar>(
    instance: &Instance<T>,
    k: usize,
    lambda: &T,
    engine: &str,
    feasible: bool,
    witness: Option<&[GraphPoint<T>]>,
    exact: bool,
) -> Value {
    let mut out = Map::new();
    out.insert("k".into(), json!(k));
    number(&mut out, "lambda", lambda, exact);
    out.insert("engine".into(), json!(engine));
    out.insert("feasible".into(), json!(feasible));
    if let Some(w) = witness {
        out.insert("witness".into(), w.iter().map(|c| point(instance, c, exact)).collect());
    }
    Value::Object(out)
}

pub fn grid<T: Scalar>(instance: &Instance<T>, k: usize, step: &T, grid: &GridSolution<T>, exact: bool) -> Value {
    let mut out = Map::new();
    out.insert("k".into(), json!(k));
    number(&mut out, "step", step, exact);
    number(&mut out, "lambda", &grid.lambda, exact);
    let slack = instance.max_weight() * step.half();
    number(&mut out, "max_excess", &slack, exact);
    out.insert("grid_points".into(), json!(grid.grid_points));
    out.insert(
        "centers".into(),
        grid.centers.iter().map(|c| point(instance, c, exact)).collect(),
    );
    Value::Object(out)
}

/// One row per turning point of `Ed(P_i, .)` on an edge: the offset, the
/// value there, the line on the following interval (the last piece on the
/// final row), and the locations that turn there.
pub fn expected_distance_tsv<T: Scalar>(instance: &Instance<T>, point: usize, edge: usize) -> String {
    let ed = instance.expected_distance(point, edge);
    let mut out = String::from("t\ty\tslope\tintercept\tlocations\n");
    for tp in &ed.turning_points {
        let locations = tp.locations.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            tp.t,
            tp.line.eval(&tp.t),
            tp.line.slope,
            tp.line.intercept,
            if locations.is_empty() { "-".into() } else { locations }
        );
    }
    out
}
