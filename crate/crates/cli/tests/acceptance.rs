//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num::rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ukcenter::feasibility::{feasible, feasible_by_boxes, feasible_by_candidates, klee_measure, local_feasible_on_edges, KBox};
use ukcenter::generate::{random_instance, Shape};
use ukcenter::optimizer::candidate_values;
use ukcenter::oracle::{grid_k_center, inclusion_exclusion_volume, open_box_cover_oracle};
use ukcenter::uncertain::{expected_distance_at, objective};
use ukcenter::{
    solve_k_center, solve_one_center, Edge, Engine, Graph, GraphPoint, Instance, Scalar, Settings, UncertainPoint,
};

const ED_TOLERANCE: f64 = 1e-12;
const ED_SAMPLES: usize = 200;
const ED_TIME_LIMIT: Duration = Duration::from_secs(10);
const KLEE_TOLERANCE: f64 = 1e-9;
const GRID_STEP: f64 = 1e-3;
const FLOAT_SLACK: f64 = 1e-9;
const LADDER_STEPS: usize = 20;
const ONE_CENTER_TIME_LIMIT: Duration = Duration::from_secs(5);

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shape(vertices: usize, edges: usize, points: usize, locations: usize) -> Shape {
    Shape {
        vertices,
        edges,
        points,
        locations,
    }
}

fn instance<T: Scalar>(seed: u64, max: &Shape) -> Instance<T> {
    let mut rng = rng(seed);
    let s = Shape::sample(&mut rng, max);
    random_instance(&mut rng, &s, Settings::default()).unwrap()
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn expected_distance_matches_direct_sum() -> Outcome {
    let max = shape(8, 12, 5, 4);
    let start = Instant::now();
    let mut functions = 0;
    for seed in 0..200u64 {
        let inst = instance::<f64>(seed, &max);
        let g = inst.graph();
        for e in 0..g.edge_count() {
            let len = g.edges()[e].length;
            for (i, p) in inst.points().iter().enumerate() {
                let ed = inst.expected_distance(i, e);
                let bound = 3 * p.locations.len() + 2;
                ensure(ed.function.piece_count() <= bound && ed.turning_points.len() <= bound, || {
                    format!("seed {seed} edge {e} point {i}: {} pieces", ed.function.piece_count())
                })?;
                for s in 0..ED_SAMPLES {
                    let t = len * s as f64 / (ED_SAMPLES - 1) as f64;
                    let direct = expected_distance_at(g, p, &GraphPoint::new(e, t));
                    let swept = ed.function.evaluate(&t).map_err(|err| err.to_string())?;
                    ensure((swept - direct).abs() <= ED_TOLERANCE, || {
                        format!("seed {seed} edge {e} point {i} t {t}: {swept} vs {direct}")
                    })?;
                }
                functions += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ED_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("200 instances, {functions} functions, {elapsed:.2?}"))
}

fn random_boxes(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<KBox<f64>> {
    (0..count)
        .map(|_| {
            let (lo, hi): (Vec<f64>, Vec<f64>) = (0..dim)
                .map(|_| {
                    let a: f64 = rng.gen_range(0.0..1.0);
                    let b: f64 = rng.gen_range(0.0..1.0);
                    (a.min(b), a.max(b))
                })
                .unzip();
            KBox::new(lo, hi).unwrap()
        })
        .collect()
}

fn klee_matches_inclusion_exclusion() -> Outcome {
    let mut rng = rng(77);
    let mut cases = 0;
    for dim in 1..=4 {
        for _ in 0..100 {
            let m = rng.gen_range(1..=12);
            let boxes = random_boxes(&mut rng, dim, m);
            let sweep = klee_measure(&boxes, dim).map_err(|e| e.to_string())?;
            let ie = inclusion_exclusion_volume(&boxes).map_err(|e| e.to_string())?;
            ensure((sweep - ie).abs() <= KLEE_TOLERANCE, || format!("dim {dim}: {sweep} vs {ie}"))?;
            cases += 1;
        }
    }
    let q = |n: i64| BigRational::from_ratio(n, 1);
    let rect = |x0, y0, x1, y1| KBox::new(vec![q(x0), q(y0)], vec![q(x1), q(y1)]).unwrap();
    let exact = [
        (vec![rect(0, 0, 2, 2), rect(1, 1, 3, 3)], 7),
        (vec![rect(0, 0, 4, 4), rect(1, 1, 2, 2)], 16),
        (vec![rect(0, 0, 1, 1), rect(2, 2, 3, 3)], 2),
        (vec![rect(0, 0, 3, 1), rect(1, 0, 2, 3)], 5),
    ];
    for (boxes, volume) in exact {
        let got = klee_measure(&boxes, 2).map_err(|e| e.to_string())?;
        ensure(got == q(volume), || format!("rectangles: {got} vs {volume}"))?;
    }
    Ok(format!("{cases} random cases, 4 exact rectangle sets"))
}

fn engines_agree() -> Outcome {
    let max = shape(5, 6, 4, 3);
    for seed in 0..200u64 {
        let inst = instance::<f64>(seed, &max);
        let mut r = rng(seed ^ 0xfeed);
        let cands = candidate_values(&inst);
        let k = r.gen_range(1..=2);
        let lambda = if r.gen_bool(0.5) {
            cands[r.gen_range(0..cands.len())]
        } else {
            r.gen_range(0.0..cands[cands.len() - 1] * 1.1)
        };
        let a = feasible_by_candidates(&inst, k, &lambda).map_err(|e| e.to_string())?.is_some();
        let b = feasible_by_boxes(&inst, k, &lambda).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("seed {seed} k {k} lambda {lambda}: {a} vs {b}"))?;
    }
    let max = shape(4, 5, 4, 2);
    for seed in 1000..1050u64 {
        let inst = instance::<f64>(seed, &max);
        let cands = candidate_values(&inst);
        let lambda = cands[rng(seed).gen_range(0..cands.len())];
        let a = feasible_by_candidates(&inst, 3, &lambda).map_err(|e| e.to_string())?.is_some();
        let b = feasible_by_boxes(&inst, 3, &lambda).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("seed {seed} k 3 lambda {lambda}: {a} vs {b}"))?;
    }
    Ok("200 cases with k <= 2, 50 with k = 3".into())
}

fn verdicts_are_monotone() -> Outcome {
    let max = shape(5, 6, 4, 3);
    let mut ladders = 0;
    for seed in 2000..2020u64 {
        let inst = instance::<f64>(seed, &max);
        let top = *candidate_values(&inst).last().unwrap();
        for k in 1..=2 {
            for engine in [Engine::Candidates, Engine::Boxes] {
                let verdicts = (0..LADDER_STEPS)
                    .map(|s| feasible(&inst, k, &(top * s as f64 / (LADDER_STEPS - 1) as f64), engine))
                    .collect::<Result<Vec<bool>, _>>()
                    .map_err(|e| e.to_string())?;
                ensure(verdicts.windows(2).all(|w| w[0] <= w[1]) && verdicts[LADDER_STEPS - 1], || {
                    format!("seed {seed} k {k} {engine}: {verdicts:?}")
                })?;
                ladders += 1;
            }
        }
    }
    Ok(format!("{ladders} ladders of {LADDER_STEPS} steps"))
}

fn sandwich(inst: &Instance<f64>, k: usize, label: &str) -> Result<(), String> {
    let bound = inst.max_weight() * GRID_STEP / 2.0;
    let s = solve_k_center(inst, k, Engine::Candidates).map_err(|e| e.to_string())?;
    let g = grid_k_center(inst, k, &GRID_STEP).map_err(|e| e.to_string())?;
    ensure(s.lambda <= g.lambda + FLOAT_SLACK && g.lambda - s.lambda <= bound + FLOAT_SLACK, || {
        format!("{label} k {k}: solver {} grid {} bound {bound}", s.lambda, g.lambda)
    })
}

fn grid_sandwich() -> Outcome {
    let max = shape(5, 6, 4, 3);
    for seed in 0..50u64 {
        let inst = instance::<f64>(seed, &max);
        for k in 1..=2 {
            sandwich(&inst, k, &format!("seed {seed}"))?;
        }
    }
    let max = shape(4, 5, 4, 2);
    for seed in 600..610u64 {
        sandwich(&instance::<f64>(seed, &max), 3, &format!("seed {seed}"))?;
    }
    Ok("50 instances with k in {1, 2}, 10 with k = 3".into())
}

fn triangle(weights: [f64; 3]) -> Instance<f64> {
    let g = Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)]).unwrap();
    let points = (0..3)
        .map(|v| UncertainPoint::deterministic(weights[v], g.vertex_point(v)))
        .collect();
    Instance::new(g, points, Settings::default()).unwrap()
}

fn known_optima() -> Outcome {
    let inst = triangle([1.0; 3]);
    for (k, want) in [(1, 1.0), (2, 0.5)] {
        for engine in [Engine::Candidates, Engine::Boxes] {
            let s = solve_k_center(&inst, k, engine).map_err(|e| e.to_string())?;
            ensure((s.lambda - want).abs() <= FLOAT_SLACK, || format!("triangle k {k} {engine}: {}", s.lambda))?;
        }
    }
    let one = solve_one_center(&inst).map_err(|e| e.to_string())?;
    ensure((one.lambda - 1.0).abs() <= FLOAT_SLACK, || format!("triangle one-center: {}", one.lambda))?;
    let g = Graph::new(4, vec![Edge::new(0, 1, 2.0), Edge::new(1, 2, 1.5), Edge::new(2, 3, 3.0)]).unwrap();
    let spots = [GraphPoint::new(0, 0.5), GraphPoint::new(1, 1.5), GraphPoint::new(2, 2.25)];
    let points = spots.iter().map(|p| UncertainPoint::deterministic(1.5, p.clone())).collect();
    let inst = Instance::new(g, points, Settings::default()).unwrap();
    let s = solve_k_center(&inst, 3, Engine::Candidates).map_err(|e| e.to_string())?;
    ensure(s.lambda == 0.0, || format!("n = k: {}", s.lambda))?;
    Ok("triangle 1 and 0.5, n = k gives 0".into())
}

fn one_center_agrees_with_search() -> Outcome {
    let max = shape(5, 6, 4, 3);
    for seed in 400..420u64 {
        let inst = instance::<BigRational>(seed, &max);
        let a = solve_one_center(&inst).map_err(|e| e.to_string())?;
        let b = solve_k_center(&inst, 1, Engine::Candidates).map_err(|e| e.to_string())?;
        ensure(a.lambda == b.lambda, || format!("rational seed {seed}: {} vs {}", a.lambda, b.lambda))?;
    }
    let max = shape(6, 8, 5, 4);
    for seed in 300..340u64 {
        let inst = instance::<f64>(seed, &max);
        let a = solve_one_center(&inst).map_err(|e| e.to_string())?;
        let b = solve_k_center(&inst, 1, Engine::Candidates).map_err(|e| e.to_string())?;
        ensure((a.lambda - b.lambda).abs() <= FLOAT_SLACK, || {
            format!("float seed {seed}: {} vs {}", a.lambda, b.lambda)
        })?;
    }
    let mut r = rng(31);
    let inst = random_instance::<f64, _>(&mut r, &shape(12, 30, 20, 10), Settings::default()).unwrap();
    let start = Instant::now();
    let s = solve_one_center(&inst).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < ONE_CENTER_TIME_LIMIT, || format!("|E| = 30 one-center took {elapsed:?}"))?;
    let (value, _) = objective(&inst, &s.centers).map_err(|e| e.to_string())?;
    ensure((value - s.lambda).abs() <= FLOAT_SLACK, || format!("objective {value} vs {}", s.lambda))?;
    Ok(format!("20 exact, 40 float, |E| = 30 in {elapsed:.2?}"))
}

fn local_box_test_matches_open_cover() -> Outcome {
    let max = shape(4, 5, 4, 3);
    for seed in 3000..3100u64 {
        let inst = instance::<f64>(seed, &max);
        let mut r = rng(seed);
        let cands = candidate_values(&inst);
        let lambda = cands[r.gen_range(0..cands.len())];
        let k = r.gen_range(1..=2);
        let edges: Vec<usize> = (0..k).map(|_| r.gen_range(0..inst.graph().edge_count())).collect();
        let closed = local_feasible_on_edges(&inst, &edges, &lambda).map_err(|e| e.to_string())?;
        let open = open_box_cover_oracle(&inst, &edges, &lambda).map_err(|e| e.to_string())?;
        ensure(closed == open, || format!("seed {seed} edges {edges:?} lambda {lambda}"))?;
    }
    Ok("100 edge tuples".into())
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ukcenter"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn cli_output_is_deterministic() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("instance.json");
    let input = input.to_str().unwrap();
    run_cli(&["gen", "--seed", "5", "--vertices", "6", "--edges", "9", "--points", "5", "--locations", "3", "--output", input])?;
    let mut runs = 0;
    for k in ["1", "2", "3"] {
        for extra in [&[][..], &["--exact-rational"][..]] {
            let base: Vec<&str> = ["solve", "--k", k, "--input", input].iter().chain(extra).copied().collect();
            let first = run_cli(&base)?;
            let again = run_cli(&base)?;
            let threaded = run_cli(&[&base[..], &["--threads", "4"]].concat())?;
            let single = run_cli(&[&base[..], &["--threads", "1"]].concat())?;
            ensure(first == again && first == threaded && first == single, || {
                format!("k {k} {extra:?}: outputs differ")
            })?;
            runs += 4;
        }
    }
    let out = dir.path().join("solution.json");
    run_cli(&["solve", "--k", "2", "--input", input, "--output", out.to_str().unwrap()])?;
    let file = std::fs::read(Path::new(&out)).map_err(|e| e.to_string())?;
    ensure(file == run_cli(&["solve", "--k", "2", "--input", input])?, || "--output differs from stdout".into())?;
    Ok(format!("{runs} runs byte-identical"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("expected distances match direct sums", expected_distance_matches_direct_sum),
        ("union volume matches inclusion-exclusion", klee_matches_inclusion_exclusion),
        ("feasibility engines agree", engines_agree),
        ("feasibility is monotone in lambda", verdicts_are_monotone),
        ("grid oracle sandwich", grid_sandwich),
        ("known optima", known_optima),
        ("one-center equals k = 1 search", one_center_agrees_with_search),
        ("shrunk boxes match open-box cover", local_box_test_matches_open_cover),
        ("CLI output is deterministic", cli_output_is_deterministic),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
