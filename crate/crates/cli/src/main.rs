mod format;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num::rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use ukcenter::feasibility::feasible_by_candidates;
use ukcenter::generate::{random_graph, random_points};
use ukcenter::oracle::grid_k_center;
use ukcenter::{feasibility, solve, verify_solution, Engine, Error, Instance, Scalar, Settings, Tolerance};

use format::InstanceFile;

/// Exact k-center of weighted uncertain points on a graph.
#[derive(Parser, Debug)]
#[command(name = "ukcenter", version)]
struct Cli {
    /// Comparison tolerance (default 1e-9, or 0 with --exact-rational).
    #[arg(long, global = true)]
    tolerance: Option<String>,

    /// Use exact rational arithmetic.
    #[arg(long, global = true)]
    exact_rational: bool,

    /// Accept points whose probabilities do not sum to one.
    #[arg(long, global = true)]
    no_prob_check: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for `gen`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the optimal k centers.
    Solve {
        #[arg(long)]
        k: usize,
        /// candidates or boxes; k = 1 uses the one-center sweep unless set.
        #[arg(long)]
        engine: Option<Engine>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide whether k centers reach every point within lambda.
    Feasible {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value = "candidates")]
        engine: Engine,
        #[arg(long)]
        input: PathBuf,
    },
    /// Print the expected-distance function of one point on one edge as TSV.
    DumpEd {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        edge: usize,
        #[arg(long)]
        point_id: usize,
    },
    /// Brute-force grid solution with spacing eps.
    Oracle {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "1e-3")]
        eps: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a random connected instance.
    Gen {
        #[arg(long, default_value_t = 6)]
        vertices: usize,
        #[arg(long, default_value_t = 8)]
        edges: usize,
        #[arg(long, default_value_t = 4)]
        points: usize,
        #[arg(long, default_value_t = 3)]
        locations: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// An error with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn parse(message: String) -> Self {
        Failure { code: 2, message }
    }

    pub fn from_core(err: Error, context: &str) -> Self {
        let (code, message) = match err {
            Error::Disconnected => (3, format!("{context}: {err}")),
            Error::SizeGuard(_) => (4, err.to_string()),
            Error::InvalidLocation { point, location, reason } => {
                let field = if reason.starts_with("probability") {
                    ".probability"
                } else if reason.contains("offset") {
                    ".t"
                } else {
                    ".edge"
                };
                (2, format!("points[{point}].locations[{location}]{field}: {reason}"))
            }
            Error::InvalidUncertainPoint { point, reason } => {
                let field = if reason.starts_with("weight") { ".weight" } else { ".locations" };
                (2, format!("points[{point}]{field}: {reason}"))
            }
            Error::InvalidGraph(_) | Error::InvalidPoint(_) | Error::InvalidK | Error::OutOfDomain { .. } => {
                (2, format!("{context}: {err}"))
            }
            _ => (1, err.to_string()),
        };
        Failure { code, message }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("{}: {err}", path.display()),
        }
    }
}

fn read_instance(path: &Path) -> Result<InstanceFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    InstanceFile::parse(&text).map_err(|f| Failure::parse(format!("{}: {}", path.display(), f.message)))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    text
}

fn parse_scalar<T: Scalar>(text: &str, what: &str) -> Result<T, Failure> {
    T::parse_decimal(text).ok_or_else(|| Failure::parse(format!("{what}: `{text}` is not a finite number")))
}

fn check_k(k: usize) -> Result<(), Failure> {
    if k == 0 {
        return Err(Failure::parse("k: must be at least 1".into()));
    }
    Ok(())
}

fn build_instance<T: Scalar>(cli: &Cli, file: &InstanceFile) -> Result<Instance<T>, Failure> {
    let settings = file.settings();
    let tolerance = match (&cli.tolerance, &settings.tolerance) {
        (Some(text), _) => parse_scalar(text, "--tolerance")?,
        (None, Some(q)) => parse_scalar(&q.0, "settings.tolerance")?,
        (None, None) => T::default_tolerance(),
    };
    if tolerance < T::zero() {
        return Err(Failure::parse("tolerance: must be non-negative".into()));
    }
    let settings = Settings {
        tolerance: Tolerance::new(tolerance),
        enforce_probability_sum: !cli.no_prob_check && settings.enforce_probability_sum.unwrap_or(true),
    };
    let graph = file.graph()?;
    let points = file.points()?;
    Instance::new(graph, points, settings).map_err(|e| Failure::from_core(e, "instance"))
}

fn run_on<T: Scalar>(cli: &Cli, file: &InstanceFile, exact: bool) -> Result<(), Failure> {
    let instance = build_instance::<T>(cli, file)?;
    let core = |e: Error| Failure::from_core(e, "arguments");
    match &cli.command {
        Command::Solve { k, engine, output, .. } => {
            check_k(*k)?;
            let solution = solve(&instance, *k, *engine).map_err(core)?;
            let report = verify_solution(&instance, *k, &solution, Engine::Candidates).map_err(core)?;
            let value = report::solution(&instance, *k, &solution, &report, exact);
            write_output(output.as_deref(), &to_json(&value))
        }
        Command::Feasible { k, lambda, engine, .. } => {
            check_k(*k)?;
            let lambda: T = parse_scalar(lambda, "--lambda")?;
            let (verdict, witness) = match engine {
                Engine::Candidates => {
                    let w = feasible_by_candidates(&instance, *k, &lambda).map_err(core)?;
                    (w.is_some(), w)
                }
                Engine::Boxes => (feasibility::feasible(&instance, *k, &lambda, *engine).map_err(core)?, None),
            };
            let value = report::verdict(&instance, *k, &lambda, &engine.to_string(), verdict, witness.as_deref(), exact);
            write_output(None, &to_json(&value))
        }
        Command::DumpEd { edge, point_id, .. } => {
            if *edge >= instance.graph().edge_count() {
                return Err(Failure::parse(format!("--edge: no edge {edge}")));
            }
            if *point_id >= instance.point_count() {
                return Err(Failure::parse(format!("--point-id: no point {point_id}")));
            }
            write_output(None, &report::expected_distance_tsv(&instance, *point_id, *edge))
        }
        Command::Oracle { k, eps, .. } => {
            check_k(*k)?;
            let step: T = parse_scalar(eps, "--eps")?;
            let grid = grid_k_center(&instance, *k, &step).map_err(core)?;
            write_output(None, &to_json(&report::grid(&instance, *k, &step, &grid, exact)))
        }
        Command::Gen { .. } => unreachable!("gen takes no instance"),
    }
}

fn generate(cli: &Cli) -> Result<(), Failure> {
    let Command::Gen { vertices, edges, points, locations, output } = &cli.command else {
        unreachable!("called for gen only")
    };
    if *vertices < 2 || *points == 0 || *locations == 0 {
        return Err(Failure::parse("gen: needs at least 2 vertices, 1 point and 1 location".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let graph = random_graph::<BigRational, _>(&mut rng, *vertices, *edges).map_err(|e| Failure::from_core(e, "gen"))?;
    let pts = random_points(&mut rng, &graph, *points, *locations);
    let text = serde_json::to_string_pretty(&InstanceFile::from_parts(&graph, &pts)).expect("instance serializes");
    write_output(output.as_deref(), &(text + "\n"))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let input = match &cli.command {
        Command::Gen { .. } => return generate(cli),
        Command::Solve { input, .. }
        | Command::Feasible { input, .. }
        | Command::DumpEd { input, .. }
        | Command::Oracle { input, .. } => input,
    };
    let file = read_instance(input)?;
    let exact = cli.exact_rational || file.settings().exact_rational.unwrap_or(false);
    if exact {
        run_on::<BigRational>(cli, &file, true)
    } else {
        run_on::<f64>(cli, &file, false)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Failure::parse(format!("--threads: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
