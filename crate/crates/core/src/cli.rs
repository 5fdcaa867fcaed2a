//! The `metgraph` command line: `partition`, `approximate`, `hardy`, `sharpness` and
//! `verify`. Reports are pretty-printed JSON with sorted keys, written to `--out` or
//! stdout; timings go to stderr so reports stay byte-for-byte reproducible.
//!
//! Exit codes: 0 when every checked bound holds, 1 on a bound violation, 2 on bad input.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::approx::{
    approximate_uniform, build_lp_operator, lp_bound_factor, lp_error, sharpness_star, sup_error, SharpnessMode,
};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::graph::{GraphPoint, MetricGraph};
use crate::hardy::{check_asymptotics, check_bound, volterra_constant, RootedTree};
use crate::io::{load_function, load_graph, load_parts, to_dot, PartSpec, PointSpec};
use crate::measure::{derivative_norm, Measure, PiecewiseFunction};
use crate::partition::{inspect_partition, partition, PartitionReport};
use crate::random;
use crate::subset::ConnectedSubset;

#[derive(Parser, Debug)]
#[command(name = "metgraph", version, about = "Balanced partitions, step approximation and Hardy operators on metric graphs")]
struct Cli {
    /// Relative tolerance for bound checks (default depends on the subcommand).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for random sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Report file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition a graph into at most n parts with small Φ̃.
    Partition(PartitionArgs),
    /// Step-function approximation of a piecewise-linear function.
    Approximate(ApproximateArgs),
    /// Singular values of a Hardy-type operator on a rooted tree.
    Hardy(HardyArgs),
    /// Equality cases on the star graph.
    Sharpness(SharpnessArgs),
    /// Check a given partition, or run a seeded random sweep of the partition engine.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct FunctionalArgs {
    /// length | measure | product:ALPHA | phi_u | phi_mu | phi_theta:THETA
    #[arg(long, default_value = "length")]
    functional: String,
    /// Function file for u (phi_u).
    #[arg(long)]
    u: Option<PathBuf>,
    /// Function file for the weight a (default a ≡ 1).
    #[arg(long)]
    a: Option<PathBuf>,
    /// Exponent p in [1, inf].
    #[arg(long, value_parser = parse_p, default_value = "2")]
    p: f64,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// Graph file, optionally with a measure.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    functional: FunctionalArgs,
    /// Largest number of parts.
    #[arg(long)]
    n: usize,
    /// Also write a DOT rendering of the parts.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ApproxMode {
    Uniform,
    Lp,
}

#[derive(Args, Debug)]
struct ApproximateArgs {
    /// Graph file; lp mode uses its measure.
    #[arg(long)]
    graph: PathBuf,
    /// Function file for the function to approximate.
    #[arg(long)]
    u: PathBuf,
    /// Function file for the weight a (default a ≡ 1).
    #[arg(long)]
    a: Option<PathBuf>,
    /// Exponent p in [1, inf].
    #[arg(long, value_parser = parse_p, default_value = "2")]
    p: f64,
    /// Largest number of steps.
    #[arg(long)]
    n: usize,
    /// Sup-norm approximation of u, or the linear operator measured in L^p(μ).
    #[arg(long, value_enum, default_value = "uniform")]
    mode: ApproxMode,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HardyCheck {
    Bound,
    Asymptotics,
}

#[derive(Args, Debug)]
struct HardyArgs {
    /// Graph file; must be a tree.
    #[arg(long)]
    graph: PathBuf,
    /// Root vertex name.
    #[arg(long)]
    root: String,
    /// Piecewise-constant v (default 1).
    #[arg(long)]
    v: Option<PathBuf>,
    /// Piecewise-constant w (default 1).
    #[arg(long)]
    w: Option<PathBuf>,
    /// Cells per unit length.
    #[arg(long, default_value_t = 200)]
    mesh: usize,
    /// Number of singular values to examine.
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// Per-n upper bound, or the limit of n·s_n.
    #[arg(long, value_enum, default_value = "bound")]
    check: HardyCheck,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SharpMode {
    Uniform,
    Lp,
}

#[derive(Args, Debug)]
struct SharpnessArgs {
    /// Which bound to test for equality.
    #[arg(long, value_enum, default_value = "uniform")]
    mode: SharpMode,
    /// Number of star arms.
    #[arg(long = "N")]
    arms: usize,
    /// Exponent p for lp mode.
    #[arg(long, value_parser = parse_p, default_value = "2")]
    p: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run this many random instances instead of checking a file.
    #[arg(long)]
    sweep: Option<usize>,
    /// Largest edge count in a sweep.
    #[arg(long, default_value_t = 12)]
    max_edges: usize,
    /// Part budgets 1..=N in a sweep.
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Graph file of the partition to check.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Parts file to check.
    #[arg(long)]
    parts: Option<PathBuf>,
    #[command(flatten)]
    functional: FunctionalArgs,
    /// Part budget the partition is checked against.
    #[arg(long)]
    n: Option<usize>,
}

fn parse_p(s: &str) -> std::result::Result<f64, String> {
    let p = match s {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if p >= 1.0 {
        Ok(p)
    } else {
        Err(format!("p = {s} must lie in [1, inf]"))
    }
}

fn p_value(p: f64) -> Value {
    if p.is_infinite() {
        json!("inf")
    } else {
        json!(p)
    }
}

/// Outcome of a subcommand before it is written out.
struct Run {
    report: Value,
    passed: bool,
    dot: Option<(PathBuf, String)>,
}

#[derive(Default)]
struct Inputs(BTreeMap<String, String>);

impl Inputs {
    fn add(&mut self, path: &Path, digest: String) {
        self.0.insert(path.display().to_string(), digest);
    }

    fn graph(&mut self, path: &Path) -> Result<(MetricGraph, Option<Measure>)> {
        let (g, mu, d) = load_graph(path)?;
        self.add(path, d);
        Ok((g, mu))
    }

    fn function(&mut self, path: Option<&Path>, g: &MetricGraph, default: f64) -> Result<PiecewiseFunction> {
        match path {
            Some(p) => {
                let (f, d) = load_function(p, g)?;
                self.add(p, d);
                Ok(f)
            }
            None => Ok(PiecewiseFunction::constant(g, default)),
        }
    }
}

fn need_measure<'a>(mu: Option<&'a Measure>, what: &str) -> Result<&'a Measure> {
    mu.ok_or_else(|| Error::InvalidParameter(format!("{what} needs a `measure` in the graph file")))
}

fn parse_param(spec: &str, name: &str) -> Result<f64> {
    spec.strip_prefix(name)
        .and_then(|r| r.strip_prefix(':'))
        .and_then(|r| r.parse::<f64>().ok())
        .ok_or_else(|| Error::InvalidParameter(format!("expected `{name}:<number>`, got `{spec}`")))
}

fn build_functional(
    g: &MetricGraph,
    mu: Option<&Measure>,
    args: &FunctionalArgs,
    inputs: &mut Inputs,
) -> Result<Functional> {
    let spec = args.functional.as_str();
    match spec.split(':').next().unwrap_or("") {
        "length" => Ok(Functional::length(g)),
        "measure" => Functional::measure(g, need_measure(mu, spec)?.clone()),
        "product" => {
            let alpha = parse_param(spec, "product")?;
            Functional::product(g, Measure::lebesgue(g), need_measure(mu, spec)?.clone(), alpha)
        }
        "phi_u" => {
            let path = args.u.as_deref().ok_or_else(|| Error::InvalidParameter("phi_u needs --u".into()))?;
            let u = inputs.function(Some(path), g, 0.0)?;
            let a = inputs.function(args.a.as_deref(), g, 1.0)?;
            Functional::phi_u(g, &u, &a, args.p)
        }
        "phi_mu" => {
            let a = inputs.function(args.a.as_deref(), g, 1.0)?;
            Functional::phi_mu(g, &a, args.p, need_measure(mu, spec)?.clone())
        }
        "phi_theta" => {
            let theta = parse_param(spec, "phi_theta")?;
            Functional::phi_theta(g, theta, args.p, need_measure(mu, spec)?.clone())
        }
        _ => Err(Error::InvalidParameter(format!("unknown functional `{spec}`"))),
    }
}

fn point_json(g: &MetricGraph, p: &GraphPoint) -> Value {
    serde_json::to_value(PointSpec::describe(g, p)).unwrap_or(Value::Null)
}

fn partition_table(g: &MetricGraph, parts: &[ConnectedSubset], report: &PartitionReport, tol: f64) -> Value {
    Value::Array(
        parts
            .iter()
            .zip(&report.parts)
            .map(|(part, check)| {
                json!({
                    "set": serde_json::to_value(PartSpec::describe(g, part)).unwrap_or(Value::Null),
                    "length": check.length,
                    "tilde_phi": check.tilde.value,
                    "minimizer": point_json(g, &check.minimizer),
                    "jump_at_minimizer": check.tilde.jump_at_minimizer,
                    "within_bound": check.tilde.value <= report.bound * (1.0 + tol),
                })
            })
            .collect(),
    )
}

fn cmd_partition(args: &PartitionArgs, tol: f64, inputs: &mut Inputs) -> Result<Run> {
    let (g, mu) = inputs.graph(&args.graph)?;
    let phi = build_functional(&g, mu.as_ref(), &args.functional, inputs)?;
    let outcome = partition(&g, &phi, args.n)?;
    let report = outcome.inspect(&g, &phi, tol)?;
    let dot = args.dot.as_ref().map(|p| (p.clone(), to_dot(&g, &outcome.parts)));
    let splits: Vec<Value> = outcome
        .splits
        .iter()
        .map(|s| json!({"eps": s.eps, "x_star_on_cut_tree": point_json(&outcome.cut.tree, &s.x_star)}))
        .collect();
    Ok(Run {
        report: json!({
            "functional": phi.kind().name(),
            "n": args.n,
            "total": report.total,
            "bound": report.bound,
            "tol": tol,
            "parts": partition_table(&g, &outcome.parts.parts, &report, tol),
            "max_tilde_phi": report.max_tilde(),
            "splits": splits,
            "violations": report.violations,
        }),
        passed: report.passed(),
        dot,
    })
}

fn cmd_approximate(args: &ApproximateArgs, tol: f64, inputs: &mut Inputs) -> Result<Run> {
    let (g, mu) = inputs.graph(&args.graph)?;
    let u = inputs.function(Some(&args.u), &g, 0.0)?;
    u.check_continuous(&g)?;
    let a = inputs.function(args.a.as_deref(), &g, 1.0)?;
    let (step, operator, error, bound, mode) = match args.mode {
        ApproxMode::Uniform => {
            let r = approximate_uniform(&g, &u, args.p, &a, args.n)?;
            let err = sup_error(&g, &u, &r.step);
            (r.step, r.operator, err, r.bound, "uniform")
        }
        ApproxMode::Lp => {
            let mu = need_measure(mu.as_ref(), "lp mode")?;
            let op = build_lp_operator(&g, mu, &a, args.p, args.n)?;
            let step = op.apply(&g, &u);
            let err = lp_error(&g, &u, &step, mu, args.p)?;
            let du = derivative_norm(&g, &u, args.p, &a, &ConnectedSubset::whole(&g))?;
            let bound = lp_bound_factor(&g, mu, &a, args.p, args.n)? * du;
            (step, op, err, bound, "lp")
        }
    };
    let values: Vec<Value> = step
        .parts
        .parts
        .iter()
        .zip(&step.values)
        .zip(&operator.points)
        .map(|((part, v), x)| {
            json!({
                "set": serde_json::to_value(PartSpec::describe(&g, part)).unwrap_or(Value::Null),
                "value": v,
                "sample_point": point_json(&g, x),
            })
        })
        .collect();
    let passed = error <= bound * (1.0 + tol);
    Ok(Run {
        report: json!({
            "mode": mode,
            "p": p_value(args.p),
            "n": args.n,
            "rank": step.rank(),
            "error": error,
            "bound": bound,
            "tol": tol,
            "steps": values,
        }),
        passed,
        dot: None,
    })
}

fn cmd_hardy(args: &HardyArgs, tol: Option<f64>, inputs: &mut Inputs) -> Result<Run> {
    let (g, _) = inputs.graph(&args.graph)?;
    let root = g.vertex_by_name(&args.root)?;
    let v = inputs.function(args.v.as_deref(), &g, 1.0)?;
    let w = inputs.function(args.w.as_deref(), &g, 1.0)?;
    let t = RootedTree::new(g, root, v, w)?;
    match args.check {
        HardyCheck::Bound => {
            let r = check_bound(&t, args.n_max, args.mesh)?;
            let rows: Vec<Value> = r
                .rows
                .iter()
                .map(|row| {
                    json!({"n": row.n, "s_n": row.s_n, "s_n_refined": row.s_n_fine, "slack": row.slack,
                           "bound": row.bound, "holds": row.holds})
                })
                .collect();
            Ok(Run {
                report: json!({"check": "bound", "mesh": args.mesh, "norm_v": r.norm_v, "norm_w": r.norm_w, "rows": rows}),
                passed: r.passed(),
                dot: None,
            })
        }
        HardyCheck::Asymptotics => {
            let tol = tol.unwrap_or(0.05);
            let lo = (args.n_max / 4).max(2);
            let alpha = volterra_constant(lo..=args.n_max, args.mesh)?;
            let r = check_asymptotics(&t, lo..=args.n_max, args.mesh, alpha)?;
            Ok(Run {
                report: json!({
                    "check": "asymptotics", "mesh": args.mesh, "n": r.ns, "n_times_s_n": r.scaled,
                    "limit": r.limit, "alpha": r.alpha, "weight_integral": r.weight_integral,
                    "predicted": r.predicted, "rel_error": r.rel_error, "tol": tol,
                }),
                passed: r.passed(tol),
                dot: None,
            })
        }
    }
}

fn cmd_sharpness(args: &SharpnessArgs, tol: Option<f64>) -> Result<Run> {
    let (mode, default_tol) = match args.mode {
        SharpMode::Uniform => (SharpnessMode::Uniform, 1e-8),
        SharpMode::Lp => (SharpnessMode::Lp, 1e-6),
    };
    let tol = tol.unwrap_or(default_tol);
    let r = sharpness_star(args.arms, args.p, mode)?;
    Ok(Run {
        report: json!({
            "mode": format!("{:?}", r.mode).to_lowercase(), "arms": r.n_arms, "n": r.n, "p": p_value(r.p),
            "achieved": r.achieved, "bound": r.bound, "rel_error": r.rel_error, "tol": tol,
        }),
        passed: r.attained(tol),
        dot: None,
    })
}

fn sweep_instance(seed: u64, index: u64, max_edges: usize, n_max: usize, tol: f64) -> Result<Value> {
    let mut rng = random::instance_rng(seed, index);
    let g = random::graph(&mut rng, max_edges)?;
    let phi = random::functional(&mut rng, &g)?;
    let mut runs = Vec::new();
    for n in 1..=n_max {
        let outcome = partition(&g, &phi, n)?;
        let report = outcome.inspect(&g, &phi, tol)?;
        let covered: f64 = outcome.parts.parts.iter().map(ConnectedSubset::length).sum();
        let length_gap = (covered - g.total_length()).abs() / g.total_length();
        let mut violations = report.violations.clone();
        if length_gap > 1e-12 {
            violations.push(format!("part lengths differ from |Γ| by {length_gap:e} (relative)"));
        }
        runs.push(json!({
            "n": n, "parts": outcome.parts.len(), "max_tilde_phi": report.max_tilde(),
            "bound": report.bound, "violations": violations,
        }));
    }
    Ok(json!({
        "index": index, "edges": g.edge_count(), "vertices": g.vertex_count(),
        "functional": phi.kind().name(), "total": phi.total(&g), "runs": runs,
    }))
}

fn cmd_verify(args: &VerifyArgs, tol: f64, seed: u64, inputs: &mut Inputs) -> Result<Run> {
    if let Some(count) = args.sweep {
        let instances = (0..count as u64)
            .into_par_iter()
            .map(|i| sweep_instance(seed, i, args.max_edges, args.n_max, tol))
            .collect::<Result<Vec<_>>>()?;
        let failures = instances
            .iter()
            .flat_map(|inst| inst["runs"].as_array().into_iter().flatten())
            .filter(|r| r["violations"].as_array().is_some_and(|v| !v.is_empty()))
            .count();
        return Ok(Run {
            report: json!({"sweep": count, "seed": seed, "tol": tol, "failures": failures, "instances": instances}),
            passed: failures == 0,
            dot: None,
        });
    }
    let (Some(graph), Some(parts), Some(n)) = (&args.graph, &args.parts, args.n) else {
        return Err(Error::InvalidParameter("verify needs either --sweep COUNT or --graph, --parts and --n".into()));
    };
    let (g, mu) = inputs.graph(graph)?;
    let phi = build_functional(&g, mu.as_ref(), &args.functional, inputs)?;
    let (partition, digest) = load_parts(parts, &g)?;
    inputs.add(parts, digest);
    let report = inspect_partition(&g, &phi, &partition, n, tol)?;
    Ok(Run {
        report: json!({
            "functional": phi.kind().name(), "n": n, "total": report.total, "bound": report.bound, "tol": tol,
            "parts": partition_table(&g, &partition.parts, &report, tol), "violations": report.violations,
        }),
        passed: report.passed(),
        dot: None,
    })
}

/// Parses `argv` (including the program name), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let tol = cli.tol;
    let bound_tol = tol.unwrap_or(1e-8);
    let result = match &cli.command {
        Command::Partition(a) => cmd_partition(a, bound_tol, &mut inputs),
        Command::Approximate(a) => cmd_approximate(a, bound_tol, &mut inputs),
        Command::Hardy(a) => cmd_hardy(a, tol, &mut inputs),
        Command::Sharpness(a) => cmd_sharpness(a, tol),
        Command::Verify(a) => cmd_verify(a, bound_tol, cli.seed, &mut inputs),
    };
    let code = match result {
        Ok(run) => match finish(&argv, &cli, inputs, run) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    eprintln!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    code
}

fn finish(argv: &[std::ffi::OsString], cli: &Cli, inputs: Inputs, run: Run) -> Result<i32> {
    let command: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut report = run.report;
    if let Value::Object(map) = &mut report {
        map.insert("command".into(), json!(command));
        map.insert("inputs".into(), json!(inputs.0));
        map.insert("verdict".into(), json!(if run.passed { "pass" } else { "fail" }));
    }
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some((path, dot)) = run.dot {
        std::fs::write(path, dot)?;
    }
    Ok(if run.passed { 0 } else { 1 })
}
