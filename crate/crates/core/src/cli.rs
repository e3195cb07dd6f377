//! Command-line front end. All output is JSON on stdout (CSV for `sweep`);
//! diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 invalid input, 2 non-convergence or failed check.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{FamilyRegistry, WeightPolicy};
use crate::graph::{ProblemInstance, VertexFunction, WeightedGraph};
use crate::io::{read_instance, read_solution, write_instance};
use crate::oracles::{finite_difference_gradient, relative_error};
use crate::solver::{solve, InitPolicy, SolveResult, SolverConfig, TracePoint};
use crate::variational::{energy, energy_gradient, residual, residual_scale};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_FAILED: u8 = 2;

/// Gradient check threshold on the norm-wise relative error.
pub const GRADCHECK_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "pyamabe", version, about = "Positive solutions of the p-th Yamabe equation on weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance and print a JSON run record.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Include the iteration trace in the record.
        #[arg(long)]
        trace: bool,
    },
    /// Generate an instance file on a graph from a named family.
    Gen {
        family: String,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[command(flatten)]
        data: InstanceDataArgs,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Check a claimed solution (phi, lambda) against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Solve generated instances over a grid of (p, alpha) and write CSV.
    Sweep {
        /// Graph spec `family:n`; repeat for several graphs.
        #[arg(long = "gen", required = true)]
        gen: Vec<String>,
        /// Comma-separated p values (may be empty).
        #[arg(long = "p", allow_hyphen_values = true)]
        p_list: String,
        /// Comma-separated alpha values (may be empty).
        #[arg(long = "alpha", allow_hyphen_values = true)]
        alpha_list: String,
        /// Seed for graph weights and random h/f.
        #[arg(long = "gen-seed", default_value_t = 0)]
        gen_seed: u64,
        #[command(flatten)]
        data: InstanceDataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Compare the analytic gradient of I with central finite differences.
    Gradcheck {
        instance: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

impl SolverArgs {
    pub fn config(&self, record_trace: bool) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            grad_tol: self.tol.unwrap_or(d.grad_tol),
            restarts: self.restarts.unwrap_or(d.restarts),
            seed: self.seed,
            record_trace,
            ..d
        }
    }
}

/// Graph weights and vertex data for generated instances.
#[derive(Debug, Clone, Args)]
pub struct InstanceDataArgs {
    /// `unit` or `uniform:a,b`.
    #[arg(long, default_value = "unit")]
    pub weights: String,
    /// `const:x`, `uniform:a,b` or `list:v0,v1,...`.
    #[arg(long = "h", default_value = "const:0", allow_hyphen_values = true)]
    pub h: String,
    #[arg(long = "f", default_value = "const:1", allow_hyphen_values = true)]
    pub f: String,
}

/// Recipe for a vertex function.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSpec {
    Const(f64),
    Uniform(f64, f64),
    List(Vec<f64>),
}

impl FromStr for ValueSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("value spec `{s}`: expected const:x, uniform:a,b or list:v0,v1,..."));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let nums = parse_list(rest).map_err(|_| bad())?;
        match (kind, nums.as_slice()) {
            ("const", [c]) => Ok(ValueSpec::Const(*c)),
            ("uniform", [a, b]) if a < b => Ok(ValueSpec::Uniform(*a, *b)),
            ("list", v) if !v.is_empty() => Ok(ValueSpec::List(v.to_vec())),
            _ => Err(bad()),
        }
    }
}

impl ValueSpec {
    pub fn realize(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<VertexFunction> {
        let v = match self {
            ValueSpec::Const(c) => vec![*c; n],
            ValueSpec::Uniform(a, b) => (0..n).map(|_| rng.gen_range(*a..*b)).collect(),
            ValueSpec::List(v) => {
                if v.len() != n {
                    return Err(Error::LengthMismatch { what: "value list", expected: n, found: v.len() });
                }
                v.clone()
            }
        };
        VertexFunction::new(v)
    }
}

/// Comma-separated reals; an empty string gives an empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{t}`"))))
        .collect()
}

/// Builds an instance on a generated graph. `h` and `f` draw from their own
/// streams so changing one spec does not perturb the other.
pub fn build_instance(
    family: &str,
    n: usize,
    seed: u64,
    p: f64,
    alpha: f64,
    data: &InstanceDataArgs,
) -> Result<ProblemInstance> {
    let weights: WeightPolicy = data.weights.parse()?;
    let graph = FamilyRegistry::default().generate(family, n, seed, weights)?;
    instance_on(graph, data, seed, p, alpha)
}

fn instance_on(graph: WeightedGraph, data: &InstanceDataArgs, seed: u64, p: f64, alpha: f64) -> Result<ProblemInstance> {
    let n = graph.n();
    let mut hrng = ChaCha8Rng::seed_from_u64(seed);
    hrng.set_stream(1);
    let mut frng = ChaCha8Rng::seed_from_u64(seed);
    frng.set_stream(2);
    let h = data.h.parse::<ValueSpec>()?.realize(n, &mut hrng)?;
    let f = data.f.parse::<ValueSpec>()?.realize(n, &mut frng)?;
    ProblemInstance::new(graph, h, f, p, alpha)
}

fn parse_gen_spec(spec: &str) -> Result<(String, usize)> {
    let bad = || Error::Parse(format!("graph spec `{spec}`: expected family:n"));
    let (fam, n) = spec.split_once(':').ok_or_else(bad)?;
    let n = n.trim().parse().map_err(|_| bad())?;
    Ok((fam.trim().to_string(), n))
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    max_iters: usize,
    grad_tol: f64,
    step_init: f64,
    armijo_c: f64,
    backtrack_factor: f64,
    floor_eps: f64,
    restarts: usize,
    seed: u64,
    init_policy: &'static str,
}

impl From<&SolverConfig> for ConfigEcho {
    fn from(c: &SolverConfig) -> Self {
        Self {
            max_iters: c.max_iters,
            grad_tol: c.grad_tol,
            step_init: c.step_init,
            armijo_c: c.armijo_c,
            backtrack_factor: c.backtrack_factor,
            floor_eps: c.floor_eps,
            restarts: c.restarts,
            seed: c.seed,
            init_policy: match c.init_policy {
                InitPolicy::Constant => "constant",
                InitPolicy::RandomPositive => "random_positive",
                InitPolicy::UserSupplied(_) => "user_supplied",
            },
        }
    }
}

/// One solve, as printed by `solve`.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    version: &'static str,
    instance: String,
    config: ConfigEcho,
    phi: Vec<f64>,
    lambda: f64,
    beta: f64,
    residual_inf: f64,
    residual_rel: f64,
    iterations: usize,
    converged: bool,
    restart: usize,
    restart_betas: Vec<Option<f64>>,
    restarts_disagree: bool,
    trace: Option<Vec<TracePoint>>,
    wall_time_ms: f64,
}

impl RunRecord {
    fn new(instance: String, cfg: &SolverConfig, r: SolveResult, wall_time_ms: f64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            instance,
            config: cfg.into(),
            phi: r.phi.into_inner(),
            lambda: r.lambda,
            beta: r.beta,
            residual_inf: r.residual_inf,
            residual_rel: r.residual_rel,
            iterations: r.iterations,
            converged: r.converged,
            restart: r.restart,
            restart_betas: r.restart_betas,
            restarts_disagree: r.restarts_disagree,
            trace: r.trace,
            wall_time_ms,
        }
    }
}

/// Runs a parsed command. Output goes to `out`, diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Solve { instance, solver, trace } => cmd_solve(&instance, &solver.config(trace), out),
        Command::Gen { family, n, seed, p, alpha, data, output } => {
            cmd_gen(&family, n, seed, p, alpha, &data, &output, out)
        }
        Command::Verify { instance, solution, tol } => cmd_verify(&instance, &solution, tol, out),
        Command::Sweep { gen, p_list, alpha_list, gen_seed, data, solver, output } => {
            let lists = parse_list(&p_list).and_then(|p| Ok((p, parse_list(&alpha_list)?)));
            match lists {
                Ok((p, a)) => cmd_sweep(&gen, &p, &a, gen_seed, &data, &solver.config(false), &output, out),
                Err(e) => Err(e),
            }
        }
        Command::Gradcheck { instance, trials, seed } => cmd_gradcheck(&instance, trials, seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

/// Entry point for the binary.
pub fn main_from_env() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(cli, &mut stdout.lock(), &mut stderr.lock())
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn cmd_solve(instance: &Path, cfg: &SolverConfig, out: &mut dyn Write) -> Result<u8> {
    let inst = read_instance(instance)?;
    let t0 = Instant::now();
    let (res, code) = match solve(&inst, cfg) {
        Ok(r) => (r, EXIT_OK),
        Err(Error::NotConverged(best)) => (*best, EXIT_FAILED),
        Err(e) => return Err(e),
    };
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    print_json(out, &RunRecord::new(instance.display().to_string(), cfg, res, ms))?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_gen(
    family: &str,
    n: usize,
    seed: u64,
    p: f64,
    alpha: f64,
    data: &InstanceDataArgs,
    output: &Path,
    out: &mut dyn Write,
) -> Result<u8> {
    let inst = build_instance(family, n, seed, p, alpha, data)?;
    write_instance(&inst, output)?;
    print_json(
        out,
        &serde_json::json!({
            "family": family,
            "n": n,
            "edges": inst.graph().edge_count(),
            "output": output.display().to_string(),
        }),
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    residual: Option<Vec<f64>>,
    residual_inf: Option<f64>,
    scale: Option<f64>,
    threshold: Option<f64>,
    positive: bool,
    first_nonpositive: Option<usize>,
    constraint: Option<f64>,
    lambda: f64,
    pass: bool,
}

pub fn cmd_verify(instance: &Path, solution: &Path, tol: f64, out: &mut dyn Write) -> Result<u8> {
    let inst = read_instance(instance)?;
    let sol = read_solution(solution)?;
    if sol.phi.len() != inst.n() {
        return Err(Error::LengthMismatch { what: "phi", expected: inst.n(), found: sol.phi.len() });
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::param("tol", format!("tol = {tol} must be >= 0")));
    }
    let phi = VertexFunction::new(sol.phi)?;
    let first_nonpositive = phi.iter().position(|&x| !(x > 0.0));
    let report = if first_nonpositive.is_some() {
        VerifyReport {
            residual: None,
            residual_inf: None,
            scale: None,
            threshold: None,
            positive: false,
            first_nonpositive,
            constraint: None,
            lambda: sol.lambda,
            pass: false,
        }
    } else {
        let r = residual(&inst, &phi, sol.lambda)?;
        let r_inf = r.max_abs();
        let scale = residual_scale(&inst, &phi, sol.lambda);
        let threshold = tol * (1.0 + scale);
        VerifyReport {
            residual_inf: Some(r_inf),
            residual: Some(r.into_inner()),
            scale: Some(scale),
            threshold: Some(threshold),
            positive: true,
            first_nonpositive: None,
            constraint: Some(energy(&inst, &phi)?.constraint),
            lambda: sol.lambda,
            pass: r_inf <= threshold,
        }
    };
    print_json(out, &report)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

/// One row of the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub instance: String,
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const SWEEP_HEADER: [&str; 9] = [
    "instance", "n", "p", "alpha", "beta", "lambda", "residual_inf", "iterations", "converged",
];

/// Solves every (graph, p, alpha) combination. All pairs are validated
/// before any solve starts; rows come back in graph-major, then p, then
/// alpha order regardless of scheduling.
pub fn run_sweep(
    gen: &[String],
    p_list: &[f64],
    alpha_list: &[f64],
    gen_seed: u64,
    data: &InstanceDataArgs,
    cfg: &SolverConfig,
) -> Result<Vec<SweepRow>> {
    for &p in p_list {
        for &alpha in alpha_list {
            if !(p > 1.0) {
                return Err(Error::param("p", format!("p = {p} must be > 1")));
            }
            if alpha < p {
                return Err(Error::AlphaBelowP { p, alpha });
            }
        }
    }
    cfg.validate()?;
    let weights: WeightPolicy = data.weights.parse()?;
    let registry = FamilyRegistry::default();
    let mut jobs = Vec::new();
    for spec in gen {
        let (family, n) = parse_gen_spec(spec)?;
        let graph = registry.generate(&family, n, gen_seed, weights)?;
        for &p in p_list {
            for &alpha in alpha_list {
                jobs.push((spec.clone(), instance_on(graph.clone(), data, gen_seed, p, alpha)?));
            }
        }
    }
    jobs.par_iter()
        .map(|(spec, inst)| {
            let r = match solve(inst, cfg) {
                Ok(r) => r,
                Err(Error::NotConverged(best)) => *best,
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                instance: spec.clone(),
                n: inst.n(),
                p: inst.p(),
                alpha: inst.alpha(),
                beta: r.beta,
                lambda: r.lambda,
                residual_inf: r.residual_inf,
                iterations: r.iterations,
                converged: r.converged,
            })
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.p.to_string(),
            r.alpha.to_string(),
            r.beta.to_string(),
            r.lambda.to_string(),
            r.residual_inf.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    gen: &[String],
    p_list: &[f64],
    alpha_list: &[f64],
    gen_seed: u64,
    data: &InstanceDataArgs,
    cfg: &SolverConfig,
    output: &Path,
    out: &mut dyn Write,
) -> Result<u8> {
    let rows = run_sweep(gen, p_list, alpha_list, gen_seed, data, cfg)?;
    write_sweep_csv(&rows, output)?;
    let all = rows.iter().all(|r| r.converged);
    print_json(
        out,
        &serde_json::json!({
            "rows": rows.len(),
            "converged": rows.iter().filter(|r| r.converged).count(),
            "output": output.display().to_string(),
        }),
    )?;
    Ok(if all { EXIT_OK } else { EXIT_FAILED })
}

/// Random positive test point; when `p < 2` adjacent values are kept at
/// least `1e-3` apart so the p-Laplacian stays smooth around it.
pub fn random_test_point(inst: &ProblemInstance, rng: &mut impl Rng) -> Vec<f64> {
    let n = inst.n();
    loop {
        let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let separated = inst.p() >= 2.0
            || inst.graph().edges().iter().all(|e| (phi[e.i] - phi[e.j]).abs() >= 1e-3);
        if separated {
            return phi;
        }
    }
}

#[derive(Debug, Serialize)]
struct GradcheckReport {
    trials: usize,
    max_rel_error: f64,
    threshold: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

/// Largest norm-wise relative error between the analytic gradient and
/// central differences over `trials` random positive points.
pub fn gradcheck(inst: &ProblemInstance, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let phi = random_test_point(inst, &mut rng);
        let g = energy_gradient(inst, &phi)?;
        let fd = finite_difference_gradient(inst, &phi, 1e-6)?;
        worst = worst.max(relative_error(&g, &fd));
    }
    Ok(worst)
}

pub fn cmd_gradcheck(instance: &Path, trials: usize, seed: u64, out: &mut dyn Write) -> Result<u8> {
    let inst = read_instance(instance)?;
    let worst = gradcheck(&inst, trials, seed)?;
    let report = GradcheckReport {
        trials,
        max_rel_error: worst,
        threshold: GRADCHECK_TOL,
        pass: worst <= GRADCHECK_TOL,
        note: (trials == 0).then_some("no trials"),
    };
    print_json(out, &report)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}
