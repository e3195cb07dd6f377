//! Minimization of `I` over `{φ >= 0, ∫ f φ^α dμ = 1}` by projected gradient
//! descent with Armijo backtracking.
//!
//! Every iterate is clipped to a positivity floor and renormalized onto the
//! constraint surface, so `I` (which is scale invariant) is evaluated on
//! feasible points only. Convergence is declared on the equation residual
//! at `λ_φ`, not on the raw gradient norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ProblemInstance, VertexFunction};
use crate::operators::sobolev_norm_pow;
use crate::variational::{breakdown_unchecked, energy, gradient_into, residual_scale, EnergyBreakdown};

/// Starting point for restart 0. Later restarts always start from
/// i.i.d. uniform(0.5, 1.5) values.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPolicy {
    Constant,
    RandomPositive,
    UserSupplied(VertexFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Accepted steps allowed per restart.
    pub max_iters: usize,
    /// Threshold on `‖r‖_∞ / (1 + ‖λ f φ^(α−1)‖_∞)`.
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Positivity floor applied before renormalization.
    pub floor_eps: f64,
    /// Total number of starts.
    pub restarts: usize,
    pub seed: u64,
    pub init_policy: InitPolicy,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            grad_tol: 1e-9,
            step_init: 1.0,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 80,
            floor_eps: 1e-14,
            restarts: 3,
            seed: 0,
            init_policy: InitPolicy::Constant,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("{name} = {v} must be finite and > 0")))
            }
        };
        positive("grad_tol", self.grad_tol)?;
        positive("step_init", self.step_init)?;
        positive("floor_eps", self.floor_eps)?;
        for (name, v) in [("armijo_c", self.armijo_c), ("backtrack_factor", self.backtrack_factor)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be >= 1"));
        }
        if self.restarts == 0 {
            return Err(Error::param("restarts", "must be >= 1"));
        }
        if self.max_backtracks == 0 {
            return Err(Error::param("max_backtracks", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub energy: f64,
    pub residual_inf: f64,
    /// `‖φ_k‖_{W^{1,p}}^p`
    pub sobolev_pow: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Positive, normalized so that `∫ f φ^α dμ = 1`.
    pub phi: VertexFunction,
    pub lambda: f64,
    /// Final energy `I(φ)`.
    pub beta: f64,
    pub residual_inf: f64,
    /// `residual_inf / (1 + ‖λ f φ^(α−1)‖_∞)`
    pub residual_rel: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
    /// Final energy of each restart, `None` where it did not converge.
    pub restart_betas: Vec<Option<f64>>,
    /// Converged restarts disagree on β by more than 1e-6.
    pub restarts_disagree: bool,
    pub trace: Option<Vec<TracePoint>>,
}

/// Rescales `φ` onto `∫ f φ^α dμ = 1`.
pub fn normalize(inst: &ProblemInstance, phi: &[f64]) -> Result<VertexFunction> {
    let b = energy(inst, phi)?;
    Ok(scale_to_constraint(phi, b.constraint, inst.alpha()))
}

fn scale_to_constraint(phi: &[f64], constraint: f64, alpha: f64) -> VertexFunction {
    let k = constraint.powf(1.0 / alpha);
    VertexFunction::from_vec_unchecked(phi.iter().map(|x| x / k).collect())
}

fn project(inst: &ProblemInstance, phi: &[f64], grad: &[f64], step: f64, floor: f64) -> (Vec<f64>, VertexFunction) {
    let raw: Vec<f64> = phi.iter().zip(grad).map(|(x, g)| (x - step * g).max(floor)).collect();
    let b = breakdown_unchecked(inst, &raw);
    let next = scale_to_constraint(&raw, b.constraint, inst.alpha());
    (raw, next)
}

/// One projected-gradient step without line search:
/// `normalize(max(φ − step·∇I(φ), floor_eps))` and its energy.
pub fn descend_step(inst: &ProblemInstance, phi: &[f64], step: f64, floor_eps: f64) -> Result<(VertexFunction, f64)> {
    let grad = crate::variational::energy_gradient(inst, phi)?;
    let (_, next) = project(inst, phi, &grad, step, floor_eps);
    let e = breakdown_unchecked(inst, &next).energy;
    Ok((next, e))
}

/// Iterate plus everything derived from it.
struct State {
    phi: VertexFunction,
    b: EnergyBreakdown,
    grad: Vec<f64>,
    residual_inf: f64,
    residual_rel: f64,
}

impl State {
    fn evaluate(inst: &ProblemInstance, phi: VertexFunction) -> Self {
        let b = breakdown_unchecked(inst, &phi);
        let mut grad = vec![0.0; phi.len()];
        let mut r = vec![0.0; phi.len()];
        gradient_into(inst, &phi, &b, &mut grad, Some(&mut r));
        let residual_inf = r.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        let scale = residual_scale(inst, &phi, b.lambda);
        Self {
            phi,
            b,
            grad,
            residual_inf,
            residual_rel: residual_inf / (1.0 + scale),
        }
    }

    /// Band below which energy differences are indistinguishable from rounding.
    fn noise(&self) -> f64 {
        1e-12 * (1.0 + self.b.dirichlet.abs() + self.b.h_term.abs())
    }

    fn trace_point(&self, inst: &ProblemInstance, iteration: usize) -> TracePoint {
        TracePoint {
            iteration,
            energy: self.b.energy,
            residual_inf: self.residual_inf,
            sobolev_pow: sobolev_norm_pow(inst.graph(), &self.phi, inst.p()).unwrap_or(f64::NAN),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct RestartOutcome {
    state: State,
    iterations: usize,
    converged: bool,
    trace: Option<Vec<TracePoint>>,
}

fn run_restart(inst: &ProblemInstance, cfg: &SolverConfig, start: &[f64]) -> Result<RestartOutcome> {
    let floored: Vec<f64> = start.iter().map(|x| x.max(cfg.floor_eps)).collect();
    let mut st = State::evaluate(inst, normalize(inst, &floored)?);
    let mut trace = cfg.record_trace.then(|| vec![st.trace_point(inst, 0)]);
    let mut trial = cfg.step_init;
    let mut iterations = 0;
    let mut converged = false;

    loop {
        if st.residual_rel <= cfg.grad_tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }
        let gg = dot(&st.grad, &st.grad);
        let mut step = trial;
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            let (raw, cand) = project(inst, &st.phi, &st.grad, step, cfg.floor_eps);
            let e_cand = breakdown_unchecked(inst, &cand).energy;
            if e_cand <= st.b.energy - cfg.armijo_c * step * gg {
                accepted = Some(State::evaluate(inst, cand));
                break;
            }
            if e_cand - st.b.energy <= st.noise() {
                // Energy change lost in rounding: estimate the decrease from
                // the slopes at both ends of the (unnormalized) step instead.
                let next = State::evaluate(inst, cand);
                let k = raw[0] / next.phi[0];
                let dir: Vec<f64> = raw.iter().zip(st.phi.iter()).map(|(r, x)| (r - x) / step).collect();
                let slope0 = dot(&st.grad, &dir);
                let slope1 = dot(&next.grad, &dir) / k;
                if slope0 < 0.0 && 0.5 * (slope0 + slope1) <= cfg.armijo_c * slope0 {
                    accepted = Some(next);
                    break;
                }
            }
            step *= cfg.backtrack_factor;
        }
        let Some(next) = accepted else {
            break;
        };

        // Barzilai-Borwein trial step for the next iteration.
        let s: Vec<f64> = next.phi.iter().zip(st.phi.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.grad.iter().zip(&st.grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let ss = dot(&s, &s);
        trial = if sy > 0.0 && ss > 0.0 {
            (ss / sy).clamp(1e-10, 1e10)
        } else {
            cfg.step_init
        };

        st = next;
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(st.trace_point(inst, iterations));
        }
    }

    Ok(RestartOutcome {
        state: st,
        iterations,
        converged,
        trace,
    })
}

/// Minimizes `I` from `cfg.restarts` starting points and returns the
/// converged result with the smallest energy (ties within 1e-12 go to the
/// lower restart index). If no restart converges the best attempt is
/// returned inside [`Error::NotConverged`].
pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !inst.graph().is_connected() {
        return Err(Error::Disconnected);
    }
    let n = inst.n();
    if let InitPolicy::UserSupplied(v) = &cfg.init_policy {
        if v.len() != n {
            return Err(Error::LengthMismatch { what: "initial phi", expected: n, found: v.len() });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut outcomes = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let start: Vec<f64> = match (r, &cfg.init_policy) {
            (0, InitPolicy::Constant) => vec![1.0; n],
            (0, InitPolicy::UserSupplied(v)) => v.to_vec(),
            _ => (0..n).map(|_| rng.gen_range(0.5..1.5)).collect(),
        };
        outcomes.push(run_restart(inst, cfg, &start)?);
    }

    let restart_betas: Vec<Option<f64>> = outcomes
        .iter()
        .map(|o| o.converged.then_some(o.state.b.energy))
        .collect();
    let converged: Vec<f64> = restart_betas.iter().flatten().copied().collect();
    let spread = converged.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - converged.iter().copied().fold(f64::INFINITY, f64::min);
    let restarts_disagree = converged.len() > 1 && spread > 1e-6;

    let any_converged = !converged.is_empty();
    let mut best: Option<usize> = None;
    for (r, o) in outcomes.iter().enumerate() {
        if any_converged && !o.converged {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => o.state.b.energy < outcomes[b].state.b.energy - 1e-12,
        };
        if better {
            best = Some(r);
        }
    }
    let restart = best.expect("at least one restart");
    let o = outcomes.swap_remove(restart);
    let result = SolveResult {
        lambda: o.state.b.lambda,
        beta: o.state.b.energy,
        residual_inf: o.state.residual_inf,
        residual_rel: o.state.residual_rel,
        phi: o.state.phi,
        iterations: o.iterations,
        converged: o.converged,
        restart,
        restart_betas,
        restarts_disagree,
        trace: o.trace,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}
