//! Independent reference computations for small instances: exhaustive grid
//! search on two vertices, a dense generalized eigen-solver for the linear
//! case `p = α = 2`, and central finite differences of `I`.
//!
//! None of these go through the solver's descent path.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ProblemInstance, VertexFunction};
use crate::variational::{breakdown_unchecked, energy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid1d,
    Eigen2x2,
    EigenDense,
    FiniteDifference,
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OracleMethod::Grid1d => "grid_1d",
            OracleMethod::Eigen2x2 => "eigen_2x2",
            OracleMethod::EigenDense => "eigen_dense",
            OracleMethod::FiniteDifference => "finite_difference",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub beta_oracle: f64,
    pub lambda_oracle: f64,
    /// Normalized to `∫ f φ^α dμ = 1`.
    pub phi_oracle: VertexFunction,
    pub method: OracleMethod,
    /// `|β_solver − β_oracle|`, zero until [`OracleReport::compare`] is called.
    pub gap: f64,
    /// Method-specific self check: eigen-equation residual for the eigen
    /// oracle, change in β over the last refinement for the grid oracle.
    pub self_check: f64,
}

impl OracleReport {
    pub fn compare(mut self, beta_solver: f64) -> Self {
        self.gap = (beta_solver - self.beta_oracle).abs();
        self
    }
}

/// A reference computation of β for some class of instances.
pub trait BetaOracle: Send + Sync {
    fn name(&self) -> &'static str;

    fn supports(&self, inst: &ProblemInstance) -> bool;

    fn evaluate(&self, inst: &ProblemInstance) -> Result<OracleReport>;
}

pub struct TwoVertexGrid {
    pub resolution: usize,
}

pub struct LinearEigen;

impl BetaOracle for TwoVertexGrid {
    fn name(&self) -> &'static str {
        "grid_1d"
    }

    fn supports(&self, inst: &ProblemInstance) -> bool {
        inst.n() == 2 && inst.graph().edge_count() == 1
    }

    fn evaluate(&self, inst: &ProblemInstance) -> Result<OracleReport> {
        grid_search_two_vertex(inst, self.resolution)
    }
}

impl BetaOracle for LinearEigen {
    fn name(&self) -> &'static str {
        "linear_eigen"
    }

    fn supports(&self, inst: &ProblemInstance) -> bool {
        inst.p() == 2.0 && inst.alpha() == 2.0 && inst.n() <= MAX_EIGEN_N
    }

    fn evaluate(&self, inst: &ProblemInstance) -> Result<OracleReport> {
        linear_eigen_oracle(inst)
    }
}

/// Name-indexed set of β-oracles.
pub struct OracleRegistry {
    oracles: Vec<Box<dyn BetaOracle>>,
}

impl Default for OracleRegistry {
    fn default() -> Self {
        let mut reg = Self { oracles: Vec::new() };
        reg.register(Box::new(LinearEigen));
        reg.register(Box::new(TwoVertexGrid { resolution: 10_000 }));
        reg
    }
}

impl OracleRegistry {
    pub fn register(&mut self, oracle: Box<dyn BetaOracle>) {
        self.oracles.retain(|o| o.name() != oracle.name());
        self.oracles.push(oracle);
    }

    pub fn get(&self, name: &str) -> Result<&dyn BetaOracle> {
        self.oracles
            .iter()
            .find(|o| o.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown { kind: "oracle", name: name.to_string() })
    }

    /// Oracles that can handle `inst`, in registration order.
    pub fn applicable<'a>(&'a self, inst: &'a ProblemInstance) -> impl Iterator<Item = &'a dyn BetaOracle> + 'a {
        self.oracles.iter().map(|b| b.as_ref()).filter(move |o| o.supports(inst))
    }
}

fn normalized(inst: &ProblemInstance, phi: Vec<f64>) -> Result<(VertexFunction, f64, f64)> {
    let b = energy(inst, &phi)?;
    let k = b.constraint.powf(1.0 / inst.alpha());
    let phi = VertexFunction::new(phi.into_iter().map(|x| x / k).collect())?;
    Ok((phi, b.energy, b.lambda * k.powf(inst.alpha() - inst.p())))
}

// ---------------------------------------------------------------------------
// Two-vertex grid search
// ---------------------------------------------------------------------------

fn ratio_energy(inst: &ProblemInstance, t: f64) -> f64 {
    breakdown_unchecked(inst, &[1.0, t]).energy
}

/// Minimizes `I(1, t)` over a log-spaced grid in `t`, widening the range
/// while the minimum sits on an end, then refining three times around the
/// best grid point.
pub fn grid_search_two_vertex(inst: &ProblemInstance, resolution: usize) -> Result<OracleReport> {
    if inst.n() != 2 {
        return Err(Error::param("instance", format!("grid oracle needs n = 2, got {}", inst.n())));
    }
    if resolution < 10_000 {
        return Err(Error::param("resolution", format!("need >= 10^4, got {resolution}")));
    }

    let sample = |lo: f64, hi: f64| -> (usize, Vec<f64>, Vec<f64>) {
        let ts: Vec<f64> = (0..resolution)
            .map(|k| (lo + (hi - lo) * k as f64 / (resolution - 1) as f64).exp())
            .collect();
        let es: Vec<f64> = ts.iter().map(|&t| ratio_energy(inst, t)).collect();
        let best = es
            .iter()
            .enumerate()
            .fold(0, |b, (k, &e)| if e < es[b] { k } else { b });
        (best, ts, es)
    };

    let (mut lo, mut hi) = ((1e-4f64).ln(), (1e4f64).ln());
    let (mut best, mut ts, mut es) = sample(lo, hi);
    for _ in 0..60 {
        if best == 0 {
            lo -= (hi - lo).min(20.0);
        } else if best == resolution - 1 {
            hi += (hi - lo).min(20.0);
        } else {
            break;
        }
        (best, ts, es) = sample(lo, hi);
    }
    if best == 0 || best == resolution - 1 {
        return Err(Error::Domain("grid minimum stays on the boundary of the ratio range".into()));
    }

    let mut beta = es[best];
    let mut last_change = f64::INFINITY;
    for _ in 0..3 {
        let (a, b) = (ts[best - 1].ln(), ts[best + 1].ln());
        let (k, t2, e2) = sample(a, b);
        last_change = (beta - e2[k]).abs();
        beta = e2[k];
        best = k.clamp(1, resolution - 2);
        ts = t2;
        es = e2;
    }
    let t_best = ts.iter().zip(&es).fold((ts[0], es[0]), |acc, (&t, &e)| if e < acc.1 { (t, e) } else { acc }).0;

    let (phi, _, lambda) = normalized(inst, vec![1.0, t_best])?;
    Ok(OracleReport {
        beta_oracle: beta,
        lambda_oracle: lambda,
        phi_oracle: phi,
        method: OracleMethod::Grid1d,
        gap: 0.0,
        self_check: last_change,
    })
}

// ---------------------------------------------------------------------------
// Linear generalized eigenproblem, p = α = 2
// ---------------------------------------------------------------------------

pub const MAX_EIGEN_N: usize = 12;

type Matrix = Vec<Vec<f64>>;

/// `A = L_ω − diag(μ h)` and the diagonal of `B = diag(μ f)`.
fn quadratic_forms(inst: &ProblemInstance) -> (Matrix, Vec<f64>) {
    let g = inst.graph();
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        a[e.i][e.i] += e.omega;
        a[e.j][e.j] += e.omega;
        a[e.i][e.j] -= e.omega;
        a[e.j][e.i] -= e.omega;
    }
    for i in 0..n {
        a[i][i] -= g.mu()[i] * inst.h()[i];
    }
    let b = (0..n).map(|i| g.mu()[i] * inst.f()[i]).collect();
    (a, b)
}

fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inf_norm_matrix(m: &Matrix) -> f64 {
    m.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` on an exactly singular pivot.
fn lu_solve(m: &Matrix, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a = m.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn rayleigh(c: &Matrix, v: &[f64]) -> f64 {
    let cv = mat_vec(c, v);
    cv.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>()
}

fn eigen_residual(c: &Matrix, v: &[f64], lambda: f64) -> f64 {
    let cv = mat_vec(c, v);
    let r: Vec<f64> = cv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
    norm2(&r) / norm2(v)
}

/// Smallest eigenpair of a symmetric 1x1/2x2/3x3 matrix from its
/// characteristic polynomial.
fn char_poly_min(c: &Matrix) -> (f64, Vec<f64>) {
    match c.len() {
        1 => (c[0][0], vec![1.0]),
        2 => {
            let (a, b, d) = (c[0][0], c[0][1], c[1][1]);
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            let lam = mean - rad;
            // Either row of (C − λI) gives the null vector; take the better conditioned.
            let v1 = [b, lam - a];
            let v2 = [lam - d, b];
            let v = if norm2(&v1) >= norm2(&v2) { v1 } else { v2 };
            if norm2(&v) == 0.0 {
                (lam, vec![1.0, 0.0])
            } else {
                (lam, v.to_vec())
            }
        }
        3 => {
            // Trigonometric solution of the symmetric cubic.
            let q = (c[0][0] + c[1][1] + c[2][2]) / 3.0;
            let p1 = c[0][1] * c[0][1] + c[0][2] * c[0][2] + c[1][2] * c[1][2];
            let p2 = (c[0][0] - q).powi(2) + (c[1][1] - q).powi(2) + (c[2][2] - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let lam = if p == 0.0 {
                q
            } else {
                let bm: Vec<Vec<f64>> = (0..3)
                    .map(|i| (0..3).map(|j| (c[i][j] - if i == j { q } else { 0.0 }) / p).collect())
                    .collect();
                let det = bm[0][0] * (bm[1][1] * bm[2][2] - bm[1][2] * bm[2][1])
                    - bm[0][1] * (bm[1][0] * bm[2][2] - bm[1][2] * bm[2][0])
                    + bm[0][2] * (bm[1][0] * bm[2][1] - bm[1][1] * bm[2][0]);
                let phi = ((det / 2.0).clamp(-1.0, 1.0)).acos() / 3.0;
                q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
            };
            let rows: Vec<[f64; 3]> = (0..3)
                .map(|i| [0, 1, 2].map(|j| c[i][j] - if i == j { lam } else { 0.0 }))
                .collect();
            let cross = |a: [f64; 3], b: [f64; 3]| {
                [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
            };
            let cands = [cross(rows[0], rows[1]), cross(rows[0], rows[2]), cross(rows[1], rows[2])];
            let v = cands.into_iter().max_by(|a, b| norm2(a).total_cmp(&norm2(b))).unwrap();
            if norm2(&v) == 0.0 {
                (lam, vec![1.0, 1.0, 1.0])
            } else {
                (lam, v.to_vec())
            }
        }
        _ => unreachable!("char_poly_min called with n > 3"),
    }
}

/// Smallest eigenpair of a symmetric matrix by inverse iteration with a
/// fixed Gershgorin shift, polished with Rayleigh-quotient steps.
fn inverse_iteration_min(c: &Matrix) -> Result<(f64, Vec<f64>)> {
    let n = c.len();
    let scale = inf_norm_matrix(c).max(f64::MIN_POSITIVE);
    let sigma = (0..n)
        .map(|i| c[i][i] - (0..n).filter(|&j| j != i).map(|j| c[i][j].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        - 1e-3 * scale
        - 1.0;
    let mut shifted = c.clone();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] -= sigma;
    }

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lam = rayleigh(c, &v);
    let mut iters = 0;
    while iters < 10_000 {
        iters += 1;
        let w = lu_solve(&shifted, &v).ok_or_else(|| Error::Domain("singular shifted matrix".into()))?;
        let nw = norm2(&w);
        v = w.iter().map(|x| x / nw).collect();
        lam = rayleigh(c, &v);
        let res = eigen_residual(c, &v, lam);
        if res <= 1e-6 * scale {
            break;
        }
    }

    for _ in 0..20 {
        let res = eigen_residual(c, &v, lam);
        if res <= 1e-13 * scale {
            break;
        }
        let mut m = c.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= lam;
        }
        let Some(w) = lu_solve(&m, &v) else { break };
        let nw = norm2(&w);
        if !nw.is_finite() || nw == 0.0 {
            break;
        }
        v = w.iter().map(|x| x / nw).collect();
        lam = rayleigh(c, &v);
    }
    Ok((lam, v))
}

/// Minimal generalized Rayleigh quotient `min (φᵀAφ)/(φᵀBφ)` and its positive
/// eigenvector, for `p = α = 2` and `n <= 12`.
pub fn linear_eigen_oracle(inst: &ProblemInstance) -> Result<OracleReport> {
    if inst.p() != 2.0 || inst.alpha() != 2.0 {
        return Err(Error::param(
            "instance",
            format!("linear eigen oracle needs p = alpha = 2, got p = {}, alpha = {}", inst.p(), inst.alpha()),
        ));
    }
    let n = inst.n();
    if n > MAX_EIGEN_N {
        return Err(Error::param("instance", format!("linear eigen oracle needs n <= {MAX_EIGEN_N}, got {n}")));
    }
    let (a, b) = quadratic_forms(inst);
    let inv_sqrt_b: Vec<f64> = b.iter().map(|x| 1.0 / x.sqrt()).collect();
    let c: Matrix = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] * inv_sqrt_b[i] * inv_sqrt_b[j]).collect())
        .collect();

    let (method, (beta, w)) = if n <= 3 {
        let m = if n <= 2 { OracleMethod::Eigen2x2 } else { OracleMethod::EigenDense };
        (m, char_poly_min(&c))
    } else {
        (OracleMethod::EigenDense, inverse_iteration_min(&c)?)
    };

    let mut phi: Vec<f64> = w.iter().zip(&inv_sqrt_b).map(|(x, s)| x * s).collect();
    if phi.iter().sum::<f64>() < 0.0 {
        phi.iter_mut().for_each(|x| *x = -*x);
    }
    if let Some(k) = phi.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Domain(format!("eigenvector not positive at vertex {k} ({})", phi[k])));
    }

    // ‖Aφ − βBφ‖_∞ relative to (‖A‖_∞ + |β| ‖B‖_∞) ‖φ‖_∞
    let aphi = mat_vec(&a, &phi);
    let check = (0..n).map(|i| (aphi[i] - beta * b[i] * phi[i]).abs()).fold(0.0, f64::max);
    let bmax = b.iter().copied().fold(0.0, f64::max);
    let phimax = phi.iter().copied().fold(0.0, f64::max);
    let self_check = check / ((inf_norm_matrix(&a) + beta.abs() * bmax) * phimax);

    let (phi, _, _) = normalized(inst, phi)?;
    Ok(OracleReport {
        beta_oracle: beta,
        lambda_oracle: -beta,
        phi_oracle: phi,
        method,
        gap: 0.0,
        self_check,
    })
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Central differences `(I(φ + s e_i) − I(φ − s e_i)) / 2s` with
/// `s = step · max(1, |φ_i|)`, halved until `φ_i − s > 0`.
pub fn finite_difference_gradient(inst: &ProblemInstance, phi: &[f64], step: f64) -> Result<VertexFunction> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::param("step", format!("step = {step} must be > 0")));
    }
    if phi.len() != inst.n() {
        return Err(Error::LengthMismatch { what: "phi", expected: inst.n(), found: phi.len() });
    }
    if let Some(k) = phi.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Domain(format!("phi[{k}] = {} is not strictly positive", phi[k])));
    }
    let mut work = phi.to_vec();
    let mut out = Vec::with_capacity(phi.len());
    for i in 0..phi.len() {
        let mut s = step * phi[i].abs().max(1.0);
        let mut shrinks = 0;
        while phi[i] - s <= 0.0 {
            shrinks += 1;
            if shrinks > 40 {
                return Err(Error::Domain(format!("no admissible perturbation at vertex {i}")));
            }
            s *= 0.5;
        }
        let (hi, lo) = (phi[i] + s, phi[i] - s);
        work[i] = hi;
        let up = breakdown_unchecked(inst, &work).energy;
        work[i] = lo;
        let down = breakdown_unchecked(inst, &work).energy;
        work[i] = phi[i];
        out.push((up - down) / (hi - lo));
    }
    VertexFunction::new(out)
}

/// `‖a − b‖_∞ / max(‖a‖_∞, ‖b‖_∞)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
    let scale = a.iter().chain(b).fold(0.0, |m: f64, x| m.max(x.abs()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
