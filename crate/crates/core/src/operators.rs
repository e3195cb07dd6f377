//! Discrete calculus on a weighted graph: integrals over vertices and edges,
//! the edge gradient, the p-Laplacian and the associated norms.
//!
//! Edge sums run over unordered edges, each counted once. With that
//! convention `sum_i mu_i u_i (Δ_p u)_i = -sum_{i~j} omega_ij |u_j - u_i|^p`.

use crate::error::{Error, Result};
use crate::graph::{VertexFunction, WeightedGraph};

/// One real per stored edge, in the graph's edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction(pub Vec<f64>);

impl std::ops::Deref for EdgeFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_len(g: &WeightedGraph, u: &[f64], what: &'static str) -> Result<()> {
    if u.len() != g.n() {
        return Err(Error::LengthMismatch { what, expected: g.n(), found: u.len() });
    }
    Ok(())
}

fn check_exponent(name: &'static str, value: f64, min: f64, strict: bool) -> Result<()> {
    let ok = value.is_finite() && if strict { value > min } else { value >= min };
    if ok {
        Ok(())
    } else {
        let rel = if strict { ">" } else { ">=" };
        Err(Error::param(name, format!("{name} = {value} must be {rel} {min}")))
    }
}

/// `|t|^(p-2) t`, computed as `sign(t) |t|^(p-1)` so that `t = 0` maps to 0
/// for every `p > 1`.
#[inline]
pub fn signed_pow(t: f64, p_minus_1: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if p_minus_1 == 1.0 {
        t
    } else {
        t.signum() * t.abs().powf(p_minus_1)
    }
}

/// `sum_i mu_i u_i`.
pub fn integral_v(g: &WeightedGraph, u: &[f64]) -> Result<f64> {
    check_len(g, u, "vertex function")?;
    Ok(g.mu().iter().zip(u).map(|(m, x)| m * x).sum())
}

/// `|u_j - u_i|` for every stored edge.
pub fn edge_gradient_abs(g: &WeightedGraph, u: &[f64]) -> Result<EdgeFunction> {
    check_len(g, u, "vertex function")?;
    Ok(EdgeFunction(g.edges().iter().map(|e| (u[e.j] - u[e.i]).abs()).collect()))
}

pub(crate) fn dirichlet_unchecked(g: &WeightedGraph, u: &[f64], p: f64) -> f64 {
    g.edges()
        .iter()
        .map(|e| {
            let d = (u[e.j] - u[e.i]).abs();
            e.omega * if p == 2.0 { d * d } else { d.powf(p) }
        })
        .sum()
}

/// `sum_{i~j} omega_ij |u_j - u_i|^p`.
pub fn dirichlet_energy(g: &WeightedGraph, u: &[f64], p: f64) -> Result<f64> {
    check_len(g, u, "vertex function")?;
    check_exponent("p", p, 1.0, true)?;
    Ok(dirichlet_unchecked(g, u, p))
}

pub(crate) fn p_laplacian_into(g: &WeightedGraph, u: &[f64], p: f64, out: &mut [f64]) {
    let e = p - 1.0;
    for (i, slot) in out.iter_mut().enumerate() {
        let ui = u[i];
        let mut acc = 0.0;
        for nb in g.neighbors(i) {
            acc += nb.omega * signed_pow(u[nb.vertex] - ui, e);
        }
        *slot = acc / g.mu()[i];
    }
}

/// `(Δ_p u)_i = (1/mu_i) sum_{j~i} omega_ij |u_j - u_i|^(p-2) (u_j - u_i)`.
pub fn p_laplacian(g: &WeightedGraph, u: &[f64], p: f64) -> Result<VertexFunction> {
    check_len(g, u, "vertex function")?;
    check_exponent("p", p, 1.0, true)?;
    let mut out = vec![0.0; g.n()];
    p_laplacian_into(g, u, p, &mut out);
    Ok(VertexFunction::from_vec_unchecked(out))
}

pub(crate) fn abs_pow_integral(g: &WeightedGraph, u: &[f64], q: f64) -> f64 {
    g.mu()
        .iter()
        .zip(u)
        .map(|(m, x)| m * if q == 2.0 { x * x } else { x.abs().powf(q) })
        .sum()
}

/// `(sum_i mu_i |u_i|^q)^(1/q)`.
pub fn p_norm(g: &WeightedGraph, u: &[f64], q: f64) -> Result<f64> {
    check_len(g, u, "vertex function")?;
    check_exponent("q", q, 1.0, false)?;
    Ok(abs_pow_integral(g, u, q).powf(1.0 / q))
}

/// `(dirichlet + sum_i mu_i |u_i|^p)^(1/p)`.
pub fn sobolev_norm(g: &WeightedGraph, u: &[f64], p: f64) -> Result<f64> {
    Ok(sobolev_norm_pow(g, u, p)?.powf(1.0 / p))
}

/// `||u||_{W^{1,p}}^p`, the un-rooted form used by the boundedness check.
pub fn sobolev_norm_pow(g: &WeightedGraph, u: &[f64], p: f64) -> Result<f64> {
    check_len(g, u, "vertex function")?;
    check_exponent("p", p, 1.0, true)?;
    Ok(dirichlet_unchecked(g, u, p) + abs_pow_integral(g, u, p))
}

/// Both sides of Green's identity: `(sum_i mu_i u_i (Δ_p u)_i, -dirichlet)`.
pub fn green_pairing(g: &WeightedGraph, u: &[f64], p: f64) -> Result<(f64, f64)> {
    let lap = p_laplacian(g, u, p)?;
    let lhs = g.mu().iter().zip(u).zip(lap.iter()).map(|((m, x), l)| m * x * l).sum();
    let rhs = -dirichlet_unchecked(g, u, p);
    Ok((lhs, rhs))
}
