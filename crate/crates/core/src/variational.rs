//! The constrained energy functional
//!
//! ```text
//! I(φ) = (∫_E |∇φ|^p dω − ∫_V h φ^p dμ) · (∫_V f φ^α dμ)^(−p/α)
//! ```
//!
//! together with the multiplier `λ_φ`, the gradient of `I`, the equation
//! residual, and the a priori bounds used to show `I` is bounded below.

use crate::error::{Error, Result};
use crate::graph::{ProblemInstance, VertexFunction, WeightedGraph};
use crate::operators::{abs_pow_integral, check_len, dirichlet_unchecked, p_laplacian_into};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `∫_E |∇φ|^p dω`
    pub dirichlet: f64,
    /// `∫_V h φ^p dμ`
    pub h_term: f64,
    /// `∫_V f φ^α dμ`
    pub constraint: f64,
    /// `I(φ)`
    pub energy: f64,
    /// `λ_φ = −(dirichlet − h_term) / constraint`
    pub lambda: f64,
}

/// `x^e` for `x >= 0`, with the integer cases 1 and 2 done exactly.
#[inline]
pub(crate) fn pow_nonneg(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else {
        x.powf(e)
    }
}

fn check_nonnegative(inst: &ProblemInstance, phi: &[f64]) -> Result<()> {
    check_len(inst.graph(), phi, "phi")?;
    if let Some(k) = phi.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("phi[{k}] = {} is negative or not finite", phi[k])));
    }
    if phi.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("phi is identically zero".into()));
    }
    Ok(())
}

fn check_positive(inst: &ProblemInstance, phi: &[f64]) -> Result<()> {
    check_len(inst.graph(), phi, "phi")?;
    if let Some(k) = phi.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("phi[{k}] = {} is not strictly positive", phi[k])));
    }
    Ok(())
}

pub(crate) fn breakdown_unchecked(inst: &ProblemInstance, phi: &[f64]) -> EnergyBreakdown {
    let g = inst.graph();
    let (p, alpha) = (inst.p(), inst.alpha());
    let dirichlet = dirichlet_unchecked(g, phi, p);
    let mut h_term = 0.0;
    let mut constraint = 0.0;
    for i in 0..g.n() {
        let m = g.mu()[i];
        h_term += m * inst.h()[i] * pow_nonneg(phi[i], p);
        constraint += m * inst.f()[i] * pow_nonneg(phi[i], alpha);
    }
    let numerator = dirichlet - h_term;
    EnergyBreakdown {
        dirichlet,
        h_term,
        constraint,
        energy: numerator * constraint.powf(-p / alpha),
        lambda: -numerator / constraint,
    }
}

/// Evaluates `I(φ)` and its constituent integrals. Requires `φ >= 0`, `φ ≢ 0`.
pub fn energy(inst: &ProblemInstance, phi: &[f64]) -> Result<EnergyBreakdown> {
    check_nonnegative(inst, phi)?;
    Ok(breakdown_unchecked(inst, phi))
}

pub fn lambda_of(inst: &ProblemInstance, phi: &[f64]) -> Result<f64> {
    Ok(energy(inst, phi)?.lambda)
}

/// Whether `φ_i = 0` is allowed in the gradient: every power evaluated at a
/// vertex value has exponent >= 1 there.
fn zeros_allowed(inst: &ProblemInstance) -> bool {
    inst.p() >= 2.0 && inst.alpha() >= 2.0
}

/// Residual `Δ_pφ + hφ^(p−1) − λ f φ^(α−1)` written into `out`, given the
/// p-Laplacian of `φ`.
pub(crate) fn residual_from_laplacian(inst: &ProblemInstance, phi: &[f64], lap: &[f64], lambda: f64, out: &mut [f64]) {
    let (pm1, am1) = (inst.p() - 1.0, inst.alpha() - 1.0);
    for i in 0..phi.len() {
        out[i] = lap[i] + inst.h()[i] * pow_nonneg(phi[i], pm1) - lambda * inst.f()[i] * pow_nonneg(phi[i], am1);
    }
}

/// `‖λ f φ^(α−1)‖_∞`, the scale against which residuals are judged.
pub fn residual_scale(inst: &ProblemInstance, phi: &[f64], lambda: f64) -> f64 {
    let am1 = inst.alpha() - 1.0;
    phi.iter()
        .zip(inst.f().iter())
        .fold(0.0, |m, (&x, &fi)| m.max((lambda * fi * pow_nonneg(x, am1)).abs()))
}

/// `∂I/∂φ_i = −p μ_i (Δ_pφ_i + h_i φ_i^(p−1) − λ_φ f_i φ_i^(α−1)) (∫ f φ^α dμ)^(−p/α)`.
pub fn energy_gradient(inst: &ProblemInstance, phi: &[f64]) -> Result<VertexFunction> {
    if zeros_allowed(inst) {
        check_nonnegative(inst, phi)?;
    } else {
        check_positive(inst, phi)?;
    }
    let b = breakdown_unchecked(inst, phi);
    let mut grad = vec![0.0; phi.len()];
    gradient_into(inst, phi, &b, &mut grad, None);
    Ok(VertexFunction::from_vec_unchecked(grad))
}

/// Writes the gradient into `grad`; if `residual` is given, also the
/// residual at `λ_φ`.
pub(crate) fn gradient_into(
    inst: &ProblemInstance,
    phi: &[f64],
    b: &EnergyBreakdown,
    grad: &mut [f64],
    residual: Option<&mut [f64]>,
) {
    let g = inst.graph();
    let mut lap = vec![0.0; phi.len()];
    p_laplacian_into(g, phi, inst.p(), &mut lap);
    let mut r = vec![0.0; phi.len()];
    residual_from_laplacian(inst, phi, &lap, b.lambda, &mut r);
    let factor = -inst.p() * b.constraint.powf(-inst.p() / inst.alpha());
    for i in 0..phi.len() {
        grad[i] = factor * g.mu()[i] * r[i];
    }
    if let Some(out) = residual {
        out.copy_from_slice(&r);
    }
}

/// Defect of the equation `Δ_pφ + hφ^(p−1) = λ f φ^(α−1)` at each vertex.
pub fn residual(inst: &ProblemInstance, phi: &[f64], lambda: f64) -> Result<VertexFunction> {
    check_positive(inst, phi)?;
    let mut lap = vec![0.0; phi.len()];
    p_laplacian_into(inst.graph(), phi, inst.p(), &mut lap);
    let mut r = vec![0.0; phi.len()];
    residual_from_laplacian(inst, phi, &lap, lambda, &mut r);
    Ok(VertexFunction::from_vec_unchecked(r))
}

/// Lower bound on `I` over all admissible `φ`:
///
/// `C = ((−h)_m ∧ 0) · f_m^(−p/α) · Vol(G)^(1−p/α)`
///
/// where `(−h)_m = min_i(−h_i)` and `f_m = min_i f_i`. The factor uses the
/// minimum of `f`: when the numerator of `I` is negative, bounding `I` from
/// below needs an upper bound on `(∫ f φ^α dμ)^(−p/α)`, which `f_m` supplies.
pub fn lower_bound(inst: &ProblemInstance) -> f64 {
    let neg_h_min = inst.h().iter().map(|h| -h).fold(f64::INFINITY, f64::min);
    let coef = neg_h_min.min(0.0);
    if coef == 0.0 {
        return 0.0;
    }
    let ratio = inst.p() / inst.alpha();
    coef * inst.f().min().powf(-ratio) * inst.graph().volume().powf(1.0 - ratio)
}

/// Hölder step: `(‖φ‖_p^p, ‖φ‖_α^p · Vol(G)^(1−p/α))`, with `lhs <= rhs`
/// whenever `α >= p >= 1`.
pub fn holder_check(g: &WeightedGraph, phi: &[f64], p: f64, alpha: f64) -> Result<(f64, f64)> {
    check_len(g, phi, "phi")?;
    if !(p >= 1.0 && alpha >= p) {
        return Err(Error::param("alpha", format!("need alpha >= p >= 1, got p = {p}, alpha = {alpha}")));
    }
    if phi.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("phi is identically zero".into()));
    }
    let lhs = abs_pow_integral(g, phi, p);
    let ratio = p / alpha;
    let rhs = abs_pow_integral(g, phi, alpha).powf(ratio) * g.volume().powf(1.0 - ratio);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2(h: [f64; 2], f: [f64; 2], p: f64, alpha: f64) -> ProblemInstance {
        let g = WeightedGraph::new(vec![1.0, 1.0], [(0, 1, 1.0)]).unwrap();
        ProblemInstance::new(
            g,
            VertexFunction::new(h.to_vec()).unwrap(),
            VertexFunction::new(f.to_vec()).unwrap(),
            p,
            alpha,
        )
        .unwrap()
    }

    #[test]
    fn energy_k2_constant() {
        let b = energy(&k2([1.0, 1.0], [1.0, 1.0], 2.0, 4.0), &[1.0, 1.0]).unwrap();
        assert_eq!(b.dirichlet, 0.0);
        assert_eq!(b.h_term, 2.0);
        assert_eq!(b.constraint, 2.0);
        assert!((b.energy + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn energy_k2_nonconstant() {
        let inst = k2([0.0, 0.0], [1.0, 1.0], 2.0, 2.0);
        let b = energy(&inst, &[1.0, 2.0]).unwrap();
        assert_eq!(b.dirichlet, 1.0);
        assert_eq!(b.constraint, 5.0);
        assert!((b.energy - 0.2).abs() < 1e-15);
        assert!((b.lambda + 0.2).abs() < 1e-15);
        assert!((lambda_of(&inst, &[1.0, 2.0]).unwrap() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn energy_domain_errors() {
        let inst = k2([0.0, 0.0], [1.0, 1.0], 2.0, 2.0);
        assert!(matches!(energy(&inst, &[-1.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(energy(&inst, &[0.0, 0.0]), Err(Error::Domain(_))));
        assert!(energy(&inst, &[1.0, 0.0]).is_ok());
    }

    #[test]
    fn lambda_examples() {
        let inst = k2([0.0, 0.0], [1.0, 2.0], 2.0, 4.0);
        assert_eq!(lambda_of(&inst, &[3.0, 3.0]).unwrap(), 0.0);
        let inst = k2([0.7, -0.3], [1.0, 2.0], 2.0, 4.0);
        let phi = [0.8, 1.9];
        let l1 = lambda_of(&inst, &phi).unwrap();
        let l2 = lambda_of(&inst, &[1.6, 3.8]).unwrap();
        assert!((l2 - 0.25 * l1).abs() <= 1e-14 * l1.abs());
    }

    #[test]
    fn gradient_zero_at_constant_with_zero_h() {
        let inst = k2([0.0, 0.0], [1.0, 1.0], 3.0, 4.0);
        let g = energy_gradient(&inst, &[2.0, 2.0]).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_domain() {
        let frac = k2([0.0, 0.0], [1.0, 1.0], 1.5, 2.0);
        assert!(energy_gradient(&frac, &[0.0, 1.0]).is_err());
        let smooth = k2([0.0, 0.0], [1.0, 1.0], 2.0, 3.0);
        assert!(energy_gradient(&smooth, &[0.0, 1.0]).is_ok());
        assert!(energy_gradient(&smooth, &[-0.1, 1.0]).is_err());
    }

    #[test]
    fn gradient_euler_identity() {
        let inst = k2([0.4, -1.2], [0.7, 1.3], 3.0, 4.5);
        let phi = [0.6, 1.7];
        let g = energy_gradient(&inst, &phi).unwrap();
        let dot: f64 = g.iter().zip(&phi).map(|(a, b)| a * b).sum();
        let scale: f64 = g.iter().zip(&phi).map(|(a, b)| (a * b).abs()).sum();
        assert!(dot.abs() <= 1e-12 * scale);
    }

    #[test]
    fn residual_examples() {
        // h = 2f, φ ≡ 1, λ = 2
        let inst = k2([2.0, 3.0], [1.0, 1.5], 2.5, 3.5);
        let r = residual(&inst, &[1.0, 1.0], 2.0).unwrap();
        assert!(r.iter().all(|&x| x == 0.0));

        // Quadratic-formula solution of the 2x2 generalized eigenproblem.
        let inst = k2([1.0, 0.0], [1.0, 1.0], 2.0, 2.0);
        let gold = (5f64.sqrt() - 1.0) / 2.0;
        let r = residual(&inst, &[1.0, gold], gold).unwrap();
        assert!(r.max_abs() <= 1e-12);
        // p = α so λ is scale invariant
        let r = residual(&inst, &[3.0, 3.0 * gold], gold).unwrap();
        assert!(r.max_abs() <= 1e-12);

        assert!(residual(&inst, &[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let inst = k2([-1.0, -1.0], [1.0, 2.0], 2.0, 3.0);
        assert_eq!(lower_bound(&inst), 0.0);
        let inst = k2([1.0, 1.0], [1.0, 1.0], 2.0, 4.0);
        assert!((lower_bound(&inst) + 2f64.sqrt()).abs() < 1e-15);
        let b = energy(&inst, &[1.0, 1.0]).unwrap();
        assert!((b.energy - lower_bound(&inst)).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_scales_with_measure() {
        let c = 3.0;
        let (p, alpha) = (2.0, 5.0);
        let mk = |s: f64| {
            let g = WeightedGraph::new(vec![s, 2.0 * s, 0.5 * s], [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
            ProblemInstance::new(
                g,
                VertexFunction::new(vec![0.5, -1.0, 2.0]).unwrap(),
                VertexFunction::new(vec![1.0, 0.8, 1.5]).unwrap(),
                p,
                alpha,
            )
            .unwrap()
        };
        let ratio = lower_bound(&mk(c)) / lower_bound(&mk(1.0));
        assert!((ratio - c.powf(1.0 - p / alpha)).abs() < 1e-12);
    }

    /// The same bound normalized by max f instead of min f fails once h has a
    /// positive value and f is not constant.
    #[test]
    fn max_f_normalization_is_not_a_bound() {
        let inst = k2([1.0, 1.0], [1.0, 10.0], 2.0, 2.0);
        let with_max_f = -1.0 * 10f64.powf(-1.0) * 2f64.powf(0.0);
        let phi = [1.0, 10f64.powf(-0.5)];
        let e = energy(&inst, &phi).unwrap().energy;
        assert!((e + 10f64.powf(-0.5)).abs() < 1e-12);
        assert!(e < with_max_f);
        assert!(e >= lower_bound(&inst));
    }

    #[test]
    fn holder_examples() {
        let g = WeightedGraph::new(vec![1.0, 2.0, 0.5], [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let (l, r) = holder_check(&g, &[2.0; 3], 2.0, 5.0).unwrap();
        assert!((l - r).abs() <= 1e-12 * r);
        let (l, r) = holder_check(&g, &[0.3, 1.2, 2.0], 3.0, 3.0).unwrap();
        assert_eq!(l, r);
        let (l, r) = holder_check(&g, &[0.3, 1.2, 2.0], 2.0, 5.0).unwrap();
        assert!(l < r);
        assert!(holder_check(&g, &[0.0; 3], 2.0, 3.0).is_err());
    }
}
