//! Strictly positive solutions `(φ, λ)` of the p-th Yamabe equation
//!
//! ```text
//! Δ_p φ + h φ^(p−1) = λ f φ^(α−1),    α >= p > 1,  f > 0,
//! ```
//!
//! on finite connected weighted graphs, found by minimizing the scale
//! invariant energy `I(φ)` over `∫ f φ^α dμ = 1`.
//!
//! * [`graph`], [`generate`], [`io`]: graphs, instances and their files.
//! * [`operators`]: integrals, edge gradient, p-Laplacian, norms.
//! * [`variational`]: `I`, `λ_φ`, the gradient, residual and a priori bounds.
//! * [`solver`]: projected gradient descent with Armijo backtracking.
//! * [`oracles`]: grid search, linear eigen-solver and finite differences.
//! * [`cli`]: the `pyamabe` command line.

pub mod cli;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod operators;
pub mod oracles;
pub mod solver;
pub mod variational;

pub use error::{Error, Result};
pub use graph::{ProblemInstance, VertexFunction, WeightedGraph};
pub use solver::{solve, SolveResult, SolverConfig};
