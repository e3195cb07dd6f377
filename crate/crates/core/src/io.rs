//! JSON instance and solution files.
//!
//! Instance: `{"p", "alpha", "mu", "h", "f", "edges": [[i, j, omega], ...]}`,
//! keys written in that order with edges sorted by `(i, j)`.
//! Solution: `{"phi": [...], "lambda": x}`; other keys are ignored, so a
//! `solve` record can be fed back to `verify` directly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{ProblemInstance, VertexFunction, WeightedGraph};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    p: f64,
    alpha: f64,
    mu: Vec<f64>,
    h: Vec<f64>,
    f: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub phi: Vec<f64>,
    pub lambda: f64,
}

pub fn instance_from_str(s: &str) -> Result<ProblemInstance> {
    let file: InstanceFile = serde_json::from_str(s)?;
    let graph = WeightedGraph::new(file.mu, file.edges)?;
    ProblemInstance::new(
        graph,
        VertexFunction::new(file.h)?,
        VertexFunction::new(file.f)?,
        file.p,
        file.alpha,
    )
}

pub fn instance_to_string(inst: &ProblemInstance) -> Result<String> {
    let file = InstanceFile {
        p: inst.p(),
        alpha: inst.alpha(),
        mu: inst.graph().mu().to_vec(),
        h: inst.h().to_vec(),
        f: inst.f().to_vec(),
        edges: inst.graph().edges().iter().map(|e| (e.i, e.j, e.omega)).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    instance_from_str(&fs::read_to_string(path)?)
}

pub fn write_instance(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, instance_to_string(inst)?)?;
    Ok(())
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<Solution> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_solution(sol: &Solution, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(sol)? + "\n")?;
    Ok(())
}
