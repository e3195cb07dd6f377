//! Graph generators. Each family implements [`GraphFamily`] and is looked up
//! by name in a [`FamilyRegistry`], so the CLI can select one at runtime.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// How edge weights and vertex measures are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightPolicy {
    Unit,
    /// Uniform on the open interval `(a, b)`, `0 < a < b`.
    Uniform { a: f64, b: f64 },
}

impl WeightPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightPolicy::Unit => Ok(()),
            WeightPolicy::Uniform { a, b } => {
                if a.is_finite() && b.is_finite() && 0.0 < a && a < b {
                    Ok(())
                } else {
                    Err(Error::param("weights", format!("uniform bounds need 0 < a < b, got ({a}, {b})")))
                }
            }
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            WeightPolicy::Unit => 1.0,
            WeightPolicy::Uniform { a, b } => loop {
                let w = rng.gen_range(a..b);
                if w > a {
                    break w;
                }
            },
        }
    }
}

impl FromStr for WeightPolicy {
    type Err = Error;

    /// `unit` or `uniform:a,b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "unit" {
            return Ok(WeightPolicy::Unit);
        }
        let bad = || Error::Parse(format!("weight policy `{s}`: expected `unit` or `uniform:a,b`"));
        let rest = s.strip_prefix("uniform:").ok_or_else(bad)?;
        let (a, b) = rest.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let policy = WeightPolicy::Uniform { a, b };
        policy.validate()?;
        Ok(policy)
    }
}

impl fmt::Display for WeightPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightPolicy::Unit => write!(f, "unit"),
            WeightPolicy::Uniform { a, b } => write!(f, "uniform:{a},{b}"),
        }
    }
}

/// A family of connected graphs parameterized by vertex count.
pub trait GraphFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn min_vertices(&self) -> usize {
        1
    }

    /// Unweighted edge list on `n` vertices. Must be connected.
    fn edges(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)>;
}

pub struct Path;
pub struct Cycle;
pub struct Complete;
pub struct Star;

/// Random recursive tree plus independent extra edges.
pub struct RandomConnected {
    pub extra_edge_prob: f64,
}

impl GraphFamily for Path {
    fn name(&self) -> &'static str {
        "path"
    }

    fn edges(&self, n: usize, _rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        (1..n).map(|j| (j - 1, j)).collect()
    }
}

impl GraphFamily for Cycle {
    fn name(&self) -> &'static str {
        "cycle"
    }

    fn min_vertices(&self) -> usize {
        3
    }

    fn edges(&self, n: usize, _rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = (1..n).map(|j| (j - 1, j)).collect();
        e.push((0, n - 1));
        e
    }
}

impl GraphFamily for Complete {
    fn name(&self) -> &'static str {
        "complete"
    }

    fn edges(&self, n: usize, _rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }
}

impl GraphFamily for Star {
    fn name(&self) -> &'static str {
        "star"
    }

    fn edges(&self, n: usize, _rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        (1..n).map(|j| (0, j)).collect()
    }
}

impl GraphFamily for RandomConnected {
    fn name(&self) -> &'static str {
        "random_connected"
    }

    fn edges(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        let mut tree = vec![false; n * n];
        let mut out = Vec::new();
        for j in 1..n {
            let i = rng.gen_range(0..j);
            tree[i * n + j] = true;
            out.push((i, j));
        }
        for i in 0..n {
            for j in i + 1..n {
                if !tree[i * n + j] && rng.gen_bool(self.extra_edge_prob) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Name-indexed collection of graph families.
pub struct FamilyRegistry {
    families: Vec<Box<dyn GraphFamily>>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Path));
        reg.register(Box::new(Cycle));
        reg.register(Box::new(Complete));
        reg.register(Box::new(Star));
        reg.register(Box::new(RandomConnected { extra_edge_prob: 0.2 }));
        reg
    }
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        Self { families: Vec::new() }
    }

    /// Adds a family, replacing any existing one with the same name.
    pub fn register(&mut self, family: Box<dyn GraphFamily>) {
        self.families.retain(|f| f.name() != family.name());
        self.families.push(family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn GraphFamily> {
        self.families
            .iter()
            .find(|f| f.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown { kind: "graph family", name: name.to_string() })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.iter().map(|f| f.name()).collect()
    }

    /// Generates a weighted graph. Edge weights are drawn first (in sorted
    /// edge order), then vertex measures, all from one stream seeded by `seed`.
    pub fn generate(&self, family: &str, n: usize, seed: u64, weights: WeightPolicy) -> Result<WeightedGraph> {
        let fam = self.get(family)?;
        weights.validate()?;
        if n < fam.min_vertices() {
            return Err(Error::param(
                "n",
                format!("family `{}` needs n >= {}, got {n}", fam.name(), fam.min_vertices()),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = fam.edges(n, &mut rng);
        pairs.sort_unstable();
        let edges: Vec<_> = pairs.into_iter().map(|(i, j)| (i, j, weights.draw(&mut rng))).collect();
        let mu: Vec<f64> = (0..n).map(|_| weights.draw(&mut rng)).collect();
        WeightedGraph::new(mu, edges)
    }
}

/// Shorthand for [`FamilyRegistry::default`]`.generate(..)`.
pub fn generate(family: &str, n: usize, seed: u64, weights: WeightPolicy) -> Result<WeightedGraph> {
    FamilyRegistry::default().generate(family, n, seed, weights)
}
