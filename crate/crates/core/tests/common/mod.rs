#![allow(dead_code)]

use pyamabe::generate::{generate, WeightPolicy};
use pyamabe::{ProblemInstance, VertexFunction, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const P_CHOICES: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 4.0];

#[derive(Debug, Clone, Copy)]
pub enum PotentialSign {
    NonPositive,
    Mixed,
    NonNegative,
}

impl PotentialSign {
    pub fn cycle(k: usize) -> Self {
        match k % 3 {
            0 => PotentialSign::NonPositive,
            1 => PotentialSign::Mixed,
            _ => PotentialSign::NonNegative,
        }
    }

    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            PotentialSign::NonPositive => rng.gen_range(-2.0..=0.0),
            PotentialSign::Mixed => rng.gen_range(-2.0..2.0),
            PotentialSign::NonNegative => rng.gen_range(0.0..2.0),
        }
    }
}

/// Random connected graph with uniform(0.5, 2) weights and measures.
pub fn random_graph(n: usize, seed: u64) -> WeightedGraph {
    generate("random_connected", n, seed, WeightPolicy::Uniform { a: 0.5, b: 2.0 }).unwrap()
}

pub fn instance_on(graph: WeightedGraph, sign: PotentialSign, p: f64, alpha: f64, rng: &mut impl Rng) -> ProblemInstance {
    let n = graph.n();
    let mut h: Vec<f64> = (0..n).map(|_| sign.draw(rng)).collect();
    if let PotentialSign::Mixed = sign {
        // force both signs
        if n >= 2 {
            h[0] = h[0].abs().max(0.1);
            h[n - 1] = -h[n - 1].abs().max(0.1);
        }
    }
    let f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    ProblemInstance::new(graph, VertexFunction::new(h).unwrap(), VertexFunction::new(f).unwrap(), p, alpha).unwrap()
}

/// Instance `k` of the existence family: n in 2..=20, p from the fixed list,
/// alpha in [p, p + 3] (exactly p for every fifth instance), h cycling
/// through non-positive, mixed-sign and non-negative draws.
pub fn existence_instance(k: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000 + k as u64);
    let n = rng.gen_range(2..=20);
    let p = P_CHOICES[k % P_CHOICES.len()];
    let alpha = if k % 5 == 4 { p } else { p + rng.gen_range(0.0..=3.0) };
    let graph = random_graph(n, rng.gen());
    instance_on(graph, PotentialSign::cycle(k / 5), p, alpha, &mut rng)
}

pub fn linear_instance(k: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(5_000 + k as u64);
    let n = rng.gen_range(2..=12);
    let graph = random_graph(n, rng.gen());
    instance_on(graph, PotentialSign::cycle(k), 2.0, 2.0, &mut rng)
}

pub fn two_vertex_instance(k: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(9_000 + k as u64);
    let p = [1.5, 2.0, 3.0][k % 3];
    let alpha = p + [0.0, 1.0, 2.5][(k / 3) % 3];
    let graph = WeightedGraph::new(
        vec![rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)],
        [(0, 1, rng.gen_range(0.5..2.0))],
    )
    .unwrap();
    instance_on(graph, PotentialSign::cycle(k), p, alpha, &mut rng)
}

pub fn k2(h: [f64; 2], f: [f64; 2], p: f64, alpha: f64) -> ProblemInstance {
    let g = WeightedGraph::new(vec![1.0, 1.0], [(0, 1, 1.0)]).unwrap();
    ProblemInstance::new(g, VertexFunction::new(h.to_vec()).unwrap(), VertexFunction::new(f.to_vec()).unwrap(), p, alpha)
        .unwrap()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}
