mod common;

use proptest::prelude::*;
use pyamabe::io::{instance_from_str, instance_to_string};
use pyamabe::operators::{dirichlet_energy, green_pairing, p_laplacian};
use pyamabe::oracles::{finite_difference_gradient, relative_error};
use pyamabe::variational::{energy, energy_gradient, lambda_of};
use pyamabe::ProblemInstance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{instance_on, random_graph, PotentialSign};

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + scale)
}

/// Graph size, seed, and a value vector long enough for any size.
fn graph_and_values() -> impl Strategy<Value = (usize, u64, Vec<f64>)> {
    (2usize..12, any::<u64>(), prop::collection::vec(-5.0f64..5.0, 12))
}

fn positive_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..3.0, 12)
}

fn instance(n: usize, seed: u64, p: f64, alpha: f64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    instance_on(random_graph(n, seed), PotentialSign::Mixed, p, alpha, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_has_zero_mass((n, seed, u) in graph_and_values(), p in 1.1f64..5.0) {
        let g = random_graph(n, seed);
        let lap = p_laplacian(&g, &u[..n], p).unwrap();
        let total: f64 = g.mu().iter().zip(lap.iter()).map(|(m, l)| m * l).sum();
        let abs: f64 = g.mu().iter().zip(lap.iter()).map(|(m, l)| (m * l).abs()).sum();
        prop_assert!(total.abs() <= 1e-12 * abs + 1e-300);
    }

    #[test]
    fn green_identity((n, seed, u) in graph_and_values(), p in 1.1f64..5.0) {
        let g = random_graph(n, seed);
        let (lhs, rhs) = green_pairing(&g, &u[..n], p).unwrap();
        prop_assert!(close(lhs, rhs, rhs.abs(), 1e-12));
    }

    #[test]
    fn quadratic_case_is_linear(
        (n, seed, u) in graph_and_values(),
        v in prop::collection::vec(-5.0f64..5.0, 12),
        a in -3.0f64..3.0,
    ) {
        let g = random_graph(n, seed);
        let w: Vec<f64> = (0..n).map(|i| u[i] + a * v[i]).collect();
        let lu = p_laplacian(&g, &u[..n], 2.0).unwrap();
        let lv = p_laplacian(&g, &v[..n], 2.0).unwrap();
        let lw = p_laplacian(&g, &w, 2.0).unwrap();
        for i in 0..n {
            let expect = lu[i] + a * lv[i];
            prop_assert!(close(lw[i], expect, lu[i].abs() + (a * lv[i]).abs(), 1e-12));
        }
    }

    #[test]
    fn laplacian_homogeneity_and_translation(
        (n, seed, u) in graph_and_values(),
        p in 1.1f64..5.0,
        c in -4.0f64..4.0,
        t in -10.0f64..10.0,
    ) {
        let g = random_graph(n, seed);
        let lu = p_laplacian(&g, &u[..n], p).unwrap();
        let scaled: Vec<f64> = u[..n].iter().map(|x| c * x).collect();
        let shifted: Vec<f64> = u[..n].iter().map(|x| x + t).collect();
        let ls = p_laplacian(&g, &scaled, p).unwrap();
        let lt = p_laplacian(&g, &shifted, p).unwrap();
        let factor = c.signum() * c.abs().powf(p - 1.0);
        let scale = lu.max_abs();
        for i in 0..n {
            prop_assert!(close(ls[i], factor * lu[i], factor.abs() * scale, 1e-11));
            prop_assert!(close(lt[i], lu[i], scale, 1e-9));
        }
        let d = dirichlet_energy(&g, &u[..n], p).unwrap();
        let dt = dirichlet_energy(&g, &shifted, p).unwrap();
        prop_assert!(close(d, dt, d, 1e-9));
    }

    #[test]
    fn energy_is_scale_invariant(
        (n, seed, _) in graph_and_values(),
        phi in positive_values(),
        p in 1.1f64..4.0,
        extra in 0.0f64..3.0,
        c in 0.01f64..100.0,
    ) {
        let inst = instance(n, seed, p, p + extra);
        let scaled: Vec<f64> = phi[..n].iter().map(|x| c * x).collect();
        let e = energy(&inst, &phi[..n]).unwrap().energy;
        let es = energy(&inst, &scaled).unwrap().energy;
        prop_assert!(close(e, es, e.abs(), 1e-10));
        let l = lambda_of(&inst, &phi[..n]).unwrap();
        let ls = lambda_of(&inst, &scaled).unwrap();
        let expect = c.powf(p - p - extra) * l;
        prop_assert!(close(ls, expect, expect.abs(), 1e-10));
    }

    #[test]
    fn gradient_is_orthogonal_to_phi(
        (n, seed, _) in graph_and_values(),
        phi in positive_values(),
        p in 1.1f64..4.0,
        extra in 0.0f64..3.0,
    ) {
        let inst = instance(n, seed, p, p + extra);
        let g = energy_gradient(&inst, &phi[..n]).unwrap();
        let dot: f64 = g.iter().zip(&phi[..n]).map(|(a, b)| a * b).sum();
        let mag: f64 = g.iter().zip(&phi[..n]).map(|(a, b)| (a * b).abs()).sum();
        prop_assert!(dot.abs() <= 1e-10 * (mag + 1e-300));
    }

    #[test]
    fn gradient_matches_finite_differences(
        (n, seed, _) in graph_and_values(),
        phi in positive_values(),
        p in 2.0f64..4.0,
        extra in 0.0f64..3.0,
    ) {
        let inst = instance(n, seed, p, p + extra);
        let g = energy_gradient(&inst, &phi[..n]).unwrap();
        let fd = finite_difference_gradient(&inst, &phi[..n], 1e-6).unwrap();
        prop_assert!(relative_error(&g, &fd) <= 1e-5);
    }

    #[test]
    fn instance_file_round_trip(
        (n, seed, _) in graph_and_values(),
        p in 1.1f64..4.0,
        extra in 0.0f64..3.0,
    ) {
        let inst = instance(n, seed, p, p + extra);
        let text = instance_to_string(&inst).unwrap();
        prop_assert_eq!(instance_from_str(&text).unwrap(), inst);
    }

    #[test]
    fn relabeling_preserves_volume_and_dirichlet(
        (n, seed, u) in graph_and_values(),
        p in 1.1f64..4.0,
        shuffle in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let g = random_graph(n, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let r = g.relabel(&perm).unwrap();
        let mut v = vec![0.0; n];
        for k in 0..n {
            v[perm[k]] = u[k];
        }
        prop_assert!(close(g.volume(), r.volume(), g.volume(), 1e-12));
        let d = dirichlet_energy(&g, &u[..n], p).unwrap();
        let dr = dirichlet_energy(&r, &v, p).unwrap();
        prop_assert!(close(d, dr, d, 1e-12));
    }
}
