mod common;

use common::*;
use dmpest_core::lt::{lt_estimate, LtParameters, DEFAULT_DEGREE_CAP};
use dmpest_core::mc::{delta_p, ic_mc_marginals, lt_mc_marginals};
use dmpest_core::oracle::{exact_marginals, lt_exact_marginals, OracleOptions};
use dmpest_core::{DirectedGraph, Horizon, InitialCondition};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lt_trees_are_exact(seed in any::<u64>(), n in 2usize..9, t in 0u32..6) {
        let mut r = rng(seed);
        let (g, params) = random_lt_tree(&mut r, n, 5);
        let p0 = uniform_p0(&mut r, n);
        let dmp = lt_estimate(&g, &params, &p0, t, DEFAULT_DEGREE_CAP).unwrap();
        let exact = lt_exact_marginals(&g, &params, &p0, Horizon::Finite(t)).unwrap();
        prop_assert!(max_abs_diff(&dmp.marginals, &exact.marginals) <= 1e-10);
    }

    #[test]
    fn mc_is_reproducible(seed in any::<u64>(), runs in 1u64..200) {
        let mut r = rng(seed);
        let g = random_loopy(&mut r, 8);
        let p0 = mixed_p0(&mut r, g.node_count());
        let a = ic_mc_marginals(&g, &p0, Horizon::Finite(3), runs, seed).unwrap();
        let b = ic_mc_marginals(&g, &p0, Horizon::Finite(3), runs, seed).unwrap();
        prop_assert_eq!(&a, &b);
        for (p, se) in a.marginals.iter().zip(&a.std_errors) {
            prop_assert!((0.0..=1.0).contains(p));
            prop_assert!(*se <= 0.5 / (runs as f64).sqrt() + 1e-15);
        }
    }
}

fn within(mc: &[f64], exact: &[f64], runs: u64, k: f64) -> usize {
    mc.iter()
        .zip(exact)
        .filter(|(m, e)| {
            let se = (*e * (1.0 - *e) / runs as f64).sqrt();
            (*m - *e).abs() <= k * se + 1e-12
        })
        .count()
}

#[test]
fn ic_mc_agrees_with_oracle() {
    let runs = 40_000;
    let mut total = 0;
    let mut ok = 0;
    for case in 0..6 {
        let mut r = rng(100 + case);
        let g = random_loopy(&mut r, 8);
        let p0 = mixed_p0(&mut r, g.node_count());
        for h in [Horizon::Finite(2), Horizon::Infinite] {
            let exact = exact_marginals(&g, &p0, h, &OracleOptions::default()).unwrap();
            let mc = ic_mc_marginals(&g, &p0, h, runs, case).unwrap();
            total += g.node_count();
            ok += within(&mc.marginals, &exact.marginals, runs, 4.0);
        }
    }
    assert!(ok as f64 >= 0.99 * total as f64, "{ok}/{total}");
}

#[test]
fn lt_mc_agrees_with_oracle() {
    let runs = 40_000;
    let mut total = 0;
    let mut ok = 0;
    for case in 0..6 {
        let mut r = rng(200 + case);
        let (g, params) = random_lt_tree(&mut r, 7, 5);
        let p0 = uniform_p0(&mut r, 7);
        let exact = lt_exact_marginals(&g, &params, &p0, Horizon::Finite(3)).unwrap();
        let mc = lt_mc_marginals(&g, &params, &p0, Horizon::Finite(3), runs, case).unwrap();
        total += 7;
        ok += within(&mc.marginals, &exact.marginals, runs, 4.0);
    }
    assert!(ok as f64 >= 0.99 * total as f64, "{ok}/{total}");
}

#[test]
fn lt_deterministic_when_eta_is_one() {
    let g = DirectedGraph::undirected(4, [(0, 1, 0.5), (1, 2, 0.4), (2, 3, 0.4)]).unwrap();
    let params = LtParameters::uniform(&g, 0.3, 1.0).unwrap();
    let p0 = InitialCondition::from_seeds(4, &[0]).unwrap();
    let a = lt_mc_marginals(&g, &params, &p0, Horizon::Infinite, 50, 1).unwrap();
    let b = lt_mc_marginals(&g, &params, &p0, Horizon::Infinite, 50, 2).unwrap();
    assert_eq!(a.marginals, b.marginals);
    assert_eq!(a.marginals, vec![1.0, 1.0, 1.0, 1.0]);
}

#[test]
fn zero_probabilities_give_zero_delta() {
    let g = DirectedGraph::undirected(5, (0..4).map(|k| (k, k + 1, 0.0))).unwrap();
    let p0 = InitialCondition::from_seeds(5, &[0, 3]).unwrap();
    let mc = ic_mc_marginals(&g, &p0, Horizon::Finite(10), 100, 0).unwrap();
    let dmp = dmpest_core::dmp::dmp_est(&g, &p0, 10);
    assert_eq!(delta_p(&dmp.marginals, &mc.marginals).unwrap(), 0.0);
}
