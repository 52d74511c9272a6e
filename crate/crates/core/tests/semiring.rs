mod common;

use common::*;
use phylokit::semiring::{
    best_path, evaluate_chain, ChainSpec, LatticePolygon, MaxPlus, Point, PolygonSemiring, Probability, Semiring,
    WitnessPolygon,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_chain(rng: &mut ChaCha8Rng, k: usize, n: usize) -> (Vec<f64>, Vec<Vec<Vec<f64>>>) {
    let initial = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
    let steps = (1..n)
        .map(|_| (0..k).map(|_| (0..k).map(|_| rng.gen_range(0.01..1.0)).collect()).collect())
        .collect();
    (initial, steps)
}

fn path_weight(initial: &[f64], steps: &[Vec<Vec<f64>>], path: &[usize]) -> f64 {
    let mut w = initial[path[0]];
    for (t, step) in steps.iter().enumerate() {
        w *= step[path[t]][path[t + 1]];
    }
    w
}

fn log_chain(initial: &[f64], steps: &[Vec<Vec<f64>>]) -> ChainSpec<f64> {
    ChainSpec::new(
        initial.iter().map(|x| x.ln()).collect(),
        steps
            .iter()
            .map(|s| s.iter().map(|r| r.iter().map(|x| x.ln()).collect()).collect())
            .collect(),
    )
    .unwrap()
}

#[test]
fn one_position_chain_sums_initial_weights() {
    let spec = ChainSpec::new(vec![0.2, 0.8], vec![]).unwrap();
    assert!((evaluate_chain(&Probability, &spec) - 1.0).abs() < 1e-15);
}

#[test]
fn mismatched_step_is_rejected() {
    assert!(ChainSpec::new(vec![1.0, 1.0], vec![vec![vec![1.0, 1.0]]]).is_err());
    assert!(ChainSpec::new(vec![1.0, 1.0], vec![vec![vec![1.0], vec![1.0]]]).is_err());
    assert!(ChainSpec::<f64>::new(vec![], vec![]).is_err());
}

#[test]
fn total_tie_picks_smallest_path() {
    let spec = ChainSpec::new(vec![0.0; 3], vec![vec![vec![-1.0; 3]; 3]; 4]).unwrap();
    let best = best_path(&spec).unwrap();
    assert_eq!(best.path, vec![0; 5]);
    assert_eq!(best.score, -4.0);
}

#[test]
fn infeasible_chain_has_no_best_path() {
    let ninf = f64::NEG_INFINITY;
    let spec = ChainSpec::new(vec![0.0, ninf], vec![vec![vec![ninf, ninf], vec![0.0, 0.0]]]).unwrap();
    assert!(best_path(&spec).is_none());
}

#[test]
fn two_state_five_step_chain_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (initial, steps) = random_chain(&mut rng, 2, 6);
        let spec = ChainSpec::new(initial.clone(), steps.clone()).unwrap();
        let paths = all_paths(2, 6);
        let expected = neumaier_sum(paths.iter().map(|p| path_weight(&initial, &steps, p)));
        assert!(rel_close(evaluate_chain(&Probability, &spec), expected, 1e-12));
    }
}

#[test]
fn max_plus_matches_enumeration_on_log_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 1..=3 {
        for n in 1..=8 {
            let (initial, steps) = random_chain(&mut rng, k, n);
            let spec = log_chain(&initial, &steps);
            let paths = all_paths(k, n);
            let logs: Vec<f64> = paths.iter().map(|p| path_weight(&initial, &steps, p).ln()).collect();
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let value = evaluate_chain(&MaxPlus, &spec);
            assert!(rel_close(value, max, 1e-12), "k={k} n={n}: {value} vs {max}");
            let best = best_path(&spec).unwrap();
            let first = logs.iter().position(|&v| rel_close(v, max, 1e-12)).unwrap();
            assert_eq!(best.path, paths[first]);
        }
    }
}

fn hull_of_all_sums(a: &LatticePolygon, b: &LatticePolygon) -> Vec<Point> {
    let sums: Vec<Point> = a
        .vertices()
        .iter()
        .flat_map(|p| b.vertices().iter().map(move |q| (p.0 + q.0, p.1 + q.1)))
        .collect();
    gift_wrap(&sums)
}

fn points() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-6i64..7, -6i64..7), 1..8)
}

proptest! {
    #[test]
    fn polygon_sum_is_hull_of_union(a in points(), b in points()) {
        let (pa, pb) = (LatticePolygon::hull_of(&a), LatticePolygon::hull_of(&b));
        prop_assert_eq!(pa.vertices().to_vec(), gift_wrap(&a));
        let mut both = a.clone();
        both.extend(&b);
        prop_assert_eq!(pa.sum(&pb).vertices().to_vec(), gift_wrap(&both));
        prop_assert_eq!(pa.sum(&pb), pb.sum(&pa));
        prop_assert_eq!(pa.sum(&pa), pa.clone());
    }

    #[test]
    fn polygon_product_is_hull_of_pairwise_sums(a in points(), b in points()) {
        let (pa, pb) = (LatticePolygon::hull_of(&a), LatticePolygon::hull_of(&b));
        prop_assert_eq!(pa.product(&pb).vertices().to_vec(), hull_of_all_sums(&pa, &pb));
        prop_assert_eq!(pa.product(&pb), pb.product(&pa));
    }

    #[test]
    fn polygon_semiring_laws(a in points(), b in points(), c in points()) {
        let s = PolygonSemiring;
        let (a, b, c) = (LatticePolygon::hull_of(&a), LatticePolygon::hull_of(&b), LatticePolygon::hull_of(&c));
        prop_assert_eq!(s.add(&s.add(&a, &b), &c), s.add(&a, &s.add(&b, &c)));
        prop_assert_eq!(s.mul(&s.mul(&a, &b), &c), s.mul(&a, &s.mul(&b, &c)));
        prop_assert_eq!(s.mul(&a, &s.add(&b, &c)), s.add(&s.mul(&a, &b), &s.mul(&a, &c)));
        prop_assert_eq!(s.add(&a, &s.zero()), a.clone());
        prop_assert_eq!(s.mul(&a, &s.one()), a.clone());
        prop_assert_eq!(s.mul(&a, &s.zero()), s.zero());
    }

    #[test]
    fn probability_semiring_laws(a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.0f64..10.0) {
        let s = Probability;
        prop_assert!(rel_close(s.mul(&a, &s.add(&b, &c)), s.add(&s.mul(&a, &b), &s.mul(&a, &c)), 1e-12));
        prop_assert_eq!(s.add(&a, &s.zero()), a);
        prop_assert_eq!(s.mul(&a, &s.one()), a);
    }

    #[test]
    fn max_plus_semiring_laws(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
        let s = MaxPlus;
        prop_assert!((s.mul(&a, &s.add(&b, &c)) - s.add(&s.mul(&a, &b), &s.mul(&a, &c))).abs() < 1e-12);
        prop_assert_eq!(s.add(&s.add(&a, &b), &c), s.add(&a, &s.add(&b, &c)));
        prop_assert_eq!(s.add(&a, &s.zero()), a);
        prop_assert_eq!(s.mul(&a, &s.one()), a);
        prop_assert_eq!(s.mul(&a, &s.zero()), f64::NEG_INFINITY);
    }
}

#[test]
fn witness_product_keeps_smallest_witness_per_vertex() {
    let step = WitnessPolygon::point((1, 0), "M").sum(&WitnessPolygon::point((0, 1), "D"));
    let step = step.sum(&WitnessPolygon::point((0, 1), "I"));
    let two = step.product(&step);
    assert_eq!(two.vertices(), &[(0, 2), (2, 0)]);
    assert_eq!(two.witnesses(), &["DD".to_string(), "MM".to_string()]);
}
