mod common;

use std::collections::BTreeSet;

use common::*;
use phylokit::formats::{parse_distance_matrix, parse_newick};
use phylokit::tree::{random_binary_tree, PhyloTree};
use phylokit::treespace::{
    check_four_point, check_m_tree, check_metric, generalized_neighbor_join, generalized_nj_cherry, gr36_residuals,
    m_dissimilarity, max_length_difference, neighbor_join, nj_q_table, same_topology, schroder_count,
    splits_compatible, splits_of_tree, tree_metric, DissimilarityMap, MDissimilarityMap, MTreeViolation,
    MetricViolation, Split,
};
use phylokit::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn figure3() -> PhyloTree {
    parse_newick(&read_data("figure3.nwk")).unwrap()
}

/// Pairs of leaves sharing a neighbor in the unrooted tree.
fn cherries(t: &PhyloTree) -> BTreeSet<(String, String)> {
    let u = t.unrooted();
    let adj = u.adjacency();
    let leaves = u.leaves();
    let mut out = BTreeSet::new();
    for &a in &leaves {
        for &b in &leaves {
            let (la, lb) = (u.node(a).label.clone().unwrap(), u.node(b).label.clone().unwrap());
            if la < lb && adj[a][0].0 == adj[b][0].0 {
                out.insert((la, lb));
            }
        }
    }
    out
}

fn star(n: usize) -> PhyloTree {
    let mut t = PhyloTree::with_root(None);
    for l in labels(n) {
        t.add_child(0, Some(l), 1.0);
    }
    t
}

#[test]
fn metric_examples() {
    let zero = DissimilarityMap::from_fn(names(&["a", "b", "c"]), |_, _| 0.0).unwrap();
    assert!(check_metric(&zero).is_metric);
    let bad = DissimilarityMap::new(
        names(&["1", "2", "3"]),
        vec![vec![0.0, 3.0, 1.0], vec![3.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
    )
    .unwrap();
    let v = check_metric(&bad);
    assert!(!v.is_metric);
    // d(1,2) = 3 > d(1,3) + d(3,2)
    assert_eq!(v.violation, Some(MetricViolation::Triangle { x: 0, y: 2, z: 1 }));
    let neg = DissimilarityMap::from_fn(names(&["a", "b"]), |_, _| -1.0).unwrap();
    assert_eq!(check_metric(&neg).violation, Some(MetricViolation::Negative { i: 0, j: 1 }));
}

#[test]
fn four_point_examples() {
    let d = DissimilarityMap::from_fn(names(&["u", "v", "x", "y"]), |i, j| {
        if (i, j) == (0, 1) || (i, j) == (2, 3) {
            2.0
        } else {
            1.0
        }
    })
    .unwrap();
    let v = check_four_point(&d);
    assert!(!v.holds);
    assert_eq!(v.quadruple, Some([0, 1, 2, 3]));
    let three = DissimilarityMap::from_fn(names(&["a", "b", "c"]), |_, _| 5.0).unwrap();
    assert!(check_four_point(&three).holds);
}

#[test]
fn tree_metric_examples() {
    let mut two = PhyloTree::with_root(None);
    two.add_child(0, Some("a".into()), 0.3);
    two.add_child(0, Some("b".into()), 0.45);
    assert!((tree_metric(&two).unwrap().get(0, 1) - 0.75).abs() < 1e-15);
    let mut claw = PhyloTree::with_root(None);
    for (l, len) in [("a", 1.0), ("b", 2.0), ("c", 4.0)] {
        claw.add_child(0, Some(l.into()), len);
    }
    let d = tree_metric(&claw).unwrap();
    assert_eq!((d.get(0, 1), d.get(0, 2), d.get(1, 2)), (3.0, 5.0, 6.0));
    let fig = tree_metric(&figure3()).unwrap();
    assert!((fig.by_label("hs", "pt").unwrap() - 0.013).abs() < 1e-12);
    let table = parse_distance_matrix(&read_data("table3.phy")).unwrap();
    assert_eq!(table.by_label("hs", "pt").unwrap(), 0.013);
}

#[test]
fn random_tree_metrics_pass_both_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let n = rng.gen_range(3..=10);
        let d = tree_metric(&random_binary_tree(&labels(n), 0.0, 1.0, &mut rng)).unwrap();
        assert!(check_metric(&d).is_metric);
        assert!(check_four_point(&d).holds);
    }
}

#[test]
fn split_examples() {
    let taxa = names(&["1", "2", "3", "4", "5"]);
    let s = Split::new(&taxa, &names(&["1", "2"])).unwrap();
    let t = Split::new(&taxa, &names(&["1"])).unwrap();
    assert!(splits_compatible(&s, &t).unwrap());
    let four = names(&["1", "2", "3", "4"]);
    let a = Split::new(&four, &names(&["1", "2"])).unwrap();
    let b = Split::new(&four, &names(&["1", "3"])).unwrap();
    assert!(!splits_compatible(&a, &b).unwrap());
    assert!(matches!(splits_compatible(&a, &s), Err(Error::TaxaMismatch)));
    // either side names the same split
    assert_eq!(Split::new(&four, &names(&["3", "4"])).unwrap(), a);
    assert_eq!(a.to_string(), "{1,2}|{3,4}");
}

#[test]
fn splits_of_examples() {
    let quartet = parse_newick("((1:1,2:1):1,(3:1,4:1):1);").unwrap();
    let s = splits_of_tree(&quartet).unwrap();
    assert_eq!(s.splits.len(), 5);
    assert!(s.binary);
    let four = names(&["1", "2", "3", "4"]);
    let internal = Split::new(&four, &names(&["1", "2"])).unwrap();
    let at = s.splits.iter().position(|x| *x == internal).unwrap();
    assert_eq!(s.lengths[at], 2.0);
    let st = splits_of_tree(&star(6)).unwrap();
    assert_eq!(st.splits.len(), 6);
    assert!(st.splits.iter().all(|x| x.is_trivial()));
    assert!(!st.binary);
    let fig = splits_of_tree(&figure3()).unwrap();
    assert_eq!(fig.splits.len(), 17);
}

#[test]
fn splits_are_pairwise_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let n = rng.gen_range(3..=12);
        let s = splits_of_tree(&random_binary_tree(&labels(n), 0.1, 1.0, &mut rng)).unwrap();
        assert_eq!(s.splits.len(), 2 * n - 3);
        for a in &s.splits {
            for b in &s.splits {
                assert!(splits_compatible(a, b).unwrap());
            }
        }
    }
}

#[test]
fn nj_small_cases() {
    let d = DissimilarityMap::new(
        names(&["a", "b", "c"]),
        vec![vec![0.0, 3.0, 5.0], vec![3.0, 0.0, 6.0], vec![5.0, 6.0, 0.0]],
    )
    .unwrap();
    let nj = neighbor_join(&d).unwrap();
    let back = tree_metric(&nj.tree).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((back.get(i, j) - d.get(i, j)).abs() < 1e-12);
        }
    }
    let lens: Vec<f64> = nj.tree.leaves().iter().map(|&v| nj.tree.node(v).length).collect();
    let mut sorted = lens.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted, vec![1.0, 2.0, 4.0]);
    let two = DissimilarityMap::from_fn(names(&["a", "b"]), |_, _| 1.0).unwrap();
    assert!(neighbor_join(&two).is_err());
    assert!(DissimilarityMap::new(names(&["a", "b"]), vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).is_err());
}

#[test]
fn nj_round_trips_and_first_pair_is_a_cherry() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let n = rng.gen_range(4..=12);
        let t = random_binary_tree(&labels(n), 0.1, 1.0, &mut rng);
        let nj = neighbor_join(&tree_metric(&t).unwrap()).unwrap();
        assert!(same_topology(&t, &nj.tree).unwrap());
        assert!(max_length_difference(&t, &nj.tree).unwrap().unwrap() < 1e-9);
        assert_eq!(nj.clamped, 0);
        let (a, b) = nj.joins[0].clone();
        let pair = if a < b { (a, b) } else { (b, a) };
        assert!(cherries(&t).contains(&pair));
    }
}

#[test]
fn nj_reproduces_the_vertebrate_tree() {
    let d = parse_distance_matrix(&read_data("table3.phy")).unwrap();
    let nj = neighbor_join(&d).unwrap();
    let fig = figure3();
    assert!(same_topology(&nj.tree, &fig).unwrap());
    assert!(max_length_difference(&nj.tree, &fig).unwrap().unwrap() <= 0.002);
}

#[test]
fn nj_clamps_negative_lengths() {
    let d = DissimilarityMap::new(
        names(&["a", "b", "c", "d"]),
        vec![
            vec![0.0, 1.0, 9.0, 9.0],
            vec![1.0, 0.0, 9.0, 1.0],
            vec![9.0, 9.0, 0.0, 1.0],
            vec![9.0, 1.0, 1.0, 0.0],
        ],
    )
    .unwrap();
    let nj = neighbor_join(&d).unwrap();
    assert!(nj.clamped > 0);
    assert!(nj.tree.validate().is_ok());
}

#[test]
fn m_dissimilarity_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = random_binary_tree(&labels(6), 0.1, 1.0, &mut rng);
    let d = tree_metric(&t).unwrap();
    let d2 = m_dissimilarity(&t, 2).unwrap();
    for i in 0..6 {
        for j in i + 1..6 {
            assert!((d2.get(&[i, j]) - d.get(i, j)).abs() < 1e-12);
        }
    }
    let d3 = m_dissimilarity(&t, 3).unwrap();
    for (idx, v) in d3.entries() {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        assert!((v - 0.5 * (d.get(i, j) + d.get(i, k) + d.get(j, k))).abs() < 1e-12);
    }
    let mut claw = PhyloTree::with_root(None);
    for (l, len) in [("a", 1.0), ("b", 2.0), ("c", 4.0)] {
        claw.add_child(0, Some(l.into()), len);
    }
    assert_eq!(m_dissimilarity(&claw, 3).unwrap().get(&[0, 1, 2]), 7.0);
    assert!(m_dissimilarity(&claw, 4).is_err());
    assert!(m_dissimilarity(&claw, 1).is_err());
}

#[test]
fn generalized_q_at_m2_is_the_nj_q() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.gen_range(3..=9);
        let d = DissimilarityMap::from_fn(labels(n), |_, _| rng.gen_range(0.0..5.0)).unwrap();
        let g = generalized_nj_cherry(&MDissimilarityMap::from_dissimilarity(&d).unwrap()).unwrap();
        let q = nj_q_table(&d);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert!((g.q[i][j] - q[i][j]).abs() <= 1e-12 * q[i][j].abs().max(1.0));
                }
            }
        }
    }
    let tiny = MDissimilarityMap::from_fn(labels(3), 3, |_| 1.0).unwrap();
    assert!(generalized_nj_cherry(&tiny).is_err());
}

#[test]
fn generalized_cherries_of_the_vertebrate_tree() {
    let d3 = m_dissimilarity(&figure3(), 3).unwrap();
    let (i, j) = generalized_nj_cherry(&d3).unwrap().pair;
    let pair = (d3.taxa()[i].as_str(), d3.taxa()[j].as_str());
    assert!([("hs", "pt"), ("mm", "rn"), ("tn", "tr")].contains(&pair), "{pair:?}");
}

#[test]
fn generalized_cherries_of_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let t = random_binary_tree(&labels(8), 0.05, 1.0, &mut rng);
        let d3 = m_dissimilarity(&t, 3).unwrap();
        let (i, j) = generalized_nj_cherry(&d3).unwrap().pair;
        assert!(cherries(&t).contains(&(d3.taxa()[i].clone(), d3.taxa()[j].clone())));
    }
}

#[test]
fn generalized_nj_recovers_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 4..=8 {
        for _ in 0..200 {
            let t = random_binary_tree(&labels(n), 0.05, 1.0, &mut rng);
            let d3 = m_dissimilarity(&t, 3).unwrap();
            let g = generalized_neighbor_join(&d3).unwrap();
            if n == 4 {
                // three-way values cannot tell the quartet topologies apart;
                // the output must still reproduce them
                assert_eq!(g.joins.len(), 1);
                let back = m_dissimilarity(&g.tree, 3).unwrap();
                for (idx, v) in d3.entries() {
                    assert!((back.get(&idx) - v).abs() < 1e-12);
                }
                continue;
            }
            assert!(same_topology(&t, &g.tree).unwrap(), "n={n}");
            assert!(max_length_difference(&t, &g.tree).unwrap().unwrap() < 1e-9);
            // noisy input keeps the topology
            let noisy = MDissimilarityMap::from_fn(labels(n), 3, |idx| d3.get(idx) + rng.gen_range(-1e-6..1e-6)).unwrap();
            assert!(same_topology(&t, &generalized_neighbor_join(&noisy).unwrap().tree).unwrap());
        }
    }
    let d2 = m_dissimilarity(&random_binary_tree(&labels(6), 0.1, 1.0, &mut rng), 2).unwrap();
    assert!(generalized_neighbor_join(&d2).is_err());
}

#[test]
fn m_tree_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let n = rng.gen_range(5..=8);
        let t = random_binary_tree(&labels(n), 0.0, 1.0, &mut rng);
        let v = check_m_tree(&m_dissimilarity(&t, 3).unwrap()).unwrap();
        assert!(v.holds && !v.vacuous);
    }
    let failures = (0..100)
        .filter(|_| {
            let r = MDissimilarityMap::from_fn(labels(6), 3, |_| rng.gen_range(0.0..1.0)).unwrap();
            let v = check_m_tree(&r).unwrap();
            matches!(v.violation, Some(MTreeViolation::FourPoint { .. } | MTreeViolation::Metric { .. }))
                && !v.holds
        })
        .count();
    assert!(failures >= 95);
    let small = MDissimilarityMap::from_fn(labels(4), 3, |_| 1.0).unwrap();
    let v = check_m_tree(&small).unwrap();
    assert!(v.holds && v.vacuous);
    // m = 2 reduces to the four-point condition
    for _ in 0..50 {
        let d = DissimilarityMap::from_fn(labels(5), |_, _| rng.gen_range(0.0..1.0)).unwrap();
        let m2 = MDissimilarityMap::from_dissimilarity(&d).unwrap();
        let fp = check_four_point(&d).holds && check_metric(&d).is_metric;
        assert_eq!(check_m_tree(&m2).unwrap().holds, fp);
    }
}

#[test]
fn gr36_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let t = random_binary_tree(&labels(6), 0.0, 2.0, &mut rng);
        let d3 = m_dissimilarity(&t, 3).unwrap();
        let r = gr36_residuals(&d3).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-10), "{r:?}");
        let omega: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let shifted = MDissimilarityMap::from_fn(labels(6), 3, |idx| {
            d3.get(idx) + idx.iter().map(|&i| omega[i]).sum::<f64>()
        })
        .unwrap();
        let rs = gr36_residuals(&shifted).unwrap();
        assert!(rs.iter().all(|x| x.abs() < 1e-10));
        let random = MDissimilarityMap::from_fn(labels(6), 3, |_| rng.gen_range(0.0..1.0)).unwrap();
        let rr = gr36_residuals(&random).unwrap();
        assert!(rr.iter().any(|x| x.abs() > 1e-6));
        let before = gr36_residuals(&random).unwrap();
        let shifted = MDissimilarityMap::from_fn(labels(6), 3, |idx| {
            random.get(idx) + idx.iter().map(|&i| omega[i]).sum::<f64>()
        })
        .unwrap();
        let after = gr36_residuals(&shifted).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    let wrong = MDissimilarityMap::from_fn(labels(7), 3, |_| 1.0).unwrap();
    assert!(gr36_residuals(&wrong).is_err());
}

#[test]
fn schroder_numbers() {
    assert_eq!(schroder_count(3).unwrap(), 1u32.into());
    assert_eq!(schroder_count(5).unwrap(), 15u32.into());
    assert_eq!(schroder_count(10).unwrap(), 2_027_025u32.into());
    assert!(schroder_count(2).is_err());
}

proptest! {
    #[test]
    fn four_point_implies_metric(seed in any::<u64>(), n in 4usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = tree_metric(&random_binary_tree(&labels(n), 0.0, 1.0, &mut rng)).unwrap();
        prop_assert!(check_four_point(&d).holds);
        prop_assert!(check_metric(&d).is_metric);
    }
}
