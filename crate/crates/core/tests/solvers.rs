mod common;

use common::{best_subset, dense_ridge, greedy_reference, objective, random_instance, rng};
use gtl_core::learn::{
    forward_select, greedy_tl, ridge_solve, BinaryProblem, GreedyTlConfig, RidgeSystem, SourceSet,
};
use rand::Rng;

#[test]
fn forward_selection_follows_greedy_definition() {
    let mut r = rng(2024);
    let mut global_hits = 0;
    for case in 0..100 {
        let p = r.random_range(2..=8);
        let m = r.random_range(8..=25);
        let kappa = r.random_range(1..=3.min(p));
        let lambda = 10f64.powf(r.random_range(-4.0..0.0));
        let (mut cols, y) = random_instance(&mut r, m, p);
        // intercept column, always in
        cols.push(vec![1.0; m]);
        let forced = [p];
        let sel = forward_select(&cols, &y, lambda, kappa, &forced).unwrap();
        let (order, objs) = greedy_reference(&cols, &y, lambda, kappa, &forced);
        assert_eq!(sel.order, order, "case {case}: selection order");
        assert_eq!(sel.objectives.len(), objs.len());
        for (a, b) in sel.objectives.iter().zip(&objs) {
            assert!((a - b).abs() < 1e-6, "case {case}: objective {a} vs {b}");
        }
        let (_, opt) = best_subset(&cols, &y, lambda, order.len(), &forced);
        assert!(opt <= objs.last().unwrap() + 1e-12);
        if (opt - objs.last().unwrap()).abs() < 1e-9 {
            global_hits += 1;
        }
    }
    // Greedy is not exhaustive search, but on random data it usually is optimal.
    assert!(
        global_hits >= 50,
        "greedy matched the global optimum in {global_hits}/100 cases"
    );
}

#[test]
fn two_of_six_matches_exhaustive_search() {
    // d = 4 raw columns plus L = 2 source columns; the target is exactly
    // the mean of two of them, so the best pair is unique.
    let mut r = rng(7);
    let m = 20;
    let y: Vec<f64> = (0..m)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let e: Vec<f64> = (0..m).map(|_| r.random_range(-0.8..0.8)).collect();
    let mut cols: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..m).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    cols[1] = y.iter().zip(&e).map(|(a, b)| a + b).collect();
    cols[4] = y.iter().zip(&e).map(|(a, b)| a - b).collect();
    cols.push(vec![1.0; m]);
    let lambda = 1e-6;
    let sel = forward_select(&cols, &y, lambda, 2, &[6]).unwrap();
    let (best, obj) = best_subset(&cols, &y, lambda, 2, &[6]);
    let mut got = sel.order.clone();
    got.sort_unstable();
    assert_eq!(got, best);
    assert_eq!(best, vec![1, 4]);
    assert!((sel.objectives[2] - obj).abs() < 1e-9);
}

#[test]
fn greedy_tl_picks_the_exhaustive_pair_through_sources() {
    // Same construction routed through greedy_tl: two sources whose
    // margins equal the designed columns, raw features pure noise.
    let mut r = rng(11);
    let m = 20;
    let d = 4;
    let y: Vec<f64> = (0..m)
        .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
        .collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let problem = BinaryProblem::new(refs, y.clone()).unwrap();
    // Source j reproduces raw feature j, so its column duplicates that feature.
    let sources = SourceSet::new(
        (0..2)
            .map(|j| {
                let mut coef = vec![0.0; d + 1];
                coef[j] = 1.0;
                std::sync::Arc::new(
                    gtl_core::learn::LinearModel::new(
                        gtl_core::learn::FeatureSpace::raw(d),
                        gtl_core::learn::ModelKind::Base,
                        coef,
                    )
                    .unwrap(),
                )
            })
            .collect(),
    )
    .unwrap();
    let cfg = GreedyTlConfig {
        kappa: 2,
        bag_size: m,
        bag_count: Some(1),
        source_clip: None,
        standardize: false,
        lambda: 1e-3,
        ..Default::default()
    };
    let model = greedy_tl(&problem, &sources, &cfg).unwrap();
    let mut cols: Vec<Vec<f64>> = (0..2)
        .map(|j| rows.iter().map(|x| x[j]).collect())
        .collect();
    cols.extend((0..d).map(|j| rows.iter().map(|x| x[j]).collect::<Vec<f64>>()));
    cols.push(vec![1.0; m]);
    let (_, opt) = best_subset(&cols, &y, 1e-3, 2, &[6]);
    let support: Vec<usize> = model.coefficients[..6]
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, _)| j)
        .collect();
    assert!(support.len() <= 2);
    let set: Vec<&Vec<f64>> = support.iter().chain(&[6]).map(|&j| &cols[j]).collect();
    let w = dense_ridge(&set, &y, 1e-3);
    let obj = objective(&set, &y, &w, 1e-3);
    let (_, greedy_objs) = greedy_reference(&cols, &y, 1e-3, 2, &[6]);
    assert!((obj - greedy_objs.last().unwrap()).abs() < 1e-9);
    assert!(obj >= opt - 1e-12);
}

#[test]
fn incremental_ridge_matches_dense_solves() {
    let mut r = rng(99);
    for case in 0..200 {
        let p = r.random_range(1..=8);
        let m = r.random_range(3..=30);
        let lambda = 10f64.powf(r.random_range(-6.0..1.0));
        let (cols, y) = random_instance(&mut r, m, p);
        let mut sys = RidgeSystem::new(y.clone(), lambda).unwrap();
        for j in 0..p {
            sys.add_column(cols[j].clone()).unwrap();
            let refs: Vec<&Vec<f64>> = cols[..=j].iter().collect();
            let want = dense_ridge(&refs, &y, lambda);
            let got = sys.solve();
            let scratch = ridge_solve(&cols[..=j], &y, lambda).unwrap();
            for ((g, w), s) in got.iter().zip(&want).zip(&scratch) {
                let scale = w.abs().max(1.0);
                assert!(
                    (g - w).abs() <= 1e-10 * scale,
                    "case {case}, {j} columns: {g} vs {w}"
                );
                assert!(
                    (s - w).abs() <= 1e-10 * scale,
                    "case {case}, {j} columns: {s} vs {w}"
                );
            }
        }
    }
}
