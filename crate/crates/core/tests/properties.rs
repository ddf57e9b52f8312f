use std::sync::Arc;

use proptest::collection::vec;
use proptest::prelude::*;

use screenlab::io::{read_dsmx, write_dsmx, Matrix};
use screenlab::linalg::norm_inf;
use screenlab::problem::{expand, prox_group, prox_l1};
use screenlab::screening::dual_scale_lasso;
use screenlab::{Dictionary, GroupPartition, IndexSet, Problem};

fn matrix(max_n: usize, max_k: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max_n, 1..=max_k).prop_flat_map(|(n, k)| (Just(n), Just(k), vec(-1.0f64..1.0, n * k)))
}

/// Random dictionary with unit-norm columns and a unit observation.
fn lasso_data() -> impl Strategy<Value = (Dictionary, Vec<f64>)> {
    (2usize..8, 2usize..16).prop_flat_map(|(n, k)| {
        (vec(vec(-1.0f64..1.0, n), k), vec(-1.0f64..1.0, n)).prop_filter_map(
            "degenerate draw",
            |(cols, y)| {
                let unit = |v: &[f64]| {
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    (n > 1e-3).then(|| v.iter().map(|x| x / n).collect::<Vec<f64>>())
                };
                let cols: Option<Vec<Vec<f64>>> = cols.iter().map(|c| unit(c)).collect();
                let d = Dictionary::from_columns(&cols?, true).ok()?;
                Some((d, unit(&y)?))
            },
        )
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn select_matches_masked_product((n, k, data) in matrix(8, 12), mask in vec(any::<bool>(), 12), x in vec(-2.0f64..2.0, 12)) {
        let d = Dictionary::from_col_major(n, k, data, false).unwrap();
        let cols = IndexSet::from_unsorted((0..k).filter(|&i| mask[i]).collect());
        prop_assume!(!cols.is_empty());
        let sub = d.select(&cols).unwrap();
        let xr: Vec<f64> = cols.iter().map(|i| x[i]).collect();
        let full = expand(&xr, &cols, k).unwrap();
        let a = sub.apply(&xr).unwrap();
        let b = d.apply(&full).unwrap();
        prop_assert!(sq_dist(&a, &b).sqrt() <= 1e-12);
    }

    #[test]
    fn retain_columns_matches_select((n, k, data) in matrix(6, 10), mask in vec(any::<bool>(), 10)) {
        let d = Dictionary::from_col_major(n, k, data, false).unwrap();
        let keep = &mask[..k];
        prop_assume!(keep.iter().any(|&b| b));
        let cols = IndexSet::from_unsorted((0..k).filter(|&i| keep[i]).collect());
        let mut r = d.clone();
        r.retain_columns(keep).unwrap();
        prop_assert_eq!(r, d.select(&cols).unwrap());
    }

    #[test]
    fn complement_partitions_the_index_range(k in 1usize..60, picks in vec(0usize..60, 0..30)) {
        let s = IndexSet::from_unsorted(picks.into_iter().filter(|&i| i < k).collect());
        let c = s.complement(k);
        prop_assert_eq!(s.len() + c.len(), k);
        prop_assert!(s.iter().all(|i| !c.contains(i)));
        prop_assert_eq!(s.union(&c), IndexSet::full(k));
    }

    #[test]
    fn soft_threshold_is_the_l1_prox(x in vec(-3.0f64..3.0, 1..20), t in 0.0f64..2.0) {
        let p = prox_l1(&x, t).unwrap();
        // optimality: x − p ∈ t·∂‖p‖₁
        for (xi, pi) in x.iter().zip(&p) {
            let g = xi - pi;
            if *pi != 0.0 {
                prop_assert!((g - t * pi.signum()).abs() <= 1e-12);
            } else {
                prop_assert!(g.abs() <= t + 1e-12);
            }
        }
    }

    #[test]
    fn group_prox_is_non_expansive((n, k, data) in matrix(5, 12), gs in 1usize..5, a in vec(-3.0f64..3.0, 12), b in vec(-3.0f64..3.0, 12), t in 0.0f64..2.0) {
        let d = Dictionary::from_col_major(n, k, data, false).unwrap();
        let part = GroupPartition::contiguous(&d, gs.min(k)).unwrap();
        let pa = prox_group(&a[..k], t, &part).unwrap();
        let pb = prox_group(&b[..k], t, &part).unwrap();
        prop_assert!(sq_dist(&pa, &pb).sqrt() <= sq_dist(&a[..k], &b[..k]).sqrt() + 1e-12);
    }

    #[test]
    fn group_spectral_norms_match_svd((n, k, data) in matrix(6, 12), gs in 1usize..6) {
        let d = Dictionary::from_col_major(n, k, data, false).unwrap();
        let part = GroupPartition::contiguous(&d, gs.min(k)).unwrap();
        for (g, &ours) in part.spectral_norms().iter().enumerate() {
            let cols: Vec<usize> = part.group(g).iter().collect();
            let sub = nalgebra::DMatrix::from_fn(n, cols.len(), |r, c| d.get(r, cols[c]));
            let truth = sub.singular_values().iter().cloned().fold(0.0f64, f64::max);
            prop_assert!((ours - truth).abs() <= 1e-8 * truth.max(1.0), "group {}: {} vs {}", g, ours, truth);
        }
    }

    #[test]
    fn dual_scaling_is_feasible((d, y) in lasso_data(), ratio in 0.05f64..1.0, theta in vec(-2.0f64..2.0, 8)) {
        let d = Arc::new(d);
        let n = d.rows();
        let p = Problem::lasso(d.clone(), y, 1.0).unwrap();
        let ls = p.extreme_dual().lambda_star;
        let p = p.with_lambda(ratio * ls).unwrap();
        let theta = &theta[..n];
        let corr = d.correlate(theta).unwrap();
        prop_assume!(norm_inf(&corr) > 1e-9);
        let (_, v) = dual_scale_lasso(&p, theta, norm_inf(&corr));
        prop_assert!(p.dual_feasible(&v, 1e-12));
    }

    #[test]
    fn duality_gap_is_nonnegative((d, y) in lasso_data(), ratio in 0.05f64..1.2, x in vec(-1.0f64..1.0, 16)) {
        let p = Problem::lasso(Arc::new(d), y, 1.0).unwrap();
        let ls = p.extreme_dual().lambda_star;
        let p = p.with_lambda(ratio * ls).unwrap();
        let x = &x[..p.n_atoms()];
        let theta = p.residual_dual_point(x).unwrap();
        prop_assert!(p.dual_feasible(&theta, 1e-12));
        prop_assert!(p.duality_gap(x, &theta).unwrap() >= -1e-12);
    }

    #[test]
    fn dsmx_round_trip((n, k, data) in matrix(7, 7)) {
        let d = Dictionary::from_col_major(n, k, data, false).unwrap();
        let m = Matrix::from_dictionary(&d);
        let mut buf = Vec::new();
        write_dsmx(&mut buf, &m).unwrap();
        let back = read_dsmx(buf.as_slice()).unwrap();
        prop_assert_eq!(back.to_dictionary(false).unwrap(), d);
    }
}
