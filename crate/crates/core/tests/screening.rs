mod common;

use screenlab::datagen::{DictionaryKind, GenSpec};
use screenlab::oracle::{solve_reference, verify_screen_safety};
use screenlab::screening::ScreenState;
use screenlab::solvers::run_observed;
use screenlab::{run, Algorithm, IndexSet, Problem, SolverConfig, Strategy, TestKind};

fn tight(algo: Algorithm, strategy: Strategy, test: TestKind) -> SolverConfig {
    SolverConfig {
        max_iters: 20_000,
        gap_tol: Some(1e-9),
        ..SolverConfig::new(algo, strategy, test)
    }
}

fn assert_safe(p: &Problem, eliminated: &IndexSet, test: TestKind, what: &str) {
    let reference = solve_reference(p, 1e-11).unwrap();
    let state = ScreenState {
        kept: eliminated.complement(p.n_atoms()),
        eliminated: eliminated.clone(),
        test_kind: test,
    };
    assert!(verify_screen_safety(p, &state, &reference), "{what}");
}

#[test]
fn dynamic_screening_is_safe_on_coherent_dictionaries() {
    for seed in 0..6 {
        for ratio in [0.4, 0.7, 0.9] {
            let p = common::lasso(DictionaryKind::Pnoise, 30, 80, seed, ratio).unwrap();
            for test in TestKind::LASSO {
                for algo in [Algorithm::Fista, Algorithm::Sparsa] {
                    let res = run(&p, &tight(algo, Strategy::Dynamic, test)).unwrap();
                    assert_safe(&p, &res.eliminated, test, &format!("seed {seed} {ratio} {algo} {test}"));
                }
            }
        }
    }
}

#[test]
fn dynamic_screening_is_safe_on_dct() {
    for (seed, ratio) in [(0, 0.3), (1, 0.6), (2, 0.85)] {
        let spec = GenSpec::new(DictionaryKind::Dct, 32, 64, seed);
        let p = common::lasso_with(spec, ratio).unwrap();
        for test in TestKind::LASSO {
            let res = run(&p, &tight(Algorithm::Fista, Strategy::Dynamic, test)).unwrap();
            assert_safe(&p, &res.eliminated, test, &format!("dct seed {seed} {test}"));
        }
    }
}

#[test]
fn kept_set_only_shrinks() {
    let p = common::lasso(DictionaryKind::Gaussian, 40, 120, 4, 0.6).unwrap();
    for test in TestKind::LASSO {
        let mut sizes = Vec::new();
        let res = run_observed(
            &p,
            &SolverConfig::new(Algorithm::Ista, Strategy::Dynamic, test),
            |v| sizes.push(v.kept.len()),
        )
        .unwrap();
        assert!(sizes.windows(2).all(|w| w[1] <= w[0]), "{test}");
        let trace_kept: Vec<usize> = res.trace.records.iter().map(|r| r.kept).collect();
        assert_eq!(trace_kept, sizes);
        assert_eq!(*sizes.last().unwrap(), p.n_atoms() - res.eliminated.len());
    }
}

#[test]
fn dynamic_screens_at_least_as_much_as_static() {
    for seed in 0..4 {
        let p = common::lasso(DictionaryKind::Pnoise, 50, 200, seed, 0.7).unwrap();
        for test in TestKind::LASSO {
            let stat = run(&p, &SolverConfig::new(Algorithm::Fista, Strategy::Static, test)).unwrap();
            let dynm = run(&p, &SolverConfig::new(Algorithm::Fista, Strategy::Dynamic, test)).unwrap();
            assert!(
                dynm.eliminated.len() >= stat.eliminated.len(),
                "seed {seed} {test}: {} < {}",
                dynm.eliminated.len(),
                stat.eliminated.len()
            );
        }
    }
}
