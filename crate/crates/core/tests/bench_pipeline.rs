use screenlab::bench::{
    aggregate, read_bench_csv, render_svg, run_plan, write_bench_csv, write_report_csv, BenchPlan,
    Metric, REPORT_HEADER,
};
use screenlab::datagen::{DictionaryKind, GenSpec, ObservationKind};
use screenlab::{Algorithm, ProblemKind, SolverConfig, Strategy, TestKind};

fn small_plan() -> BenchPlan {
    BenchPlan {
        lambda_ratios: vec![0.4, 0.8],
        algorithms: vec![Algorithm::Fista, Algorithm::Ista],
        seeds: vec![0, 1],
        ..BenchPlan::new(ProblemKind::Lasso, GenSpec::new(DictionaryKind::Pnoise, 30, 90, 0))
    }
}

#[test]
fn plan_rows_cover_every_cell() {
    let plan = BenchPlan {
        gen: GenSpec::new(DictionaryKind::Gaussian, 30, 90, 0),
        solver: SolverConfig {
            gap_tol: Some(1e-10),
            max_iters: 100_000,
            ..SolverConfig::default()
        },
        ..small_plan()
    };
    let rows = run_plan(&plan).unwrap();
    // seeds × algorithms × ratios × (none + static + dynamic)
    assert_eq!(rows.len(), 2 * 2 * 2 * 3);
    assert!(rows.iter().all(|r| (r.strategy == Strategy::None) == r.test.is_none()));
    assert!(rows.iter().all(|r| r.flops > 0 && r.iters > 0));
    // identical data across strategies: same optimum
    for r in &rows {
        let base = rows
            .iter()
            .find(|b| {
                b.seed == r.seed
                    && b.algo == r.algo
                    && b.lambda_ratio == r.lambda_ratio
                    && b.strategy == Strategy::None
            })
            .unwrap();
        assert!((r.final_obj - base.final_obj).abs() <= 1e-7 * base.final_obj);
    }
}

#[test]
fn parallel_and_sequential_plans_agree() {
    let plan = small_plan();
    let seq = run_plan(&plan).unwrap();
    let par = run_plan(&BenchPlan { parallel: true, ..plan }).unwrap();
    assert_eq!(seq.len(), par.len());
    for (a, b) in seq.iter().zip(&par) {
        assert_eq!((a.seed, a.algo, a.strategy, a.test), (b.seed, b.algo, b.strategy, b.test));
        assert_eq!((a.iters, a.flops), (b.iters, b.flops));
        assert_eq!(a.final_obj.to_bits(), b.final_obj.to_bits());
    }
}

#[test]
fn csv_report_and_svg() {
    let rows = run_plan(&small_plan()).unwrap();
    let mut buf = Vec::new();
    write_bench_csv(&mut buf, &rows, Some("small plan\nsecond line")).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("# small plan\n# second line\nseed,algo,strategy,test,"));
    let back = read_bench_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!((a.seed, a.flops, a.iters, a.test), (b.seed, b.flops, b.iters, b.test));
    }

    let report = aggregate(&back).unwrap();
    for r in report.iter().filter(|r| r.strategy == Strategy::None) {
        assert_eq!(r.flops.median, 1.0);
    }
    let dynamic_08 = report
        .iter()
        .find(|r| r.strategy == Strategy::Dynamic && r.lambda_ratio == 0.8 && r.algo == Algorithm::Fista)
        .unwrap();
    assert!(dynamic_08.flops.median < 1.0);
    assert!(dynamic_08.flops.p25 <= dynamic_08.flops.median && dynamic_08.flops.median <= dynamic_08.flops.p75);

    let mut out = Vec::new();
    write_report_csv(&mut out, &report, None).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), REPORT_HEADER.join(","));
    assert_eq!(text.lines().count(), report.len() + 1);

    let svg = render_svg(&report, Metric::Flops, "flops");
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<polyline"));
}

#[test]
fn group_plan_runs() {
    let gen = GenSpec::new(DictionaryKind::Pnoise, 30, 90, 3)
        .with_observation(ObservationKind::BernoulliGaussian)
        .with_groups(5);
    let plan = BenchPlan {
        lambda_ratios: vec![0.5],
        tests: vec![TestKind::GroupSafe, TestKind::GroupSt3],
        ..BenchPlan::new(ProblemKind::GroupLasso, gen)
    };
    let rows = run_plan(&plan).unwrap();
    assert_eq!(rows.len(), 1 + 2 * 2);
}

#[test]
fn invalid_plans_are_rejected() {
    let mut plan = small_plan();
    plan.tests = vec![TestKind::GroupSafe];
    assert!(run_plan(&plan).is_err());
    let mut plan = small_plan();
    plan.lambda_ratios = vec![0.8, 0.4];
    assert!(run_plan(&plan).is_err());
    let mut plan = small_plan();
    plan.repeats = 0;
    assert!(run_plan(&plan).is_err());
}
