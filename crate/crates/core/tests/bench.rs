mod common;

use std::time::Instant;

use common::rng;
use interp_core::bench::{run_experiment, summarize, ExperimentPlan, PredictorKind};
use interp_core::histogram::LossKind;
use interp_core::interpolate::good_erm;
use interp_core::relunet::compile_interpolant;
use interp_core::risk::{DistributionSpec, EtaFamily, Marginal};

fn median_trend_ok(values: &[f64]) -> bool {
    values.windows(2).filter(|w| w[1] > w[0]).count() <= 1
}

#[test]
fn good_predictors_trend_down_and_agree() {
    let dist = DistributionSpec::linear_regression(1, 0.5, 0.5).unwrap();
    let mut plan = ExperimentPlan::new(dist.clone(), LossKind::LeastSquares, (6..=10).map(|k| 1 << k).collect(), 8, 77);
    plan.mc_eval_points = 10_000;
    let rows = run_experiment(&plan).unwrap();
    assert!(rows.iter().all(|r| r.interpolates));
    assert!(rows.iter().all(|r| r.excess_risk >= -3.0 * r.excess_stderr));
    for kind in [PredictorKind::GoodErm, PredictorKind::GoodDnn] {
        let med: Vec<f64> = summarize(&rows, kind).iter().map(|s| s.median_excess).collect();
        assert!(median_trend_ok(&med), "{kind}: {med:?}");
    }
    // ERM and DNN share data and evaluation points; they differ only on shells
    let m = 8.0;
    let c = dist.density_bound();
    for pair in rows.chunks(4) {
        let (erm, dnn) = (&pair[0], &pair[2]);
        assert_eq!((erm.predictor, dnn.predictor), (PredictorKind::GoodErm, PredictorKind::GoodDnn));
        let data = dist.sample(erm.n, interp_core::bench::derive_seed(77, erm.n, erm.rep, 0)).unwrap();
        let f = good_erm(&data, erm.s_n, LossKind::LeastSquares).unwrap();
        let (eps, r) = (f.radius() / 3.0, f.radius());
        let slack = 2.0 * erm.n as f64 * m * c * (eps + r);
        let se = (erm.excess_stderr.powi(2) + dnn.excess_stderr.powi(2)).sqrt();
        assert!((erm.excess_risk - dnn.excess_risk).abs() <= 3.0 * se + slack, "{erm:?} {dnn:?}");
    }
}

#[test]
fn classification_rows_are_consistent() {
    let dist = DistributionSpec::classification(2, Marginal::Linear { slope: 0.4 }, EtaFamily::Linear(0.8)).unwrap();
    let mut plan = ExperimentPlan::new(dist.clone(), LossKind::Classification, vec![100, 400], 3, 5);
    plan.mc_eval_points = 20_000;
    let rows = run_experiment(&plan).unwrap();
    let bayes = dist.bayes_risk(LossKind::Classification).unwrap();
    let worst = dist.worst_risk(LossKind::Classification).unwrap();
    for r in &rows {
        assert!(r.interpolates);
        assert!((r.risk - (bayes + r.excess_risk)).abs() < 1e-15);
        assert!((r.deficit - (worst - r.risk)).abs() < 1e-15);
        assert!(r.l2sq_fstar >= 0.0 && r.l2sq_neg_fstar >= 0.0);
    }
    // the bad rule sits near the worst risk, the good one near the Bayes risk
    let good = summarize(&rows, PredictorKind::GoodErm);
    let bad = summarize(&rows, PredictorKind::BadErm);
    assert!(good.last().unwrap().mean_risk < bad.last().unwrap().mean_risk);
}

#[test]
fn dnn_weight_budget_and_build_time() {
    let dist = DistributionSpec::linear_regression(2, 0.5, 0.5).unwrap();
    let (d, n) = (2usize, 1000usize);
    let data = dist.sample(n, 3).unwrap();
    let s = interp_core::bench::width_schedule(n as f64, 0.5, d, Default::default()).unwrap();
    let net = compile_interpolant(&good_erm(&data, s, LossKind::LeastSquares).unwrap()).unwrap();
    let a = net.architecture();
    assert!(a.nonzeros[0] <= 4 * d * n);
    assert!(a.nonzeros[0] + a.nonzeros[1] <= 4 * d * n * d);
    assert!(a.nonzeros.iter().sum::<usize>() <= 4 * d * n * d + 2 * n);

    // doubling n should cost at most ~4x (quadratic) with slack
    let build = |n: usize| {
        let data = dist.sample(n, 4).unwrap();
        let s = interp_core::bench::width_schedule(n as f64, 0.5, d, Default::default()).unwrap();
        (0..5)
            .map(|_| {
                let t = Instant::now();
                let f = good_erm(&data, s, LossKind::LeastSquares).unwrap();
                std::hint::black_box(compile_interpolant(&f).unwrap());
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (t1, t2) = (build(2000), build(4000));
    assert!(t2 <= 4.0 * 1.25 * t1 + 1e-3, "{t1} -> {t2}");
}

#[test]
fn derived_seeds_differ() {
    let mut seen = std::collections::HashSet::new();
    for n in [2usize, 3, 256] {
        for rep in 0..50 {
            for stream in 0..2 {
                assert!(seen.insert(interp_core::bench::derive_seed(1, n, rep, stream)));
            }
        }
    }
    let _ = rng(0);
}
