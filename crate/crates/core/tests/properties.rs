mod common;

use common::{distinct_points, random_dataset, random_point, rng};
use interp_core::geometry::{align_offset, min_gap_separation, verify_proper_alignment, Box, CellKey, CubicPartition};
use interp_core::histogram::{fit_histogram, Histogram, LossKind};
use interp_core::interpolate::{check_interpolation, erm_pair};
use interp_core::relunet::{bump_net, compile_interpolant, BumpSpec, Head, Layer, ReluNet, SparseMatrix};
use interp_core::risk::{mc_expectation, quadrature, DistributionSpec, EtaFamily, Marginal, RegressionFamily, Task};
use interp_core::Predictor;
use proptest::prelude::*;
use rand::Rng;

fn loss_of(i: usize) -> LossKind {
    LossKind::ALL[i % 3]
}

fn random_net<R: Rng>(rng: &mut R, d: usize, widths: &[usize]) -> ReluNet {
    let mut hidden = Vec::new();
    let mut cols = d;
    for &w in widths {
        let data: Vec<f64> = (0..w * cols).map(|_| rng.random_range(-2.0..2.0)).collect();
        hidden.push(Layer {
            weights: SparseMatrix::from_dense(w, cols, &data).unwrap(),
            bias: (0..w).map(|_| rng.random_range(-1.0..1.0)).collect(),
        });
        cols = w;
    }
    let head = Head {
        weights: (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect(),
        bias: rng.random_range(-1.0..1.0),
    };
    ReluNet::new(d, hidden, head).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn aligned_offset_contains_cubes(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=200, s in 0.02f64..=1.0) {
        let pts = distinct_points(&mut rng(seed), d, m);
        let a = align_offset(&pts, s).unwrap();
        prop_assert!(a.bins_inspected <= (m + 1) * d);
        prop_assert!((a.tmax - s / (3 * m + 3) as f64).abs() <= 1e-15 * s);
        let part = a.partition(s).unwrap();
        prop_assert!(verify_proper_alignment(&pts, a.tmax, &part).all_inside());
        let t = a.tmax.min(min_gap_separation(&pts).unwrap());
        prop_assert!(verify_proper_alignment(&pts, t, &part).passed());
    }

    #[test]
    fn min_gap_cubes_are_disjoint(seed in any::<u64>(), d in 1usize..=3, m in 2usize..=60, grid in prop::bool::ANY) {
        let mut r = rng(seed);
        // a coarse lattice forces shared coordinates
        let pts: Vec<Vec<f64>> = if grid {
            (0..m).map(|_| (0..d).map(|_| r.random_range(-4i32..=4) as f64 / 4.0).collect()).collect()
        } else {
            distinct_points(&mut r, d, m)
        };
        let t = min_gap_separation(&pts).unwrap();
        for i in 0..m {
            for k in i + 1..m {
                if pts[i] == pts[k] {
                    continue;
                }
                let dist = pts[i].iter().zip(&pts[k]).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
                prop_assert!(dist > 2.0 * t, "{:?} {:?} t={}", pts[i], pts[k], t);
            }
        }
    }

    #[test]
    fn cell_index_round_trip(seed in any::<u64>(), d in 1usize..=3, s in 0.01f64..=1.0) {
        let mut r = rng(seed);
        let offset: Vec<f64> = (0..d).map(|_| r.random_range(0.0..s)).collect();
        let part = CubicPartition::new(s, offset).unwrap();
        let ranges = part.covering_ranges();
        for _ in 0..20 {
            let k = CellKey(ranges.iter().map(|&(a, b)| r.random_range(a..=b)).collect());
            let b = part.cell_bounds(&k).full;
            let x: Vec<f64> = b.lo.iter().zip(&b.hi).map(|(lo, hi)| lo + r.random_range(0.01..0.99) * (hi - lo)).collect();
            prop_assert_eq!(part.cell_index(&x).unwrap(), k.clone());
            prop_assert_eq!(part.cell_index(&b.lo).unwrap(), k);
        }
    }

    #[test]
    fn erm_pair_interpolates(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=120, li in 0usize..3, s in 0.05f64..=1.0) {
        let loss = loss_of(li);
        let data = random_dataset(&mut rng(seed), d, n, loss);
        let (good, bad) = erm_pair(&data, s, loss).unwrap();
        for f in [&good, &bad] {
            prop_assert!(check_interpolation(f, &data, loss).unwrap().interpolates);
            let centers: Vec<&[f64]> = f.bumps().iter().map(|b| b.center.as_slice()).collect();
            prop_assert!(verify_proper_alignment(&centers, f.radius(), f.partition()).passed());
            for b in f.bumps() {
                if loss.is_binary() {
                    prop_assert!([0.0, 2.0, -2.0].contains(&b.amplitude));
                } else {
                    prop_assert!(b.amplitude.abs() <= 2.0);
                }
            }
        }
        let mut r = rng(seed ^ 1);
        for _ in 0..200 {
            let x = random_point(&mut r, d);
            let (g, b) = (good.predict(&x).unwrap(), bad.predict(&x).unwrap());
            if good.bump_at(&x).is_none() {
                prop_assert_eq!(b, -g);
            }
            if loss.is_binary() {
                prop_assert!(g == 1.0 || g == -1.0);
                prop_assert!(b == 1.0 || b == -1.0);
            }
        }
    }

    #[test]
    fn fitted_coefficients_minimize_cell_risk(seed in any::<u64>(), li in 0usize..3, n in 1usize..=12) {
        let loss = loss_of(li);
        let mut r = rng(seed);
        // all samples in one cell of width 1
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![r.random_range(0.0..0.999)]).collect();
        let ys: Vec<f64> = (0..n).map(|_| common::label(&mut r, loss)).collect();
        let data = interp_core::data::Dataset::from_rows(&rows, ys.clone()).unwrap();
        let part = CubicPartition::grid(1, 1.0).unwrap();
        let h = fit_histogram(&data, &part, loss).unwrap();
        let c = h.coefficient(&CellKey(vec![0]));
        let risk = |v: f64| ys.iter().map(|&y| loss.eval(y, v)).sum::<f64>();
        let best = risk(c);
        for j in -1000..=1000 {
            let v = j as f64 * 1e-3;
            prop_assert!(best <= risk(v) + 1e-12, "c={} beaten by {}", c, v);
        }
    }

    #[test]
    fn bump_set_identities(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let lo: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..0.5)).collect();
        let hi: Vec<f64> = lo.iter().map(|a| a + r.random_range(0.05..0.5)).collect();
        let bx = Box::new(lo, hi).unwrap();
        let eps = r.random_range(0.001..0.49) * bx.min_side();
        let net = bump_net(&BumpSpec::new(bx.clone(), eps).unwrap());
        let inner = bx.shrink(eps);
        for _ in 0..2000 {
            let x = random_point(&mut r, d);
            let v = net.eval(&x).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            if !bx.contains_open(&x) {
                prop_assert_eq!(v, 0.0);
            }
            let y: Vec<f64> = inner.lo.iter().zip(&inner.hi).map(|(a, b)| a + r.random::<f64>() * (b - a)).collect();
            prop_assert_eq!(net.eval(&y).unwrap(), 1.0);
        }
    }

    #[test]
    fn net_algebra(seed in any::<u64>(), d in 1usize..=3, a in -3.0f64..3.0, c in -2.0f64..2.0) {
        let mut r = rng(seed);
        let f = random_net(&mut r, d, &[3, 2]);
        let g = random_net(&mut r, d, &[4, 5]);
        let sum = f.sum(&g).unwrap();
        let sc = f.scale_shift(a, c);
        let wf = f.width_vector();
        let wg = g.width_vector();
        let ws = sum.width_vector();
        prop_assert_eq!(ws, vec![d, wf[1] + wg[1], wf[2] + wg[2], 1]);
        let l2 = &sum.hidden()[1].weights;
        for row in 0..wf[2] {
            for col in wf[1]..ws_col(&sum) {
                prop_assert_eq!(l2.get(row, col), 0.0);
            }
        }
        for row in wf[2]..l2.rows() {
            for col in 0..wf[1] {
                prop_assert_eq!(l2.get(row, col), 0.0);
            }
        }
        for _ in 0..200 {
            let x = random_point(&mut r, d);
            let (vf, vg) = (f.eval(&x).unwrap(), g.eval(&x).unwrap());
            prop_assert!((sum.eval(&x).unwrap() - (vf + vg)).abs() <= 1e-12 * (1.0 + vf.abs() + vg.abs()));
            prop_assert!((sc.eval(&x).unwrap() - (a * vf + c)).abs() <= 1e-12 * (1.0 + (a * vf).abs()));
        }
    }

    #[test]
    fn compiled_interpolant_agrees(seed in any::<u64>(), d in 1usize..=2, n in 1usize..=60, li in 0usize..3, s in 0.1f64..=1.0) {
        let loss = loss_of(li);
        let data = random_dataset(&mut rng(seed), d, n, loss);
        let (good, _) = erm_pair(&data, s, loss).unwrap();
        let net = compile_interpolant(&good).unwrap();
        let arch = net.architecture();
        prop_assert!(arch.widths[1] <= 4 * d * n && arch.widths[2] <= 2 * n);
        prop_assert_eq!(arch.nonzeros[0], 2 * d * arch.widths[2]);
        for x in data.points() {
            prop_assert!((net.eval(x).unwrap() - good.predict(x).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn density_witness(seed in any::<u64>(), d in 1usize..=3, slope in -1.0f64..=1.0) {
        let dist = DistributionSpec::new(
            d,
            Marginal::Linear { slope },
            Task::Classification { eta: EtaFamily::Threshold },
            1.0,
            1.0,
            None,
        )
        .unwrap();
        let c = dist.density_bound();
        let mut r = rng(seed);
        for _ in 0..100 {
            let x = random_point(&mut r, d);
            let t = r.random_range(1e-6..1.0);
            let mass = dist.cube_mass(&x, t);
            prop_assert!(mass <= c * t.powi(d as i32) * (1.0 + 1e-12));
            prop_assert!(mass <= c * t * (1.0 + 1e-12));
        }
    }
}

fn ws_col(net: &ReluNet) -> usize {
    net.hidden()[1].weights.cols()
}

#[test]
fn bayes_risk_splits_over_halves() {
    let dists = [
        DistributionSpec::linear_regression(1, 0.5, 0.5).unwrap(),
        DistributionSpec::new(
            2,
            Marginal::Linear { slope: 0.5 },
            Task::Regression { fstar: RegressionFamily::Cosine, noise_b: 0.3 },
            1.0,
            1.0,
            None,
        )
        .unwrap(),
        DistributionSpec::classification(1, Marginal::Linear { slope: -0.4 }, EtaFamily::Linear(0.8)).unwrap(),
    ];
    for dist in &dists {
        for loss in LossKind::ALL.into_iter().filter(|&l| dist.supports(l)) {
            let [left, right] = quadrature::expectation(dist, 2000, |x| {
                let r = dist.conditional_risk(loss, x, dist.bayes_function(loss, x));
                if x[0] < 0.0 {
                    [r, 0.0]
                } else {
                    [0.0, r]
                }
            });
            let total = dist.bayes_risk(loss).unwrap();
            assert!((left + right - total).abs() < 1e-6, "{loss}: {left} + {right} vs {total}");
        }
    }
}

fn random_histogram<R: Rng>(r: &mut R, s: f64, binary: bool) -> Histogram {
    let part = CubicPartition::new(s, vec![r.random_range(0.0..s)]).unwrap();
    let mut coeffs = std::collections::HashMap::new();
    for k in part.covering_cells() {
        if r.random_bool(0.8) {
            let v = if binary { if r.random::<bool>() { 1.0 } else { -1.0 } } else { r.random_range(-1.0..=1.0) };
            coeffs.insert(k, v);
        }
    }
    Histogram::new(part, coeffs, if binary { 1.0 } else { 0.0 }).unwrap()
}

#[test]
fn risk_difference_bounded_by_disagreement() {
    let reg = DistributionSpec::linear_regression(1, 0.5, 0.5).unwrap();
    let cls = DistributionSpec::classification(1, Marginal::Uniform, EtaFamily::Linear(0.6)).unwrap();
    let mut r = rng(41);
    for trial in 0..40 {
        let (dist, loss) = if trial % 2 == 0 { (&reg, LossKind::LeastSquares) } else { (&cls, LossKind::Classification) };
        let binary = loss.is_binary();
        let (s1, s2) = (r.random_range(0.1..0.6), r.random_range(0.1..0.6));
        let f1 = random_histogram(&mut r, s1, binary);
        let f2 = random_histogram(&mut r, s2, binary);
        let m = if binary {
            1.0
        } else {
            // sup |f* - f_j|^2 with f* monotone: attained at cell ends or faces of X
            let sup = |h: &Histogram| {
                let mut best = 0.0f64;
                for k in h.partition().covering_cells() {
                    let b = h.partition().cell_bounds(&k).restricted.unwrap();
                    let c = h.coefficient(&k);
                    for x in [b.lo[0], b.hi[0]] {
                        best = best.max((dist.regression_function(&[x]) - c).powi(2));
                    }
                }
                best
            };
            sup(&f1) + sup(&f2)
        };
        let [diff, disagree] = mc_expectation(dist, 50_000, trial, |x| {
            let (a, b) = (f1.value(x), f2.value(x));
            [dist.conditional_excess(loss, x, a) - dist.conditional_excess(loss, x, b), if a != b { 1.0 } else { 0.0 }]
        });
        assert!(diff.mean.abs() <= m * disagree.mean + 3.0 * diff.stderr, "trial {trial}");
    }
}
