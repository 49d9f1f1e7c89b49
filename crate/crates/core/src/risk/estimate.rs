//! Seeded Monte-Carlo estimators.
//!
//! Draws are split into fixed-size chunks. Chunk `j` uses its own ChaCha
//! stream of the base seed, chunks may run on any thread, and the partial
//! moments are merged in chunk order, so results are bitwise independent of
//! the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::histogram::LossKind;
use crate::risk::{quadrature, DistributionSpec};
use crate::Predictor;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let delta = v - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n / n,
            m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n,
        }
    }

    fn estimate(self, seed: u64) -> RiskEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        RiskEstimate {
            mean: self.mean,
            stderr: (var / self.n).sqrt(),
            n_samples: self.n as usize,
            seed,
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn run_chunks<const K: usize, G>(dist: &DistributionSpec, n: usize, seed: u64, with_labels: bool, g: G) -> [RiskEstimate; K]
where
    G: Fn(&[f64], f64) -> [f64; K] + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<[Moments; K]> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = chunk_rng(seed, j);
            let len = CHUNK.min(n - j * CHUNK);
            let mut x = vec![0.0; dist.dim()];
            let mut acc = [Moments::default(); K];
            for _ in 0..len {
                dist.draw_point(&mut rng, &mut x);
                let y = if with_labels { dist.draw_label(&mut rng, &x) } else { 0.0 };
                for (a, v) in acc.iter_mut().zip(g(&x, y)) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = [Moments::default(); K];
    for p in parts {
        for k in 0..K {
            total[k] = total[k].merge(p[k]);
        }
    }
    total.map(|m| m.estimate(seed))
}

/// Means of `g(X)` for `X ~ P_X`.
pub fn mc_expectation<const K: usize, G>(dist: &DistributionSpec, n: usize, seed: u64, g: G) -> [RiskEstimate; K]
where
    G: Fn(&[f64]) -> [f64; K] + Sync,
{
    run_chunks(dist, n.max(1), seed, false, |x, _| g(x))
}

/// Means of `g(X, Y)` for `(X, Y) ~ P`.
pub fn mc_joint_expectation<const K: usize, G>(dist: &DistributionSpec, n: usize, seed: u64, g: G) -> [RiskEstimate; K]
where
    G: Fn(&[f64], f64) -> [f64; K] + Sync,
{
    run_chunks(dist, n.max(1), seed, true, g)
}

/// Plain Monte-Carlo risk `E L(Y, f(X))`.
pub fn mc_risk<F: Predictor + ?Sized>(f: &F, dist: &DistributionSpec, loss: LossKind, n: usize, seed: u64) -> RiskEstimate {
    let [r] = mc_joint_expectation(dist, n, seed, |x, y| [loss.eval(y, f.value(x))]);
    r
}

/// Excess risk `R(f) - R*` estimated through the conditional excess risk, so
/// every summand is non-negative and label noise does not enter the variance.
pub fn mc_excess_risk<F: Predictor + ?Sized>(
    f: &F,
    dist: &DistributionSpec,
    loss: LossKind,
    n: usize,
    seed: u64,
) -> RiskEstimate {
    let [r] = mc_expectation(dist, n, seed, |x| [dist.conditional_excess(loss, x, f.value(x))]);
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum L2Method {
    /// Tensor midpoint rule with the given number of nodes per axis.
    Quadrature { resolution: usize },
    MonteCarlo { n: usize, seed: u64 },
}

/// `sqrt(E_{P_X} |f - g|^2)`.
pub fn l2_distance<F, G>(f: &F, g: &G, dist: &DistributionSpec, method: L2Method) -> f64
where
    F: Predictor + ?Sized,
    G: Predictor + ?Sized,
{
    let sq = |x: &[f64]| {
        let e = f.value(x) - g.value(x);
        [e * e]
    };
    let v = match method {
        L2Method::Quadrature { resolution } => quadrature::expectation(dist, resolution.max(1), sq)[0],
        L2Method::MonteCarlo { n, seed } => mc_expectation(dist, n, seed, sq)[0].mean,
    };
    v.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::{EtaFamily, Marginal};

    #[test]
    fn moments_merge_matches_single_pass() {
        let vals: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let mut one = Moments::default();
        vals.iter().for_each(|&v| one.push(v));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        vals[..37].iter().for_each(|&v| a.push(v));
        vals[37..].iter().for_each(|&v| b.push(v));
        let ab = a.merge(b);
        assert!((ab.mean - one.mean).abs() < 1e-12);
        assert!((ab.m2 - one.m2).abs() < 1e-9);
    }

    #[test]
    fn bayes_predictor_hits_bayes_risk() {
        let d = DistributionSpec::linear_regression(1, 0.5, 0.5).unwrap();
        let fstar = |x: &[f64]| d.regression_function(x);
        let r = mc_risk(&fstar, &d, LossKind::LeastSquares, 200_000, 1);
        assert!((r.mean - 1.0 / 12.0).abs() < 3.0 * r.stderr);
        let neg = |x: &[f64]| -d.regression_function(x);
        let w = mc_risk(&neg, &d, LossKind::LeastSquares, 200_000, 2);
        assert!((w.mean - 5.0 / 12.0).abs() < 3.0 * w.stderr);
    }

    #[test]
    fn stderr_shrinks_with_n() {
        let d = DistributionSpec::classification(1, Marginal::Uniform, EtaFamily::Linear(0.5)).unwrap();
        let f = |x: &[f64]| x[0] - 0.3;
        let a = mc_risk(&f, &d, LossKind::Hinge, 100_000, 5);
        let b = mc_risk(&f, &d, LossKind::Hinge, 200_000, 5);
        let ratio = b.stderr / a.stderr;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.2 * std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let d = DistributionSpec::linear_regression(2, 0.5, 0.4).unwrap();
        let f = |x: &[f64]| x[0] * x[1];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_risk(&f, &d, LossKind::LeastSquares, 50_000, 11))
        };
        let (a, b) = (run(1), run(8));
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn l2_examples() {
        let d = DistributionSpec::linear_regression(1, 0.5, 0.0).unwrap();
        let zero = |_: &[f64]| 0.0;
        let half = |_: &[f64]| 0.5;
        assert_eq!(l2_distance(&zero, &zero, &d, L2Method::Quadrature { resolution: 64 }), 0.0);
        let v = l2_distance(&zero, &half, &d, L2Method::Quadrature { resolution: 64 });
        assert!((v - 0.5).abs() < 1e-14);
    }
}
