#![allow(dead_code)]

use interp_core::data::Dataset;
use interp_core::histogram::LossKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn label<R: Rng>(rng: &mut R, loss: LossKind) -> f64 {
    if loss.is_binary() {
        if rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    } else {
        rng.random_range(-1.0..=1.0)
    }
}

/// `n` points in `[-1, 1]^d`; about a tenth of them repeat an earlier point
/// with a fresh label, so repeated points may carry contradicting labels.
pub fn random_dataset<R: Rng>(rng: &mut R, d: usize, n: usize, loss: LossKind) -> Dataset {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let x = if i > 0 && rng.random_bool(0.1) {
            rows[rng.random_range(0..i)].clone()
        } else {
            (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()
        };
        rows.push(x);
        ys.push(label(rng, loss));
    }
    Dataset::from_rows(&rows, ys).unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Distinct points (bitwise) in `[-1, 1]^d`.
pub fn distinct_points<R: Rng>(rng: &mut R, d: usize, m: usize) -> Vec<Vec<f64>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let p = random_point(rng, d);
        let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
        if seen.insert(key) {
            out.push(p);
        }
    }
    out
}
