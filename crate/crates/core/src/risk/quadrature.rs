//! Tensor midpoint rules with a fixed summation order.

use rayon::prelude::*;

use crate::geometry::Box;
use crate::risk::DistributionSpec;

/// `∫_box g(x) dx` by the tensor midpoint rule with `res` nodes per axis.
pub fn box_midpoint<const K: usize, G>(b: &Box, res: usize, g: G) -> [f64; K]
where
    G: Fn(&[f64]) -> [f64; K],
{
    let d = b.dim();
    let h: Vec<f64> = b.lo.iter().zip(&b.hi).map(|(lo, hi)| (hi - lo) / res as f64).collect();
    let cell_volume: f64 = h.iter().product();
    let mut idx = vec![0usize; d];
    let mut x: Vec<f64> = (0..d).map(|i| b.lo[i] + 0.5 * h[i]).collect();
    let mut acc = [0.0; K];
    loop {
        let v = g(&x);
        for k in 0..K {
            acc[k] += v[k];
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                return acc.map(|a| a * cell_volume);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < res {
                x[axis] = b.lo[axis] + (idx[axis] as f64 + 0.5) * h[axis];
                break;
            }
            idx[axis] = 0;
            x[axis] = b.lo[axis] + 0.5 * h[axis];
        }
    }
}

/// `E_{P_X} g` by the midpoint rule on `[-1, 1]^d` with `res` nodes per axis,
/// parallel over slabs of the first axis and summed slab by slab in order.
pub fn expectation<const K: usize, G>(dist: &DistributionSpec, res: usize, g: G) -> [f64; K]
where
    G: Fn(&[f64]) -> [f64; K] + Sync,
{
    let d = dist.dim();
    let h = 2.0 / res as f64;
    let slabs: Vec<[f64; K]> = (0..res)
        .into_par_iter()
        .map(|i| {
            let node = |j: usize| -1.0 + (j as f64 + 0.5) * h;
            let mut x = vec![node(0); d];
            x[0] = node(i);
            let mut idx = vec![0usize; d];
            let mut acc = [0.0; K];
            loop {
                let p = dist.density(&x);
                let v = g(&x);
                for k in 0..K {
                    acc[k] += v[k] * p;
                }
                // odometer over axes 1..d
                let mut axis = d;
                loop {
                    axis -= 1;
                    if axis == 0 {
                        return acc.map(|a| a * h.powi(d as i32));
                    }
                    idx[axis] += 1;
                    if idx[axis] < res {
                        x[axis] = node(idx[axis]);
                        break;
                    }
                    idx[axis] = 0;
                    x[axis] = node(0);
                }
            }
        })
        .collect();
    let mut acc = [0.0; K];
    for s in slabs {
        for k in 0..K {
            acc[k] += s[k];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_is_exact_for_linear_integrands() {
        let b = Box::new(vec![0.0, -1.0], vec![1.0, 0.5]).unwrap();
        let [vol, lin] = box_midpoint(&b, 7, |x| [1.0, x[0] + 2.0 * x[1]]);
        assert!((vol - 1.5).abs() < 1e-14);
        // the x term integrates to 0.75, the 2y term to -0.75
        assert!(lin.abs() < 1e-13);
    }

    #[test]
    fn expectation_uses_res_to_the_d_nodes() {
        use crate::risk::{EtaFamily, Marginal};
        use std::sync::atomic::{AtomicUsize, Ordering};
        let dist = DistributionSpec::classification(3, Marginal::Linear { slope: 0.6 }, EtaFamily::Threshold).unwrap();
        let calls = AtomicUsize::new(0);
        let [mass, m1, m3] = expectation(&dist, 40, |x| {
            calls.fetch_add(1, Ordering::Relaxed);
            [1.0, x[0], x[2]]
        });
        assert_eq!(calls.into_inner(), 40 * 40 * 40);
        assert!((mass - 1.0).abs() < 1e-12);
        // E u = a/3 per axis, midpoint error O(h^2)
        assert!((m1 - 0.2).abs() < 1e-3 && (m3 - 0.2).abs() < 1e-3);
    }
}
