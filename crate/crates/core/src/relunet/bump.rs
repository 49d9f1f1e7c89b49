//! Two-hidden-layer networks equal to the indicator of a box away from an
//! `ε`-shell around its boundary.

use super::{Head, Layer, ReluNet, SparseMatrix};
use crate::error::{Error, Result};
use crate::geometry::Box;

/// Smallest accepted shell width, 2^-44. Below it the `1/ε` weights leave
/// too little room for cancellation in the first layer.
pub const MIN_EPS: f64 = 5.684341886080802e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct BumpSpec {
    bx: Box,
    eps: f64,
}

impl BumpSpec {
    /// Requires `0 < ε < min side / 2` and `ε >= 2^-44`.
    pub fn new(bx: Box, eps: f64) -> Result<Self> {
        if !bx.is_nondegenerate() {
            return Err(Error::Construction("bump box is degenerate".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Construction(format!("shell width {eps} must be positive")));
        }
        let half = bx.min_side() / 2.0;
        if eps >= half {
            return Err(Error::Construction(format!(
                "shell width {eps} is not below half the smallest side ({half})"
            )));
        }
        if eps < MIN_EPS {
            return Err(Error::Construction(format!("shell width {eps} is below 2^-44")));
        }
        Ok(BumpSpec { bx, eps })
    }

    pub fn bx(&self) -> &Box {
        &self.bx
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// The network of architecture `(d, 2d, 1, 1)` that is 1 on
/// `[lo + ε, hi − ε]`, 0 outside `(lo, hi)` and in `[0, 1]` in between.
pub fn bump_net(spec: &BumpSpec) -> ReluNet {
    let d = spec.bx.dim();
    let eps = spec.eps;
    let inv = 1.0 / eps;
    let mut rows = Vec::with_capacity(2 * d);
    let mut bias = Vec::with_capacity(2 * d);
    for i in 0..d {
        rows.push(vec![(i, -inv)]);
        bias.push((spec.bx.lo[i] + eps) / eps);
    }
    for i in 0..d {
        rows.push(vec![(i, inv)]);
        bias.push(-(spec.bx.hi[i] - eps) / eps);
    }
    let first = Layer {
        weights: SparseMatrix::from_rows(d, &rows),
        bias,
    };
    let second = Layer {
        weights: SparseMatrix::from_rows(2 * d, &[(0..2 * d).map(|j| (j, -1.0)).collect()]),
        bias: vec![1.0],
    };
    let head = Head {
        weights: vec![1.0],
        bias: 0.0,
    };
    ReluNet::new(d, vec![first, second], head).expect("bump network dimensions chain")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lo: f64, hi: f64, eps: f64) -> Result<BumpSpec> {
        BumpSpec::new(Box::new(vec![lo], vec![hi]).unwrap(), eps)
    }

    #[test]
    fn weights_of_the_worked_example() {
        let net = bump_net(&spec(0.05, 0.45, 0.1).unwrap());
        let l1 = &net.hidden()[0];
        assert_eq!(l1.weights.to_dense(), vec![-10.0, 10.0]);
        assert!((l1.bias[0] - 1.5).abs() < 1e-15);
        assert!((l1.bias[1] + 3.5).abs() < 1e-15);
        assert_eq!(net.hidden()[1].weights.to_dense(), vec![-1.0, -1.0]);
        assert_eq!(net.hidden()[1].bias, vec![1.0]);
        assert_eq!(net.head().weights, vec![1.0]);
        assert_eq!(net.head().bias, 0.0);
        assert_eq!(net.width_vector(), vec![1, 2, 1, 1]);
        assert_eq!(net.architecture().nonzeros[0], 2);
    }

    #[test]
    fn values_on_the_example_box() {
        let net = bump_net(&spec(0.05, 0.45, 0.1).unwrap());
        assert_eq!(net.eval(&[0.25]).unwrap(), 1.0);
        assert!((net.eval(&[0.10]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(net.eval(&[0.5]).unwrap(), 0.0);
        for i in 0..=1000 {
            let v = net.eval(&[-1.0 + 0.002 * i as f64]).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn rejects_wide_shells() {
        assert!(spec(0.0, 0.4, 0.2).is_err());
        assert!(spec(0.0, 0.4, 0.0).is_err());
        assert!(spec(0.0, 0.4, 1e-15).is_err());
        assert!(spec(0.4, 0.4, 0.01).is_err());
        assert!(spec(0.0, 0.4, 0.19).is_ok());
    }

    #[test]
    fn two_dimensional_bump() {
        let b = Box::new(vec![-0.5, 0.0], vec![0.5, 0.4]).unwrap();
        let net = bump_net(&BumpSpec::new(b, 0.1).unwrap());
        assert_eq!(net.width_vector(), vec![2, 4, 1, 1]);
        assert_eq!(net.eval(&[0.0, 0.2]).unwrap(), 1.0);
        assert_eq!(net.eval(&[0.0, 0.45]).unwrap(), 0.0);
        assert_eq!(net.eval(&[-0.6, 0.2]).unwrap(), 0.0);
    }
}
