//! Fully connected ReLU networks with explicitly constructed weights.
//!
//! A network with hidden layers `(A_1, b_1), ..., (A_{L-1}, b_{L-1})` and
//! head `(a, b)` computes `a · relu(A_{L-1} ... relu(A_1 x + b_1) ... ) + b`.
//! Weights are stored sparsely; the exported document is dense.

mod bump;
mod compile;
mod io;
mod matrix;

pub use bump::{bump_net, BumpSpec, MIN_EPS};
pub use compile::{compile_histogram, compile_interpolant};
pub use io::{export_weights, import_weights, WeightDoc};
pub use matrix::SparseMatrix;

use crate::error::{Error, Result};
use crate::Predictor;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: SparseMatrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReluNet {
    input_dim: usize,
    hidden: Vec<Layer>,
    head: Head,
}

/// Width vector `(d, m_1, ..., m_{L-1}, 1)` and stored nonzeros per layer
/// (hidden layers first, head last).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Architecture {
    pub widths: Vec<usize>,
    pub nonzeros: Vec<usize>,
}

#[inline]
fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

impl ReluNet {
    pub fn new(input_dim: usize, hidden: Vec<Layer>, head: Head) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Construction("input dimension must be positive".into()));
        }
        let mut width = input_dim;
        for (l, layer) in hidden.iter().enumerate() {
            if layer.weights.cols() != width {
                return Err(Error::Construction(format!(
                    "hidden layer {} expects {} inputs, previous layer provides {width}",
                    l + 1,
                    layer.weights.cols()
                )));
            }
            if layer.bias.len() != layer.weights.rows() {
                return Err(Error::Construction(format!("hidden layer {} bias length mismatch", l + 1)));
            }
            width = layer.weights.rows();
        }
        if head.weights.len() != width {
            return Err(Error::Construction(format!(
                "head has {} weights, last layer has width {width}",
                head.weights.len()
            )));
        }
        let finite = hidden
            .iter()
            .all(|l| l.bias.iter().all(|v| v.is_finite()) && l.weights.all_finite())
            && head.bias.is_finite()
            && head.weights.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Construction("network has a non-finite parameter".into()));
        }
        Ok(ReluNet {
            input_dim,
            hidden,
            head,
        })
    }

    /// `x ↦ a·x + b` without hidden layers.
    pub fn affine(weights: Vec<f64>, bias: f64) -> Result<Self> {
        ReluNet::new(weights.len(), Vec::new(), Head { weights, bias })
    }

    /// The constant `c` with `depth` hidden layers of width zero.
    pub fn constant(input_dim: usize, c: f64, depth: usize) -> Result<Self> {
        let mut hidden = Vec::with_capacity(depth);
        let mut cols = input_dim;
        for _ in 0..depth {
            hidden.push(Layer {
                weights: SparseMatrix::zeros(0, cols),
                bias: Vec::new(),
            });
            cols = 0;
        }
        let head_len = if depth == 0 { input_dim } else { 0 };
        ReluNet::new(
            input_dim,
            hidden,
            Head {
                weights: vec![0.0; head_len],
                bias: c,
            },
        )
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.hidden.len()
    }

    pub fn hidden(&self) -> &[Layer] {
        &self.hidden
    }

    pub fn head(&self) -> &Head {
        &self.head
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::input(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(self.forward(x))
    }

    fn forward(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.hidden {
            layer.weights.mul_vec(&cur, &mut next);
            for (v, b) in next.iter_mut().zip(&layer.bias) {
                *v = relu(*v + b);
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let mut acc = 0.0;
        for (a, z) in self.head.weights.iter().zip(&cur) {
            acc += a * z;
        }
        acc + self.head.bias
    }

    pub fn width_vector(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(self.hidden.iter().map(|l| l.weights.rows()));
        w.push(1);
        w
    }

    pub fn architecture(&self) -> Architecture {
        let mut nonzeros: Vec<usize> = self.hidden.iter().map(|l| l.weights.nnz()).collect();
        nonzeros.push(self.head.weights.iter().filter(|v| **v != 0.0).count());
        Architecture {
            widths: self.width_vector(),
            nonzeros,
        }
    }

    /// `α f + c`.
    pub fn scale_shift(&self, alpha: f64, c: f64) -> ReluNet {
        let mut out = self.clone();
        out.head.weights.iter_mut().for_each(|w| *w *= alpha);
        out.head.bias = alpha * self.head.bias + c;
        out
    }

    /// `max(0, f)`, one extra hidden layer of width one.
    pub fn relu_wrap(&self) -> ReluNet {
        let cols = self.head.weights.len();
        let row: Vec<(usize, f64)> = self.head.weights.iter().copied().enumerate().collect();
        let mut out = self.clone();
        out.hidden.push(Layer {
            weights: SparseMatrix::from_rows(cols, &[row]),
            bias: vec![self.head.bias],
        });
        out.head = Head {
            weights: vec![1.0],
            bias: 0.0,
        };
        out
    }

    /// `f + g`; both networks must have the same input dimension and depth.
    pub fn sum(&self, other: &ReluNet) -> Result<ReluNet> {
        ReluNet::sum_all(&[self, other])
    }

    /// Sum of many networks of equal depth: first layers stacked, deeper
    /// layers block diagonal, heads concatenated, biases added in order.
    pub fn sum_all(nets: &[&ReluNet]) -> Result<ReluNet> {
        let first = nets.first().ok_or_else(|| Error::Construction("cannot sum zero networks".into()))?;
        let (d, depth) = (first.input_dim, first.depth());
        for (i, n) in nets.iter().enumerate() {
            if n.input_dim != d {
                return Err(Error::Construction(format!("summand {i} has input dimension {}, expected {d}", n.input_dim)));
            }
            if n.depth() != depth {
                return Err(Error::Construction(format!(
                    "summand {i} has {} hidden layers, expected {depth}",
                    n.depth()
                )));
            }
        }
        let bias = nets.iter().fold(0.0, |acc, n| acc + n.head.bias);
        if depth == 0 {
            let mut w = vec![0.0; d];
            for n in nets {
                for (a, b) in w.iter_mut().zip(&n.head.weights) {
                    *a += b;
                }
            }
            return ReluNet::affine(w, bias);
        }
        let mut hidden = Vec::with_capacity(depth);
        for l in 0..depth {
            let parts: Vec<&SparseMatrix> = nets.iter().map(|n| &n.hidden[l].weights).collect();
            let (offsets, cols) = if l == 0 {
                (vec![0; nets.len()], d)
            } else {
                let mut offs = Vec::with_capacity(nets.len());
                let mut acc = 0;
                for p in &parts {
                    offs.push(acc);
                    acc += p.cols();
                }
                (offs, acc)
            };
            hidden.push(Layer {
                weights: SparseMatrix::stack(&parts, &offsets, cols),
                bias: nets.iter().flat_map(|n| n.hidden[l].bias.iter().copied()).collect(),
            });
        }
        let head = Head {
            weights: nets.iter().flat_map(|n| n.head.weights.iter().copied()).collect(),
            bias,
        };
        ReluNet::new(d, hidden, head)
    }
}

impl Predictor for ReluNet {
    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        self.forward(x)
    }
}
