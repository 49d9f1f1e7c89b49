//! Histogram rules on cubic partitions: the empirical rule fitted from data
//! and the population rule obtained by averaging the regression function
//! over each cell.

use std::collections::HashMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{in_unit_cube, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{CellKey, CubicPartition};
use crate::risk::{quadrature, DistributionSpec};
use crate::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    LeastSquares,
    Hinge,
    Classification,
}

/// `sign` with `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::LeastSquares, LossKind::Hinge, LossKind::Classification];

    #[inline]
    pub fn eval(self, y: f64, t: f64) -> f64 {
        match self {
            LossKind::LeastSquares => (y - t) * (y - t),
            LossKind::Hinge => (1.0 - y * t).max(0.0),
            LossKind::Classification => {
                if y * sign(t) <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// True for the label sets `{-1, +1}`.
    pub fn is_binary(self) -> bool {
        !matches!(self, LossKind::LeastSquares)
    }

    /// Whether `y` lies in the label set of this loss.
    pub fn label_ok(self, y: f64) -> bool {
        if self.is_binary() {
            y == 1.0 || y == -1.0
        } else {
            (-1.0..=1.0).contains(&y)
        }
    }

    /// Value used for cells without data.
    pub fn empty_default(self) -> f64 {
        if self.is_binary() {
            1.0
        } else {
            0.0
        }
    }

    /// Minimizer over the label set of the summed loss of a group of labels
    /// with the given sum and size.
    pub fn group_target(self, label_sum: f64, count: usize) -> f64 {
        if self.is_binary() {
            sign(label_sum)
        } else {
            label_sum / count as f64
        }
    }

    pub fn check_labels(self, d: &Dataset) -> Result<()> {
        match d.labels().iter().position(|&y| !self.label_ok(y)) {
            None => Ok(()),
            Some(i) => Err(Error::input(format!(
                "label {} of sample {i} is outside the label set of {self}",
                d.label(i)
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::LeastSquares => "least_squares",
            LossKind::Hinge => "hinge",
            LossKind::Classification => "classification",
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ls" | "least_squares" => Ok(LossKind::LeastSquares),
            "hinge" => Ok(LossKind::Hinge),
            "class" | "classification" => Ok(LossKind::Classification),
            other => Err(Error::input(format!("unknown loss {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellStats {
    pub count: usize,
    pub label_sum: f64,
}

pub fn cell_stats(d: &Dataset, part: &CubicPartition) -> Result<HashMap<CellKey, CellStats>> {
    if d.dim() != part.dim() {
        return Err(Error::input(format!(
            "dataset dimension {} does not match partition dimension {}",
            d.dim(),
            part.dim()
        )));
    }
    let mut stats: HashMap<CellKey, CellStats> = HashMap::new();
    for (x, y) in d.iter() {
        let e = stats.entry(part.key_of(x)).or_default();
        e.count += 1;
        e.label_sum += y;
    }
    Ok(stats)
}

/// Piecewise constant function on the cells of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    partition: CubicPartition,
    coeffs: HashMap<CellKey, f64>,
    empty_default: f64,
}

impl Histogram {
    pub fn new(partition: CubicPartition, coeffs: HashMap<CellKey, f64>, empty_default: f64) -> Result<Self> {
        if !empty_default.is_finite() {
            return Err(Error::input("empty-cell default must be finite"));
        }
        for (k, c) in &coeffs {
            if k.dim() != partition.dim() {
                return Err(Error::input(format!("cell key {k} has the wrong dimension")));
            }
            if !c.is_finite() {
                return Err(Error::input(format!("coefficient of cell {k} is not finite")));
            }
        }
        Ok(Histogram {
            partition,
            coeffs,
            empty_default,
        })
    }

    pub fn partition(&self) -> &CubicPartition {
        &self.partition
    }

    pub fn empty_default(&self) -> f64 {
        self.empty_default
    }

    /// Stored coefficients (cells with data), unordered.
    pub fn coefficients(&self) -> &HashMap<CellKey, f64> {
        &self.coeffs
    }

    /// Stored coefficients sorted by cell key.
    pub fn sorted_coefficients(&self) -> Vec<(&CellKey, f64)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(k, c)| (k, *c)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn coefficient(&self, k: &CellKey) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(self.empty_default)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.partition.dim() {
            return Err(Error::input(format!(
                "point has dimension {}, histogram has {}",
                x.len(),
                self.partition.dim()
            )));
        }
        if !in_unit_cube(x) {
            return Err(Error::input(format!("{x:?} lies outside [-1,1]^d")));
        }
        Ok(self.value(x))
    }

    /// `-h`, including the empty-cell default.
    pub fn negated(&self) -> Histogram {
        Histogram {
            partition: self.partition.clone(),
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            empty_default: -self.empty_default,
        }
    }

    /// True if every coefficient, including the default, lies in the label set of `loss`.
    pub fn values_in_label_set(&self, loss: LossKind) -> bool {
        loss.label_ok(self.empty_default) && self.coeffs.values().all(|&c| loss.label_ok(c))
    }
}

impl Predictor for Histogram {
    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        self.coefficient(&self.partition.key_of(x))
    }
}

/// Histogram rule: label mean per cell for least squares, majority vote
/// (ties to +1) for hinge and classification.
pub fn fit_histogram(d: &Dataset, part: &CubicPartition, loss: LossKind) -> Result<Histogram> {
    loss.check_labels(d)?;
    let stats = cell_stats(d, part)?;
    let coeffs = stats
        .into_iter()
        .map(|(k, st)| (k, loss.group_target(st.label_sum, st.count)))
        .collect();
    Histogram::new(part.clone(), coeffs, loss.empty_default())
}

pub const DEFAULT_QUADRATURE_RESOLUTION: usize = 1024;

/// Cell averages of the regression function under the marginal of `dist`.
///
/// Each restricted cell is integrated with a tensor midpoint rule of
/// `resolution` nodes per axis. Cells of zero mass are left empty (value 0).
pub fn population_histogram(dist: &DistributionSpec, part: &CubicPartition, resolution: usize) -> Result<Histogram> {
    if dist.dim() != part.dim() {
        return Err(Error::input("distribution and partition dimensions differ"));
    }
    if resolution == 0 {
        return Err(Error::input("quadrature resolution must be positive"));
    }
    let cells = part.covering_cells();
    let coeffs: Vec<Option<(CellKey, f64)>> = cells
        .into_par_iter()
        .map(|k| {
            let a = part.cell_bounds(&k).restricted?;
            if !a.is_nondegenerate() {
                return None;
            }
            let [mass, integral] = quadrature::box_midpoint(&a, resolution, |x| {
                let p = dist.density(x);
                [p, p * dist.regression_function(x)]
            });
            (mass > 0.0).then(|| (k, integral / mass))
        })
        .collect();
    Histogram::new(part.clone(), coeffs.into_iter().flatten().collect(), 0.0)
}

/// Mean loss of `f` over the samples of `d`.
pub fn empirical_risk<F: Predictor + ?Sized>(f: &F, d: &Dataset, loss: LossKind) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let total: f64 = d.iter().map(|(x, y)| loss.eval(y, f.value(x))).sum();
    total / d.len() as f64
}
