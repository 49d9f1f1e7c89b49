//! Losses, synthetic distributions, and risk estimators.

mod dist;
mod estimate;
pub mod quadrature;

pub use dist::{DistributionSpec, EtaFamily, Marginal, RegressionFamily, Task};
pub use estimate::{
    l2_distance, mc_excess_risk, mc_expectation, mc_joint_expectation, mc_risk, L2Method, RiskEstimate,
};

use crate::histogram::LossKind;

#[inline]
pub fn loss_eval(loss: LossKind, y: f64, t: f64) -> f64 {
    loss.eval(y, t)
}
