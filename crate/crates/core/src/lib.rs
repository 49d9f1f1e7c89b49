//! Interpolating predictors that fit every training sample exactly and yet
//! generalize either as well as a classical histogram rule or as badly as
//! possible.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: cubic partitions of `[-1, 1]^d`, cell addressing, and the
//!   offset search that keeps small cubes around samples inside their cells.
//! - [`histogram`]: empirical and population histogram rules for least
//!   squares, hinge and classification loss.
//! - [`interpolate`]: histograms inflated by small cube-supported corrections
//!   ("bumps") so that the training data are interpolated, in a good and a
//!   bad flavor.
//! - [`relunet`]: explicit-weight two-hidden-layer ReLU networks and a
//!   compiler from (inflated) histograms to such networks.
//! - [`risk`]: losses, synthetic distributions with closed-form Bayes
//!   quantities, and reproducible Monte-Carlo / quadrature estimators.
//! - [`bench`]: width schedules, the rate experiment harness, and log-log
//!   slope fitting.
//!
//! ```
//! use interp_core::{data::Dataset, histogram::LossKind, interpolate, Predictor};
//!
//! let d = Dataset::from_rows(&[vec![-0.5], vec![0.1], vec![0.4]], vec![-1.0, 1.0, -1.0]).unwrap();
//! let good = interpolate::good_erm(&d, 0.5, LossKind::Classification).unwrap();
//! let bad = interpolate::bad_erm(&d, 0.5, LossKind::Classification).unwrap();
//! for (x, y) in d.iter() {
//!     assert_eq!(good.value(x), y);
//!     assert_eq!(bad.value(x), y);
//! }
//! ```

pub mod bench;
pub mod data;
pub mod error;
pub mod geometry;
pub mod histogram;
pub mod interpolate;
pub mod model;
pub mod relunet;
pub mod risk;

pub use error::{Error, Result};

/// A real-valued function on `[-1, 1]^d`.
///
/// `value` performs no validation; callers guarantee the dimension matches.
pub trait Predictor: Sync {
    fn value(&self, x: &[f64]) -> f64;
}

impl<F> Predictor for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}
