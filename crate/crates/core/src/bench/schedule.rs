use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// `s_n = (ln n / n)^{(1-γ)/d}`
    #[default]
    Power,
    /// `s_n = 1 / ln n`, independent of the smoothness
    InverseLog,
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Schedule::Power),
            "inverse-log" | "inverse_log" => Ok(Schedule::InverseLog),
            _ => Err(Error::input(format!("unknown width schedule {s:?}"))),
        }
    }
}

/// Largest admissible `γ` for smoothness `alpha` in dimension `d`.
pub fn gamma_max(alpha: f64, d: usize) -> f64 {
    2.0 * alpha / (2.0 * alpha + d as f64)
}

/// Cell width for sample size `n`, clamped into `(0, 1]`.
pub fn width_schedule(n: f64, gamma: f64, d: usize, schedule: Schedule) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::input(format!("width schedule needs n >= 2, got {n}")));
    }
    if d == 0 {
        return Err(Error::input("dimension must be positive"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::input(format!("gamma {gamma} must lie in [0, 1)")));
    }
    let ln = n.ln();
    let s = match schedule {
        Schedule::Power => (ln / n).powf((1.0 - gamma) / d as f64),
        Schedule::InverseLog => 1.0 / ln,
    };
    Ok(s.min(1.0))
}
