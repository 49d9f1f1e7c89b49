use super::{PredictorKind, RateRow};
use crate::error::{Error, Result};

/// Least squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Slope of `ln(value)` against `ln(n / ln n)`; needs four distinct `n`.
pub fn loglog_slope(points: &[(usize, f64)]) -> Result<f64> {
    let mut ns: Vec<usize> = points.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 {
        return Err(Error::input(format!("slope fit needs at least 4 distinct n, got {}", ns.len())));
    }
    if let Some(p) = points.iter().find(|p| p.0 < 2 || !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::input(format!("cannot take logs of point {p:?}")));
    }
    let xs: Vec<f64> = points
        .iter()
        .map(|&(n, _)| {
            let n = n as f64;
            (n / n.ln()).ln()
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(ls_slope(&xs, &ys))
}

/// Per-`n` summary of the rows of one predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct NSummary {
    pub n: usize,
    pub reps: usize,
    pub mean_excess: f64,
    pub median_excess: f64,
    pub mean_risk: f64,
    pub mean_l2sq_fstar: f64,
    pub mean_l2sq_neg_fstar: f64,
    pub all_interpolate: bool,
}

pub fn summarize(rows: &[RateRow], predictor: PredictorKind) -> Vec<NSummary> {
    let mut ns: Vec<usize> = rows.iter().filter(|r| r.predictor == predictor).map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let sel: Vec<&RateRow> = rows.iter().filter(|r| r.predictor == predictor && r.n == n).collect();
            let k = sel.len() as f64;
            let mean = |f: fn(&RateRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / k;
            let mut ex: Vec<f64> = sel.iter().map(|r| r.excess_risk).collect();
            ex.sort_by(f64::total_cmp);
            let m = ex.len();
            let median = if m % 2 == 1 { ex[m / 2] } else { 0.5 * (ex[m / 2 - 1] + ex[m / 2]) };
            NSummary {
                n,
                reps: sel.len(),
                mean_excess: mean(|r| r.excess_risk),
                median_excess: median,
                mean_risk: mean(|r| r.risk),
                mean_l2sq_fstar: mean(|r| r.l2sq_fstar),
                mean_l2sq_neg_fstar: mean(|r| r.l2sq_neg_fstar),
                all_interpolate: sel.iter().all(|r| r.interpolates),
            }
        })
        .collect()
}

/// Slope of the mean excess risk of `predictor` per `n`.
pub fn fit_loglog_slope(rows: &[RateRow], predictor: PredictorKind) -> Result<f64> {
    let points: Vec<(usize, f64)> = summarize(rows, predictor).iter().map(|s| (s.n, s.mean_excess)).collect();
    loglog_slope(&points)
}
