//! Rate experiments: sample, build the interpolating predictors, and
//! estimate their excess risk and distance to `±f*` as `n` grows.

mod schedule;
mod slope;

pub use schedule::{gamma_max, width_schedule, Schedule};
pub use slope::{fit_loglog_slope, loglog_slope, ls_slope, summarize, NSummary};

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::LossKind;
use crate::interpolate::{check_interpolation, erm_pair};
use crate::relunet::compile_interpolant;
use crate::risk::{mc_expectation, DistributionSpec};
use crate::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    GoodErm,
    BadErm,
    GoodDnn,
    BadDnn,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 4] = [
        PredictorKind::GoodErm,
        PredictorKind::BadErm,
        PredictorKind::GoodDnn,
        PredictorKind::BadDnn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PredictorKind::GoodErm => "good_erm",
            PredictorKind::BadErm => "bad_erm",
            PredictorKind::GoodDnn => "good_dnn",
            PredictorKind::BadDnn => "bad_dnn",
        }
    }

    pub fn is_good(self) -> bool {
        matches!(self, PredictorKind::GoodErm | PredictorKind::GoodDnn)
    }
}

impl std::fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PredictorKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim().replace('-', "_"))
            .ok_or_else(|| Error::input(format!("unknown predictor {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub dist: DistributionSpec,
    pub loss: LossKind,
    pub n_grid: Vec<usize>,
    pub gamma: f64,
    pub schedule: Schedule,
    pub repetitions: usize,
    pub mc_eval_points: usize,
    pub seed: u64,
    pub predictors: Vec<PredictorKind>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Record wall time per row (makes the CSV non-reproducible).
    pub timing: bool,
}

impl ExperimentPlan {
    /// Plan with the optimal `γ`, all four predictors and 10^5 evaluation points.
    pub fn new(dist: DistributionSpec, loss: LossKind, n_grid: Vec<usize>, repetitions: usize, seed: u64) -> Self {
        let gamma = gamma_max(dist.alpha(), dist.dim());
        ExperimentPlan {
            dist,
            loss,
            n_grid,
            gamma,
            schedule: Schedule::Power,
            repetitions,
            mc_eval_points: 100_000,
            seed,
            predictors: PredictorKind::ALL.to_vec(),
            threads: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.check_loss(self.loss)?;
        let gmax = gamma_max(self.dist.alpha(), self.dist.dim());
        if !(self.gamma >= 0.0 && self.gamma <= gmax * (1.0 + 1e-12)) {
            return Err(Error::input(format!("gamma {} is outside [0, {gmax}]", self.gamma)));
        }
        if self.n_grid.is_empty() {
            return Err(Error::input("n grid is empty"));
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n < 2) {
            return Err(Error::input(format!("sample size {n} is below 2")));
        }
        if self.repetitions == 0 {
            return Err(Error::input("need at least one repetition"));
        }
        if self.mc_eval_points == 0 {
            return Err(Error::input("need at least one evaluation point"));
        }
        if self.predictors.is_empty() {
            return Err(Error::input("no predictors requested"));
        }
        let mut p = self.predictors.clone();
        p.sort();
        p.dedup();
        if p.len() != self.predictors.len() {
            return Err(Error::input("predictor list has duplicates"));
        }
        if self.threads == Some(0) {
            return Err(Error::input("thread count must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub rep: usize,
    pub s_n: f64,
    pub predictor: PredictorKind,
    /// `R* + excess_risk`
    pub risk: f64,
    pub excess_risk: f64,
    pub excess_stderr: f64,
    /// `R† - risk`
    pub deficit: f64,
    pub l2sq_fstar: f64,
    pub l2sq_neg_fstar: f64,
    pub interpolates: bool,
    pub wall_ms: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "n",
    "rep",
    "s_n",
    "predictor",
    "risk",
    "excess_risk",
    "excess_stderr",
    "deficit",
    "l2sq_to_fstar",
    "l2sq_to_neg_fstar",
    "interpolates",
];

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one stream of one `(n, rep)` job.
pub fn derive_seed(base: u64, n: usize, rep: usize, stream: u64) -> u64 {
    splitmix(splitmix(splitmix(base ^ splitmix(n as u64)) ^ rep as u64) ^ stream)
}

struct Context<'a> {
    plan: &'a ExperimentPlan,
    bayes: f64,
    worst: f64,
}

impl Context<'_> {
    fn measure<F: Predictor>(
        &self,
        f: &F,
        d: &crate::data::Dataset,
        eval_seed: u64,
    ) -> Result<(bool, [crate::risk::RiskEstimate; 3])> {
        let (dist, loss) = (&self.plan.dist, self.plan.loss);
        let interp = check_interpolation(f, d, loss)?.interpolates;
        let est = mc_expectation(dist, self.plan.mc_eval_points, eval_seed, |x| {
            let v = f.value(x);
            let b = dist.bayes_function(loss, x);
            [dist.conditional_excess(loss, x, v), (v - b) * (v - b), (v + b) * (v + b)]
        });
        Ok((interp, est))
    }

    fn job(&self, n: usize, rep: usize) -> Result<Vec<RateRow>> {
        let plan = self.plan;
        let data = plan.dist.sample(n, derive_seed(plan.seed, n, rep, 0))?;
        let eval_seed = derive_seed(plan.seed, n, rep, 1);
        let s = width_schedule(n as f64, plan.gamma, plan.dist.dim(), plan.schedule)?;
        let start = Instant::now();
        let (good, bad) = erm_pair(&data, s, plan.loss)?;
        let shared_ms = start.elapsed().as_secs_f64() * 1e3;
        let mut rows = Vec::with_capacity(plan.predictors.len());
        for &kind in &plan.predictors {
            let start = Instant::now();
            let erm = if kind.is_good() { &good } else { &bad };
            let (interp, est) = match kind {
                PredictorKind::GoodErm | PredictorKind::BadErm => self.measure(erm, &data, eval_seed)?,
                PredictorKind::GoodDnn | PredictorKind::BadDnn => {
                    let net = compile_interpolant(erm)?;
                    self.measure(&net, &data, eval_seed)?
                }
            };
            let ms = shared_ms + start.elapsed().as_secs_f64() * 1e3;
            let risk = self.bayes + est[0].mean;
            rows.push(RateRow {
                n,
                rep,
                s_n: s,
                predictor: kind,
                risk,
                excess_risk: est[0].mean,
                excess_stderr: est[0].stderr,
                deficit: self.worst - risk,
                l2sq_fstar: est[1].mean,
                l2sq_neg_fstar: est[2].mean,
                interpolates: interp,
                wall_ms: plan.timing.then_some(ms),
            });
        }
        Ok(rows)
    }
}

/// Runs every `(n, repetition)` job; rows come back ordered by `n`, then
/// repetition, then the order of `plan.predictors`.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<RateRow>> {
    plan.validate()?;
    let ctx = Context {
        plan,
        bayes: plan.dist.bayes_risk(plan.loss)?,
        worst: plan.dist.worst_risk(plan.loss)?,
    };
    let jobs: Vec<(usize, usize)> = plan
        .n_grid
        .iter()
        .flat_map(|&n| (0..plan.repetitions).map(move |r| (n, r)))
        .collect();
    let work = || -> Result<Vec<Vec<RateRow>>> { jobs.par_iter().map(|&(n, r)| ctx.job(n, r)).collect() };
    let nested = match plan.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::input(format!("cannot build thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(nested.into_iter().flatten().collect())
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes rows with the fixed column set (plus `wall_ms` when `timing`).
pub fn write_rows_csv<W: Write>(rows: &[RateRow], writer: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if timing {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.n.to_string(),
            r.rep.to_string(),
            fmt_float(r.s_n),
            r.predictor.to_string(),
            fmt_float(r.risk),
            fmt_float(r.excess_risk),
            fmt_float(r.excess_stderr),
            fmt_float(r.deficit),
            fmt_float(r.l2sq_fstar),
            fmt_float(r.l2sq_neg_fstar),
            r.interpolates.to_string(),
        ];
        if timing {
            rec.push(r.wall_ms.map_or_else(String::new, fmt_float));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
