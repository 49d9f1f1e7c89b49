//! Synthetic distributions on `[-1, 1]^d × Y` with closed-form Bayes quantities.
//!
//! The marginal is a product of one-dimensional densities `(1 + a*u)/2` on
//! `[-1, 1]` (`a = 0` is uniform). Regression labels are `f*(x) + ξ` with
//! `ξ ~ U(-b, b)`; classification labels are `+1` with probability `η(x)`,
//! where `η` only depends on the first coordinate.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::histogram::{sign, LossKind};
use crate::risk::quadrature;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Uniform,
    /// Per-coordinate density `(1 + slope*u)/2`, `|slope| <= 1`.
    Linear { slope: f64 },
}

impl Marginal {
    fn slope(self) -> f64 {
        match self {
            Marginal::Uniform => 0.0,
            Marginal::Linear { slope } => slope,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressionFamily {
    /// `C * mean(x)`
    Linear,
    /// `(C/π) * cos(π * mean(x))`
    Cosine,
    /// `C * ‖x‖_∞^α`
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaFamily {
    /// `η(x) = 1[x_1 >= 0]`
    Threshold,
    Constant(f64),
    /// `η(x) = (1 + κ x_1)/2`
    Linear(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Task {
    Regression { fstar: RegressionFamily, noise_b: f64 },
    Classification { eta: EtaFamily },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    dim: usize,
    marginal: Marginal,
    density_bound: f64,
    task: Task,
    alpha: f64,
    lipschitz: f64,
    seed: Option<u64>,
}

impl DistributionSpec {
    /// `c` defaults to the analytic witness of the marginal when `None`.
    pub fn new(
        dim: usize,
        marginal: Marginal,
        task: Task,
        alpha: f64,
        lipschitz: f64,
        c: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dim must be positive"));
        }
        let a = marginal.slope();
        if !(a.abs() <= 1.0) {
            return Err(Error::input(format!("marginal slope {a} must lie in [-1, 1]")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::input(format!("alpha {alpha} must lie in (0, 1]")));
        }
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::input("C must be finite and non-negative"));
        }
        match task {
            Task::Regression { fstar, noise_b } => {
                if !(noise_b >= 0.0) {
                    return Err(Error::input("noise_b must be non-negative"));
                }
                if fstar != RegressionFamily::Power && alpha != 1.0 {
                    return Err(Error::input("linear and cosine regression functions require alpha = 1"));
                }
                let sup = match fstar {
                    RegressionFamily::Cosine => lipschitz / std::f64::consts::PI,
                    _ => lipschitz,
                };
                if sup + noise_b > 1.0 + 1e-12 {
                    return Err(Error::input(format!("sup|f*| + b = {} exceeds 1", sup + noise_b)));
                }
            }
            Task::Classification { eta } => match eta {
                EtaFamily::Constant(p) if !(0.0..=1.0).contains(&p) => {
                    return Err(Error::input(format!("eta constant {p} must lie in [0, 1]")));
                }
                EtaFamily::Linear(k) if !(k.abs() <= 1.0) => {
                    return Err(Error::input(format!("eta slope {k} must lie in [-1, 1]")));
                }
                _ => {}
            },
        }
        let witness = (1.0 + a.abs()).powi(dim as i32);
        let density_bound = c.unwrap_or(witness);
        if !(density_bound >= witness * (1.0 - 1e-12)) {
            return Err(Error::input(format!(
                "declared density bound c = {density_bound} is below the witness {witness}"
            )));
        }
        Ok(DistributionSpec {
            dim,
            marginal,
            density_bound,
            task,
            alpha,
            lipschitz,
            seed: None,
        })
    }

    /// Uniform marginal, `f*(x) = C*mean(x)`, uniform noise of half-width `b`.
    pub fn linear_regression(dim: usize, c_lip: f64, noise_b: f64) -> Result<Self> {
        DistributionSpec::new(
            dim,
            Marginal::Uniform,
            Task::Regression {
                fstar: RegressionFamily::Linear,
                noise_b,
            },
            1.0,
            c_lip,
            None,
        )
    }

    pub fn classification(dim: usize, marginal: Marginal, eta: EtaFamily) -> Result<Self> {
        let lip = match eta {
            EtaFamily::Linear(k) => k.abs(),
            _ => 1.0,
        };
        DistributionSpec::new(dim, marginal, Task::Classification { eta }, 1.0, lip, None)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn marginal(&self) -> Marginal {
        self.marginal
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Declared constant `c` with `P_X(x + t[-1,1]^d) <= c*t`.
    pub fn density_bound(&self) -> f64 {
        self.density_bound
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.task, Task::Classification { .. })
    }

    /// Least squares may be used with either task, hinge and classification
    /// loss only with binary labels.
    pub fn supports(&self, loss: LossKind) -> bool {
        !loss.is_binary() || self.is_classification()
    }

    pub fn check_loss(&self, loss: LossKind) -> Result<()> {
        if self.supports(loss) {
            Ok(())
        } else {
            Err(Error::input(format!("{loss} loss needs a classification distribution")))
        }
    }

    // ---- marginal -------------------------------------------------------

    pub fn density(&self, x: &[f64]) -> f64 {
        let a = self.marginal.slope();
        x.iter().map(|&u| 0.5 * (1.0 + a * u)).product()
    }

    fn axis_cdf(&self, u: f64) -> f64 {
        let a = self.marginal.slope();
        let u = u.clamp(-1.0, 1.0);
        0.5 * (u + 1.0) + 0.25 * a * (u * u - 1.0)
    }

    /// Inverse of the one-dimensional CDF, `p ∈ [0, 1]`.
    pub fn axis_quantile(&self, p: f64) -> f64 {
        let a = self.marginal.slope();
        let qa = 0.25 * a;
        let qc = 0.5 - 0.25 * a - p;
        // root of qa v^2 + v/2 + qc = 0 in the cancellation-free form
        let disc = (0.25 - 4.0 * qa * qc).max(0.0);
        (-2.0 * qc / (0.5 + disc.sqrt())).clamp(-1.0, 1.0)
    }

    /// `P_X(x + t[-1,1]^d)`.
    pub fn cube_mass(&self, x: &[f64], t: f64) -> f64 {
        x.iter()
            .map(|&c| (self.axis_cdf(c + t) - self.axis_cdf(c - t)).max(0.0))
            .product()
    }

    /// Smallest constant the marginal family guarantees: `2^d * sup p`.
    pub fn density_witness(&self) -> f64 {
        (1.0 + self.marginal.slope().abs()).powi(self.dim as i32)
    }

    // ---- conditional law ------------------------------------------------

    fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    pub fn eta(&self, x: &[f64]) -> Option<f64> {
        match self.task {
            Task::Classification { eta } => Some(match eta {
                EtaFamily::Threshold => {
                    if x[0] >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                EtaFamily::Constant(p) => p,
                EtaFamily::Linear(k) => 0.5 * (1.0 + k * x[0]),
            }),
            Task::Regression { .. } => None,
        }
    }

    /// Conditional mean `E[Y | x]`, the least squares Bayes function.
    pub fn regression_function(&self, x: &[f64]) -> f64 {
        match self.task {
            Task::Regression { fstar, .. } => {
                let c = self.lipschitz;
                match fstar {
                    RegressionFamily::Linear => c * Self::mean(x),
                    RegressionFamily::Cosine => {
                        c / std::f64::consts::PI * (std::f64::consts::PI * Self::mean(x)).cos()
                    }
                    RegressionFamily::Power => {
                        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        c * m.powf(self.alpha)
                    }
                }
            }
            Task::Classification { .. } => 2.0 * self.eta(x).unwrap() - 1.0,
        }
    }

    /// A Bayes decision function for `loss`.
    pub fn bayes_function(&self, loss: LossKind, x: &[f64]) -> f64 {
        let f = self.regression_function(x);
        if loss.is_binary() {
            sign(f)
        } else {
            f
        }
    }

    /// `E[L(Y, t) | X = x]`.
    pub fn conditional_risk(&self, loss: LossKind, x: &[f64], t: f64) -> f64 {
        match self.task {
            Task::Regression { noise_b, .. } => {
                let e = self.regression_function(x) - t;
                e * e + noise_b * noise_b / 3.0
            }
            Task::Classification { .. } => {
                let eta = self.eta(x).unwrap();
                eta * loss.eval(1.0, t) + (1.0 - eta) * loss.eval(-1.0, t)
            }
        }
    }

    /// `E[L(Y, t) | X = x] - inf_s E[L(Y, s) | X = x]`.
    pub fn conditional_excess(&self, loss: LossKind, x: &[f64], t: f64) -> f64 {
        match self.task {
            Task::Regression { .. } => {
                let e = self.regression_function(x) - t;
                e * e
            }
            Task::Classification { .. } => {
                let eta = self.eta(x).unwrap();
                match loss {
                    LossKind::LeastSquares => {
                        let e = 2.0 * eta - 1.0 - t;
                        e * e
                    }
                    LossKind::Classification => {
                        if (2.0 * eta - 1.0 >= 0.0) == (t >= 0.0) {
                            0.0
                        } else {
                            (2.0 * eta - 1.0).abs()
                        }
                    }
                    LossKind::Hinge => {
                        let r = eta * loss.eval(1.0, t) + (1.0 - eta) * loss.eval(-1.0, t);
                        (r - 2.0 * eta.min(1.0 - eta)).max(0.0)
                    }
                }
            }
        }
    }

    // ---- closed forms ---------------------------------------------------

    /// Bayes risk `R*` for `loss`.
    pub fn bayes_risk(&self, loss: LossKind) -> Result<f64> {
        self.check_loss(loss)?;
        Ok(match self.task {
            Task::Regression { noise_b, .. } => noise_b * noise_b / 3.0,
            Task::Classification { eta } => {
                let (class, ls) = match eta {
                    EtaFamily::Threshold => (0.0, 0.0),
                    EtaFamily::Constant(p) => (p.min(1.0 - p), 1.0 - (2.0 * p - 1.0).powi(2)),
                    // E|x_1| = 1/2 and E x_1^2 = 1/3 for every slope of the marginal
                    EtaFamily::Linear(k) => (0.5 * (1.0 - 0.5 * k.abs()), 1.0 - k * k / 3.0),
                };
                match loss {
                    LossKind::LeastSquares => ls,
                    LossKind::Classification => class,
                    LossKind::Hinge => 2.0 * class,
                }
            }
        })
    }

    /// `‖f*_ls‖²_{L2(P_X)}`: closed form for classification, quadrature for
    /// regression at `d <= 2`, Monte Carlo above.
    pub fn fstar_sq_norm(&self) -> f64 {
        match self.task {
            Task::Classification { eta } => match eta {
                EtaFamily::Threshold => 1.0,
                EtaFamily::Constant(p) => (2.0 * p - 1.0).powi(2),
                EtaFamily::Linear(k) => k * k / 3.0,
            },
            Task::Regression { .. } => {
                if self.dim <= 2 {
                    let [v] = quadrature::expectation(self, FSTAR_QUADRATURE_NODES, |x| {
                        let f = self.regression_function(x);
                        [f * f]
                    });
                    v
                } else {
                    let [e] = crate::risk::mc_expectation(self, FSTAR_MC_POINTS, FSTAR_MC_SEED, |x| {
                        let f = self.regression_function(x);
                        [f * f]
                    });
                    e.mean
                }
            }
        }
    }

    /// Risk of `-f*` for `loss`.
    pub fn worst_risk(&self, loss: LossKind) -> Result<f64> {
        let r = self.bayes_risk(loss)?;
        Ok(match loss {
            LossKind::LeastSquares => r + 4.0 * self.fstar_sq_norm(),
            LossKind::Classification => 1.0 - r,
            LossKind::Hinge => 2.0 - r,
        })
    }

    // ---- sampling -------------------------------------------------------

    pub(crate) fn draw_point<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out.iter_mut() {
            let p: f64 = rng.random();
            *v = crate::data::canonical(self.axis_quantile(p));
        }
    }

    pub(crate) fn draw_label<R: Rng>(&self, rng: &mut R, x: &[f64]) -> f64 {
        let u: f64 = rng.random();
        match self.task {
            Task::Regression { noise_b, .. } => {
                (self.regression_function(x) + noise_b * (2.0 * u - 1.0)).clamp(-1.0, 1.0)
            }
            Task::Classification { .. } => {
                if u < self.eta(x).unwrap() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::input("sample size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = vec![0.0; n * self.dim];
        let mut ys = Vec::with_capacity(n);
        for x in xs.chunks_exact_mut(self.dim) {
            self.draw_point(&mut rng, x);
            ys.push(self.draw_label(&mut rng, x));
        }
        Dataset::new(self.dim, xs, ys)
    }

    // ---- text config ----------------------------------------------------

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = match self.marginal {
            Marginal::Uniform => writeln!(s, "marginal = uniform"),
            Marginal::Linear { slope } => writeln!(s, "marginal = linear:{slope}"),
        };
        let _ = writeln!(s, "c = {}", self.density_bound);
        match self.task {
            Task::Regression { fstar, noise_b } => {
                let name = match fstar {
                    RegressionFamily::Linear => "linear",
                    RegressionFamily::Cosine => "cosine",
                    RegressionFamily::Power => "power",
                };
                let _ = writeln!(s, "task = regression\nfstar = {name}\nnoise_b = {noise_b}");
            }
            Task::Classification { eta } => {
                let _ = match eta {
                    EtaFamily::Threshold => writeln!(s, "task = classification\neta = threshold"),
                    EtaFamily::Constant(p) => writeln!(s, "task = classification\neta = constant:{p}"),
                    EtaFamily::Linear(k) => writeln!(s, "task = classification\neta = linear:{k}"),
                };
            }
        }
        let _ = writeln!(s, "alpha = {}\nC = {}", self.alpha, self.lipschitz);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        s
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }
}

const FSTAR_QUADRATURE_NODES: usize = 10_000;
const FSTAR_MC_POINTS: usize = 1 << 22;
const FSTAR_MC_SEED: u64 = 0x5eed_f57a;

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| Error::input(format!("{key}: cannot parse {v:?} as a number")))
}

fn split_param<'a>(key: &str, v: &'a str) -> Result<(&'a str, Option<f64>)> {
    match v.split_once(':') {
        None => Ok((v, None)),
        Some((name, p)) => Ok((name.trim(), Some(parse_num(key, p.trim())?))),
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `key = value` lines; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut marginal = Marginal::Uniform;
        let mut c = None;
        let mut task = None;
        let mut fstar = RegressionFamily::Linear;
        let mut alpha = 1.0;
        let mut lip = None;
        let mut noise_b = 0.0;
        let mut eta = None;
        let mut seed = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::input(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dim" => {
                    dim = Some(value.parse::<usize>().map_err(|_| Error::input(format!("dim: bad value {value:?}")))?)
                }
                "marginal" => {
                    marginal = match split_param(key, value)? {
                        ("uniform", None) => Marginal::Uniform,
                        ("linear", Some(slope)) => Marginal::Linear { slope },
                        _ => return Err(Error::input(format!("marginal: unknown family {value:?}"))),
                    }
                }
                "c" => c = Some(parse_num(key, value)?),
                "task" => task = Some(value.to_string()),
                "fstar" => {
                    fstar = match value {
                        "linear" => RegressionFamily::Linear,
                        "cosine" => RegressionFamily::Cosine,
                        "power" => RegressionFamily::Power,
                        _ => return Err(Error::input(format!("fstar: unknown family {value:?}"))),
                    }
                }
                "alpha" => alpha = parse_num(key, value)?,
                "C" => lip = Some(parse_num(key, value)?),
                "noise_b" => noise_b = parse_num(key, value)?,
                "eta" => {
                    eta = Some(match split_param(key, value)? {
                        ("threshold", None) => EtaFamily::Threshold,
                        ("constant", Some(p)) => EtaFamily::Constant(p),
                        ("linear", Some(k)) => EtaFamily::Linear(k),
                        _ => return Err(Error::input(format!("eta: unknown family {value:?}"))),
                    })
                }
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|_| Error::input(format!("seed: bad value {value:?}")))?)
                }
                other => return Err(Error::input(format!("unknown key {other:?}"))),
            }
        }
        let dim = dim.ok_or_else(|| Error::input("missing key dim"))?;
        let task = match task.as_deref() {
            Some("regression") => Task::Regression { fstar, noise_b },
            Some("classification") => Task::Classification {
                eta: eta.ok_or_else(|| Error::input("classification needs eta"))?,
            },
            Some(other) => return Err(Error::input(format!("task: unknown value {other:?}"))),
            None => return Err(Error::input("missing key task")),
        };
        let lip = match (lip, task) {
            (Some(l), _) => l,
            (None, Task::Classification { eta: EtaFamily::Linear(k) }) => k.abs(),
            (None, Task::Classification { .. }) => 1.0,
            (None, Task::Regression { .. }) => return Err(Error::input("regression needs C")),
        };
        Ok(DistributionSpec::new(dim, marginal, task, alpha, lip, c)?.with_seed(seed))
    }
}
