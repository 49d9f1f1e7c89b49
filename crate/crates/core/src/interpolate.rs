//! Inflated histograms: a histogram plus constant corrections on small closed
//! cubes around the distinct sample points, chosen so that the training set
//! is interpolated.

use std::collections::HashMap;

use crate::data::{in_unit_cube, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{align_offset, min_gap_separation, verify_proper_alignment, CubicPartition};
use crate::histogram::{fit_histogram, Histogram, LossKind};
use crate::Predictor;

/// Smallest bump radius cap; below it cube faces near `|x| = 1` stop being
/// representable with a usable margin in double precision.
pub const RADIUS_FLOOR: f64 = 9.094947017729282e-13; // 2^-40

/// `r = max(2^-n, 2^-40)`.
pub fn radius_cap(n: usize) -> f64 {
    if n >= 40 {
        RADIUS_FLOOR
    } else {
        (0.5f64).powi(n as i32).max(RADIUS_FLOOR)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationTarget {
    pub center: Vec<f64>,
    /// Minimizer over the label set of the summed loss of all labels at `center`.
    pub target: f64,
    pub count: usize,
}

/// Groups samples by bitwise-equal coordinates, in order of first appearance.
pub fn distinct_targets(d: &Dataset, loss: LossKind) -> Result<Vec<InterpolationTarget>> {
    loss.check_labels(d)?;
    let (groups, _) = group_samples(d);
    Ok(groups
        .into_iter()
        .map(|(first, sum, count)| InterpolationTarget {
            center: d.point(first).to_vec(),
            target: loss.group_target(sum, count),
            count,
        })
        .collect())
}

/// Returns `(first index, label sum, count)` per group and the group of every sample.
fn group_samples(d: &Dataset) -> (Vec<(usize, f64, usize)>, Vec<usize>) {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(d.len());
    let mut groups = Vec::new();
    let mut member = Vec::with_capacity(d.len());
    for (i, (x, y)) in d.iter().enumerate() {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push((i, 0.0, 0));
            groups.len() - 1
        });
        groups[g].1 += y;
        groups[g].2 += 1;
        member.push(g);
    }
    (groups, member)
}

/// Smallest empirical risk any predictor can attain on `d`.
pub fn empirical_bayes_risk(d: &Dataset, loss: LossKind) -> Result<f64> {
    loss.check_labels(d)?;
    if d.is_empty() {
        return Ok(0.0);
    }
    let (groups, member) = group_samples(d);
    let targets: Vec<f64> = groups.iter().map(|&(_, s, c)| loss.group_target(s, c)).collect();
    let total: f64 = d.iter().zip(&member).map(|((_, y), &g)| loss.eval(y, targets[g])).sum();
    Ok(total / d.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: Vec<f64>,
    pub amplitude: f64,
}

/// Spatial hash of the bump cubes with cell width `2t`.
#[derive(Debug, Clone, Default)]
struct BumpIndex {
    width: f64,
    cells: HashMap<Vec<i64>, Vec<u32>>,
}

impl BumpIndex {
    fn build(bumps: &[Bump], t: f64) -> Self {
        let width = 2.0 * t;
        let mut cells: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
        for (i, b) in bumps.iter().enumerate() {
            // pad by one hash cell on each side so rounding in the key never loses a bump
            let ranges: Vec<(i64, i64)> = b
                .center
                .iter()
                .map(|&c| (((c - t) / width).floor() as i64 - 1, ((c + t) / width).floor() as i64 + 1))
                .collect();
            let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'outer: loop {
                cells.entry(cur.clone()).or_default().push(i as u32);
                for axis in (0..cur.len()).rev() {
                    if cur[axis] < ranges[axis].1 {
                        cur[axis] += 1;
                        continue 'outer;
                    }
                    cur[axis] = ranges[axis].0;
                }
                break;
            }
        }
        BumpIndex { width, cells }
    }

    fn candidates(&self, x: &[f64]) -> &[u32] {
        let key: Vec<i64> = x.iter().map(|&v| (v / self.width).floor() as i64).collect();
        self.cells.get(&key).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone)]
pub struct InflatedHistogram {
    base: Histogram,
    bumps: Vec<Bump>,
    radius: f64,
    index: BumpIndex,
}

impl PartialEq for InflatedHistogram {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.bumps == other.bumps && self.radius == other.radius
    }
}

pub(crate) fn check_alignment(bumps: &[Bump], t: f64, part: &CubicPartition) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::input(format!("bump radius {t} must be positive and finite")));
    }
    let centers: Vec<&[f64]> = bumps.iter().map(|b| b.center.as_slice()).collect();
    let report = verify_proper_alignment(&centers, t, part);
    if let Some(i) = report.first_outside() {
        return Err(Error::Alignment {
            index: i,
            center: bumps[i].center.clone(),
            reason: format!("cube of radius {t} leaves its partition cell"),
        });
    }
    if let Some((i, j)) = report.overlapping_pair {
        return Err(Error::Alignment {
            index: i,
            center: bumps[i].center.clone(),
            reason: format!("cube of radius {t} meets the cube around center #{j}"),
        });
    }
    Ok(())
}

impl InflatedHistogram {
    /// Assembles an inflated histogram from explicit parts, verifying proper
    /// alignment, base values in `[-1, 1]` and `|b_i| <= 2`.
    pub fn from_parts(base: Histogram, bumps: Vec<Bump>, radius: f64) -> Result<Self> {
        let dim = base.partition().dim();
        if let Some((k, c)) = base.coefficients().iter().find(|(_, c)| c.abs() > 1.0) {
            return Err(Error::input(format!("base coefficient {c} of cell {k} is outside [-1, 1]")));
        }
        if base.empty_default().abs() > 1.0 {
            return Err(Error::input(format!("base default {} is outside [-1, 1]", base.empty_default())));
        }
        for (i, b) in bumps.iter().enumerate() {
            if b.center.len() != dim {
                return Err(Error::input(format!("bump {i} has dimension {}, expected {dim}", b.center.len())));
            }
            if !in_unit_cube(&b.center) {
                return Err(Error::input(format!("bump center {i} lies outside [-1,1]^d")));
            }
            if !(b.amplitude.abs() <= 2.0) {
                return Err(Error::input(format!("bump amplitude {} is outside [-2, 2]", b.amplitude)));
            }
        }
        check_alignment(&bumps, radius, base.partition())?;
        let index = BumpIndex::build(&bumps, radius);
        Ok(InflatedHistogram {
            base,
            bumps,
            radius,
            index,
        })
    }

    pub fn base(&self) -> &Histogram {
        &self.base
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn partition(&self) -> &CubicPartition {
        self.base.partition()
    }

    /// Index of the closed bump cube containing `x`, if any.
    pub fn bump_at(&self, x: &[f64]) -> Option<usize> {
        let t = self.radius;
        self.index
            .candidates(x)
            .iter()
            .map(|&i| i as usize)
            .find(|&i| self.bumps[i].center.iter().zip(x).all(|(c, v)| (v - c).abs() <= t))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.partition().dim() {
            return Err(Error::input(format!(
                "point has dimension {}, model has {}",
                x.len(),
                self.partition().dim()
            )));
        }
        if !in_unit_cube(x) {
            return Err(Error::input(format!("{x:?} lies outside [-1,1]^d")));
        }
        Ok(self.value(x))
    }
}

impl Predictor for InflatedHistogram {
    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        let h = self.base.value(x);
        match self.bump_at(x) {
            Some(i) => h + self.bumps[i].amplitude,
            None => h,
        }
    }
}

fn amplitude_ok(loss: LossKind, b: f64) -> bool {
    if loss.is_binary() {
        b == 0.0 || b == 2.0 || b == -2.0
    } else {
        b.abs() <= 2.0
    }
}

/// Adds to `base` one bump of radius `t` per target, with amplitude
/// `target - base(center)`.
pub fn build_inflated(base: Histogram, targets: &[InterpolationTarget], t: f64, loss: LossKind) -> Result<InflatedHistogram> {
    if !base.values_in_label_set(loss) {
        return Err(Error::input(format!("base histogram has a coefficient outside the label set of {loss}")));
    }
    let mut bumps = Vec::with_capacity(targets.len());
    for (i, tg) in targets.iter().enumerate() {
        if tg.center.len() != base.partition().dim() {
            return Err(Error::input(format!("target {i} has the wrong dimension")));
        }
        if !loss.label_ok(tg.target) {
            return Err(Error::input(format!("target {} of center #{i} is outside the label set", tg.target)));
        }
        let c = base.value(&tg.center);
        let amplitude = if c == tg.target { 0.0 } else { tg.target - c };
        debug_assert!(amplitude_ok(loss, amplitude));
        bumps.push(Bump {
            center: tg.center.clone(),
            amplitude,
        });
    }
    InflatedHistogram::from_parts(base, bumps, t)
}

struct Prepared {
    targets: Vec<InterpolationTarget>,
    base: Histogram,
    radius: f64,
}

fn prepare(d: &Dataset, s: f64, loss: LossKind) -> Result<Prepared> {
    if d.is_empty() {
        return Err(Error::input("dataset is empty"));
    }
    let targets = distinct_targets(d, loss)?;
    let centers: Vec<&[f64]> = targets.iter().map(|t| t.center.as_slice()).collect();
    let aligned = align_offset(&centers, s)?;
    let part = aligned.partition(s)?;
    let radius = min_gap_separation(&centers)?.min(aligned.tmax).min(radius_cap(d.len()));
    let base = fit_histogram(d, &part, loss)?;
    Ok(Prepared { targets, base, radius })
}

/// Interpolating predictor whose histogram part is the histogram rule.
pub fn good_erm(d: &Dataset, s: f64, loss: LossKind) -> Result<InflatedHistogram> {
    let p = prepare(d, s, loss)?;
    build_inflated(p.base, &p.targets, p.radius, loss)
}

/// Interpolating predictor whose histogram part is the negated histogram rule.
pub fn bad_erm(d: &Dataset, s: f64, loss: LossKind) -> Result<InflatedHistogram> {
    let p = prepare(d, s, loss)?;
    build_inflated(p.base.negated(), &p.targets, p.radius, loss)
}

/// `(good_erm, bad_erm)` sharing the alignment work.
pub fn erm_pair(d: &Dataset, s: f64, loss: LossKind) -> Result<(InflatedHistogram, InflatedHistogram)> {
    let p = prepare(d, s, loss)?;
    let neg = p.base.negated();
    let good = build_inflated(p.base, &p.targets, p.radius, loss)?;
    let bad = build_inflated(neg, &p.targets, p.radius, loss)?;
    Ok((good, bad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationCheck {
    pub empirical_risk: f64,
    pub bayes_empirical_risk: f64,
    /// `empirical_risk - bayes_empirical_risk`
    pub gap: f64,
    pub interpolates: bool,
}

/// Least squares tolerance for the interpolation check.
pub const LS_INTERPOLATION_TOL: f64 = 1e-12;

/// Compares the empirical risk of `f` with the smallest attainable one.
/// Exact equality is required for hinge and classification loss.
pub fn check_interpolation<F: Predictor + ?Sized>(f: &F, d: &Dataset, loss: LossKind) -> Result<InterpolationCheck> {
    let bayes = empirical_bayes_risk(d, loss)?;
    let risk = crate::histogram::empirical_risk(f, d, loss);
    let gap = risk - bayes;
    let interpolates = match loss {
        LossKind::LeastSquares => gap.abs() <= LS_INTERPOLATION_TOL,
        _ => gap == 0.0,
    };
    Ok(InterpolationCheck {
        empirical_risk: risk,
        bayes_empirical_risk: bayes,
        gap,
        interpolates,
    })
}
