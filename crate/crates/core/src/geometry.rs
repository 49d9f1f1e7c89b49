//! Cubic partitions of `R^d`, their restriction to `X = [-1, 1]^d`, and the
//! coordinate-wise offset search that keeps small cubes around sample points
//! away from every cell face.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer lattice address `k` of the cell `offset + s*k + [0, s)^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey(pub Vec<i64>);

impl CellKey {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CellKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|p| p.trim().parse::<i64>().map_err(|_| Error::Format(format!("bad cell key {s:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(CellKey)
    }
}

/// Axis-aligned box `[lo, hi]`. Whether faces belong to the box depends on
/// the caller (partition cells are half-open, bump cubes are closed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Box {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::input("box corners must share a positive dimension"));
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::input("box corners must be finite"));
        }
        Ok(Box { lo, hi })
    }

    /// The closed cube `center + t*[-1, 1]^d`.
    pub fn cube(center: &[f64], t: f64) -> Self {
        Box {
            lo: center.iter().map(|c| c - t).collect(),
            hi: center.iter().map(|c| c + t).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(a, b)| a < b)
    }

    pub fn min_side(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    pub fn contains_open(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a < v && v < b)
    }

    pub fn contains_half_open(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v < b)
    }

    /// The box shrunk by `eps` on every side (may be inverted if `eps` is too large).
    pub fn shrink(&self, eps: f64) -> Box {
        Box {
            lo: self.lo.iter().map(|a| a + eps).collect(),
            hi: self.hi.iter().map(|b| b - eps).collect(),
        }
    }
}

/// Bounds of one cell: the unrestricted cell `B_k` and its trace `A_k = B_k ∩ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellBounds {
    pub full: Box,
    /// `None` when the cell misses `X`. Coordinates are clamped to `[-1, 1]`;
    /// the upper face is open unless it is the face `x_i = 1` of `X`.
    pub restricted: Option<Box>,
}

/// Cubic partition of width `s` with offset `x†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicPartition {
    dim: usize,
    width: f64,
    offset: Vec<f64>,
}

impl CubicPartition {
    /// `offset` is reduced coordinate-wise into `[0, width)`.
    pub fn new(width: f64, offset: Vec<f64>) -> Result<Self> {
        if offset.is_empty() {
            return Err(Error::input("partition dimension must be positive"));
        }
        if !(width > 0.0 && width <= 1.0) {
            return Err(Error::input(format!("width {width} is not in (0, 1]")));
        }
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("offset must be finite"));
        }
        Ok(CubicPartition {
            dim: offset.len(),
            width,
            offset: offset.into_iter().map(|o| o.rem_euclid(width)).collect(),
        })
    }

    /// Partition with zero offset.
    pub fn grid(dim: usize, width: f64) -> Result<Self> {
        CubicPartition::new(width, vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    #[inline]
    fn face(&self, axis: usize, k: i64) -> f64 {
        self.offset[axis] + self.width * k as f64
    }

    /// Index along one axis, reconciled with `face` so that
    /// `face(k) <= v < face(k + 1)` holds in floating point.
    #[inline]
    fn axis_index(&self, axis: usize, v: f64) -> i64 {
        let mut k = ((v - self.offset[axis]) / self.width).floor() as i64;
        for _ in 0..4 {
            if v < self.face(axis, k) {
                k -= 1;
            } else if v >= self.face(axis, k + 1) {
                k += 1;
            } else {
                break;
            }
        }
        k
    }

    pub fn cell_index(&self, x: &[f64]) -> Result<CellKey> {
        if x.len() != self.dim {
            return Err(Error::input(format!("point has dimension {}, partition has {}", x.len(), self.dim)));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("point has a non-finite coordinate"));
        }
        Ok(self.key_of(x))
    }

    /// `cell_index` without validation; `x` must be finite with matching dimension.
    #[inline]
    pub fn key_of(&self, x: &[f64]) -> CellKey {
        CellKey(x.iter().enumerate().map(|(i, &v)| self.axis_index(i, v)).collect())
    }

    pub fn cell_bounds(&self, k: &CellKey) -> CellBounds {
        assert_eq!(k.dim(), self.dim, "cell key dimension mismatch");
        let lo: Vec<f64> = k.0.iter().enumerate().map(|(i, &ki)| self.face(i, ki)).collect();
        let hi: Vec<f64> = k.0.iter().enumerate().map(|(i, &ki)| self.face(i, ki + 1)).collect();
        let meets_x = lo.iter().zip(&hi).all(|(&a, &b)| a <= 1.0 && b > -1.0);
        let restricted = meets_x.then(|| Box {
            lo: lo.iter().map(|a| a.max(-1.0)).collect(),
            hi: hi.iter().map(|b| b.min(1.0)).collect(),
        });
        CellBounds {
            full: Box { lo, hi },
            restricted,
        }
    }

    /// Per-axis inclusive index ranges of the cells meeting `X`.
    pub fn covering_ranges(&self) -> Vec<(i64, i64)> {
        (0..self.dim).map(|i| (self.axis_index(i, -1.0), self.axis_index(i, 1.0))).collect()
    }

    /// Number of cells meeting `X`.
    pub fn covering_count(&self) -> u128 {
        self.covering_ranges()
            .iter()
            .map(|(a, b)| (b - a + 1) as u128)
            .fold(1u128, u128::saturating_mul)
    }

    /// All cells `k` with `A_k` non-empty, in lexicographic order.
    pub fn covering_cells(&self) -> Vec<CellKey> {
        let ranges = self.covering_ranges();
        let mut out = Vec::new();
        let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(CellKey(cur.clone()));
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < ranges[axis].1 {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = ranges[axis].0;
            }
        }
    }
}

/// One third of the smallest positive gap between sorted coordinate values,
/// minimized over axes; `f64::INFINITY` if no axis has a positive gap.
pub fn min_gap_separation<P: AsRef<[f64]>>(points: &[P]) -> Result<f64> {
    let first = points.first().ok_or_else(|| Error::input("point list is empty"))?;
    let dim = first.as_ref().len();
    check_dims(points, dim)?;
    let mut best = f64::INFINITY;
    let mut column = Vec::with_capacity(points.len());
    for axis in 0..dim {
        column.clear();
        column.extend(points.iter().map(|p| p.as_ref()[axis]));
        column.sort_by(f64::total_cmp);
        for w in column.windows(2) {
            let gap = w[1] - w[0];
            if gap > 0.0 && gap < best {
                best = gap;
            }
        }
    }
    Ok(best / 3.0)
}

/// Offset found by the coordinate-wise empty-bin search.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub offset: Vec<f64>,
    /// Bin width `s / (m + 1)`.
    pub delta: f64,
    /// Largest admissible cube radius `s / (3m + 3)`.
    pub tmax: f64,
    /// Size `(m + 1)^d` of the implicit candidate set (saturating).
    pub candidate_count: u128,
    /// Bins actually scanned for emptiness, at most `(m + 1) * d`.
    pub bins_inspected: usize,
}

impl AlignmentResult {
    pub fn partition(&self, width: f64) -> Result<CubicPartition> {
        CubicPartition::new(width, self.offset.clone())
    }
}

/// Finds an offset for a width-`s` cubic partition such that every cube
/// `x_i + t[-1, 1]^d` with `t <= s/(3m+3)` lies inside the cell of `x_i`.
///
/// Along each axis the residues `x mod s` are counted into `m + 1` bins of
/// width `δ = s/(m+1)`; with at most `m` residues some bin `j` is empty and
/// the offset coordinate `(j + 1/2)δ` keeps every sample at least `δ/2`
/// from the nearest face.
pub fn align_offset<P: AsRef<[f64]>>(points: &[P], width: f64) -> Result<AlignmentResult> {
    let first = points.first().ok_or_else(|| Error::input("point list is empty"))?;
    if !(width > 0.0 && width <= 1.0) {
        return Err(Error::input(format!("width {width} is not in (0, 1]")));
    }
    let dim = first.as_ref().len();
    check_dims(points, dim)?;
    let mut seen = HashSet::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!("point {i} has a non-finite coordinate")));
        }
        let bits: Vec<u64> = p.iter().map(|v| (v + 0.0).to_bits()).collect();
        if !seen.insert(bits) {
            return Err(Error::input(format!("point {i} duplicates an earlier point; deduplicate first")));
        }
    }

    let m = points.len();
    let bins = m + 1;
    let delta = width / bins as f64;
    let mut counts = vec![0u32; bins];
    let mut offset = Vec::with_capacity(dim);
    let mut inspected = 0usize;
    for axis in 0..dim {
        counts.iter_mut().for_each(|c| *c = 0);
        for p in points {
            let v = p.as_ref()[axis];
            let residue = v - width * (v / width).floor();
            let j = ((residue / delta).floor().max(0.0) as usize).min(m);
            counts[j] += 1;
        }
        let mut empty = None;
        for (j, &c) in counts.iter().enumerate() {
            inspected += 1;
            if c == 0 {
                empty = Some(j);
                break;
            }
        }
        // m residues in m+1 bins: pigeonhole guarantees an empty bin.
        let j = empty.expect("pigeonhole: some residue bin is empty");
        offset.push((j as f64 + 0.5) * delta);
    }

    Ok(AlignmentResult {
        offset,
        delta,
        tmax: width / (3 * m + 3) as f64,
        candidate_count: (bins as u128).saturating_pow(dim as u32),
        bins_inspected: inspected,
    })
}

/// Outcome of checking cube containment and pairwise disjointness.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    /// Per point: does `x_i + t[-1,1]^d` lie inside the unrestricted cell of `x_i`?
    pub inside_cell: Vec<bool>,
    /// First pair of points (in sweep order) whose closed cubes intersect.
    pub overlapping_pair: Option<(usize, usize)>,
}

impl AlignmentReport {
    pub fn all_inside(&self) -> bool {
        self.inside_cell.iter().all(|&b| b)
    }

    pub fn disjoint(&self) -> bool {
        self.overlapping_pair.is_none()
    }

    pub fn passed(&self) -> bool {
        self.all_inside() && self.disjoint()
    }

    pub fn first_outside(&self) -> Option<usize> {
        self.inside_cell.iter().position(|&b| !b)
    }
}

/// Checks that each closed cube `x_i + t[-1,1]^d` lies inside its
/// (half-open) partition cell and that the cubes are pairwise disjoint.
pub fn verify_proper_alignment<P: AsRef<[f64]>>(points: &[P], t: f64, part: &CubicPartition) -> AlignmentReport {
    let inside_cell = points
        .iter()
        .map(|p| {
            let p = p.as_ref();
            if p.len() != part.dim() || p.iter().any(|v| !v.is_finite()) {
                return false;
            }
            p.iter().enumerate().all(|(axis, &v)| {
                let k = part.axis_index(axis, v);
                part.face(axis, k) <= v - t && v + t < part.face(axis, k + 1)
            })
        })
        .collect();
    AlignmentReport {
        inside_cell,
        overlapping_pair: find_overlap(points, t),
    }
}

/// Sweep along the first axis; closed cubes of radius `t` meet iff every
/// coordinate differs by at most `2t`.
fn find_overlap<P: AsRef<[f64]>>(points: &[P], t: f64) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].as_ref()[0].total_cmp(&points[b].as_ref()[0]));
    let reach = 2.0 * t;
    for (pos, &i) in order.iter().enumerate() {
        let xi = points[i].as_ref();
        for &j in &order[pos + 1..] {
            let xj = points[j].as_ref();
            if xj[0] - xi[0] > reach {
                break;
            }
            if xi.iter().zip(xj).all(|(a, b)| (a - b).abs() <= reach) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

fn check_dims<P: AsRef<[f64]>>(points: &[P], dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::input("points must have positive dimension"));
    }
    if let Some(i) = points.iter().position(|p| p.as_ref().len() != dim) {
        return Err(Error::input(format!("point {i} has a different dimension")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part1(s: f64, off: f64) -> CubicPartition {
        CubicPartition::new(s, vec![off]).unwrap()
    }

    #[test]
    fn cell_index_examples() {
        assert_eq!(part1(0.5, 0.0).cell_index(&[0.3]).unwrap(), CellKey(vec![0]));
        assert_eq!(part1(0.5, 0.0).cell_index(&[-0.7]).unwrap(), CellKey(vec![-2]));
        assert_eq!(part1(1.0, 5.0 / 6.0).cell_index(&[0.0]).unwrap(), CellKey(vec![-1]));
        assert!(part1(0.5, 0.0).cell_index(&[f64::NAN]).is_err());
    }

    #[test]
    fn cell_bounds_examples() {
        let b = part1(0.5, 0.0).cell_bounds(&CellKey(vec![0]));
        assert_eq!(b.full.lo, vec![0.0]);
        assert_eq!(b.full.hi, vec![0.5]);
        assert_eq!(b.restricted.unwrap(), b.full);

        let b = part1(1.0, 5.0 / 6.0).cell_bounds(&CellKey(vec![-1]));
        assert!((b.full.lo[0] + 1.0 / 6.0).abs() < 1e-15);
        assert!((b.full.hi[0] - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(b.restricted.unwrap(), b.full);

        let b = part1(0.5, 0.0).cell_bounds(&CellKey(vec![3]));
        assert_eq!(b.full.lo, vec![1.5]);
        assert_eq!(b.full.hi, vec![2.0]);
        assert!(b.restricted.is_none());
    }

    #[test]
    fn upper_face_of_x_gets_its_own_degenerate_cell() {
        let p = part1(0.5, 0.0);
        let k = p.cell_index(&[1.0]).unwrap();
        assert_eq!(k, CellKey(vec![2]));
        let r = p.cell_bounds(&k).restricted.unwrap();
        assert_eq!((r.lo[0], r.hi[0]), (1.0, 1.0));
    }

    #[test]
    fn covering_cells_enumerates_every_cell_meeting_x() {
        let p = CubicPartition::new(0.5, vec![0.25, 0.0]).unwrap();
        let cells = p.covering_cells();
        // axis 0: [-1.25,-0.75) .. [0.75,1.25) -> 5 cells; axis 1: -2..=2 -> 5 cells
        assert_eq!(cells.len(), 25);
        assert_eq!(p.covering_count(), 25);
        assert!(cells.iter().all(|k| p.cell_bounds(k).restricted.is_some()));
        assert!(cells.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn offset_is_reduced() {
        let p = CubicPartition::new(0.5, vec![1.3, -0.1]).unwrap();
        assert!((p.offset()[0] - 0.3).abs() < 1e-12);
        assert!((p.offset()[1] - 0.4).abs() < 1e-12);
        assert!(CubicPartition::new(0.0, vec![0.0]).is_err());
        assert!(CubicPartition::new(1.5, vec![0.0]).is_err());
    }

    #[test]
    fn min_gap_examples() {
        let t = min_gap_separation(&[[0.1], [0.4], [0.4], [0.9]]).unwrap();
        assert!((t - 0.1).abs() < 1e-15, "{t}");
        assert_eq!(min_gap_separation(&[[0.2]]).unwrap(), f64::INFINITY);
        assert_eq!(min_gap_separation(&[[0.2], [0.2]]).unwrap(), f64::INFINITY);
        assert!(min_gap_separation::<[f64; 1]>(&[]).is_err());
    }

    #[test]
    fn align_offset_examples() {
        let r = align_offset(&[[0.0], [0.5]], 1.0).unwrap();
        assert!((r.offset[0] - 5.0 / 6.0).abs() < 1e-15);
        assert!((r.delta - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.tmax - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(r.candidate_count, 3);

        let r = align_offset(&[[0.5]], 1.0).unwrap();
        assert!((r.offset[0] - 0.25).abs() < 1e-15);
        assert!((r.delta - 0.5).abs() < 1e-15);
        assert!((r.tmax - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn align_offset_is_coordinatewise() {
        let pts = [[0.0, 0.5], [0.5, 0.0]];
        let r = align_offset(&pts, 1.0).unwrap();
        let a = align_offset(&[[0.0], [0.5]], 1.0).unwrap();
        let b = align_offset(&[[0.5], [0.0]], 1.0).unwrap();
        assert_eq!(r.offset, vec![a.offset[0], b.offset[0]]);
        assert_eq!(r.candidate_count, 9);
        assert!(r.bins_inspected <= 3 * 2);
    }

    #[test]
    fn align_offset_rejects_duplicates() {
        assert!(align_offset(&[[0.1], [0.1]], 0.5).is_err());
        assert!(align_offset(&[[0.0], [-0.0]], 0.5).is_err());
    }

    #[test]
    fn verify_examples() {
        let pts = [[0.0], [0.5]];
        let r = align_offset(&pts, 1.0).unwrap();
        let part = r.partition(1.0).unwrap();
        assert!(verify_proper_alignment(&pts, r.tmax, &part).passed());

        let rep = verify_proper_alignment(&[[0.0]], 0.1, &part1(1.0, 0.0));
        assert!(!rep.all_inside());
        assert!(rep.disjoint());

        let rep = verify_proper_alignment(&[[0.1], [0.15]], 0.05, &part1(1.0, 0.5));
        assert!(rep.all_inside());
        assert_eq!(rep.overlapping_pair, Some((0, 1)));
    }
}
