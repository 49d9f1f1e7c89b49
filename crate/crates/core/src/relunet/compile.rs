//! Histograms and inflated histograms as ReLU networks.
//!
//! Every compiled unit is a scaled bump network. The empty-cell default goes
//! into the head bias, so only cells whose coefficient differs from it need
//! a unit; for least squares that is exactly the set of nonzero cells.

use super::{bump_net, BumpSpec, ReluNet};
use crate::error::{Error, Result};
use crate::geometry::Box;
use crate::histogram::Histogram;
use crate::interpolate::{check_alignment, InflatedHistogram};

fn assemble(dim: usize, baseline: f64, units: Vec<(Box, f64, f64)>) -> Result<ReluNet> {
    if units.is_empty() {
        return ReluNet::constant(dim, baseline, 2);
    }
    let nets = units
        .into_iter()
        .map(|(bx, eps, amp)| Ok(bump_net(&BumpSpec::new(bx, eps)?).scale_shift(amp, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&ReluNet> = nets.iter().collect();
    Ok(ReluNet::sum_all(&refs)?.scale_shift(1.0, baseline))
}

fn histogram_units(h: &Histogram, eps: f64) -> Vec<(Box, f64, f64)> {
    let part = h.partition();
    let base = h.empty_default();
    h.sorted_coefficients()
        .into_iter()
        .filter(|(_, c)| *c != base)
        .map(|(k, c)| (part.cell_bounds(k).full, eps, c - base))
        .collect()
}

/// Network equal to `h` outside the `ε`-shells of the compiled cells.
pub fn compile_histogram(h: &Histogram, eps: f64) -> Result<ReluNet> {
    let s = h.partition().width();
    if !(eps > 0.0 && eps < s / 2.0) {
        return Err(Error::Construction(format!("shell width {eps} must lie in (0, s/2) with s = {s}")));
    }
    assemble(h.partition().dim(), h.empty_default(), histogram_units(h, eps))
}

/// Network equal to `f` at every bump center, with shells of width `t/3`
/// for both the cells and the bump cubes.
pub fn compile_interpolant(f: &InflatedHistogram) -> Result<ReluNet> {
    let t = f.radius();
    let eps = t / 3.0;
    check_alignment(f.bumps(), t, f.partition())?;
    let mut units = histogram_units(f.base(), eps);
    units.extend(
        f.bumps()
            .iter()
            .filter(|b| b.amplitude != 0.0)
            .map(|b| (Box::cube(&b.center, t), eps, b.amplitude)),
    );
    assemble(f.partition().dim(), f.base().empty_default(), units)
}
