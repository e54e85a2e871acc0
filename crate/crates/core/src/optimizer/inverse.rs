//! Volume fractions compatible with measured responses.

use crate::error::{Error, Result};
use crate::optimizer::{optimize_bound, BoundQuery, BoundSense, SearchSettings};
use crate::phase::CompositePair;
use crate::sum_rules::InfoSet;

/// A normalized response (`sigma_12 / (G2 eps0)` or `eps_12 / (sigma0 / 2 G2)`)
/// observed at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub time: f64,
    pub value: f64,
}

/// Smallest and largest volume fraction probed.
const EDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionSettings {
    /// Cells of the initial scan over `(0, 1)`.
    pub scan_points: usize,
    pub bisection_steps: usize,
    /// A measurement matches a bound interval when within this distance.
    pub tolerance: f64,
}

impl Default for InversionSettings {
    fn default() -> Self {
        InversionSettings { scan_points: 100, bisection_steps: 30, tolerance: 1e-9 }
    }
}

/// Union of disjoint closed intervals of volume fractions, ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VolumeFractionSet {
    pub intervals: Vec<(f64, f64)>,
}

impl VolumeFractionSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn contains(&self, f1: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= f1 && f1 <= b)
    }

    /// Width of the hull, 0 when empty.
    pub fn width(&self) -> f64 {
        self.hull().map_or(0.0, |(a, b)| b - a)
    }
}

struct Checker<'a> {
    pair: &'a CompositePair,
    base: &'a InfoSet,
    measurements: &'a [Measurement],
    search: &'a SearchSettings,
    tol: f64,
}

impl Checker<'_> {
    fn range(&self, info: &InfoSet, t: f64) -> Result<(f64, f64)> {
        let q = BoundQuery::scalar(*self.pair, info.clone(), vec![t], BoundSense::Lower);
        let lo = optimize_bound(&q, t, self.search)?.normalized;
        let q = BoundQuery { sense: BoundSense::Upper, ..q };
        let hi = optimize_bound(&q, t, self.search)?.normalized;
        Ok((lo, hi))
    }

    fn feasible(&self, f1: f64) -> Result<bool> {
        let info = InfoSet { volume_fraction: Some(f1), ..self.base.clone() };
        for m in self.measurements {
            match self.range(&info, m.time) {
                Ok((lo, hi)) => {
                    if m.value < lo - self.tol || m.value > hi + self.tol {
                        return Ok(false);
                    }
                }
                Err(Error::Infeasible(_)) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
        Ok(true)
    }

    /// Boundary between a feasible `inside` and an infeasible `outside`.
    fn edge(&self, mut inside: f64, mut outside: f64, steps: usize) -> Result<f64> {
        for _ in 0..steps {
            let mid = 0.5 * (inside + outside);
            if self.feasible(mid)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(inside)
    }
}

/// Volume fractions `f1` for which every measurement lies within the bounds
/// computed with `base` plus the volume fraction `f1`.
///
/// Errors with [`Error::Inconsistent`] when a measurement lies outside the
/// bounds of `base` alone.
pub fn invert_volume_fraction(
    pair: &CompositePair,
    base: &InfoSet,
    measurements: &[Measurement],
    search: &SearchSettings,
    settings: &InversionSettings,
) -> Result<VolumeFractionSet> {
    if measurements.is_empty() {
        return Err(Error::InvalidParameter("no measurements given".into()));
    }
    if settings.scan_points < 2 || !(settings.tolerance >= 0.0) {
        return Err(Error::InvalidParameter("need at least two scan points and a non-negative tolerance".into()));
    }
    for m in measurements {
        if !(m.time >= 0.0) || !m.value.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid measurement ({}, {})", m.time, m.value)));
        }
    }
    let mut envelope = base.clone();
    envelope.volume_fraction = None;
    envelope.transverse_isotropy = false;
    let checker = Checker { pair, base, measurements, search, tol: settings.tolerance };
    for m in measurements {
        let (lo, hi) = checker.range(&envelope, m.time)?;
        if m.value < lo - settings.tolerance || m.value > hi + settings.tolerance {
            return Err(Error::Inconsistent(format!(
                "measurement {} at t = {} lies outside [{lo}, {hi}], the range of any composite",
                m.value, m.time
            )));
        }
    }

    let n = settings.scan_points;
    let mut grid = vec![EDGE];
    grid.extend((0..n).map(|i| (i as f64 + 0.5) / n as f64));
    grid.push(1.0 - EDGE);
    let flags = grid.iter().map(|&f| checker.feasible(f)).collect::<Result<Vec<_>>>()?;

    let mut intervals = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid.len() && flags[i + 1] {
            i += 1;
        }
        let a = if start == 0 { grid[0] } else { checker.edge(grid[start], grid[start - 1], settings.bisection_steps)? };
        let b = if i + 1 == grid.len() {
            grid[i]
        } else {
            checker.edge(grid[i], grid[i + 1], settings.bisection_steps)?
        };
        intervals.push((a, b));
        i += 1;
    }
    Ok(VolumeFractionSet { intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_queries() {
        let s = VolumeFractionSet { intervals: vec![(0.1, 0.2), (0.5, 0.6)] };
        assert_eq!(s.hull(), Some((0.1, 0.6)));
        assert!(s.contains(0.15) && !s.contains(0.3));
        assert!((s.width() - 0.5).abs() < 1e-15);
        assert!(VolumeFractionSet::default().is_empty());
    }

    #[test]
    fn empty_measurements_are_rejected() {
        let r = invert_volume_fraction(
            &CompositePair::maxwell_elastic_example(),
            &InfoSet::none(),
            &[],
            &SearchSettings::default(),
            &InversionSettings::default(),
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn impossible_measurement_is_inconsistent() {
        let r = invert_volume_fraction(
            &CompositePair::maxwell_elastic_example(),
            &InfoSet::none(),
            &[Measurement { time: 0.0, value: 3.0 }],
            &SearchSettings::default(),
            &InversionSettings::default(),
        );
        assert!(matches!(r, Err(Error::Inconsistent(_))));
    }
}
