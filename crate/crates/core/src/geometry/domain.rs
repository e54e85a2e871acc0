//! Sets of attainable response vectors at a fixed time, drawn in the plane
//! `(x_13, x_12)` normalized by the phase-2 response.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::hull::{contains_point, convex_hull, Point};
use crate::optimizer::{minimize_objective, Layout, ObjectiveTerm, SearchSettings};
use crate::phase::CompositePair;
use crate::spectral::{eval_vector, RotatedResidue, SpectralConfig, StepLoading};
use crate::sum_rules::{InfoSet, Symmetry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSettings {
    /// Directions `alpha` on `[0, 2 pi)` per orientation.
    pub alpha_points: usize,
    /// Orientations on `[0, pi)` in the union.
    pub theta_points: usize,
    /// Cells per side of the occupancy mask.
    pub mask_resolution: usize,
    pub search: SearchSettings,
}

impl Default for DomainSettings {
    fn default() -> Self {
        DomainSettings { alpha_points: 256, theta_points: 64, mask_resolution: 128, search: SearchSettings::default() }
    }
}

impl DomainSettings {
    pub fn with_grid_scale(factor: f64) -> Result<Self> {
        let d = Self::default();
        let scale = |n: usize, min: usize| ((n as f64 * factor).round() as usize).max(min);
        Ok(DomainSettings {
            alpha_points: scale(d.alpha_points, 4),
            theta_points: scale(d.theta_points, 1),
            mask_resolution: scale(d.mask_resolution, 8),
            search: SearchSettings::with_grid_scale(factor)?,
        })
    }
}

/// Attainable set for one common orientation of the residues.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationHull {
    pub theta: f64,
    /// Minimizer of `cos(alpha) x + sin(alpha) y` for each `alpha`, in order.
    pub support_points: Vec<Point>,
    /// Indices `i` where the step from point `i` to the next is a jump.
    pub jumps: Vec<usize>,
    /// Counter-clockwise convex hull of the support points.
    pub hull: Vec<Point>,
}

fn check_reflective(info: &InfoSet, pair: &CompositePair, loading: &StepLoading) -> Result<()> {
    if info.symmetry != Symmetry::Reflective {
        return Err(Error::Configuration("response domains need a reflective information set".into()));
    }
    if loading.side() != pair.side() {
        return Err(Error::SideMismatch { expected: pair.side(), found: loading.side() });
    }
    loading.validate()
}

fn reference(pair: &CompositePair, loading: &StepLoading) -> Result<f64> {
    let a = loading.amplitude();
    let r = pair.response_scale() * a[0].hypot(a[1]);
    if r > 0.0 {
        Ok(r)
    } else {
        Err(Error::InvalidParameter("loading amplitude must be nonzero".into()))
    }
}

/// Plot coordinates `(x_13, x_12) / reference` of a configuration's response.
pub fn response_point(config: &SpectralConfig, pair: &CompositePair, loading: &StepLoading, t: f64) -> Result<Point> {
    let x = eval_vector(config, pair, loading, t)?;
    let r = reference(pair, loading)?;
    Ok([x[1] / r, x[0] / r])
}

/// Indices where consecutive points are more than ten times further apart
/// than the median step among their neighbours (cyclically).
fn find_jumps(points: &[Point]) -> Vec<usize> {
    let n = points.len();
    if n < 3 {
        return Vec::new();
    }
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .collect();
    let window = 4.min((n - 1) / 2).max(1);
    (0..n)
        .filter(|&i| {
            let mut near: Vec<f64> = (1..=window).flat_map(|k| [d[(i + k) % n], d[(i + n - k) % n]]).collect();
            near.sort_by(f64::total_cmp);
            let local = near[near.len() / 2];
            d[i] > 10.0 * local.max(1e-12)
        })
        .collect()
}

/// Boundary of the attainable set at time `t` when every residue has the
/// orientation `theta`: each direction `alpha` gives the point minimizing
/// `cos(alpha) x + sin(alpha) y`.
pub fn domain_fixed_orientation(
    pair: &CompositePair,
    info: &InfoSet,
    loading: &StepLoading,
    t: f64,
    theta: f64,
    settings: &DomainSettings,
) -> Result<OrientationHull> {
    check_reflective(info, pair, loading)?;
    if settings.alpha_points < 3 {
        return Err(Error::InvalidParameter("need at least three directions".into()));
    }
    let n = settings.alpha_points;
    let points = (0..n)
        .into_par_iter()
        .map(|k| {
            let alpha = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            // In response coordinates the direction is (x_12, x_13) = (sin, cos).
            let term = ObjectiveTerm::new(t, loading.amplitude(), [alpha.sin(), alpha.cos()]);
            let opt = minimize_objective(pair, info, &[term], Layout::Reflective { theta: Some(theta) }, &settings.search, None)?;
            response_point(&opt.config, pair, loading, t)
        })
        .collect::<Result<Vec<Point>>>()?;
    let jumps = find_jumps(&points);
    let hull = convex_hull(&points);
    Ok(OrientationHull { theta, support_points: points, jumps, hull })
}

/// Rasterized union of polygons over a bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMask {
    pub min: Point,
    pub max: Point,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `y` outer.
    pub cells: Vec<bool>,
}

impl OccupancyMask {
    fn cell_size(&self) -> (f64, f64) {
        ((self.max[0] - self.min[0]) / self.nx as f64, (self.max[1] - self.min[1]) / self.ny as f64)
    }

    pub fn area(&self) -> f64 {
        let (dx, dy) = self.cell_size();
        self.cells.iter().filter(|c| **c).count() as f64 * dx * dy
    }

    /// Whether the cell containing `p` is occupied.
    pub fn contains(&self, p: Point) -> bool {
        let (dx, dy) = self.cell_size();
        let fx = (p[0] - self.min[0]) / dx;
        let fy = (p[1] - self.min[1]) / dy;
        if !(fx >= 0.0 && fy >= 0.0) || fx > self.nx as f64 || fy > self.ny as f64 {
            return false;
        }
        let i = (fx as usize).min(self.nx - 1);
        let j = (fy as usize).min(self.ny - 1);
        self.cells[j * self.nx + i]
    }

    fn from_polygons(polys: &[Vec<Point>], resolution: usize) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in polys.iter().flatten() {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        if !min[0].is_finite() {
            return OccupancyMask { min: [0.0; 2], max: [1.0; 2], nx: 1, ny: 1, cells: vec![false] };
        }
        let pad = 1e-3 * (max[0] - min[0]).max(max[1] - min[1]).max(1e-9);
        for k in 0..2 {
            min[k] -= pad;
            max[k] += pad;
        }
        let (nx, ny) = (resolution.max(1), resolution.max(1));
        let dx = (max[0] - min[0]) / nx as f64;
        let dy = (max[1] - min[1]) / ny as f64;
        // Cells thinner than a degenerate polygon still register it.
        let tol = 0.5 * dx.hypot(dy);
        let mut cells = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = [min[0] + (i as f64 + 0.5) * dx, min[1] + (j as f64 + 0.5) * dy];
                cells[j * nx + i] = polys.iter().any(|poly| {
                    let t = if poly.len() < 3 { tol } else { 0.0 };
                    contains_point(poly, c, t)
                });
            }
        }
        OccupancyMask { min, max, nx, ny, cells }
    }
}

/// Union over orientations of the fixed-orientation domains at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDomain {
    pub time: f64,
    pub polygons: Vec<OrientationHull>,
    pub mask: OccupancyMask,
}

/// Orientations `pi k / n`, `k = 0..n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::PI * k as f64 / n as f64).collect()
}

pub fn domain_union_over_orientations(
    pair: &CompositePair,
    info: &InfoSet,
    loading: &StepLoading,
    t: f64,
    thetas: &[f64],
    settings: &DomainSettings,
) -> Result<ResponseDomain> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("no orientations given".into()));
    }
    let polygons = thetas
        .iter()
        .map(|&th| domain_fixed_orientation(pair, info, loading, t, th, settings))
        .collect::<Result<Vec<_>>>()?;
    let hulls: Vec<Vec<Point>> = polygons.iter().map(|p| p.hull.clone()).collect();
    let mask = OccupancyMask::from_polygons(&hulls, settings.mask_resolution);
    Ok(ResponseDomain { time: t, polygons, mask })
}

/// The two-pole configuration of a simple laminate with phase-1 fraction
/// `f1` and layers normal to the `b`-axis of orientation `theta`: the
/// `a`-eigenvalue sees the arithmetic mean, the `b`-eigenvalue the harmonic.
pub fn laminate_config(pair: &CompositePair, f1: f64, theta: f64) -> Result<SpectralConfig> {
    if !(0.0..=1.0).contains(&f1) {
        return Err(Error::Domain(format!("volume fraction {f1} outside [0, 1]")));
    }
    if f1 == 0.0 {
        return Ok(SpectralConfig::empty(pair.side()));
    }
    SpectralConfig::rotated(
        pair.side(),
        vec![0.0, 1.0 - f1],
        vec![RotatedResidue::new(theta, f1, 0.0), RotatedResidue::new(theta, 0.0, f1)],
    )
}

/// Response points of simple laminates for each volume fraction in `f1_grid`.
pub fn laminate_reference_curve(
    pair: &CompositePair,
    loading: &StepLoading,
    t: f64,
    theta: f64,
    f1_grid: &[f64],
) -> Result<Vec<Point>> {
    f1_grid
        .iter()
        .map(|&f1| response_point(&laminate_config(pair, f1, theta)?, pair, loading, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jumps_are_detected() {
        let mut pts: Vec<Point> = (0..20).map(|i| [0.01 * i as f64, 0.0]).collect();
        pts.push([5.0, 0.0]);
        pts.extend((0..20).map(|i| [5.0 - 0.01 * i as f64, 0.001]));
        let j = find_jumps(&pts);
        assert_eq!(j, vec![19, 40]);
    }

    #[test]
    fn mask_area_of_unit_square() {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = OccupancyMask::from_polygons(&[sq], 200);
        assert!((m.area() - 1.0).abs() < 0.02);
        assert!(m.contains([0.5, 0.5]) && !m.contains([2.0, 0.5]));
    }

    #[test]
    fn laminate_means_at_time_zero() {
        let pair = CompositePair::maxwell_elastic_example();
        let load = StepLoading::StrainStep([1.0, 0.0]);
        // Layers normal to x_2: the 12 response is the harmonic mean.
        let cfg = laminate_config(&pair, 0.5, std::f64::consts::FRAC_PI_2).unwrap();
        let p = response_point(&cfg, &pair, &load, 0.0).unwrap();
        assert!((p[1] * 0.5 - 2.0 / 3.0).abs() < 1e-14 && p[0].abs() < 1e-14);
        let cfg = laminate_config(&pair, 0.5, 0.0).unwrap();
        let p = response_point(&cfg, &pair, &load, 0.0).unwrap();
        assert!((p[1] * 0.5 - 0.75).abs() < 1e-14);
    }
}
