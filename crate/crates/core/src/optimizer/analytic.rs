//! Closed-form results for the Maxwell/elastic and Kelvin-Voigt/elastic
//! pairs without microstructural information.

use crate::error::{Error, Result};
use crate::phase::{CompositePair, PhaseModel, Side};

/// `(G_M, eta_M, G_2)` of a Maxwell/elastic pair with `G_2 < G_M`.
fn maxwell_params(pair: &CompositePair) -> Result<(f64, f64, f64)> {
    match pair.phase1() {
        PhaseModel::Maxwell { modulus, viscosity } if pair.side() == Side::Stress => {
            let g2 = pair.elastic_modulus();
            if g2 >= modulus {
                return Err(Error::ModelMismatch(format!(
                    "closed forms need G_2 < G_M, got G_2 = {g2}, G_M = {modulus}"
                )));
            }
            Ok((modulus, viscosity, g2))
        }
        other => Err(Error::ModelMismatch(format!(
            "closed forms need a Maxwell/elastic pair on the stress side, got {}",
            other.name()
        ))),
    }
}

/// Switching times `(t1, t2, t3)` of the no-information stress bounds:
/// the upper bound leaves pure phase 1 at `t1` and reaches pure phase 2 at
/// `t3`; the lower bound switches from phase 2 to phase 1 at `t2`.
pub fn maxwell_crossover_times(pair: &CompositePair) -> Result<(f64, f64, f64)> {
    let (gm, eta, g2) = maxwell_params(pair)?;
    let r = g2 / gm;
    Ok((eta / gm * (1.0 - r), eta / gm * (gm / g2).ln(), eta / g2 * (1.0 - r)))
}

/// Pole of the single-laminate configuration attaining the no-information
/// upper bound, clamped to `[0, 1)`.
pub fn optimal_pole_analytic(t: f64, pair: &CompositePair) -> Result<f64> {
    let (gm, eta, g2) = maxwell_params(pair)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let r = g2 / gm;
    let s = (t * g2 / eta - r * (1.0 - r)) / ((1.0 - r) * (1.0 - r));
    Ok(s.clamp(0.0, 1.0 - f64::EPSILON / 2.0))
}

/// No-information `(lower, upper)` bounds on `sigma_12` for a unit step strain.
///
/// Between `t1` and `t3` the upper bound is the laminate response at
/// [`optimal_pole_analytic`], `(eta/t)(1 - G2/G_M) exp[(t/eta) G2 G_M/(G_M - G2) - 1]`.
pub fn no_info_stress_bounds(pair: &CompositePair, t: f64) -> Result<(f64, f64)> {
    let (gm, eta, g2) = maxwell_params(pair)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let (t1, t2, t3) = maxwell_crossover_times(pair)?;
    let phase1 = gm * (-gm * t / eta).exp();
    let upper = if t <= t1 {
        phase1
    } else if t <= t3 {
        eta / t * (1.0 - g2 / gm) * (t / eta * g2 * gm / (gm - g2) - 1.0).exp()
    } else {
        g2
    };
    let lower = if t <= t2 { g2 } else { phase1 };
    Ok((lower, upper))
}

fn kelvin_voigt_params(pair: &CompositePair) -> Result<(f64, f64, f64)> {
    match pair.phase1() {
        PhaseModel::KelvinVoigt { modulus, viscosity } if pair.side() == Side::Strain => {
            Ok((modulus, viscosity, pair.elastic_modulus()))
        }
        other => Err(Error::ModelMismatch(format!(
            "need a Kelvin-Voigt/elastic pair on the strain side, got {}",
            other.name()
        ))),
    }
}

/// `(eta_K / G_K) ln(G_2 / (G_2 - G_K))`, defined only for `G_2 > G_K`.
pub fn kelvin_voigt_crossing_formula(pair: &CompositePair) -> Result<Option<f64>> {
    let (gk, eta, g2) = kelvin_voigt_params(pair)?;
    Ok((g2 > gk).then(|| eta / gk * (g2 / (g2 - gk)).ln()))
}

/// Time at which the creep strain of pure phase 1 reaches the elastic strain
/// of phase 2, found by bisection; `None` when it never does.
pub fn pure_phase_crossing(pair: &CompositePair) -> Result<Option<f64>> {
    let (gk, eta, g2) = kelvin_voigt_params(pair)?;
    // Normalized pure phase-1 strain minus the phase-2 value 1.
    let excess = |t: f64| -> Result<f64> { Ok(-pair.weighted_kernel(0.0, t)?) };
    if gk >= g2 {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut hi = eta / gk;
    while excess(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numerical("crossing bracket diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Statistics of `kernel(s, t)` over a set of poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpread {
    pub mean: f64,
    /// `max - min` over the poles.
    pub spread: f64,
    /// Largest absolute residual of the least-squares affine fit in `s`.
    pub fit_residual: f64,
}

/// How far the kernel at time `t` is from constant and from affine in the
/// pole: a constant kernel makes the volume-fraction bounds coincide, an
/// affine one the bounds with isotropy as well.
pub fn tightness_coefficient_spread(pair: &CompositePair, t: f64, poles: &[f64]) -> Result<KernelSpread> {
    if poles.len() < 2 {
        return Err(Error::InvalidParameter("need at least two poles".into()));
    }
    let k = poles.iter().map(|&s| pair.kernel(s, t)).collect::<Result<Vec<_>>>()?;
    let n = poles.len() as f64;
    let mean = k.iter().sum::<f64>() / n;
    let (lo, hi) = k.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let sm = poles.iter().sum::<f64>() / n;
    let sxx: f64 = poles.iter().map(|s| (s - sm).powi(2)).sum();
    let sxy: f64 = poles.iter().zip(&k).map(|(s, v)| (s - sm) * (v - mean)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let fit_residual = poles
        .iter()
        .zip(&k)
        .map(|(s, v)| (v - mean - slope * (s - sm)).abs())
        .fold(0.0, f64::max);
    Ok(KernelSpread { mean, spread: hi - lo, fit_residual })
}
