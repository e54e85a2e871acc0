//! Support functions of attainable sets: half-spaces bounding the
//! homogenized kernels and responses correlated across several times.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizer::{minimize_objective, Layout, ObjectiveTerm, Optimum, SearchSettings};
use crate::phase::CompositePair;
use crate::spectral::Mat2;
use crate::sum_rules::{InfoSet, Symmetry};

fn layout_for(info: &InfoSet) -> Layout {
    match info.symmetry {
        Symmetry::Reflective => Layout::Reflective { theta: None },
        Symmetry::NonReflective => Layout::Clock,
    }
}

/// `Tr(V C) = sum_j (V e_j) . (C e_j)`: two unit loadings at the same time.
pub fn kernel_terms(v: &Mat2, t: f64) -> [ObjectiveTerm; 2] {
    [
        ObjectiveTerm::new(t, [1.0, 0.0], [v[0][0], v[1][0]]),
        ObjectiveTerm::new(t, [0.0, 1.0], [v[0][1], v[1][1]]),
    ]
}

fn check_symmetric(v: &Mat2) -> Result<()> {
    let finite = v.iter().flatten().all(|x| x.is_finite());
    if !finite || (v[0][1] - v[1][0]).abs() > 1e-12 * (1.0 + v[0][1].abs()) {
        return Err(Error::InvalidParameter(format!("direction {v:?} must be finite and symmetric")));
    }
    Ok(())
}

/// Minimum of `Tr(V K(t))` over admissible composites, where `K` is the
/// homogenized relaxation kernel (stress side) or creep kernel (strain side).
pub fn kernel_support_full(
    pair: &CompositePair,
    info: &InfoSet,
    v: &Mat2,
    t: f64,
    settings: &SearchSettings,
) -> Result<Optimum> {
    check_symmetric(v)?;
    minimize_objective(pair, info, &kernel_terms(v, t), layout_for(info), settings, None)
}

pub fn kernel_support(pair: &CompositePair, info: &InfoSet, v: &Mat2, t: f64, settings: &SearchSettings) -> Result<f64> {
    Ok(kernel_support_full(pair, info, v, t, settings)?.value)
}

/// Minimum of `sum_j v_j . x(t_j)` over a single admissible composite.
pub fn correlate_support(
    pair: &CompositePair,
    info: &InfoSet,
    terms: &[ObjectiveTerm],
    settings: &SearchSettings,
) -> Result<f64> {
    for term in terms {
        if term.loading.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidParameter("correlated loading must be nonzero".into()));
        }
    }
    Ok(minimize_objective(pair, info, terms, layout_for(info), settings, None)?.value)
}

/// `n` Frobenius-unit symmetric matrices spread over the sphere
/// `(V11, V22, sqrt(2) V12)` by a Fibonacci lattice.
pub fn direction_fan(n: usize) -> Vec<Mat2> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            let (a, b, c) = (r * phi.cos(), r * phi.sin(), z);
            let off = c / std::f64::consts::SQRT_2;
            [[a, off], [off, b]]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportEntry {
    pub direction: Mat2,
    pub value: f64,
}

/// Support values of the kernel set at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    pub time: f64,
    pub entries: Vec<SupportEntry>,
}

impl SupportSet {
    pub fn compute(
        pair: &CompositePair,
        info: &InfoSet,
        directions: &[Mat2],
        t: f64,
        settings: &SearchSettings,
    ) -> Result<Self> {
        let entries = directions
            .par_iter()
            .map(|v| Ok(SupportEntry { direction: *v, value: kernel_support(pair, info, v, t, settings)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(SupportSet { time: t, entries })
    }

    /// Smallest `F(V_i + V_j) - F(V_i) - F(V_j)` over consecutive pairs of
    /// entries; nonnegative for an exact support function.
    pub fn superadditivity_margin(
        &self,
        pair: &CompositePair,
        info: &InfoSet,
        settings: &SearchSettings,
    ) -> Result<f64> {
        let n = self.entries.len();
        if n < 2 {
            return Ok(0.0);
        }
        let margins = (0..n)
            .into_par_iter()
            .map(|i| {
                let (a, b) = (&self.entries[i], &self.entries[(i + 1) % n]);
                let mut sum = [[0.0; 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        sum[r][c] = a.direction[r][c] + b.direction[r][c];
                    }
                }
                Ok(kernel_support(pair, info, &sum, self.time, settings)? - a.value - b.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(margins.into_iter().fold(f64::INFINITY, f64::min))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_is_unit_and_symmetric() {
        for v in direction_fan(32) {
            let norm = (v[0][0].powi(2) + v[1][1].powi(2) + 2.0 * v[0][1].powi(2)).sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
            assert_eq!(v[0][1], v[1][0]);
        }
    }

    #[test]
    fn asymmetric_direction_is_rejected() {
        let pair = CompositePair::maxwell_elastic_example();
        let r = kernel_support(&pair, &InfoSet::none(), &[[1.0, 0.5], [0.0, 1.0]], 1.0, &SearchSettings::default());
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn first_diagonal_entry_matches_scalar_lower_bound() {
        let pair = CompositePair::maxwell_elastic_example();
        let s = SearchSettings::default();
        let k = kernel_support(&pair, &InfoSet::none(), &[[1.0, 0.0], [0.0, 0.0]], 0.5, &s).unwrap();
        assert!((k - 0.5).abs() < 1e-12);
    }
}
