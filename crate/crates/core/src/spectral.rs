//! Pole/residue configurations and the step responses they generate.

use crate::error::{Error, Result};
use crate::phase::{CompositePair, Side};

/// Slack allowed on `sum B_i / (1 - s_i) <= I` when a configuration is built.
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub type Mat2 = [[f64; 2]; 2];

/// `R^T diag(a, b) R` with `R = [[cos, -sin], [sin, cos]]`.
pub fn rotated_matrix(theta: f64, a: f64, b: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let off = (b - a) * c * s;
    [[a * c * c + b * s * s, off], [off, a * s * s + b * c * c]]
}

/// A residue matrix written through its orientation and eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedResidue {
    pub theta: f64,
    pub b_a: f64,
    pub b_b: f64,
}

impl RotatedResidue {
    pub fn new(theta: f64, b_a: f64, b_b: f64) -> Self {
        RotatedResidue { theta, b_a, b_b }
    }

    pub fn matrix(&self) -> Mat2 {
        rotated_matrix(self.theta, self.b_a, self.b_b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Residues {
    /// `B_11` components only.
    Scalar(Vec<f64>),
    Rotated(Vec<RotatedResidue>),
}

impl Residues {
    pub fn len(&self) -> usize {
        match self {
            Residues::Scalar(v) => v.len(),
            Residues::Rotated(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Poles in `[0, 1)` sorted ascending, with nonnegative residues obeying
/// `sum_i B_i / (1 - s_i) <= I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    side: Side,
    poles: Vec<f64>,
    residues: Residues,
}

impl SpectralConfig {
    /// Builds a configuration, sorting poles (and their residues) ascending.
    pub fn new(side: Side, poles: Vec<f64>, residues: Residues) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::InvalidParameter(format!(
                "{} poles but {} residues",
                poles.len(),
                residues.len()
            )));
        }
        for &p in &poles {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Domain(format!("pole {p} outside [0, 1)")));
            }
        }
        let mut order: Vec<usize> = (0..poles.len()).collect();
        order.sort_by(|&i, &j| poles[i].total_cmp(&poles[j]));
        let sorted_poles = order.iter().map(|&i| poles[i]).collect();
        let residues = match residues {
            Residues::Scalar(v) => {
                if let Some(x) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                    return Err(Error::InvalidParameter(format!("negative or non-finite residue {x}")));
                }
                Residues::Scalar(order.iter().map(|&i| v[i]).collect())
            }
            Residues::Rotated(v) => {
                for r in &v {
                    let ok = r.b_a >= 0.0 && r.b_b >= 0.0 && r.b_a.is_finite() && r.b_b.is_finite();
                    if !ok || !r.theta.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "residue eigenvalues must be finite and nonnegative, got ({}, {})",
                            r.b_a, r.b_b
                        )));
                    }
                }
                Residues::Rotated(order.iter().map(|&i| v[i]).collect())
            }
        };
        let config = SpectralConfig { side, poles: sorted_poles, residues };
        let d = config.f_at_one();
        let (lo, _) = sym_eigen(&[[1.0 - d[0][0], -d[0][1]], [-d[1][0], 1.0 - d[1][1]]]);
        if lo < -FEASIBILITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "sum of B_i / (1 - s_i) exceeds the identity (smallest eigenvalue of the gap {lo:e})"
            )));
        }
        Ok(config)
    }

    pub fn scalar(side: Side, poles: Vec<f64>, residues: Vec<f64>) -> Result<Self> {
        Self::new(side, poles, Residues::Scalar(residues))
    }

    pub fn rotated(side: Side, poles: Vec<f64>, residues: Vec<RotatedResidue>) -> Result<Self> {
        Self::new(side, poles, Residues::Rotated(residues))
    }

    /// The pure phase-2 configuration (no poles).
    pub fn empty(side: Side) -> Self {
        SpectralConfig { side, poles: Vec::new(), residues: Residues::Scalar(Vec::new()) }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn residues(&self) -> &Residues {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Residue matrix of pole `i`; scalar residues are read as `x I`.
    pub fn residue_matrix(&self, i: usize) -> Mat2 {
        match &self.residues {
            Residues::Scalar(v) => [[v[i], 0.0], [0.0, v[i]]],
            Residues::Rotated(v) => v[i].matrix(),
        }
    }

    pub fn b11(&self, i: usize) -> f64 {
        self.residue_matrix(i)[0][0]
    }

    /// `sum_i B_i / (1 - s_i)`.
    pub fn f_at_one(&self) -> Mat2 {
        let mut acc = [[0.0; 2]; 2];
        for (i, &s) in self.poles.iter().enumerate() {
            add_scaled(&mut acc, &self.residue_matrix(i), 1.0 / (1.0 - s));
        }
        acc
    }

    /// Zeroth and first moments `(sum_i B_i, sum_i B_i s_i)`.
    pub fn moments(&self) -> (Mat2, Mat2) {
        let mut a0 = [[0.0; 2]; 2];
        let mut a1 = [[0.0; 2]; 2];
        for (i, &s) in self.poles.iter().enumerate() {
            let b = self.residue_matrix(i);
            add_scaled(&mut a0, &b, 1.0);
            add_scaled(&mut a1, &b, s);
        }
        (a0, a1)
    }

    /// Drops poles whose residue norm is at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let b = self.residue_matrix(i);
                b[0][0].abs().max(b[1][1].abs()).max(b[0][1].abs()) > tol
            })
            .collect();
        let poles = keep.iter().map(|&i| self.poles[i]).collect();
        let residues = match &self.residues {
            Residues::Scalar(v) => Residues::Scalar(keep.iter().map(|&i| v[i]).collect()),
            Residues::Rotated(v) => Residues::Rotated(keep.iter().map(|&i| v[i]).collect()),
        };
        SpectralConfig { side: self.side, poles, residues }
    }

    /// `sum_i kernel(s_i, t) B_i`, the dimensionless part of the response.
    pub fn kernel_sum(&self, pair: &CompositePair, t: f64) -> Result<Mat2> {
        check_side(self.side, pair.side())?;
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        let mut acc = [[0.0; 2]; 2];
        for (i, &s) in self.poles.iter().enumerate() {
            add_scaled(&mut acc, &self.residue_matrix(i), pair.kernel_unchecked(s, t));
        }
        Ok(acc)
    }
}

fn add_scaled(acc: &mut Mat2, m: &Mat2, w: f64) {
    for r in 0..2 {
        for c in 0..2 {
            acc[r][c] += w * m[r][c];
        }
    }
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub(crate) fn sym_eigen(m: &Mat2) -> (f64, f64) {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let r = half.hypot(m[0][1]);
    (mean - r, mean + r)
}

fn check_side(expected: Side, found: Side) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SideMismatch { expected, found })
    }
}

/// A step in the averaged strain (relaxation test) or stress (creep test).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepLoading {
    StrainStep([f64; 2]),
    StressStep([f64; 2]),
}

impl StepLoading {
    pub fn side(&self) -> Side {
        match self {
            StepLoading::StrainStep(_) => Side::Stress,
            StepLoading::StressStep(_) => Side::Strain,
        }
    }

    pub fn amplitude(&self) -> [f64; 2] {
        match *self {
            StepLoading::StrainStep(a) | StepLoading::StressStep(a) => a,
        }
    }

    /// Unit step along the first axis on the given side.
    pub fn unit(side: Side) -> Self {
        match side {
            Side::Stress => StepLoading::StrainStep([1.0, 0.0]),
            Side::Strain => StepLoading::StressStep([1.0, 0.0]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.amplitude();
        if a.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("loading amplitude {a:?} is not finite")))
        }
    }
}

/// Homogenized relaxation kernel `C^h(t)` (stress side) or creep kernel
/// `M^h(t)` (strain side) of a configuration.
pub fn homogenized_kernel(config: &SpectralConfig, pair: &CompositePair, t: f64) -> Result<Mat2> {
    let k = config.kernel_sum(pair, t)?;
    let scale = pair.response_scale();
    Ok([
        [scale * (1.0 - k[0][0]), -scale * k[0][1]],
        [-scale * k[1][0], scale * (1.0 - k[1][1])],
    ])
}

/// Averaged response vector `(x_12, x_13)` to a step loading.
pub fn eval_vector(
    config: &SpectralConfig,
    pair: &CompositePair,
    loading: &StepLoading,
    t: f64,
) -> Result<[f64; 2]> {
    check_side(config.side, loading.side())?;
    loading.validate()?;
    let c = homogenized_kernel(config, pair, t)?;
    let a = loading.amplitude();
    Ok([c[0][0] * a[0] + c[0][1] * a[1], c[1][0] * a[0] + c[1][1] * a[1]])
}

/// `sigma_12(t) = G2 eps0 (1 - sum_i K(s_i, t) B_11^(i))` for a step strain.
pub fn eval_scalar_stress(
    config: &SpectralConfig,
    pair: &CompositePair,
    loading: &StepLoading,
    t: f64,
) -> Result<f64> {
    check_side(Side::Stress, config.side)?;
    Ok(eval_vector(config, pair, loading, t)?[0])
}

/// `eps_12(t) = sigma0 / (2 G2) (1 - sum_i L(u_i, t) P_11^(i))` for a step stress.
pub fn eval_scalar_strain(
    config: &SpectralConfig,
    pair: &CompositePair,
    loading: &StepLoading,
    t: f64,
) -> Result<f64> {
    check_side(Side::Strain, config.side)?;
    Ok(eval_vector(config, pair, loading, t)?[0])
}

pub fn eval_vector_stress(
    config: &SpectralConfig,
    pair: &CompositePair,
    loading: &StepLoading,
    t: f64,
) -> Result<[f64; 2]> {
    check_side(Side::Stress, config.side)?;
    eval_vector(config, pair, loading, t)
}

pub fn eval_vector_strain(
    config: &SpectralConfig,
    pair: &CompositePair,
    loading: &StepLoading,
    t: f64,
) -> Result<[f64; 2]> {
    check_side(Side::Strain, config.side)?;
    eval_vector(config, pair, loading, t)
}

/// Response divided by the phase-2 reference `scale * |loading_1|`.
pub fn normalized_scalar(config: &SpectralConfig, pair: &CompositePair, t: f64) -> Result<f64> {
    Ok(1.0 - config.kernel_sum(pair, t)?[0][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pair() -> CompositePair {
        CompositePair::maxwell_elastic_example()
    }

    #[test]
    fn empty_config_is_phase_two() {
        let c = SpectralConfig::empty(Side::Stress);
        let load = StepLoading::StrainStep([2.0, 0.0]);
        for t in [0.0, 1.0, 50.0] {
            assert_eq!(eval_scalar_stress(&c, &pair(), &load, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn pure_phase_one_relaxes_like_maxwell() {
        let c = SpectralConfig::scalar(Side::Stress, vec![0.0], vec![1.0]).unwrap();
        let load = StepLoading::StrainStep([1.0, 0.0]);
        for t in [0.0, 0.5, 2.0, 7.0] {
            let v = eval_scalar_stress(&c, &pair(), &load, t).unwrap();
            let expected = (-t * 0.6).exp();
            assert!((v - expected).abs() < 1e-14, "t = {t}: {v} vs {expected}");
        }
    }

    #[test]
    fn strain_config_at_time_zero() {
        let p = CompositePair::kelvin_voigt_elastic_example();
        let c = SpectralConfig::scalar(Side::Strain, vec![0.0], vec![1.0]).unwrap();
        let load = StepLoading::StressStep([1.0, 0.0]);
        assert!(eval_scalar_strain(&c, &p, &load, 0.0).unwrap().abs() < 1e-15);
        let empty = SpectralConfig::empty(Side::Strain);
        assert!((eval_scalar_strain(&empty, &p, &load, 3.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn side_mismatch_is_reported() {
        let c = SpectralConfig::empty(Side::Strain);
        let load = StepLoading::StrainStep([1.0, 0.0]);
        assert!(matches!(
            eval_scalar_stress(&c, &pair(), &load, 1.0),
            Err(Error::SideMismatch { .. })
        ));
    }

    #[test]
    fn constructor_validates() {
        assert!(SpectralConfig::scalar(Side::Stress, vec![1.0], vec![0.0]).is_err());
        assert!(SpectralConfig::scalar(Side::Stress, vec![0.2], vec![-0.1]).is_err());
        assert!(SpectralConfig::scalar(Side::Stress, vec![0.5], vec![0.6]).is_err());
        assert!(SpectralConfig::scalar(Side::Stress, vec![0.5], vec![0.5]).is_ok());
        let c = SpectralConfig::scalar(Side::Stress, vec![0.7, 0.1], vec![0.1, 0.2]).unwrap();
        assert_eq!(c.poles(), &[0.1, 0.7]);
        assert_eq!(c.residues(), &Residues::Scalar(vec![0.2, 0.1]));
    }

    #[test]
    fn rotated_matrix_entries() {
        let m = rotated_matrix(PI / 6.0, 0.3, 0.7);
        let (s, c) = (0.5, 3f64.sqrt() / 2.0);
        assert!((m[0][0] - (0.3 * c * c + 0.7 * s * s)).abs() < 1e-15);
        assert!((m[0][1] - 0.4 * c * s).abs() < 1e-15);
        assert!((m[1][1] - (0.3 * s * s + 0.7 * c * c)).abs() < 1e-15);
        let (lo, hi) = sym_eigen(&m);
        assert!((lo - 0.3).abs() < 1e-15 && (hi - 0.7).abs() < 1e-15);
    }

    #[test]
    fn reflective_pair_at_time_zero() {
        // b_A0 = 1 - s0 at s0 = 0 and b_B1 = 1 - s1 at s1 -> 1 leave the
        // phase-1 instantaneous response along the A axis.
        let theta = PI / 4.0;
        let c = SpectralConfig::rotated(
            Side::Stress,
            vec![0.0, 0.5],
            vec![RotatedResidue::new(theta, 1.0, 0.0), RotatedResidue::new(theta, 0.0, 0.5)],
        )
        .unwrap();
        let load = StepLoading::StrainStep([1.0, 0.0]);
        let v = eval_vector_stress(&c, &pair(), &load, 0.0).unwrap();
        // Dense evaluation: K(0, 0) = -1, K(0.5, 0) = (r - 1) / d = -0.5 / 0.75.
        let b0 = rotated_matrix(theta, 1.0, 0.0);
        let b1 = rotated_matrix(theta, 0.0, 0.5);
        let k1 = -0.5 / 0.75;
        let x = 0.5 * (1.0 + b0[0][0] - k1 * b1[0][0]);
        let y = 0.5 * (b0[1][0] - k1 * b1[1][0]);
        assert!((v[0] - x).abs() < 1e-14 && (v[1] - y).abs() < 1e-14);
    }
}
