//! Constituent materials and the closed-form time-domain kernels of the
//! two model pairs with explicit inverse Laplace transforms.
//!
//! Under a step strain the averaged stress of a Maxwell/elastic composite is
//! `G2 eps0 (1 - sum_i K(s_i, t) B_i)` and under a step stress the averaged
//! strain of a Kelvin-Voigt/elastic composite is
//! `sigma0 / (2 G2) (1 - sum_i L(u_i, t) P_i)`.  [`CompositePair::kernel`]
//! returns `K` or `L` depending on the loading side.

use crate::error::{Error, Result};

/// Which averaged field is prescribed as a step in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Step strain, bounds on the stress response (relaxation test).
    Stress,
    /// Step stress, bounds on the strain response (creep test).
    Strain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseModel {
    Elastic { modulus: f64 },
    /// Spring and dashpot in series.
    Maxwell { modulus: f64, viscosity: f64 },
    /// Spring and dashpot in parallel.
    KelvinVoigt { modulus: f64, viscosity: f64 },
}

/// A kernel that may carry a Dirac impulse at `t = 0` on top of a regular part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub impulse: f64,
    pub density: f64,
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and strictly positive, got {value}"
        )))
    }
}

impl PhaseModel {
    pub fn elastic(modulus: f64) -> Result<Self> {
        check_positive("elastic modulus", modulus)?;
        Ok(PhaseModel::Elastic { modulus })
    }

    pub fn maxwell(modulus: f64, viscosity: f64) -> Result<Self> {
        check_positive("Maxwell modulus", modulus)?;
        check_positive("Maxwell viscosity", viscosity)?;
        Ok(PhaseModel::Maxwell { modulus, viscosity })
    }

    pub fn kelvin_voigt(modulus: f64, viscosity: f64) -> Result<Self> {
        check_positive("Kelvin-Voigt modulus", modulus)?;
        check_positive("Kelvin-Voigt viscosity", viscosity)?;
        Ok(PhaseModel::KelvinVoigt { modulus, viscosity })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseModel::Elastic { modulus } => check_positive("elastic modulus", modulus),
            PhaseModel::Maxwell { modulus, viscosity } => {
                check_positive("Maxwell modulus", modulus)?;
                check_positive("Maxwell viscosity", viscosity)
            }
            PhaseModel::KelvinVoigt { modulus, viscosity } => {
                check_positive("Kelvin-Voigt modulus", modulus)?;
                check_positive("Kelvin-Voigt viscosity", viscosity)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseModel::Elastic { .. } => "elastic",
            PhaseModel::Maxwell { .. } => "Maxwell",
            PhaseModel::KelvinVoigt { .. } => "Kelvin-Voigt",
        }
    }

    /// Laplace transform `mu(lambda)` of the relaxation kernel `mu(t)`.
    pub fn laplace_modulus(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || lambda.is_nan() {
            return Err(Error::Domain(format!(
                "Laplace parameter must be positive, got {lambda}"
            )));
        }
        Ok(match *self {
            PhaseModel::Elastic { modulus } => modulus,
            PhaseModel::Maxwell { modulus, viscosity } => {
                if lambda.is_infinite() {
                    modulus
                } else {
                    modulus * viscosity * lambda / (viscosity * lambda + modulus)
                }
            }
            PhaseModel::KelvinVoigt { modulus, viscosity } => modulus + viscosity * lambda,
        })
    }

    /// Laplace transform `zeta(lambda) = 1 / mu(lambda)` of the creep kernel.
    pub fn laplace_compliance(&self, lambda: f64) -> Result<f64> {
        Ok(1.0 / self.laplace_modulus(lambda)?)
    }

    /// Relaxation kernel `mu(t)`; stress is `mu * strain` (time convolution).
    ///
    /// The Kelvin-Voigt relaxation kernel contains a derivative of the Dirac
    /// distribution and has no [`KernelValue`] form.
    pub fn relaxation_kernel(&self, t: f64) -> Result<KernelValue> {
        check_time(t)?;
        match *self {
            PhaseModel::Elastic { modulus } => Ok(KernelValue { impulse: modulus, density: 0.0 }),
            PhaseModel::Maxwell { modulus, viscosity } => Ok(KernelValue {
                impulse: modulus,
                density: -modulus * modulus / viscosity * (-modulus * t / viscosity).exp(),
            }),
            PhaseModel::KelvinVoigt { .. } => Err(Error::ModelMismatch(
                "the Kelvin-Voigt relaxation kernel is not a measure".into(),
            )),
        }
    }

    /// Creep kernel `zeta(t)`; strain is `zeta * stress` (time convolution).
    pub fn creep_kernel(&self, t: f64) -> Result<KernelValue> {
        check_time(t)?;
        Ok(match *self {
            PhaseModel::Elastic { modulus } => KernelValue { impulse: 1.0 / modulus, density: 0.0 },
            PhaseModel::Maxwell { modulus, viscosity } => KernelValue {
                impulse: 1.0 / modulus,
                density: 1.0 / viscosity,
            },
            PhaseModel::KelvinVoigt { modulus, viscosity } => KernelValue {
                impulse: 0.0,
                density: (-modulus * t / viscosity).exp() / viscosity,
            },
        })
    }

    /// Modulus seen immediately after loading (`lambda -> infinity`).
    pub fn instantaneous_modulus(&self) -> f64 {
        match *self {
            PhaseModel::Elastic { modulus } | PhaseModel::Maxwell { modulus, .. } => modulus,
            PhaseModel::KelvinVoigt { .. } => f64::INFINITY,
        }
    }

    /// Modulus approached at long times (`lambda -> 0`).
    pub fn long_time_modulus(&self) -> f64 {
        match *self {
            PhaseModel::Elastic { modulus } | PhaseModel::KelvinVoigt { modulus, .. } => modulus,
            PhaseModel::Maxwell { .. } => 0.0,
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be non-negative, got {t}")))
    }
}

fn check_pole(pole: f64) -> Result<()> {
    if (0.0..1.0).contains(&pole) {
        Ok(())
    } else {
        Err(Error::Domain(format!("pole must lie in [0, 1), got {pole}")))
    }
}

/// Two phases plus the side on which they are loaded.
///
/// Only the pairs with closed-form kernels are accepted: a Maxwell phase 1
/// with an elastic phase 2 on the stress side, and a Kelvin-Voigt phase 1
/// with an elastic phase 2 on the strain side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositePair {
    phase1: PhaseModel,
    phase2: PhaseModel,
    side: Side,
}

impl CompositePair {
    pub fn new(phase1: PhaseModel, phase2: PhaseModel, side: Side) -> Result<Self> {
        phase1.validate()?;
        phase2.validate()?;
        let supported = matches!(
            (side, phase1, phase2),
            (Side::Stress, PhaseModel::Maxwell { .. }, PhaseModel::Elastic { .. })
                | (Side::Strain, PhaseModel::KelvinVoigt { .. }, PhaseModel::Elastic { .. })
        );
        if !supported {
            return Err(Error::ModelMismatch(format!(
                "no closed-form kernel for a {} phase 1 and {} phase 2 on the {:?} side \
                 (supported: Maxwell/elastic for Stress, Kelvin-Voigt/elastic for Strain)",
                phase1.name(),
                phase2.name(),
                side
            )));
        }
        Ok(CompositePair { phase1, phase2, side })
    }

    /// Maxwell phase 1 (`G_M = 1`, `eta_M = 5/3`) with an elastic phase 2
    /// (`G_2 = 1/2`), the parameter set whose crossover times are 0.83, 1.15
    /// and 1.67.
    pub fn maxwell_elastic_example() -> Self {
        CompositePair {
            phase1: PhaseModel::Maxwell { modulus: 1.0, viscosity: 5.0 / 3.0 },
            phase2: PhaseModel::Elastic { modulus: 0.5 },
            side: Side::Stress,
        }
    }

    /// Kelvin-Voigt phase 1 (`G_K = 1/2`, `eta_K = 2`) with an elastic phase 2
    /// (`G_2 = 1`).
    pub fn kelvin_voigt_elastic_example() -> Self {
        CompositePair {
            phase1: PhaseModel::KelvinVoigt { modulus: 0.5, viscosity: 2.0 },
            phase2: PhaseModel::Elastic { modulus: 1.0 },
            side: Side::Strain,
        }
    }

    pub fn phase1(&self) -> PhaseModel {
        self.phase1
    }

    pub fn phase2(&self) -> PhaseModel {
        self.phase2
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Shear modulus `G_2` of the elastic phase.
    pub fn elastic_modulus(&self) -> f64 {
        match self.phase2 {
            PhaseModel::Elastic { modulus } => modulus,
            _ => unreachable!("constructor guarantees an elastic phase 2"),
        }
    }

    /// Factor turning `loading - sum_i kernel_i B_i loading` into a physical
    /// response: `G_2` on the stress side, `1 / (2 G_2)` on the strain side.
    pub fn response_scale(&self) -> f64 {
        match self.side {
            Side::Stress => self.elastic_modulus(),
            Side::Strain => 0.5 / self.elastic_modulus(),
        }
    }

    /// True when the instantaneous and long-time modulus differences of the
    /// two phases have the same sign.
    pub fn is_well_ordered(&self) -> bool {
        let inst = self.phase1.instantaneous_modulus() - self.phase2.instantaneous_modulus();
        let long = self.phase1.long_time_modulus() - self.phase2.long_time_modulus();
        inst * long > 0.0
    }

    /// `s(lambda) = mu2 / (mu2 - mu1)` on the stress side and
    /// `u(lambda) = zeta2 / (zeta2 - zeta1)` on the strain side.
    pub fn s_parameter(&self, lambda: f64) -> Result<f64> {
        s_parameter(&self.phase1, &self.phase2, self.side, lambda)
    }

    /// `K(s, t)` or `L(u, t)` according to the side.
    pub fn kernel(&self, pole: f64, t: f64) -> Result<f64> {
        check_pole(pole)?;
        check_time(t)?;
        Ok(self.kernel_unchecked(pole, t))
    }

    /// `(1 - pole) * kernel(pole, t)`, the response coefficient of a residue
    /// written as `B = (1 - pole) w`.  Finite at `pole = 1`, where it equals
    /// the pure phase-2 limit 0 for finite `t`.
    pub fn weighted_kernel(&self, pole: f64, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&pole) {
            return Err(Error::Domain(format!("pole must lie in [0, 1], got {pole}")));
        }
        check_time(t)?;
        if t.is_infinite() {
            if pole == 1.0 {
                return Err(Error::Domain(
                    "the limits pole -> 1 and t -> infinity do not commute".into(),
                ));
            }
            return Ok((1.0 - pole) * self.kernel_unchecked(pole, t));
        }
        Ok(match (self.phase1, self.side) {
            (PhaseModel::Maxwell { modulus: gm, viscosity: eta }, Side::Stress) => {
                let g2 = self.elastic_modulus();
                let (d, x) = maxwell_terms(g2, gm, eta, pole, t);
                ((g2 / gm - 1.0) * (1.0 - pole) - x.exp_m1()) / d
            }
            (PhaseModel::KelvinVoigt { modulus: gk, viscosity: eta }, Side::Strain) => {
                let g2 = self.elastic_modulus();
                let denom = gk - pole * (gk - g2);
                let decay = if pole == 1.0 {
                    if t == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (-(gk * (1.0 - pole) + pole * g2) * t / (eta * (1.0 - pole))).exp()
                };
                ((gk - g2) * (1.0 - pole) + g2 * decay) / denom
            }
            _ => unreachable!("constructor guarantees a supported pair"),
        })
    }

    /// Kernel limit as `t -> infinity`.
    pub fn kernel_at_infinity(&self, pole: f64) -> Result<f64> {
        check_pole(pole)?;
        Ok(self.kernel_unchecked(pole, f64::INFINITY))
    }

    pub(crate) fn kernel_unchecked(&self, pole: f64, t: f64) -> f64 {
        match (self.phase1, self.side) {
            (PhaseModel::Maxwell { modulus: gm, viscosity: eta }, Side::Stress) => {
                maxwell_kernel(self.elastic_modulus(), gm, eta, pole, t)
            }
            (PhaseModel::KelvinVoigt { modulus: gk, viscosity: eta }, Side::Strain) => {
                kelvin_voigt_kernel(self.elastic_modulus(), gk, eta, pole, t)
            }
            _ => unreachable!("constructor guarantees a supported pair"),
        }
    }

    /// Normalized response of the single-pole configuration `B = 1 - pole`,
    /// i.e. a simple laminate loaded across its layers.
    pub fn laminate_response(&self, pole: f64, t: f64) -> Result<f64> {
        Ok(1.0 - self.weighted_kernel(pole, t)?)
    }
}

/// `(d, x)` with `d = r + s (1 - r)`, `r = G2 / G_M`, and the exponent
/// `x = -G2 (1 - s) t / (eta_M d)`.
fn maxwell_terms(g2: f64, gm: f64, eta: f64, s: f64, t: f64) -> (f64, f64) {
    let r = g2 / gm;
    let d = r - s * (r - 1.0);
    let x = if t.is_infinite() {
        f64::NEG_INFINITY
    } else {
        -g2 * (1.0 - s) * t / (eta * d)
    };
    (d, x)
}

fn maxwell_kernel(g2: f64, gm: f64, eta: f64, s: f64, t: f64) -> f64 {
    let (d, x) = maxwell_terms(g2, gm, eta, s, t);
    // (1 - e^x / d) / (1 - s) with the cancellation near s = 1 removed.
    ((g2 / gm - 1.0) - x.exp_m1() / (1.0 - s)) / d
}

fn kelvin_voigt_kernel(g2: f64, gk: f64, eta: f64, u: f64, t: f64) -> f64 {
    let decay = if t.is_infinite() {
        0.0
    } else {
        (-(gk * (1.0 - u) + u * g2) * t / (eta * (1.0 - u))).exp()
    };
    (gk - g2 + g2 * decay / (1.0 - u)) / (gk - u * (gk - g2))
}

/// `K(s, t)` for a Maxwell phase 1 and an elastic phase 2.
pub fn stress_kernel(pair: &CompositePair, s: f64, t: f64) -> Result<f64> {
    if pair.side != Side::Stress {
        return Err(Error::SideMismatch { expected: Side::Stress, found: pair.side });
    }
    pair.kernel(s, t)
}

/// `L(u, t)` for a Kelvin-Voigt phase 1 and an elastic phase 2.
pub fn strain_kernel(pair: &CompositePair, u: f64, t: f64) -> Result<f64> {
    if pair.side != Side::Strain {
        return Err(Error::SideMismatch { expected: Side::Strain, found: pair.side });
    }
    pair.kernel(u, t)
}

/// The spectral variable of an arbitrary pair of phases.
pub fn s_parameter(phase1: &PhaseModel, phase2: &PhaseModel, side: Side, lambda: f64) -> Result<f64> {
    let (v1, v2) = match side {
        Side::Stress => (phase1.laplace_modulus(lambda)?, phase2.laplace_modulus(lambda)?),
        Side::Strain => (phase1.laplace_compliance(lambda)?, phase2.laplace_compliance(lambda)?),
    };
    let diff = v2 - v1;
    if diff == 0.0 || diff.abs() <= 1e-15 * v1.abs().max(v2.abs()) {
        return Err(Error::DegenerateContrast { lambda });
    }
    Ok(v2 / diff)
}
