//! Microstructural information and the linear constraints it places on the
//! residues for a fixed set of poles.

use crate::error::{Error, Result};
use crate::lp::{Constraint, LinearProgramSpec};
use crate::phase::CompositePair;

/// Default half-width of the fictitious pole gap `1 - s_{m+1}`.
pub const DEFAULT_FICTITIOUS_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// All residue matrices share one principal basis.
    Reflective,
    NonReflective,
}

/// How the second-eigenvalue volume-fraction rule reads under reflective
/// symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReflectiveVfRule {
    /// `sum b_B = f1`, the trace-consistent form of `sum B = f1 I`.
    #[default]
    TraceConsistent,
    /// `sum b_B = f1 f2`.
    AsPrinted,
}

/// A prescribed normalized response (`sigma_12 / (G2 eps0)` or
/// `eps_12 / (sigma0 / 2 G2)`) at one time, possibly `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownValue {
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoSet {
    pub volume_fraction: Option<f64>,
    pub transverse_isotropy: bool,
    pub known_values: Vec<KnownValue>,
    pub symmetry: Symmetry,
    pub fictitious_delta: f64,
    /// Known values are matched to within this absolute tolerance; 0 means
    /// exact equality.
    pub known_value_tolerance: f64,
    pub reflective_vf_rule: ReflectiveVfRule,
}

impl Default for InfoSet {
    fn default() -> Self {
        InfoSet {
            volume_fraction: None,
            transverse_isotropy: false,
            known_values: Vec::new(),
            symmetry: Symmetry::Reflective,
            fictitious_delta: DEFAULT_FICTITIOUS_DELTA,
            known_value_tolerance: 0.0,
            reflective_vf_rule: ReflectiveVfRule::default(),
        }
    }
}

impl InfoSet {
    /// No information beyond the phase moduli.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn volume_fraction(f1: f64) -> Self {
        InfoSet { volume_fraction: Some(f1), ..Self::default() }
    }

    pub fn isotropic(f1: f64) -> Self {
        InfoSet { volume_fraction: Some(f1), transverse_isotropy: true, ..Self::default() }
    }

    pub fn with_known_value(mut self, time: f64, value: f64) -> Self {
        self.known_values.push(KnownValue { time, value });
        self
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(f1) = self.volume_fraction {
            if !(f1 > 0.0 && f1 < 1.0) {
                return Err(Error::Configuration(format!("volume fraction {f1} outside (0, 1)")));
            }
        }
        if self.transverse_isotropy && self.volume_fraction.is_none() {
            return Err(Error::Configuration(
                "transverse isotropy requires a known volume fraction".into(),
            ));
        }
        for (i, kv) in self.known_values.iter().enumerate() {
            if !(kv.time >= 0.0) {
                return Err(Error::Configuration(format!("known value at invalid time {}", kv.time)));
            }
            if !kv.value.is_finite() {
                return Err(Error::Configuration(format!("known value {} is not finite", kv.value)));
            }
            if self.known_values[..i].iter().any(|o| o.time == kv.time) {
                return Err(Error::Configuration(format!("duplicate known-value time {}", kv.time)));
            }
        }
        if !(self.fictitious_delta > 0.0 && self.fictitious_delta < 1.0) {
            return Err(Error::Configuration(format!(
                "fictitious pole gap {} outside (0, 1)",
                self.fictitious_delta
            )));
        }
        if !(self.known_value_tolerance >= 0.0) || !self.known_value_tolerance.is_finite() {
            return Err(Error::Configuration(format!(
                "known-value tolerance {} must be finite and non-negative",
                self.known_value_tolerance
            )));
        }
        Ok(())
    }

    /// Known values lying outside the no-information range at their time.
    ///
    /// These are warnings only: such data make the program infeasible.
    pub fn admissibility_warnings(&self, pair: &CompositePair) -> Vec<String> {
        let mut out = Vec::new();
        for kv in &self.known_values {
            let (lo, hi) = single_pole_range(pair, kv.time);
            let slack = 1e-9 + self.known_value_tolerance;
            if kv.value < lo - slack || kv.value > hi + slack {
                out.push(format!(
                    "known value {} at t = {} lies outside the attainable range [{lo:.6}, {hi:.6}]",
                    kv.value, kv.time
                ));
            }
        }
        out
    }
}

/// Range of `1 - (1 - s) kernel(s, t)` over a dense pole scan, which is the
/// no-information range of the normalized response.
fn single_pole_range(pair: &CompositePair, t: f64) -> (f64, f64) {
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    let n = 4000;
    for i in 0..n {
        let y = 30.0 * i as f64 / n as f64;
        let s = -(-y).exp_m1();
        for s in [s, i as f64 / n as f64] {
            if let Ok(w) = pair.weighted_kernel(s, t) {
                lo = lo.min(1.0 - w);
                hi = hi.max(1.0 - w);
            }
        }
    }
    (lo, hi)
}

fn check_poles(poles: &[f64]) -> Result<()> {
    for &s in poles {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Domain(format!("pole {s} outside [0, 1)")));
        }
    }
    Ok(())
}

/// Kernel coefficient at a known-value time (analytic limit at infinity).
fn kernel_at(pair: &CompositePair, s: f64, t: f64) -> Result<f64> {
    if t.is_infinite() {
        pair.kernel_at_infinity(s)
    } else {
        pair.kernel(s, t)
    }
}

fn push_known(spec: &mut LinearProgramSpec, coeffs: Vec<f64>, value: f64, tol: f64) {
    let rhs = 1.0 - value;
    if tol == 0.0 {
        spec.equalities.push(Constraint::new(coeffs, rhs));
    } else {
        let neg = coeffs.iter().map(|c| -c).collect();
        spec.inequalities.push(Constraint::new(coeffs, rhs + tol));
        spec.inequalities.push(Constraint::new(neg, -(rhs - tol)));
    }
}

/// Constraints on the scalar residues `x_i = B_11^(i)`.
///
/// Emits `sum x_i / (1 - s_i) <= 1`; `sum x_i = f1` with a volume fraction;
/// `sum x_i s_i = f1 f2 / 2` with transverse isotropy; and
/// `sum kernel(s_i, tau) x_i = 1 - value` per known value.
pub fn build_scalar_constraints(
    info: &InfoSet,
    poles: &[f64],
    pair: &CompositePair,
) -> Result<LinearProgramSpec> {
    info.validate()?;
    check_poles(poles)?;
    let n = poles.len();
    let mut spec = LinearProgramSpec::new(n);
    spec.inequalities.push(Constraint::new(poles.iter().map(|s| 1.0 / (1.0 - s)).collect(), 1.0));
    if let Some(f1) = info.volume_fraction {
        spec.equalities.push(Constraint::new(vec![1.0; n], f1));
        if info.transverse_isotropy {
            spec.equalities.push(Constraint::new(poles.to_vec(), 0.5 * f1 * (1.0 - f1)));
        }
    }
    for kv in &info.known_values {
        let coeffs = poles.iter().map(|&s| kernel_at(pair, s, kv.time)).collect::<Result<Vec<_>>>()?;
        push_known(&mut spec, coeffs, kv.value, info.known_value_tolerance);
    }
    Ok(spec)
}

/// Constraints on interleaved `(b_A0, b_B0, b_A1, b_B1, ...)` for residues
/// sharing the orientation `theta`.
///
/// Transverse isotropy is imposed as `b_Ai = b_Bi`. Known values refer to the
/// 12 response under a loading along the first axis.
pub fn build_reflective_constraints(
    info: &InfoSet,
    poles: &[f64],
    theta: f64,
    pair: &CompositePair,
) -> Result<LinearProgramSpec> {
    info.validate()?;
    check_poles(poles)?;
    if info.symmetry != Symmetry::Reflective {
        return Err(Error::Configuration(
            "reflective constraints requested for a non-reflective information set".into(),
        ));
    }
    let n = poles.len();
    let mut spec = LinearProgramSpec::new(2 * n);
    let track = |which: usize, f: &dyn Fn(f64) -> f64| {
        let mut c = vec![0.0; 2 * n];
        for (i, &s) in poles.iter().enumerate() {
            c[2 * i + which] = f(s);
        }
        c
    };
    spec.inequalities.push(Constraint::new(track(0, &|s| 1.0 / (1.0 - s)), 1.0));
    spec.inequalities.push(Constraint::new(track(1, &|s| 1.0 / (1.0 - s)), 1.0));
    if let Some(f1) = info.volume_fraction {
        let f2 = 1.0 - f1;
        spec.equalities.push(Constraint::new(track(0, &|_| 1.0), f1));
        let b_rhs = match info.reflective_vf_rule {
            ReflectiveVfRule::TraceConsistent => f1,
            ReflectiveVfRule::AsPrinted => f1 * f2,
        };
        spec.equalities.push(Constraint::new(track(1, &|_| 1.0), b_rhs));
        let mut trace = track(0, &|s| s);
        for (c, b) in trace.iter_mut().zip(track(1, &|s| s)) {
            *c += b;
        }
        spec.equalities.push(Constraint::new(trace, f1 * f2));
    }
    if info.transverse_isotropy {
        push_isotropy(&mut spec, n);
    }
    let (sin, cos) = theta.sin_cos();
    for kv in &info.known_values {
        let mut coeffs = vec![0.0; 2 * n];
        for (i, &s) in poles.iter().enumerate() {
            let k = kernel_at(pair, s, kv.time)?;
            coeffs[2 * i] = k * cos * cos;
            coeffs[2 * i + 1] = k * sin * sin;
        }
        push_known(&mut spec, coeffs, kv.value, info.known_value_tolerance);
    }
    Ok(spec)
}

fn push_isotropy(spec: &mut LinearProgramSpec, n_poles: usize) {
    for i in 0..n_poles {
        let mut c = vec![0.0; spec.num_vars];
        c[2 * i] = 1.0;
        c[2 * i + 1] = -1.0;
        spec.equalities.push(Constraint::new(c, 0.0));
    }
}

/// Clock schedule `theta_i = 2 pi (i mod k) / k`.
pub fn clock_angles(m: usize, k: usize) -> Vec<f64> {
    (0..m).map(|i| 2.0 * std::f64::consts::PI * (i % k) as f64 / k as f64).collect()
}

/// Evenly spaced poles `s_i = i / (m + 2)`, `i = 0..=m`.
pub fn even_poles(m: usize) -> Vec<f64> {
    (0..=m).map(|i| i as f64 / (m + 2) as f64).collect()
}

/// Constraints without reflective symmetry: each pole carries its own angle,
/// and an extra pole at `1 - delta` with an axis-aligned residue turns
/// `F(1) <= I` into three equalities.
///
/// Variables are interleaved `(b_A, b_B)` per pole, fictitious pole last.
pub fn build_nonreflective_constraints(
    info: &InfoSet,
    poles: &[f64],
    angles: &[f64],
    pair: &CompositePair,
) -> Result<LinearProgramSpec> {
    info.validate()?;
    check_poles(poles)?;
    if poles.len() != angles.len() {
        return Err(Error::InvalidParameter(format!(
            "{} poles but {} angles",
            poles.len(),
            angles.len()
        )));
    }
    let delta = info.fictitious_delta;
    let s_fict = 1.0 - delta;
    if let Some(&top) = poles.iter().max_by(|a, b| a.total_cmp(b)) {
        if s_fict <= top {
            return Err(Error::Domain(format!(
                "fictitious pole gap {delta} must be below 1 - s_max = {}",
                1.0 - top
            )));
        }
    }
    let n = poles.len() + 1;
    let mut all_poles = poles.to_vec();
    all_poles.push(s_fict);
    let mut all_angles = angles.to_vec();
    all_angles.push(0.0);

    // Per-pole contributions of (b_A, b_B) to the entries 11, 22, 12.
    let entries = |theta: f64| {
        let (s, c) = theta.sin_cos();
        [[c * c, s * s], [s * s, c * c], [-c * s, c * s]]
    };
    let mut spec = LinearProgramSpec::new(2 * n);
    for entry in 0..3 {
        let mut at_one = vec![0.0; 2 * n];
        let mut moment = vec![0.0; 2 * n];
        for i in 0..n {
            let e = entries(all_angles[i])[entry];
            for k in 0..2 {
                at_one[2 * i + k] = e[k] / (1.0 - all_poles[i]);
                if i < n - 1 {
                    moment[2 * i + k] = e[k];
                }
            }
        }
        let diag = if entry < 2 { 1.0 } else { 0.0 };
        spec.equalities.push(Constraint::new(at_one, diag));
        if let Some(f1) = info.volume_fraction {
            spec.equalities.push(Constraint::new(moment, diag * f1));
        }
    }
    if let Some(f1) = info.volume_fraction {
        let mut trace = vec![0.0; 2 * n];
        for (i, &s) in poles.iter().enumerate() {
            trace[2 * i] = s;
            trace[2 * i + 1] = s;
        }
        spec.equalities.push(Constraint::new(trace, f1 * (1.0 - f1)));
    }
    if info.transverse_isotropy {
        push_isotropy(&mut spec, n);
    }
    for kv in &info.known_values {
        let mut coeffs = vec![0.0; 2 * n];
        for i in 0..n {
            let k = kernel_at(pair, all_poles[i], kv.time)?;
            let e = entries(all_angles[i])[0];
            coeffs[2 * i] = k * e[0];
            coeffs[2 * i + 1] = k * e[1];
        }
        push_known(&mut spec, coeffs, kv.value, info.known_value_tolerance);
    }
    Ok(spec)
}
