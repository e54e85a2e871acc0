//! Run configuration: a TOML file describing the composite, the available
//! information, the time grid and per-command settings.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use viscobound::optimizer::inverse::{InversionSettings, Measurement};
use viscobound::optimizer::{SearchSettings, Target};
use viscobound::sum_rules::{KnownValue, ReflectiveVfRule, Symmetry, DEFAULT_FICTITIOUS_DELTA};
use viscobound::{CompositePair, InfoSet, PhaseModel, Side, StepLoading};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub info: InfoSection,
    #[serde(default)]
    pub times: Option<TimesSection>,
    #[serde(default)]
    pub target: TargetSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub correlate: CorrelateSection,
    #[serde(default)]
    pub invert: InvertSection,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SideName {
    Stress,
    Strain,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseSpec {
    Elastic { modulus: f64 },
    Maxwell { modulus: f64, viscosity: f64 },
    KelvinVoigt { modulus: f64, viscosity: f64 },
}

impl PhaseSpec {
    fn build(&self) -> viscobound::Result<PhaseModel> {
        match *self {
            PhaseSpec::Elastic { modulus } => PhaseModel::elastic(modulus),
            PhaseSpec::Maxwell { modulus, viscosity } => PhaseModel::maxwell(modulus, viscosity),
            PhaseSpec::KelvinVoigt { modulus, viscosity } => PhaseModel::kelvin_voigt(modulus, viscosity),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub side: SideName,
    pub phase1: PhaseSpec,
    pub phase2: PhaseSpec,
    /// Step amplitude `(x_12, x_13)`; defaults to a unit step along `x_12`.
    #[serde(default = "unit_loading")]
    pub loading: [f64; 2],
}

fn unit_loading() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryName {
    #[default]
    Reflective,
    NonReflective,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VfRuleName {
    #[default]
    TraceConsistent,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownValueSpec {
    /// May be `inf`.
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoSection {
    pub volume_fraction: Option<f64>,
    #[serde(default)]
    pub transverse_isotropy: bool,
    #[serde(default)]
    pub known_values: Vec<KnownValueSpec>,
    #[serde(default)]
    pub symmetry: SymmetryName,
    #[serde(default = "default_delta")]
    pub fictitious_delta: f64,
    #[serde(default)]
    pub known_value_tolerance: f64,
    #[serde(default)]
    pub reflective_vf_rule: VfRuleName,
}

fn default_delta() -> f64 {
    DEFAULT_FICTITIOUS_DELTA
}

impl Default for InfoSection {
    fn default() -> Self {
        InfoSection {
            volume_fraction: None,
            transverse_isotropy: false,
            known_values: Vec::new(),
            symmetry: SymmetryName::default(),
            fictitious_delta: DEFAULT_FICTITIOUS_DELTA,
            known_value_tolerance: 0.0,
            reflective_vf_rule: VfRuleName::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Either explicit `values` or `start`, `stop`, `count` and `spacing`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSection {
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    #[default]
    Scalar,
    Directional,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    #[serde(default)]
    pub kind: TargetKind,
    /// Direction angle of `sin(alpha) x_12 + cos(alpha) x_13`.
    pub alpha: Option<f64>,
    /// Fixed common residue orientation.
    pub orientation: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub pole_grid: Option<usize>,
    pub tail_grid: Option<usize>,
    pub max_y: Option<f64>,
    pub theta_grid: Option<usize>,
    pub refine_rounds: Option<usize>,
    pub clock_poles: Option<usize>,
    pub clock_steps: Option<usize>,
    pub max_evals: Option<usize>,
    pub value_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub alpha_points: Option<usize>,
    pub theta_points: Option<usize>,
    /// Explicit orientations; overrides `theta_points`.
    pub thetas: Option<Vec<f64>>,
    pub mask_resolution: Option<usize>,
    pub laminate_points: Option<usize>,
    /// Orientation of the laminate reference curve.
    #[serde(default)]
    pub laminate_theta: f64,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    /// Size of the default direction fan.
    pub fan: Option<usize>,
    /// Explicit symmetric directions `[[v11, v12], [v12, v22]]`.
    pub directions: Option<Vec<[[f64; 2]; 2]>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSpec {
    pub times: Vec<f64>,
    pub directions: Vec<[f64; 2]>,
    /// One loading per time, or a single shared loading; defaults to the
    /// problem loading.
    pub loadings: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CorrelateSection {
    #[serde(default)]
    pub tuples: Vec<TupleSpec>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InvertSection {
    /// CSV file with `time,value` rows, relative to the config file.
    pub measurements: Option<PathBuf>,
    pub scan_points: Option<usize>,
    pub bisection_steps: Option<usize>,
    pub tolerance: Option<f64>,
}

/// A parsed configuration together with its provenance.
pub struct Loaded {
    pub config: RunConfig,
    pub path: PathBuf,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded { config, path: path.to_path_buf(), sha256 })
}

impl RunConfig {
    pub fn pair(&self) -> Result<CompositePair, CliError> {
        let side = match self.problem.side {
            SideName::Stress => Side::Stress,
            SideName::Strain => Side::Strain,
        };
        let p1 = self.problem.phase1.build().map_err(CliError::from_core)?;
        let p2 = self.problem.phase2.build().map_err(CliError::from_core)?;
        CompositePair::new(p1, p2, side).map_err(CliError::from_core)
    }

    pub fn loading(&self) -> StepLoading {
        match self.problem.side {
            SideName::Stress => StepLoading::StrainStep(self.problem.loading),
            SideName::Strain => StepLoading::StressStep(self.problem.loading),
        }
    }

    pub fn info(&self) -> Result<InfoSet, CliError> {
        let s = &self.info;
        let info = InfoSet {
            volume_fraction: s.volume_fraction,
            transverse_isotropy: s.transverse_isotropy,
            known_values: s.known_values.iter().map(|k| KnownValue { time: k.time, value: k.value }).collect(),
            symmetry: match s.symmetry {
                SymmetryName::Reflective => Symmetry::Reflective,
                SymmetryName::NonReflective => Symmetry::NonReflective,
            },
            fictitious_delta: s.fictitious_delta,
            known_value_tolerance: s.known_value_tolerance,
            reflective_vf_rule: match s.reflective_vf_rule {
                VfRuleName::TraceConsistent => ReflectiveVfRule::TraceConsistent,
                VfRuleName::AsPrinted => ReflectiveVfRule::AsPrinted,
            },
        };
        info.validate().map_err(CliError::from_core)?;
        Ok(info)
    }

    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let t = self.times.as_ref().ok_or_else(|| CliError::Config("missing [times] section".into()))?;
        let times = match (&t.values, t.start, t.stop, t.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => grid(a, b, n, t.spacing)?,
            _ => {
                return Err(CliError::Config(
                    "[times] needs either `values` or all of `start`, `stop`, `count`".into(),
                ))
            }
        };
        if times.is_empty() {
            return Err(CliError::Config("empty time grid".into()));
        }
        if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(CliError::Config("times must be finite and non-negative".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CliError::Config("times must be strictly increasing".into()));
        }
        Ok(times)
    }

    pub fn target(&self, side: Side) -> Result<Target, CliError> {
        match self.target.kind {
            TargetKind::Scalar => Ok(Target::Scalar12),
            TargetKind::Directional => {
                let a = self
                    .target
                    .alpha
                    .ok_or_else(|| CliError::Config("directional target needs `alpha`".into()))?;
                Ok(match side {
                    Side::Stress => Target::DirectionalF(a),
                    Side::Strain => Target::DirectionalG(a),
                })
            }
        }
    }

    /// Search settings: the defaults scaled by `grid_scale`, then any
    /// explicit overrides.
    pub fn search(&self, grid_scale: f64) -> Result<SearchSettings, CliError> {
        let mut s = SearchSettings::with_grid_scale(grid_scale).map_err(CliError::from_core)?;
        let o = &self.search;
        let set = |dst: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut s.pole_grid, o.pole_grid);
        set(&mut s.tail_grid, o.tail_grid);
        set(&mut s.theta_grid, o.theta_grid);
        set(&mut s.refine_rounds, o.refine_rounds);
        set(&mut s.clock_poles, o.clock_poles);
        set(&mut s.clock_steps, o.clock_steps);
        set(&mut s.nm.max_evals, o.max_evals);
        if let Some(y) = o.max_y {
            s.max_y = y;
        }
        if let Some(f) = o.value_tolerance {
            s.nm.ftol = f;
        }
        if s.pole_grid < 2 || s.clock_poles < 1 || s.clock_steps < 1 || !(s.max_y > 0.0) || !(s.nm.ftol > 0.0) {
            return Err(CliError::Config("search settings out of range".into()));
        }
        Ok(s)
    }

    pub fn inversion(&self) -> InversionSettings {
        let d = InversionSettings::default();
        InversionSettings {
            scan_points: self.invert.scan_points.unwrap_or(d.scan_points),
            bisection_steps: self.invert.bisection_steps.unwrap_or(d.bisection_steps),
            tolerance: self.invert.tolerance.unwrap_or(d.tolerance),
        }
    }
}

fn grid(a: f64, b: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>, CliError> {
    if n == 0 || !(b >= a) {
        return Err(CliError::Config(format!("bad time range [{a}, {b}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let u = |i: usize| i as f64 / (n - 1) as f64;
    Ok(match spacing {
        Spacing::Linear => (0..n).map(|i| a + (b - a) * u(i)).collect(),
        Spacing::Log => {
            if !(a > 0.0) {
                return Err(CliError::Config("log spacing needs a positive start".into()));
            }
            let (la, lb) = (a.ln(), b.ln());
            (0..n).map(|i| (la + (lb - la) * u(i)).exp()).collect()
        }
    })
}

/// Reads `time,value` rows; blank lines and `#` comments are skipped, as is
/// a header row that does not parse as numbers.
pub fn read_measurements(path: &Path) -> Result<Vec<Measurement>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [t, v] => t.parse::<f64>().ok().zip(v.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((time, value)) => out.push(Measurement { time, value }),
            None if out.is_empty() && lineno == 0 => continue,
            None => {
                return Err(CliError::Config(format!("{}:{}: expected `time,value`", path.display(), lineno + 1)))
            }
        }
    }
    Ok(out)
}
