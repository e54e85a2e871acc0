//! Minimization of a linear functional of the response over admissible
//! configurations: an LP over residues nested inside a search over poles.

use crate::error::{Error, Result};
use crate::lp::{simplex_solve, LinearProgramSpec, LpStatus, Sense};
use crate::optimizer::nelder_mead::{self, NmOptions};
use crate::phase::CompositePair;
use crate::spectral::{homogenized_kernel, sym_eigen, RotatedResidue, SpectralConfig};
use crate::sum_rules::{
    build_nonreflective_constraints, build_reflective_constraints, build_scalar_constraints,
    clock_angles, even_poles, InfoSet, Symmetry,
};

/// One summand `direction . x(time)` of an objective, where `x` is the
/// response to a step of amplitude `loading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerm {
    pub time: f64,
    pub loading: [f64; 2],
    pub direction: [f64; 2],
}

impl ObjectiveTerm {
    pub fn new(time: f64, loading: [f64; 2], direction: [f64; 2]) -> Self {
        ObjectiveTerm { time, loading, direction }
    }
}

/// How residues are parameterized during the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// Residues `x I`; constraints act on `B_11` only.
    Scalar,
    /// All residues share one principal basis. `None` searches the angle.
    Reflective { theta: Option<f64> },
    /// Fixed evenly spaced poles with cycling angles and a fictitious pole.
    Clock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    /// Uniform poles `i / n` in the coarse scan.
    pub pole_grid: usize,
    /// Extra poles `1 - exp(-y)` between the last uniform pole and `max_y`.
    pub tail_grid: usize,
    /// Poles are searched as `s = 1 - exp(-y)` with `y` in `[0, max_y]`.
    pub max_y: f64,
    /// Orientations on `[0, pi)` scanned when the angle is free.
    pub theta_grid: usize,
    pub refine_rounds: usize,
    pub nm: NmOptions,
    /// Poles whose residue weight `b / (1 - s)` is below this are dropped.
    pub support_tol: f64,
    pub clock_poles: usize,
    pub clock_steps: usize,
    /// Consecutive sweep times searched sequentially with warm starts.
    pub sweep_chunk: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            pole_grid: 64,
            tail_grid: 8,
            max_y: 30.0,
            theta_grid: 64,
            refine_rounds: 3,
            nm: NmOptions::default(),
            support_tol: 1e-12,
            clock_poles: 48,
            clock_steps: 12,
            sweep_chunk: 16,
        }
    }
}

impl SearchSettings {
    /// Multiplies every discretization size by `factor`.
    pub fn with_grid_scale(factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid scale {factor} must be positive")));
        }
        let d = Self::default();
        let scale = |n: usize, min: usize| ((n as f64 * factor).round() as usize).max(min);
        Ok(SearchSettings {
            pole_grid: scale(d.pole_grid, 2),
            tail_grid: scale(d.tail_grid, 1),
            theta_grid: scale(d.theta_grid, 1),
            clock_poles: scale(d.clock_poles, 2),
            clock_steps: scale(d.clock_steps, 1),
            ..d
        })
    }

    /// Poles of the coarse scan, ascending.
    pub fn base_poles(&self) -> Vec<f64> {
        let n = self.pole_grid.max(1);
        let mut poles: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let y0 = (n as f64).ln();
        let m = self.tail_grid;
        for j in 1..=m {
            let y = y0 + (self.max_y - y0) * j as f64 / m as f64;
            poles.push(pole_from_y(y));
        }
        poles
    }
}

/// Result of a minimization; `value` is the objective evaluated on `config`.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub config: SpectralConfig,
    /// Common orientation under the reflective layout.
    pub theta: Option<f64>,
}

const MERGE_TOL: f64 = 1e-7;
const LP_GUARD: f64 = 1e-10;

fn pole_from_y(y: f64) -> f64 {
    -(-y).exp_m1()
}

fn y_from_pole(s: f64) -> f64 {
    -(-s).ln_1p()
}

/// Objective evaluated on a configuration, by direct response evaluation.
pub fn objective_value(config: &SpectralConfig, pair: &CompositePair, terms: &[ObjectiveTerm]) -> Result<f64> {
    let mut total = 0.0;
    for term in terms {
        let c = homogenized_kernel(config, pair, term.time)?;
        let e = term.loading;
        let x = [c[0][0] * e[0] + c[0][1] * e[1], c[1][0] * e[0] + c[1][1] * e[1]];
        total += term.direction[0] * x[0] + term.direction[1] * x[1];
    }
    Ok(total)
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

struct Problem<'a> {
    pair: &'a CompositePair,
    info: &'a InfoSet,
    terms: &'a [ObjectiveTerm],
    settings: &'a SearchSettings,
    offset: f64,
}

/// An LP solution in residue units.
#[derive(Clone)]
struct Solved {
    value: f64,
    poles: Vec<f64>,
    theta: Option<f64>,
    /// One entry per pole (scalar) or two (rotated, interleaved `a, b`).
    x: Vec<f64>,
}

impl Problem<'_> {
    fn new<'a>(
        pair: &'a CompositePair,
        info: &'a InfoSet,
        terms: &'a [ObjectiveTerm],
        settings: &'a SearchSettings,
    ) -> Problem<'a> {
        let scale = pair.response_scale();
        let offset = terms.iter().map(|t| scale * dot(t.direction, t.loading)).sum();
        Problem { pair, info, terms, settings, offset }
    }

    fn kernel(&self, s: f64, t: f64) -> f64 {
        self.pair.kernel_unchecked(s, t)
    }

    /// Objective coefficient of `x` (scalar residue `x I`) at pole `s`.
    fn scalar_coeff(&self, s: f64) -> f64 {
        let scale = self.pair.response_scale();
        self.terms.iter().map(|t| -scale * self.kernel(s, t.time) * dot(t.direction, t.loading)).sum()
    }

    /// Objective coefficients of the eigenvalues `(a, b)` at pole `s` with
    /// orientation `theta`.
    fn rotated_coeffs(&self, s: f64, theta: f64) -> [f64; 2] {
        let scale = self.pair.response_scale();
        let (sn, cs) = theta.sin_cos();
        let p = [cs, -sn];
        let q = [sn, cs];
        let mut out = [0.0; 2];
        for t in self.terms {
            let k = -scale * self.kernel(s, t.time);
            out[0] += k * dot(t.direction, p) * dot(t.loading, p);
            out[1] += k * dot(t.direction, q) * dot(t.loading, q);
        }
        out
    }

    /// Solves the residue LP for fixed poles, working in the weights
    /// `w = x / (1 - s)` so that poles near 1 stay well scaled.
    fn solve(&self, spec: LinearProgramSpec, objective: Vec<f64>, pole_of_var: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
        let mut spec = spec;
        let col = |j: usize| 1.0 - pole_of_var[j];
        for row in spec.equalities.iter_mut().chain(spec.inequalities.iter_mut()) {
            for (j, c) in row.coeffs.iter_mut().enumerate() {
                *c *= col(j);
            }
        }
        spec.objective = objective.iter().enumerate().map(|(j, c)| c * col(j)).collect();
        spec.objective_offset = self.offset;
        let sol = simplex_solve(&spec, Sense::Min)?;
        match sol.status {
            // Guard against a nearly singular final basis.
            LpStatus::Optimal if spec.max_violation(&sol.point) > LP_GUARD => Ok(None),
            LpStatus::Optimal => {
                let x = sol.point.iter().enumerate().map(|(j, w)| w.max(0.0) * col(j)).collect();
                Ok(Some((sol.value, x)))
            }
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Numerical("residue program reported unbounded".into())),
        }
    }

    fn solve_scalar(&self, poles: &[f64]) -> Result<Option<Solved>> {
        let spec = build_scalar_constraints(self.info, poles, self.pair)?;
        let objective = poles.iter().map(|&s| self.scalar_coeff(s)).collect();
        Ok(self.solve(spec, objective, poles)?.map(|(value, x)| Solved {
            value,
            poles: poles.to_vec(),
            theta: None,
            x,
        }))
    }

    fn solve_reflective(&self, poles: &[f64], theta: f64) -> Result<Option<Solved>> {
        let spec = build_reflective_constraints(self.info, poles, theta, self.pair)?;
        let mut objective = Vec::with_capacity(2 * poles.len());
        let mut pole_of_var = Vec::with_capacity(2 * poles.len());
        for &s in poles {
            objective.extend(self.rotated_coeffs(s, theta));
            pole_of_var.extend([s, s]);
        }
        Ok(self.solve(spec, objective, &pole_of_var)?.map(|(value, x)| Solved {
            value,
            poles: poles.to_vec(),
            theta: Some(theta),
            x,
        }))
    }

    fn solve_layout(&self, poles: &[f64], theta: Option<f64>) -> Result<Option<Solved>> {
        match theta {
            None => self.solve_scalar(poles),
            Some(th) => self.solve_reflective(poles, th),
        }
    }

    /// Poles carrying a non-negligible residue.
    fn support(&self, sol: &Solved) -> Vec<f64> {
        let per = sol.x.len() / sol.poles.len().max(1);
        sol.poles
            .iter()
            .enumerate()
            .filter(|(i, &s)| {
                let w = sol.x[per * i..per * (i + 1)].iter().fold(0.0f64, |m, v| m.max(*v)) / (1.0 - s);
                w > self.settings.support_tol
            })
            .map(|(_, &s)| s)
            .collect()
    }

    /// Local refinement of the support poles (and the free angle).
    fn refine(&self, sol: &Solved, free_theta: bool) -> Result<Option<Solved>> {
        let support = self.support(sol);
        if support.is_empty() && !free_theta {
            return Ok(None);
        }
        let n = support.len();
        let mut x0: Vec<f64> = support.iter().map(|&s| y_from_pole(s).min(self.settings.max_y)).collect();
        let mut lower = vec![0.0; n];
        let mut upper = vec![self.settings.max_y; n];
        let mut step = vec![0.25; n];
        if free_theta {
            x0.push(sol.theta.unwrap_or(0.0));
            lower.push(f64::NEG_INFINITY);
            upper.push(f64::INFINITY);
            step.push(0.05);
        }
        let mut failure = None;
        let eval = |z: &[f64]| -> f64 {
            let mut poles: Vec<f64> = z[..n].iter().map(|&y| pole_from_y(y)).collect();
            dedup(&mut poles);
            let theta = if free_theta { Some(z[n]) } else { sol.theta };
            match self.solve_layout(&poles, theta) {
                Ok(Some(s)) => s.value,
                Ok(None) => f64::INFINITY,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            }
        };
        let res = nelder_mead::minimize(eval, &x0, &step, &lower, &upper, self.settings.nm);
        if let Some(e) = failure {
            return Err(e);
        }
        if !res.value.is_finite() {
            return Ok(None);
        }
        let mut poles: Vec<f64> = res.x[..n].iter().map(|&y| pole_from_y(y)).collect();
        dedup(&mut poles);
        let theta = if free_theta { Some(res.x[n]) } else { sol.theta };
        self.solve_layout(&poles, theta)
    }

    fn search(&self, fixed_theta: Option<f64>, reflective: bool, warm: Option<&Optimum>) -> Result<Solved> {
        let base = self.settings.base_poles();
        let mut candidates = base.clone();
        if let Some(w) = warm {
            candidates.extend(w.config.poles().iter().copied().filter(|s| *s < 1.0));
        }
        dedup(&mut candidates);

        let free_theta = reflective && fixed_theta.is_none();
        let mut best: Option<Solved> = None;
        let consider = |cand: Option<Solved>, best: &mut Option<Solved>| {
            if let Some(c) = cand {
                if best.as_ref().map_or(true, |b| c.value < b.value) {
                    *best = Some(c);
                }
            }
        };
        if !reflective {
            consider(self.solve_scalar(&candidates)?, &mut best);
        } else if let Some(th) = fixed_theta {
            consider(self.solve_reflective(&candidates, th)?, &mut best);
        } else {
            let n = self.settings.theta_grid.max(1);
            let mut thetas: Vec<f64> = (0..n).map(|k| std::f64::consts::PI * k as f64 / n as f64).collect();
            if let Some(th) = warm.and_then(|w| w.theta) {
                thetas.push(th);
            }
            for th in thetas {
                consider(self.solve_reflective(&candidates, th)?, &mut best);
            }
        }
        let mut best = best.ok_or_else(|| {
            Error::Infeasible("no admissible configuration satisfies the information set".into())
        })?;

        for _ in 0..self.settings.refine_rounds {
            let Some(local) = self.refine(&best, free_theta)? else { break };
            let mut pool = base.clone();
            pool.extend(self.support(&best));
            pool.extend(local.poles.iter().copied());
            dedup(&mut pool);
            let union = self.solve_layout(&pool, local.theta)?;
            let mut round_best = local;
            if let Some(u) = union {
                if u.value < round_best.value {
                    round_best = u;
                }
            }
            let gain = best.value - round_best.value;
            if gain > 0.0 {
                best = round_best;
            }
            if gain <= 1e-12 * (1.0 + best.value.abs()) {
                break;
            }
        }
        Ok(best)
    }

    fn clock(&self) -> Result<Solved> {
        let poles = even_poles(self.settings.clock_poles);
        let angles = clock_angles(poles.len(), self.settings.clock_steps);
        let spec = build_nonreflective_constraints(self.info, &poles, &angles, self.pair)?;
        let mut all_poles = poles.clone();
        all_poles.push(1.0 - self.info.fictitious_delta);
        let mut all_angles = angles;
        all_angles.push(0.0);
        let mut objective = Vec::new();
        let mut pole_of_var = Vec::new();
        for (&s, &th) in all_poles.iter().zip(&all_angles) {
            objective.extend(self.rotated_coeffs(s, th));
            pole_of_var.extend([s, s]);
        }
        let (value, x) = self.solve(spec, objective, &pole_of_var)?.ok_or_else(|| {
            Error::Infeasible("no admissible configuration satisfies the information set".into())
        })?;
        Ok(Solved { value, poles: all_poles, theta: None, x })
    }
}

/// Sorts and drops poles within `MERGE_TOL` (in `y = -ln(1 - s)`) of the
/// previous one; near-duplicate columns make the residue program singular.
fn dedup(poles: &mut Vec<f64>) {
    poles.sort_by(f64::total_cmp);
    poles.dedup_by(|b, a| (y_from_pole(*b) - y_from_pole(*a)).abs() < MERGE_TOL);
}

/// Factor bringing `sum B / (1 - s)` back under `I` when the LP point
/// overshoots it by more than the guard tolerance.
fn feasible_scale(poles: &[f64], mats: &[[[f64; 2]; 2]]) -> f64 {
    let mut acc = [[0.0; 2]; 2];
    for (&s, m) in poles.iter().zip(mats) {
        for r in 0..2 {
            for c in 0..2 {
                acc[r][c] += m[r][c] / (1.0 - s);
            }
        }
    }
    let (_, hi) = sym_eigen(&acc);
    if hi > 1.0 + LP_GUARD {
        1.0 / hi
    } else {
        1.0
    }
}

fn scalar_config(pair: &CompositePair, poles: &[f64], x: &[f64]) -> Result<SpectralConfig> {
    let mats: Vec<_> = x.iter().map(|&v| [[v, 0.0], [0.0, v]]).collect();
    let k = feasible_scale(poles, &mats);
    let cfg = SpectralConfig::scalar(pair.side(), poles.to_vec(), x.iter().map(|v| v * k).collect())?;
    Ok(cfg.pruned(0.0))
}

fn rotated_config(pair: &CompositePair, poles: &[f64], angles: &[f64], x: &[f64]) -> Result<SpectralConfig> {
    let mut residues: Vec<RotatedResidue> =
        poles.iter().enumerate().map(|(i, _)| RotatedResidue::new(angles[i], x[2 * i], x[2 * i + 1])).collect();
    let mats: Vec<_> = residues.iter().map(|r| r.matrix()).collect();
    let k = feasible_scale(poles, &mats);
    for r in &mut residues {
        r.b_a *= k;
        r.b_b *= k;
    }
    Ok(SpectralConfig::rotated(pair.side(), poles.to_vec(), residues)?.pruned(0.0))
}

fn check_terms(terms: &[ObjectiveTerm]) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::InvalidParameter("objective has no terms".into()));
    }
    for t in terms {
        if !(t.time >= 0.0) {
            return Err(Error::Domain(format!("time must be non-negative, got {}", t.time)));
        }
        if !t.loading.iter().chain(&t.direction).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("objective term has non-finite entries".into()));
        }
    }
    Ok(())
}

/// Minimizes `sum_j direction_j . x(time_j)` over configurations admitted by
/// `info`, all terms sharing one configuration.
pub fn minimize_objective(
    pair: &CompositePair,
    info: &InfoSet,
    terms: &[ObjectiveTerm],
    layout: Layout,
    settings: &SearchSettings,
    warm: Option<&Optimum>,
) -> Result<Optimum> {
    info.validate()?;
    check_terms(terms)?;
    let problem = Problem::new(pair, info, terms, settings);
    let (config, theta) = match layout {
        Layout::Scalar => {
            let sol = problem.search(None, false, warm)?;
            (scalar_config(pair, &sol.poles, &sol.x)?, None)
        }
        Layout::Reflective { theta } => {
            if info.symmetry != Symmetry::Reflective {
                return Err(Error::Configuration(
                    "the reflective layout needs a reflective information set".into(),
                ));
            }
            if let Some(th) = theta {
                if !th.is_finite() {
                    return Err(Error::InvalidParameter(format!("orientation {th} is not finite")));
                }
            }
            let sol = problem.search(theta, true, warm)?;
            let th = sol.theta.unwrap_or(0.0);
            let angles = vec![th; sol.poles.len()];
            (rotated_config(pair, &sol.poles, &angles, &sol.x)?, Some(th))
        }
        Layout::Clock => {
            if info.symmetry != Symmetry::NonReflective {
                return Err(Error::Configuration(
                    "the clock layout needs a non-reflective information set".into(),
                ));
            }
            let sol = problem.clock()?;
            let mut angles = clock_angles(sol.poles.len() - 1, settings.clock_steps);
            angles.push(0.0);
            (rotated_config(pair, &sol.poles, &angles, &sol.x)?, None)
        }
    };
    let value = objective_value(&config, pair, terms)?;
    Ok(Optimum { value, config, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Side;

    fn pair() -> CompositePair {
        CompositePair::maxwell_elastic_example()
    }

    fn sigma12(t: f64) -> Vec<ObjectiveTerm> {
        vec![ObjectiveTerm::new(t, [1.0, 0.0], [1.0, 0.0])]
    }

    #[test]
    fn base_grid_is_sorted_and_inside() {
        let p = SearchSettings::default().base_poles();
        assert_eq!(p.len(), 72);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(*p.last().unwrap() < 1.0);
    }

    #[test]
    fn no_info_lower_at_early_time_is_phase_two() {
        let s = SearchSettings::default();
        let o = minimize_objective(&pair(), &InfoSet::none(), &sigma12(0.5), Layout::Scalar, &s, None).unwrap();
        assert!((o.value - 0.5).abs() < 1e-12, "{}", o.value);
    }

    #[test]
    fn no_info_upper_at_early_time_is_phase_one() {
        let s = SearchSettings::default();
        let terms: Vec<_> = sigma12(0.5)
            .into_iter()
            .map(|t| ObjectiveTerm { direction: [-1.0, 0.0], ..t })
            .collect();
        let o = minimize_objective(&pair(), &InfoSet::none(), &terms, Layout::Scalar, &s, None).unwrap();
        let expected = (-0.5f64 * 0.6).exp();
        assert!((-o.value - expected).abs() < 1e-12);
        assert_eq!(o.config.poles(), &[0.0]);
    }

    #[test]
    fn value_matches_config() {
        let s = SearchSettings::default();
        let info = InfoSet::isotropic(0.4);
        let o = minimize_objective(&pair(), &info, &sigma12(2.0), Layout::Scalar, &s, None).unwrap();
        let direct = objective_value(&o.config, &pair(), &sigma12(2.0)).unwrap();
        assert_eq!(o.value, direct);
        let (m0, m1) = o.config.moments();
        assert!((m0[0][0] - 0.4).abs() < 1e-9 && (m1[0][0] - 0.12).abs() < 1e-9);
    }

    #[test]
    fn reflective_matches_scalar_on_first_component() {
        let s = SearchSettings::default();
        let terms = sigma12(1.3);
        let a = minimize_objective(&pair(), &InfoSet::none(), &terms, Layout::Scalar, &s, None).unwrap();
        let b = minimize_objective(&pair(), &InfoSet::none(), &terms, Layout::Reflective { theta: None }, &s, None)
            .unwrap();
        assert!((a.value - b.value).abs() < 1e-9, "{} {}", a.value, b.value);
    }

    #[test]
    fn clock_needs_nonreflective_info() {
        let s = SearchSettings::default();
        let r = minimize_objective(&pair(), &InfoSet::none(), &sigma12(1.0), Layout::Clock, &s, None);
        assert!(matches!(r, Err(Error::Configuration(_))));
        let info = InfoSet::none().with_symmetry(Symmetry::NonReflective);
        let o = minimize_objective(&pair(), &info, &sigma12(1.0), Layout::Clock, &s, None).unwrap();
        assert_eq!(o.config.side(), Side::Stress);
        assert!(o.value.is_finite());
    }

    #[test]
    fn infeasible_information_is_reported() {
        let s = SearchSettings::default();
        let info = InfoSet::none().with_known_value(0.0, 5.0);
        let r = minimize_objective(&pair(), &info, &sigma12(1.0), Layout::Scalar, &s, None);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }
}
