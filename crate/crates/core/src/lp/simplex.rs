//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Columns and rows are equilibrated before pivoting because kernel
//! coefficients near `s = 1` reach `1e13`. After the tableau terminates the
//! basic system is re-solved with partial pivoting to clean up round-off.

use super::{LinearProgramSpec, LpSolution, LpStatus, Sense};
use crate::error::{Error, Result};

/// Entries at or below this magnitude are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITER: usize = 100_000;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Eq,
    Le,
}

struct Row {
    coeffs: Vec<f64>,
    rhs: f64,
    kind: Kind,
    /// Index into `spec.inequalities` for `Le` rows.
    source: usize,
    slack: Option<usize>,
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries, right-hand side last.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.ncols]
    }

    fn pivot(&mut self, cost: &mut [f64], pr: usize, pc: usize) {
        let p = self.t[pr][pc];
        for v in self.t[pr].iter_mut() {
            *v /= p;
        }
        self.t[pr][pc] = 1.0;
        let pivot_row = self.t[pr].clone();
        for (r, row) in self.t.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let f = row[pc];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[pc] = 0.0;
            }
        }
        let f = cost[pc];
        if f != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Minimizes the reduced-cost row `cost` (last entry is minus the
    /// objective value) over columns not in `excluded`.
    fn run(&mut self, cost: &mut [f64], excluded: &[bool]) -> Result<LpStatus> {
        for _ in 0..MAX_ITER {
            let entering = (0..self.ncols).find(|&j| !excluded[j] && cost[j] < -COST_TOL);
            let Some(pc) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][pc];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let tie = (ratio - bratio).abs() <= 1e-12 * bratio.abs().max(1e-300);
                            if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(LpStatus::Unbounded),
                Some((pr, _)) => self.pivot(cost, pr, pc),
            }
        }
        Err(Error::Numerical("simplex iteration limit reached".into()))
    }
}

/// Solves `spec` in the requested sense.
///
/// Infeasible and unbounded programs are reported through
/// [`LpSolution::status`]; only malformed specs and iteration blow-ups
/// produce errors.
pub fn simplex_solve(spec: &LinearProgramSpec, sense: Sense) -> Result<LpSolution> {
    spec.validate()?;
    let n = spec.num_vars;

    let mut col_scale = vec![1.0; n];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let m = spec
            .equalities
            .iter()
            .chain(&spec.inequalities)
            .fold(0.0f64, |m, row| m.max(row.coeffs[j].abs()));
        if m > 0.0 {
            *cs = 1.0 / m;
        }
    }

    let infeasible = || LpSolution {
        status: LpStatus::Infeasible,
        value: f64::NAN,
        point: vec![],
        active_set: vec![],
    };

    let mut rows = Vec::new();
    let mut trivially_tight = Vec::new();
    let sources = spec
        .equalities
        .iter()
        .enumerate()
        .map(|(i, c)| (c, Kind::Eq, i))
        .chain(spec.inequalities.iter().enumerate().map(|(i, c)| (c, Kind::Le, i)));
    for (c, kind, source) in sources {
        let coeffs: Vec<f64> = c.coeffs.iter().zip(&col_scale).map(|(a, s)| a * s).collect();
        let m = coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if m == 0.0 {
            let ok = match kind {
                Kind::Eq => c.rhs.abs() <= FEAS_TOL,
                Kind::Le => c.rhs >= -FEAS_TOL,
            };
            if !ok {
                return Ok(infeasible());
            }
            if kind == Kind::Le && c.rhs.abs() <= FEAS_TOL {
                trivially_tight.push(source);
            }
            continue;
        }
        rows.push(Row {
            coeffs: coeffs.iter().map(|a| a / m).collect(),
            rhs: c.rhs / m,
            kind,
            source,
            slack: None,
        });
    }

    let mut ncols = n;
    for row in rows.iter_mut() {
        if row.kind == Kind::Le {
            row.slack = Some(ncols);
            ncols += 1;
        }
    }
    let n_real = ncols;
    let m = rows.len();
    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut artificial_rows = Vec::new();
    for row in &rows {
        let mut line = vec![0.0; ncols];
        line[..n].copy_from_slice(&row.coeffs);
        if let Some(s) = row.slack {
            line[s] = 1.0;
        }
        let mut rhs = row.rhs;
        if row.kind == Kind::Le && rhs >= 0.0 {
            basis.push(row.slack.unwrap());
        } else {
            if rhs < 0.0 {
                for v in line.iter_mut() {
                    *v = -*v;
                }
                rhs = -rhs;
            }
            artificial_rows.push(t.len());
            basis.push(usize::MAX);
        }
        line.push(rhs);
        t.push(line);
    }
    let n_art = artificial_rows.len();
    let total = n_real + n_art;
    for line in t.iter_mut() {
        let rhs = line.pop().unwrap();
        line.resize(total, 0.0);
        line.push(rhs);
    }
    for (k, &r) in artificial_rows.iter().enumerate() {
        t[r][n_real + k] = 1.0;
        basis[r] = n_real + k;
    }
    let mut tab = Tableau { t, basis, ncols: total };
    let mut excluded = vec![false; total];

    if n_art > 0 {
        let mut cost = vec![0.0; total + 1];
        for &r in &artificial_rows {
            for (c, v) in cost.iter_mut().zip(&tab.t[r]) {
                *c -= v;
            }
        }
        for k in 0..n_art {
            cost[n_real + k] = 0.0;
        }
        tab.run(&mut cost, &excluded)?;
        let infeasibility = -cost[total];
        if infeasibility > FEAS_TOL {
            return Ok(infeasible());
        }
        // Drive remaining artificials out of the basis.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= n_real {
                let pc = (0..n_real)
                    .filter(|&j| tab.t[r][j].abs() > PIVOT_TOL)
                    .max_by(|&a, &b| tab.t[r][a].abs().total_cmp(&tab.t[r][b].abs()));
                match pc {
                    Some(pc) => {
                        let mut dummy = vec![0.0; total + 1];
                        tab.pivot(&mut dummy, r, pc);
                        r += 1;
                    }
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        rows.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for e in excluded.iter_mut().skip(n_real) {
            *e = true;
        }
    }

    let sign = match sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut cost = vec![0.0; total + 1];
    for j in 0..n {
        cost[j] = sign * spec.objective[j] * col_scale[j];
    }
    for r in 0..tab.t.len() {
        let cb = cost[tab.basis[r]];
        if cb != 0.0 {
            let line = tab.t[r].clone();
            for (c, v) in cost.iter_mut().zip(&line) {
                *c -= cb * v;
            }
        }
    }
    for r in 0..tab.t.len() {
        cost[tab.basis[r]] = 0.0;
    }
    if tab.run(&mut cost, &excluded)? == LpStatus::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: sign * f64::NEG_INFINITY,
            point: vec![],
            active_set: vec![],
        });
    }

    let mut y = vec![0.0; n_real];
    for r in 0..tab.t.len() {
        y[tab.basis[r]] = tab.rhs(r).max(0.0);
    }
    let unscale = |y: &[f64]| -> Vec<f64> { (0..n).map(|j| (y[j] * col_scale[j]).max(0.0)).collect() };
    let mut point = unscale(&y);
    if let Some(polished) = polish(&rows, &tab.basis, n, n_real) {
        // A nearly singular basis can make the re-solve worse than the tableau.
        let candidate = unscale(&polished);
        if spec.max_violation(&candidate) <= spec.max_violation(&point) {
            y = polished;
            point = candidate;
        }
    }

    let mut active_set: Vec<usize> = rows
        .iter()
        .filter_map(|row| row.slack.filter(|&s| y[s] <= FEAS_TOL).map(|_| row.source))
        .chain(trivially_tight)
        .collect();
    active_set.sort_unstable();
    Ok(LpSolution { status: LpStatus::Optimal, value: spec.objective_value(&point), point, active_set })
}

/// Re-solves `A_B y_B = b` for the final basis with partial pivoting.
fn polish(rows: &[Row], basis: &[usize], n: usize, n_real: usize) -> Option<Vec<f64>> {
    let m = rows.len();
    if basis.iter().any(|&b| b >= n_real) || basis.len() != m {
        return None;
    }
    let column = |r: &Row, j: usize| -> f64 {
        if j < n {
            r.coeffs[j]
        } else if r.slack == Some(j) {
            1.0
        } else {
            0.0
        }
    };
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut line: Vec<f64> = basis.iter().map(|&j| column(r, j)).collect();
            line.push(r.rhs);
            line
        })
        .collect();
    for k in 0..m {
        let p = (k..m).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))?;
        if a[p][k].abs() < 1e-14 {
            return None;
        }
        a.swap(k, p);
        for r in k + 1..m {
            let f = a[r][k] / a[k][k];
            if f != 0.0 {
                for c in k..=m {
                    a[r][c] -= f * a[k][c];
                }
            }
        }
    }
    let mut sol = vec![0.0; m];
    for k in (0..m).rev() {
        let mut v = a[k][m];
        for c in k + 1..m {
            v -= a[k][c] * sol[c];
        }
        sol[k] = v / a[k][k];
    }
    if sol.iter().any(|&v| !v.is_finite() || v < -1e-10) {
        return None;
    }
    let mut y = vec![0.0; n_real];
    for (k, &j) in basis.iter().enumerate() {
        y[j] = sol[k].max(0.0);
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Constraint;

    fn lp(n: usize, obj: Vec<f64>) -> LinearProgramSpec {
        LinearProgramSpec::new(n).with_objective(obj, 0.0)
    }

    #[test]
    fn single_variable_no_info() {
        let mut spec = lp(1, vec![2.5]);
        spec.inequalities.push(Constraint::new(vec![1.0 / 0.7], 1.0));
        let sol = simplex_solve(&spec, Sense::Max).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.point[0] - 0.7).abs() < 1e-14);
        assert_eq!(sol.active_set, vec![0]);
        let sol = simplex_solve(&spec, Sense::Min).unwrap();
        assert_eq!(sol.point[0], 0.0);
        assert!(sol.active_set.is_empty());
    }

    #[test]
    fn infeasible_volume_fraction() {
        let mut spec = lp(1, vec![1.0]);
        spec.inequalities.push(Constraint::new(vec![1.0 / 0.2], 1.0));
        spec.equalities.push(Constraint::new(vec![1.0], 0.4));
        assert_eq!(simplex_solve(&spec, Sense::Max).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_is_reported() {
        let mut spec = lp(2, vec![1.0, 1.0]);
        spec.equalities.push(Constraint::new(vec![1.0, -1.0], 0.0));
        assert_eq!(simplex_solve(&spec, Sense::Max).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let mut spec = lp(2, vec![3.0, 5.0]);
        spec.inequalities.push(Constraint::new(vec![1.0, 0.0], 4.0));
        spec.inequalities.push(Constraint::new(vec![0.0, 2.0], 12.0));
        spec.inequalities.push(Constraint::new(vec![3.0, 2.0], 18.0));
        let sol = simplex_solve(&spec, Sense::Max).unwrap();
        assert!((sol.value - 36.0).abs() < 1e-12);
        assert!((sol.point[0] - 2.0).abs() < 1e-12 && (sol.point[1] - 6.0).abs() < 1e-12);
        assert_eq!(sol.active_set, vec![1, 2]);
    }

    #[test]
    fn negative_rhs_inequality_needs_phase_one() {
        // min x + y s.t. -x - y <= -1 -> value 1.
        let mut spec = lp(2, vec![1.0, 1.0]);
        spec.inequalities.push(Constraint::new(vec![-1.0, -1.0], -1.0));
        let sol = simplex_solve(&spec, Sense::Min).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut spec = lp(3, vec![1.0, 2.0, 3.0]);
        spec.equalities.push(Constraint::new(vec![1.0, 1.0, 1.0], 1.0));
        spec.equalities.push(Constraint::new(vec![2.0, 2.0, 2.0], 2.0));
        let sol = simplex_solve(&spec, Sense::Max).unwrap();
        assert!((sol.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn badly_scaled_columns() {
        // Coefficients 1 / (1 - s) with 1 - s = 1e-13.
        let mut spec = lp(2, vec![1e13 * 0.3, 1.0]);
        spec.inequalities.push(Constraint::new(vec![1e13, 1.0], 1.0));
        spec.equalities.push(Constraint::new(vec![1.0, 1.0], 0.5));
        let sol = simplex_solve(&spec, Sense::Max).unwrap();
        assert!(sol.is_optimal());
        assert!(spec.max_violation(&sol.point) < 1e-12);
    }

    #[test]
    fn malformed_spec_is_an_error() {
        let mut spec = lp(2, vec![1.0, 1.0]);
        spec.inequalities.push(Constraint::new(vec![1.0], 1.0));
        assert!(simplex_solve(&spec, Sense::Max).is_err());
    }
}
