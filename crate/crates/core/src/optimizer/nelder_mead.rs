//! Box-constrained Nelder-Mead: trial points are projected onto the box.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmOptions {
    /// Stop when the spread of simplex values drops below
    /// `ftol * (1 + |f_best|)`...
    pub ftol: f64,
    /// ...and the simplex diameter below `xtol`.
    pub xtol: f64,
    pub max_evals: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions { ftol: 1e-13, xtol: 1e-10, max_evals: 2000 }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimizes `f` from `x0` with initial per-coordinate steps `step`.
///
/// Infinite values are allowed and treated as "worse than anything finite".
pub fn minimize<F>(mut f: F, x0: &[f64], step: &[f64], lower: &[f64], upper: &[f64], opts: NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut start = x0.to_vec();
    project(&mut start, lower, upper);
    if n == 0 {
        let value = eval(&start, &mut evals);
        return NmResult { x: start, value, evals };
    }

    let mut pts = vec![start.clone()];
    for i in 0..n {
        let mut p = start.clone();
        p[i] += step[i];
        if p[i] > upper[i] {
            p[i] = start[i] - step[i];
        }
        project(&mut p, lower, upper);
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let best = vals[0];
        let worst = vals[n];
        let diameter = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let flat = best.is_finite() && worst - best <= opts.ftol * (1.0 + best.abs());
        if flat && diameter <= opts.xtol.max(1e-3 * opts.ftol.sqrt()) || diameter <= opts.xtol * 1e-3 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |coef: f64| {
            let mut p: Vec<f64> = centroid.iter().zip(&pts[n]).map(|(c, w)| c + coef * (c - w)).collect();
            project(&mut p, lower, upper);
            p
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc.min(f64::INFINITY))
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for i in 1..=n {
            let mut p: Vec<f64> = pts[i].iter().zip(&pts[0]).map(|(v, b)| b + 0.5 * (v - b)).collect();
            project(&mut p, lower, upper);
            vals[i] = eval(&p, &mut evals);
            pts[i] = p;
        }
    }
    let i = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    NmResult { x: pts[i].clone(), value: vals[i], evals }
}
