//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use viscobound::lp::{LinearProgramSpec, Sense};

/// Optimum over all basic feasible solutions of the standard form with one
/// slack per inequality; `None` when no basic solution is feasible.
pub fn enumerate(spec: &LinearProgramSpec, sense: Sense) -> Option<f64> {
    let n = spec.num_vars;
    let p = spec.inequalities.len();
    let rows: Vec<_> = spec.equalities.iter().chain(&spec.inequalities).collect();
    let m = rows.len();
    let cols = n + p;
    let mut a = DMatrix::<f64>::zeros(m, cols);
    let mut b = DVector::<f64>::zeros(m);
    for (i, row) in rows.iter().enumerate() {
        for j in 0..n {
            a[(i, j)] = row.coeffs[j];
        }
        if i >= spec.equalities.len() {
            a[(i, n + i - spec.equalities.len())] = 1.0;
        }
        b[i] = row.rhs;
    }
    let mut best: Option<f64> = None;
    // Every basic solution has a support of at most min(m, cols) columns;
    // least squares on each support also copes with redundant rows.
    for k in 1..=m.min(cols) {
        let mut support: Vec<usize> = (0..k).collect();
        loop {
            let sub = DMatrix::from_fn(m, k, |r, c| a[(r, support[c])]);
            if let Ok(xs) = sub.clone().svd(true, true).solve(&b, 1e-13) {
                let residual = (&sub * &xs - &b).amax();
                if residual < 1e-10 && xs.iter().all(|&v| v >= -1e-11) {
                    let mut x = vec![0.0; cols];
                    for (i, &j) in support.iter().enumerate() {
                        x[j] = xs[i].max(0.0);
                    }
                    let v = spec.objective_value(&x[..n]);
                    best = Some(match (best, sense) {
                        (None, _) => v,
                        (Some(w), Sense::Min) => w.min(v),
                        (Some(w), Sense::Max) => w.max(v),
                    });
                }
            }
            if !next_subset(&mut support, cols) {
                break;
            }
        }
    }
    best
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    let mut i = k;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if s[i] < n - k + i {
            break;
        }
    }
    s[i] += 1;
    for j in i + 1..k {
        s[j] = s[j - 1] + 1;
    }
    true
}

use rand::Rng;
use viscobound::lp::{residues_iso_three_pole, residues_iso_two_pole, residues_vf_two_pole};
use viscobound::{Side, SpectralConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Info {
    None,
    VolumeFraction,
    Isotropic,
}

/// One scalar configuration obeying the sum rules of `info` (with phase-1
/// fraction `f1` when one is needed), as a list of `(pole, residue)`.
fn vertex(rng: &mut impl Rng, info: Info, f1: f64) -> Vec<(f64, f64)> {
    let f2 = 1.0 - f1;
    let top = |rng: &mut dyn rand::RngCore| {
        // Poles crowd towards 1 on a logarithmic scale half of the time.
        if rng.gen_bool(0.5) {
            1.0 - (-rng.gen_range(0.0..15.0f64)).exp()
        } else {
            rng.gen_range(0.0..1.0)
        }
    };
    loop {
        match info {
            Info::None => {
                let k = rng.gen_range(1..=4);
                let poles: Vec<f64> = (0..k).map(|_| top(rng).min(1.0 - 1e-12)).collect();
                let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
                let total: f64 = w.iter().sum::<f64>().max(1e-300);
                let fill = rng.gen_range(0.0..=1.0);
                // Residues x_i = (1 - s_i) w_i so that sum x / (1 - s) = fill.
                return poles.iter().zip(&w).map(|(&s, &wi)| (s, (1.0 - s) * wi / total * fill)).collect();
            }
            Info::VolumeFraction => {
                if rng.gen_bool(0.2) {
                    return vec![(rng.gen_range(0.0..=f2), f1)];
                }
                let s0 = rng.gen_range(0.0..=f2);
                let s1 = (f2 + (1.0 - f2) * rng.gen_range(0.0..1.0f64)).max(top(rng)).min(1.0 - 1e-12);
                if s1 - s0 < 1e-9 {
                    continue;
                }
                let (b0, b1) = residues_vf_two_pole(s0, s1, f1).unwrap();
                return vec![(s0, b0), (s1, b1)];
            }
            Info::Isotropic => {
                if rng.gen_bool(0.3) {
                    let s0 = rng.gen_range(0.0..0.5 * f2);
                    let s1 = rng.gen_range(0.5 * f2..1.0);
                    if let Some((b0, b1)) = residues_iso_two_pole(s0, s1, f1).unwrap() {
                        return vec![(s0, b0), (s1, b1)];
                    }
                    continue;
                }
                let mut s = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), top(rng).min(1.0 - 1e-12)];
                s.sort_by(f64::total_cmp);
                if s[1] - s[0] < 1e-9 || s[2] - s[1] < 1e-9 {
                    continue;
                }
                if let Some(b) = residues_iso_three_pole(s[0], s[1], s[2], f1).unwrap() {
                    return s.iter().copied().zip(b).collect();
                }
            }
        }
    }
}

/// A random convex combination of feasible configurations, which is again
/// feasible since every sum rule is linear in the residues.
pub fn random_config(rng: &mut impl Rng, side: Side, info: Info, f1: f64) -> SpectralConfig {
    let k = rng.gen_range(1..=3);
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut poles = Vec::new();
    let mut residues = Vec::new();
    for wi in w {
        for (s, b) in vertex(rng, info, f1) {
            poles.push(s);
            residues.push(b * wi / total);
        }
    }
    SpectralConfig::scalar(side, poles, residues).unwrap()
}
