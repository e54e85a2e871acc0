//! Basic solutions of the scalar residue problem in closed form.

use crate::error::{Error, Result};

/// Poles closer than this are treated as coincident.
pub const COINCIDENT_POLE_TOL: f64 = 1e-12;
const SLOP: f64 = 1e-12;

fn check_pole(s: f64) -> Result<()> {
    if (0.0..1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain(format!("pole {s} outside [0, 1)")))
    }
}

fn check_fraction(f1: f64) -> Result<()> {
    if f1 > 0.0 && f1 < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("volume fraction {f1} outside (0, 1)")))
    }
}

/// `B_11 = 1 - s0`, the single residue that saturates `B / (1 - s0) <= 1`.
pub fn residues_no_info(s0: f64) -> Result<f64> {
    check_pole(s0)?;
    Ok(1.0 - s0)
}

/// Two residues obeying `B0 + B1 = f1` and `B0/(1-s0) + B1/(1-s1) = 1`.
///
/// Requires `s0 in [0, f2]`, `s1 in [f2, 1)`. Coincident poles (necessarily
/// at `f2`) give `(f1, 0)`.
pub fn residues_vf_two_pole(s0: f64, s1: f64, f1: f64) -> Result<(f64, f64)> {
    check_pole(s0)?;
    check_pole(s1)?;
    check_fraction(f1)?;
    let f2 = 1.0 - f1;
    if s0 > f2 + SLOP || s1 < f2 - SLOP {
        return Err(Error::Domain(format!(
            "need s0 <= f2 <= s1 with f2 = {f2}, got s0 = {s0}, s1 = {s1}"
        )));
    }
    if (s1 - s0).abs() < COINCIDENT_POLE_TOL {
        return Ok((f1, 0.0));
    }
    let b0 = (1.0 - s0) * (s1 - f2) / (s1 - s0);
    let b1 = (1.0 - s1) * (f2 - s0) / (s1 - s0);
    Ok((b0.max(0.0), b1.max(0.0)))
}

/// Two residues obeying `B0 + B1 = f1` and `B0 s0 + B1 s1 = f1 f2 / 2`.
///
/// Returns `None` when a residue is negative or `sum B / (1 - s) > 1`.
pub fn residues_iso_two_pole(s0: f64, s1: f64, f1: f64) -> Result<Option<(f64, f64)>> {
    check_pole(s0)?;
    check_pole(s1)?;
    check_fraction(f1)?;
    let half = 0.5 * (1.0 - f1);
    let (b0, b1) = if (s1 - s0).abs() < COINCIDENT_POLE_TOL {
        if (s0 - half).abs() > SLOP {
            return Ok(None);
        }
        (f1, 0.0)
    } else {
        (f1 * (s1 - half) / (s1 - s0), f1 * (half - s0) / (s1 - s0))
    };
    if b0 < -SLOP || b1 < -SLOP || b0 / (1.0 - s0) + b1 / (1.0 - s1) > 1.0 + SLOP {
        return Ok(None);
    }
    Ok(Some((b0.max(0.0), b1.max(0.0))))
}

/// Three residues obeying `sum B = f1`, `sum B s = f1 f2 / 2` and
/// `sum B / (1 - s) = 1`.
///
/// Returns `None` when the triple is infeasible (some residue negative).
/// Coincident poles fall back to [`residues_iso_two_pole`] on the distinct
/// poles, with the merged residue on the lower index.
pub fn residues_iso_three_pole(s0: f64, s1: f64, s2: f64, f1: f64) -> Result<Option<[f64; 3]>> {
    for s in [s0, s1, s2] {
        check_pole(s)?;
    }
    check_fraction(f1)?;
    if s1 < s0 || s2 < s1 {
        return Err(Error::Domain(format!("poles must be ordered, got ({s0}, {s1}, {s2})")));
    }
    let merged01 = s1 - s0 < COINCIDENT_POLE_TOL;
    let merged12 = s2 - s1 < COINCIDENT_POLE_TOL;
    if merged01 || merged12 {
        let (a, b) = if merged01 { (s0, s2) } else { (s0, s1) };
        return Ok(residues_iso_two_pole(a, b, f1)?.map(|(ba, bb)| {
            if merged01 {
                [ba, 0.0, bb]
            } else {
                [ba, bb, 0.0]
            }
        }));
    }
    let half = 0.5 * (1.0 - f1);
    let p = (1.0 - s0) * (1.0 - s1) * (1.0 - s2);
    // Bracket for the pole `k` given the other two poles `i`, `j`.
    let bracket = |si: f64, sj: f64| {
        1.0 - f1 / (1.0 - si) - f1 * (half - si) / ((1.0 - si) * (1.0 - sj))
    };
    let b0 = p / ((s1 - s0) * (s2 - s0)) * bracket(s1, s2);
    let b1 = -p / ((s1 - s0) * (s2 - s1)) * bracket(s0, s2);
    let b2 = p / ((s2 - s0) * (s2 - s1)) * bracket(s0, s1);
    let scale = f1.max(1e-300);
    if [b0, b1, b2].iter().any(|&b| b < -SLOP * scale.max(1.0)) {
        return Ok(None);
    }
    Ok(Some([b0.max(0.0), b1.max(0.0), b2.max(0.0)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sums(poles: &[f64], b: &[f64]) -> (f64, f64, f64) {
        let mut r = (0.0, 0.0, 0.0);
        for (&s, &x) in poles.iter().zip(b) {
            r.0 += x;
            r.1 += x * s;
            r.2 += x / (1.0 - s);
        }
        r
    }

    #[test]
    fn no_info_values() {
        assert_eq!(residues_no_info(0.0).unwrap(), 1.0);
        assert!((residues_no_info(0.4).unwrap() - 0.6).abs() < 1e-15);
        assert!(residues_no_info(1.0 - 1e-15).unwrap() < 1e-14);
        assert!(residues_no_info(1.0).is_err());
    }

    #[test]
    fn vf_two_pole_example() {
        let (b0, b1) = residues_vf_two_pole(0.2, 0.8, 0.4).unwrap();
        assert!((b0 - 0.8 * 0.2 / 0.6).abs() < 1e-15);
        assert!((b1 - 0.2 * 0.4 / 0.6).abs() < 1e-15);
        let (a, _, c) = sums(&[0.2, 0.8], &[b0, b1]);
        assert!((a - 0.4).abs() < 1e-15 && (c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vf_two_pole_boundaries() {
        let (b0, b1) = residues_vf_two_pole(0.6, 0.9, 0.4).unwrap();
        assert!((b0 - 0.4).abs() < 1e-15 && b1 == 0.0);
        let (b0, b1) = residues_vf_two_pole(0.3, 1.0 - 1e-14, 0.4).unwrap();
        assert!((b0 - 0.4).abs() < 1e-12 && b1 < 1e-13);
        assert_eq!(residues_vf_two_pole(0.6, 0.6, 0.4).unwrap(), (0.4, 0.0));
        assert!(residues_vf_two_pole(0.7, 0.9, 0.4).is_err());
        assert!(residues_vf_two_pole(0.1, 0.5, 0.4).is_err());
    }

    #[test]
    fn iso_three_pole_sum_rules() {
        let f1 = 0.4;
        let poles = [0.05, 0.45, 0.9];
        let b = residues_iso_three_pole(poles[0], poles[1], poles[2], f1).unwrap().unwrap();
        let (a, m, c) = sums(&poles, &b);
        assert!((a - f1).abs() < 1e-12);
        assert!((m - 0.12).abs() < 1e-12);
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iso_three_pole_infeasible_triple() {
        // All poles above f2 / 2 cannot reach the first moment.
        assert_eq!(residues_iso_three_pole(0.5, 0.6, 0.7, 0.4).unwrap(), None);
    }

    #[test]
    fn iso_three_pole_coincident_poles() {
        let f1 = 0.4;
        let two = residues_iso_two_pole(0.1, 0.5, f1).unwrap().unwrap();
        let three = residues_iso_three_pole(0.1, 0.5, 0.5, f1).unwrap().unwrap();
        assert_eq!(three, [two.0, two.1, 0.0]);
        let (a, m, _) = sums(&[0.1, 0.5], &[two.0, two.1]);
        assert!((a - f1).abs() < 1e-15 && (m - 0.12).abs() < 1e-15);
    }

    #[test]
    fn iso_two_pole_rejects_overfull() {
        // B0 / (1 - s0) + B1 / (1 - s1) > 1 near s = 1.
        assert_eq!(residues_iso_two_pole(0.0, 0.99, 0.4).unwrap(), None);
    }
}
