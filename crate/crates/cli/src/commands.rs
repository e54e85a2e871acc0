use std::path::Path;

use rayon::prelude::*;
use viscobound::geometry::{
    correlate_support, direction_fan, domain_union_over_orientations, laminate_reference_curve, theta_grid,
    DomainSettings, SupportSet,
};
use viscobound::optimizer::inverse::{invert_volume_fraction, VolumeFractionSet};
use viscobound::optimizer::{sweep_paired, BoundQuery, BoundRecord, BoundSense, ObjectiveTerm};
use viscobound::spectral::Mat2;
use viscobound::{Error, Side};

use crate::config::{read_measurements, Loaded, RunConfig};
use crate::output::{num, Csv};
use crate::CliError;

fn core<T>(r: viscobound::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from_core)
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Stress => "stress",
        Side::Strain => "strain",
    }
}

fn normalization_comment(csv: &mut Csv, cfg: &RunConfig, reference: f64) -> Result<(), CliError> {
    let pair = cfg.pair()?;
    let what = match pair.side() {
        Side::Stress => "stress / (G2 * strain amplitude)",
        Side::Strain => "strain / (stress amplitude / (2 G2))",
    };
    csv.comment(format!("side {}; normalized {what}", side_name(pair.side())));
    csv.comment(format!("response scale {}; reference {}", num(pair.response_scale()), num(reference)));
    Ok(())
}

pub fn bounds(loaded: &Loaded, out: &Path, grid_scale: f64) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let pair = cfg.pair()?;
    let query = BoundQuery {
        pair,
        info: cfg.info()?,
        loading: cfg.loading(),
        times: cfg.times()?,
        sense: BoundSense::Lower,
        target: cfg.target(pair.side())?,
        orientation: cfg.target.orientation,
    };
    let settings = cfg.search(grid_scale)?;
    let records = core(sweep_paired(&query, &settings))?;

    let width = |f: fn(&viscobound::optimizer::PairedRecord) -> &BoundRecord| {
        records.iter().map(|r| f(r).config.len()).max().unwrap_or(0)
    };
    let (nl, nu) = (width(|r| &r.lower), width(|r| &r.upper));
    let mut csv = Csv::new(loaded, "bounds");
    normalization_comment(&mut csv, cfg, query.reference())?;
    csv.comment("pole columns list the poles of each extremal configuration; unused columns are empty");
    let mut header = vec!["t".to_string(), "lower".into(), "upper".into()];
    header.extend((0..nl).map(|i| format!("lower_pole_{i}")));
    header.extend((0..nu).map(|i| format!("upper_pole_{i}")));
    header.push("gap".into());
    csv.row(header);
    let poles = |rec: &BoundRecord, n: usize| -> Vec<String> {
        let p = rec.config.poles();
        (0..n).map(|i| p.get(i).map(|&s| num(s)).unwrap_or_default()).collect()
    };
    for r in &records {
        let mut row = vec![num(r.time()), num(r.lower.normalized), num(r.upper.normalized)];
        row.extend(poles(&r.lower, nl));
        row.extend(poles(&r.upper, nu));
        row.push(num(r.gap()));
        csv.row(row);
    }
    csv.write(out)
}

fn domain_settings(cfg: &RunConfig, grid_scale: f64) -> Result<DomainSettings, CliError> {
    let mut s = core(DomainSettings::with_grid_scale(grid_scale))?;
    s.search = cfg.search(grid_scale)?;
    let d = &cfg.domain;
    if let Some(n) = d.alpha_points {
        s.alpha_points = n;
    }
    if let Some(n) = d.theta_points {
        s.theta_points = n;
    }
    if let Some(n) = d.mask_resolution {
        s.mask_resolution = n;
    }
    if s.alpha_points < 4 || s.theta_points < 1 || s.mask_resolution < 2 {
        return Err(CliError::Config("[domain] grid sizes out of range".into()));
    }
    Ok(s)
}

pub fn domain(loaded: &Loaded, out: &Path, grid_scale: f64) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let pair = cfg.pair()?;
    let info = cfg.info()?;
    let loading = cfg.loading();
    let times = cfg.times()?;
    let settings = domain_settings(cfg, grid_scale)?;
    let thetas = match &cfg.domain.thetas {
        Some(t) if t.is_empty() => return Err(CliError::Config("[domain] thetas is empty".into())),
        Some(t) => t.clone(),
        None => theta_grid(settings.theta_points),
    };
    let n_lam = cfg.domain.laminate_points.unwrap_or(101);
    if n_lam < 2 {
        return Err(CliError::Config("[domain] laminate_points must be at least 2".into()));
    }
    let f1_grid: Vec<f64> = (0..n_lam).map(|i| i as f64 / (n_lam - 1) as f64).collect();
    let reference = pair.response_scale() * loading.amplitude()[0].hypot(loading.amplitude()[1]);

    let mut frames = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let dom = core(domain_union_over_orientations(&pair, &info, &loading, t, &thetas, &settings))?;
        let lam = core(laminate_reference_curve(&pair, &loading, t, cfg.domain.laminate_theta, &f1_grid))?;

        let mut csv = Csv::new(loaded, "domain");
        normalization_comment(&mut csv, cfg, reference)?;
        csv.comment(format!("frame {k} t {}", num(t)));
        csv.comment("x = response_13 / reference, y = response_12 / reference");
        csv.comment(format!("union area {}", num(dom.mask.area())));
        for p in &dom.polygons {
            if !p.jumps.is_empty() {
                let j: Vec<String> = p.jumps.iter().map(usize::to_string).collect();
                csv.comment(format!("theta {} support jumps after alpha index {}", num(p.theta), j.join(" ")));
            }
        }
        csv.row(["theta", "vertex_index", "x", "y"]);
        for p in &dom.polygons {
            for (i, v) in p.hull.iter().enumerate() {
                csv.row([num(p.theta), i.to_string(), num(v[0]), num(v[1])]);
            }
        }

        let mut lcsv = Csv::new(loaded, "domain");
        lcsv.comment(format!("frame {k} t {}", num(t)));
        lcsv.comment(format!("simple laminates with layer orientation {}", num(cfg.domain.laminate_theta)));
        lcsv.row(["f1", "x", "y"]);
        for (f1, p) in f1_grid.iter().zip(&lam) {
            lcsv.row([num(*f1), num(p[0]), num(p[1])]);
        }
        frames.push((csv, lcsv));
    }

    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    for (k, (csv, lcsv)) in frames.iter().enumerate() {
        csv.write(&out.join(format!("frame_{k:04}.csv")))?;
        lcsv.write(&out.join(format!("frame_{k:04}_laminate.csv")))?;
    }
    Ok(())
}

pub fn kernel(loaded: &Loaded, out: &Path, grid_scale: f64) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let pair = cfg.pair()?;
    let info = cfg.info()?;
    let times = cfg.times()?;
    let settings = cfg.search(grid_scale)?;
    let directions: Vec<Mat2> = match &cfg.kernel.directions {
        Some(d) if d.is_empty() => return Err(CliError::Config("[kernel] directions is empty".into())),
        Some(d) => d.clone(),
        None => {
            let n = cfg.kernel.fan.unwrap_or(32);
            if n == 0 {
                return Err(CliError::Config("[kernel] fan must be positive".into()));
            }
            direction_fan(n)
        }
    };
    let sets = times
        .iter()
        .map(|&t| {
            let set = SupportSet::compute(&pair, &info, &directions, t, &settings)?;
            let margin = set.superadditivity_margin(&pair, &info, &settings)?;
            Ok((set, margin))
        })
        .collect::<viscobound::Result<Vec<_>>>();
    let sets = core(sets)?;

    let scale = pair.response_scale();
    let mut csv = Csv::new(loaded, "kernel");
    csv.comment(format!(
        "support = min Tr(V K(t)) / {} over admissible composites; K is the {} kernel",
        num(scale),
        match pair.side() {
            Side::Stress => "relaxation",
            Side::Strain => "creep",
        }
    ));
    csv.row(["t", "v_index", "v11", "v12", "v22", "support"]);
    for (set, _) in &sets {
        for (i, e) in set.entries.iter().enumerate() {
            let v = e.direction;
            csv.row([num(set.time), i.to_string(), num(v[0][0]), num(v[0][1]), num(v[1][1]), num(e.value / scale)]);
        }
    }
    for (set, margin) in &sets {
        let tol = 1e-9 * (1.0 + set.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max));
        let flag = if *margin >= -tol { "ok" } else { "violated" };
        csv.comment(format!("superadditivity t {} min margin {} {flag}", num(set.time), num(margin / scale)));
    }
    csv.write(out)
}

fn report_intervals(csv: &mut Csv, set: &VolumeFractionSet) {
    csv.row(["interval", "f1_low", "f1_high"]);
    for (i, (a, b)) in set.intervals.iter().enumerate() {
        csv.row([i.to_string(), num(*a), num(*b)]);
    }
}

pub fn invert(loaded: &Loaded, out: &Path, grid_scale: f64) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let pair = cfg.pair()?;
    let info = cfg.info()?;
    if info.volume_fraction.is_some() {
        return Err(CliError::Config("invert estimates the volume fraction; remove it from [info]".into()));
    }
    let rel = cfg
        .invert
        .measurements
        .as_ref()
        .ok_or_else(|| CliError::Config("[invert] needs a `measurements` file".into()))?;
    let path = loaded.path.parent().unwrap_or(Path::new(".")).join(rel);
    let measurements = read_measurements(&path)?;
    if measurements.is_empty() {
        return Err(CliError::Config(format!("{} contains no measurements", path.display())));
    }
    let settings = cfg.search(grid_scale)?;
    let inv = cfg.inversion();

    let mut csv = Csv::new(loaded, "invert");
    normalization_comment(&mut csv, cfg, pair.response_scale())?;
    csv.comment(format!("{} measurements; tolerance {}", measurements.len(), num(inv.tolerance)));
    match invert_volume_fraction(&pair, &info, &measurements, &settings, &inv) {
        Ok(set) => {
            if set.is_empty() {
                eprintln!("viscobound: warning: no volume fraction is consistent with all measurements");
                csv.comment("no consistent volume fraction");
            }
            report_intervals(&mut csv, &set);
        }
        Err(Error::Inconsistent(msg)) => {
            eprintln!("viscobound: warning: {msg}");
            csv.comment(format!("inconsistent data: {msg}"));
            report_intervals(&mut csv, &VolumeFractionSet { intervals: Vec::new() });
        }
        Err(e) => return Err(CliError::from_core(e)),
    }
    csv.write(out)
}

pub fn correlate(loaded: &Loaded, out: &Path, grid_scale: f64) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let pair = cfg.pair()?;
    let info = cfg.info()?;
    let settings = cfg.search(grid_scale)?;
    if cfg.correlate.tuples.is_empty() {
        return Err(CliError::Config("[correlate] has no tuples".into()));
    }
    let default_loading = cfg.problem.loading;
    let mut tuples = Vec::with_capacity(cfg.correlate.tuples.len());
    for (id, t) in cfg.correlate.tuples.iter().enumerate() {
        let n = t.times.len();
        if n == 0 || t.directions.len() != n {
            return Err(CliError::Config(format!(
                "tuple {id}: {} times but {} directions",
                n,
                t.directions.len()
            )));
        }
        let loadings = match &t.loadings {
            None => vec![default_loading; n],
            Some(l) if l.len() == 1 => vec![l[0]; n],
            Some(l) if l.len() == n => l.clone(),
            Some(l) => {
                return Err(CliError::Config(format!("tuple {id}: {} loadings for {n} times", l.len())));
            }
        };
        let terms: Vec<ObjectiveTerm> =
            (0..n).map(|j| ObjectiveTerm::new(t.times[j], loadings[j], t.directions[j])).collect();
        tuples.push(terms);
    }

    let results = tuples
        .par_iter()
        .map(|terms| {
            let joint = correlate_support(&pair, &info, terms, &settings)?;
            let marginal = if terms.len() == 1 {
                joint
            } else {
                terms
                    .iter()
                    .map(|term| correlate_support(&pair, &info, std::slice::from_ref(term), &settings))
                    .sum::<viscobound::Result<f64>>()?
            };
            Ok((joint, marginal))
        })
        .collect::<viscobound::Result<Vec<_>>>();
    let results = core(results)?;

    let scale = pair.response_scale();
    let mut csv = Csv::new(loaded, "correlate");
    csv.comment(format!("support = min sum_j v_j . x(t_j) / {} over one composite", num(scale)));
    csv.comment("marginal_sum = sum of the single-time supports; tighter = 1 when the joint support exceeds it");
    csv.row(["tuple_id", "n_terms", "support", "marginal_sum", "tighter"]);
    for (id, ((joint, marginal), terms)) in results.iter().zip(&tuples).enumerate() {
        let tol = 1e-9 * (1.0 + joint.abs().max(marginal.abs()));
        let tighter = u8::from(joint - marginal > tol);
        csv.row([id.to_string(), terms.len().to_string(), num(joint / scale), num(marginal / scale), tighter.to_string()]);
    }
    csv.write(out)
}
