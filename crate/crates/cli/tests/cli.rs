use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use viscobound::geometry::{domain_fixed_orientation, DomainSettings};
use viscobound::optimizer::{optimize_bound, BoundQuery, BoundSense, SearchSettings, Target};
use viscobound::{CompositePair, InfoSet, StepLoading};

const STRESS: &str = r#"
[problem]
side = "stress"
phase1 = { model = "maxwell", modulus = 1.0, viscosity = 1.6666666666666667 }
phase2 = { model = "elastic", modulus = 0.5 }
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viscobound")).current_dir(dir).args(args).output().unwrap()
}

fn setup(body: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("{STRESS}\n{body}")).unwrap();
    (dir, cfg)
}

/// Data rows (after the header line) split into fields.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().find(|l| !l.starts_with('#')).unwrap().split(',').map(str::to_string).collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[problem\nside = ").unwrap();
    let out = dir.path().join("out.csv");
    let o = run(dir.path(), &["bounds", "--config", "bad.toml", "--out", "out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());
}

#[test]
fn invalid_information_exits_2() {
    let (dir, _) = setup("[info]\nvolume_fraction = 1.5\n[times]\nvalues = [1.0]\n");
    let o = run(dir.path(), &["bounds", "--config", "run.toml", "--out", "out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn infeasible_information_exits_3() {
    let (dir, _) = setup("[info]\nknown_values = [{ time = 0.0, value = 5.0 }]\n[times]\nvalues = [1.0]\n");
    let o = run(dir.path(), &["bounds", "--config", "run.toml", "--out", "out.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn bounds_output_is_deterministic_across_thread_counts() {
    let (dir, _) = setup("[info]\nvolume_fraction = 0.4\n[times]\nstart = 0.0\nstop = 5.0\ncount = 41\n");
    let a = run(dir.path(), &["bounds", "--config", "run.toml", "--out", "a.csv", "--threads", "1"]);
    let b = run(dir.path(), &["bounds", "--config", "run.toml", "--out", "b.csv"]);
    assert!(a.status.success() && b.status.success());
    let (a, b) = (std::fs::read(dir.path().join("a.csv")).unwrap(), std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# viscobound "));
    assert!(text.contains("sha256"));
}

#[test]
fn bounds_columns_and_ranges() {
    let (dir, _) = setup("[times]\nstart = 0.0\nstop = 4.0\ncount = 81\n");
    let o = run(dir.path(), &["bounds", "--config", "run.toml", "--out", "out.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("out.csv");
    let h = header(&path);
    assert_eq!(&h[..3], &["t", "lower", "upper"]);
    assert_eq!(h.last().unwrap(), "gap");
    assert!(h.iter().any(|c| c == "upper_pole_0"));
    let rows = rows(&path);
    assert_eq!(rows.len(), 81);
    for r in &rows {
        let (lo, hi, gap) = (f(&r[1]), f(&r[2]), f(r.last().unwrap()));
        assert!(lo <= hi + 1e-12);
        assert!((gap - (hi - lo)).abs() < 1e-12);
        // Physically sensible: within [0, max(1, G_M / G_2)].
        assert!(lo >= -1e-12 && hi <= 2.0 + 1e-12);
        // Every field is in full precision scientific notation or empty.
        assert!(r.iter().all(|x| x.is_empty() || x.contains('e')));
    }
    assert_eq!(f(&rows[0][2]), 2.0);
}

#[test]
fn kernel_first_diagonal_matches_lower_bound() {
    let body = "[info]\nvolume_fraction = 0.4\n[times]\nvalues = [0.5, 1.5]\n\
                [kernel]\ndirections = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]]\n";
    let (dir, _) = setup(body);
    assert!(run(dir.path(), &["kernel", "--config", "run.toml", "--out", "k.csv"]).status.success());
    assert!(run(dir.path(), &["bounds", "--config", "run.toml", "--out", "b.csv"]).status.success());
    let k = rows(&dir.path().join("k.csv"));
    let b = rows(&dir.path().join("b.csv"));
    assert_eq!(header(&dir.path().join("k.csv")), ["t", "v_index", "v11", "v12", "v22", "support"]);
    for (i, t) in [0.5, 1.5].iter().enumerate() {
        let kr = k.iter().find(|r| f(&r[0]) == *t && r[1] == "0").unwrap();
        assert!((f(&kr[5]) - f(&b[i][1])).abs() < 1e-9, "{kr:?} vs {:?}", b[i]);
    }
}

#[test]
fn kernel_default_fan_and_footer() {
    let (dir, _) = setup("[times]\nvalues = [1.0]\n");
    let o = run(dir.path(), &["kernel", "--config", "run.toml", "--out", "k.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("k.csv");
    assert_eq!(rows(&path).len(), 32);
    let text = std::fs::read_to_string(&path).unwrap();
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("# superadditivity") && footer.ends_with(" ok"), "{footer}");
}

fn laminate_measurements(dir: &Path) {
    let mut csv = String::from("time,value\n");
    for t in [0.5, 1.0, 2.0, 4.0] {
        let pair = CompositePair::maxwell_elastic_example();
        let cfg = viscobound::geometry::laminate_config(&pair, 0.4, std::f64::consts::FRAC_PI_4).unwrap();
        let p = viscobound::geometry::response_point(&cfg, &pair, &StepLoading::unit(pair.side()), t).unwrap();
        csv.push_str(&format!("{t},{:e}\n", p[1]));
    }
    std::fs::write(dir.join("data.csv"), csv).unwrap();
}

#[test]
fn invert_round_trip_contains_true_fraction() {
    let (dir, _) = setup("[invert]\nmeasurements = \"data.csv\"\n");
    laminate_measurements(dir.path());
    let o = run(dir.path(), &["invert", "--config", "run.toml", "--out", "inv.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&dir.path().join("inv.csv"));
    assert!(r.iter().any(|row| f(&row[1]) <= 0.4 && 0.4 <= f(&row[2])), "{r:?}");
}

#[test]
fn invert_empty_measurements_exits_2() {
    let (dir, _) = setup("[invert]\nmeasurements = \"data.csv\"\n");
    std::fs::write(dir.path().join("data.csv"), "time,value\n").unwrap();
    let o = run(dir.path(), &["invert", "--config", "run.toml", "--out", "inv.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("inv.csv").exists());
}

#[test]
fn invert_inconsistent_data_warns_and_succeeds() {
    let (dir, _) = setup("[invert]\nmeasurements = \"data.csv\"\n");
    std::fs::write(dir.path().join("data.csv"), "time,value\n1.0,5.0\n").unwrap();
    let o = run(dir.path(), &["invert", "--config", "run.toml", "--out", "inv.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(rows(&dir.path().join("inv.csv")).is_empty());
}

#[test]
fn correlate_single_term_equals_directional_bound() {
    let alpha = 0.7f64;
    let body = format!(
        "[info]\nvolume_fraction = 0.4\n[[correlate.tuples]]\ntimes = [1.0]\ndirections = [[{:?}, {:?}]]\n",
        alpha.sin(),
        alpha.cos()
    );
    let (dir, _) = setup(&body);
    let o = run(dir.path(), &["correlate", "--config", "run.toml", "--out", "c.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&dir.path().join("c.csv"));
    let pair = CompositePair::maxwell_elastic_example();
    let mut q = BoundQuery::scalar(pair, InfoSet::volume_fraction(0.4), vec![1.0], BoundSense::Lower);
    q.target = Target::DirectionalF(alpha);
    let rec = optimize_bound(&q, 1.0, &SearchSettings::default()).unwrap();
    assert!((f(&r[0][2]) - rec.normalized).abs() < 1e-9, "{} vs {}", r[0][2], rec.normalized);
}

#[test]
fn correlate_reports_joint_tightening() {
    let body = "[info]\nvolume_fraction = 0.4\n[[correlate.tuples]]\ntimes = [0.5, 2.0]\n\
                directions = [[1.0, 0.0], [1.0, 0.0]]\n";
    let (dir, _) = setup(body);
    assert!(run(dir.path(), &["correlate", "--config", "run.toml", "--out", "c.csv"]).status.success());
    let r = rows(&dir.path().join("c.csv"));
    assert_eq!(r[0][1], "2");
    assert!(f(&r[0][2]) >= f(&r[0][3]) - 1e-9);
    assert_eq!(r[0][4], "1");
}

#[test]
fn correlate_length_mismatch_exits_2() {
    let (dir, _) = setup("[[correlate.tuples]]\ntimes = [0.5, 2.0]\ndirections = [[1.0, 0.0]]\n");
    let o = run(dir.path(), &["correlate", "--config", "run.toml", "--out", "c.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("c.csv").exists());
}

fn frame_vertices(path: &Path) -> Vec<[f64; 2]> {
    rows(path).iter().map(|r| [f(&r[2]), f(&r[3])]).collect()
}

#[test]
fn domain_frames_follow_time_grid() {
    let body = "[times]\nvalues = [0.0, 1.0, 2.0]\n[domain]\ntheta_points = 4\nalpha_points = 32\n";
    let (dir, _) = setup(body);
    let o = run(dir.path(), &["domain", "--config", "run.toml", "--out", "frames"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let frames = dir.path().join("frames");
    let mut names: Vec<String> =
        std::fs::read_dir(&frames).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.iter().filter(|n| !n.contains("laminate")).count(), 3);
    assert_eq!(names.iter().filter(|n| n.contains("laminate")).count(), 3);
    assert_eq!(header(&frames.join("frame_0000.csv")), ["theta", "vertex_index", "x", "y"]);
    assert_eq!(header(&frames.join("frame_0000_laminate.csv")), ["f1", "x", "y"]);
    let v0 = frame_vertices(&frames.join("frame_0000.csv"));
    for target in [[0.0, 1.0], [0.0, 2.0]] {
        assert!(v0.iter().any(|v| (v[0] - target[0]).abs() < 1e-9 && (v[1] - target[1]).abs() < 1e-9));
    }
}

#[test]
fn single_orientation_frame_matches_library() {
    let body = "[times]\nvalues = [1.0]\n[domain]\nthetas = [0.3]\nalpha_points = 48\n";
    let (dir, _) = setup(body);
    assert!(run(dir.path(), &["domain", "--config", "run.toml", "--out", "frames"]).status.success());
    let v = frame_vertices(&dir.path().join("frames/frame_0000.csv"));
    let pair = CompositePair::maxwell_elastic_example();
    let settings = DomainSettings { alpha_points: 48, ..DomainSettings::default() };
    let lib =
        domain_fixed_orientation(&pair, &InfoSet::none(), &StepLoading::unit(pair.side()), 1.0, 0.3, &settings).unwrap();
    assert_eq!(v.len(), lib.hull.len());
    for (a, b) in v.iter().zip(&lib.hull) {
        assert_eq!(a, b);
    }
}

#[test]
fn grid_scale_must_be_positive() {
    let (dir, _) = setup("[times]\nvalues = [1.0]\n");
    let o = run(dir.path(), &["bounds", "--config", "run.toml", "--out", "o.csv", "--grid-scale", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
