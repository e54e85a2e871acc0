use viscobound::geometry::{
    contains_point, domain_fixed_orientation, domain_union_over_orientations, is_convex_ccw,
    laminate_reference_curve, theta_grid, DomainSettings,
};
use viscobound::optimizer::{sweep_paired, BoundQuery, BoundSense, SearchSettings};
use viscobound::{CompositePair, InfoSet, StepLoading};

fn settings() -> DomainSettings {
    DomainSettings { alpha_points: 64, theta_points: 8, mask_resolution: 64, search: SearchSettings::default() }
}

#[test]
fn every_orientation_polygon_is_convex() {
    let pair = CompositePair::maxwell_elastic_example();
    let load = StepLoading::StrainStep([1.0, 0.0]);
    for info in [InfoSet::none(), InfoSet::volume_fraction(0.4), InfoSet::isotropic(0.4)] {
        for t in [0.0, 0.7, 3.0] {
            let d = domain_union_over_orientations(&pair, &info, &load, t, &theta_grid(8), &settings()).unwrap();
            for p in &d.polygons {
                assert!(is_convex_ccw(&p.hull));
                for q in &p.support_points {
                    assert!(contains_point(&p.hull, *q, 1e-12));
                }
            }
        }
    }
}

#[test]
fn vertical_extremes_are_the_scalar_bounds() {
    let pair = CompositePair::maxwell_elastic_example();
    let load = StepLoading::StrainStep([1.0, 0.0]);
    let s = settings();
    let n = s.alpha_points;
    for info in [InfoSet::none(), InfoSet::isotropic(0.4)] {
        for t in [0.0, 0.5, 1.6, 4.0] {
            let h = domain_fixed_orientation(&pair, &info, &load, t, 0.0, &s).unwrap();
            let b = &sweep_paired(&BoundQuery::scalar(pair, info.clone(), vec![t], BoundSense::Upper), &s.search)
                .unwrap()[0];
            // alpha = pi/2 minimizes the vertical coordinate, 3 pi/2 maximizes it.
            let low = h.support_points[n / 4][1];
            let high = h.support_points[3 * n / 4][1];
            assert!((low - b.lower.normalized).abs() < 1e-8, "t {t}: {low} vs {}", b.lower.normalized);
            assert!((high - b.upper.normalized).abs() < 1e-8, "t {t}: {high} vs {}", b.upper.normalized);
        }
    }
}

#[test]
fn laminates_lie_inside_the_domain() {
    let pair = CompositePair::maxwell_elastic_example();
    let load = StepLoading::StrainStep([1.0, 0.0]);
    let f1s: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    for theta in [0.0, std::f64::consts::FRAC_PI_4, 1.2] {
        for t in [0.0, 0.5, 2.0] {
            let h = domain_fixed_orientation(&pair, &InfoSet::none(), &load, t, theta, &settings()).unwrap();
            for p in laminate_reference_curve(&pair, &load, t, theta, &f1s).unwrap() {
                assert!(contains_point(&h.hull, p, 1e-6), "theta {theta}, t {t}: {p:?}");
            }
        }
    }
}

#[test]
fn union_mask_covers_each_polygon() {
    let pair = CompositePair::maxwell_elastic_example();
    let load = StepLoading::StrainStep([1.0, 0.0]);
    let d = domain_union_over_orientations(&pair, &InfoSet::volume_fraction(0.4), &load, 0.8, &theta_grid(8), &settings())
        .unwrap();
    for p in &d.polygons {
        let c = p.hull.iter().fold([0.0, 0.0], |a, q| [a[0] + q[0], a[1] + q[1]]);
        let c = [c[0] / p.hull.len() as f64, c[1] / p.hull.len() as f64];
        assert!(d.mask.contains(c));
    }
    assert!(d.mask.area() > 0.0);
}
