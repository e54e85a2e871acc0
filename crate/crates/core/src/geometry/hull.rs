//! Planar convex hulls.

pub type Point = [f64; 2];

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by Andrew's monotone chain, counter-clockwise, without
/// repeated or collinear vertices. Fewer than three distinct points are
/// returned as they are (deduplicated).
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.iter().copied().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// True when consecutive edges never turn clockwise.
pub fn is_convex_ccw(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return true;
    }
    (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) >= 0.0)
}

/// Signed area (positive for counter-clockwise order).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a[0] * b[1] - a[1] * b[0]
    }).sum::<f64>()
}

/// Whether `p` lies in the counter-clockwise convex polygon, allowing `tol`
/// outside each edge (measured as a distance).
pub fn contains_point(poly: &[Point], p: Point, tol: f64) -> bool {
    match poly.len() {
        0 => false,
        1 => (poly[0][0] - p[0]).hypot(poly[0][1] - p[1]) <= tol,
        2 => segment_distance(poly[0], poly[1], p) <= tol,
        n => (0..n).all(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            len == 0.0 || cross(a, b, p) / len >= -tol
        }),
    }
}

fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let u = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) };
    (a[0] + u * d[0] - p[0]).hypot(a[1] + u * d[1] - p[1])
}
