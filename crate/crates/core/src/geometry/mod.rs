//! Planar response domains, kernel support functions and correlated-time
//! supports.

pub mod domain;
pub mod hull;
pub mod support;

pub use domain::{
    domain_fixed_orientation, domain_union_over_orientations, laminate_config, laminate_reference_curve,
    response_point, theta_grid, DomainSettings, OccupancyMask, OrientationHull, ResponseDomain,
};
pub use hull::{contains_point, convex_hull, is_convex_ccw, polygon_area, Point};
pub use support::{correlate_support, direction_fan, kernel_support, kernel_terms, SupportEntry, SupportSet};
