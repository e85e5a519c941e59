//! Goodness of fit, tail-rate regression and numerical certificates for the
//! exit-time bounds.

mod beurling;
mod certificate;
mod stats;

pub use beurling::{
    beurling_lower_bound, check_beurling_hitting, check_beurling_monotone, slit_disk_polygon,
    slit_hitting_frequency, SlitHitting, SLIT_ARC_VERTICES, SLIT_HALF_ANGLE,
};
pub use certificate::{
    check_davis, check_lower_bound, check_support_theorem, check_torsion_product,
    check_upper_bound, check_upper_bound_sampled, Axis, Certificate, EdgeDensity, Relation,
    DAVIS_SIGMAS,
};
pub use stats::{
    ecdf, empirical_support, estimate_rate, estimate_rate_from_fractions, ks_statistic,
    support_by_prefix, RateEstimate, TargetDistribution, WINDOW,
};
