//! Grid solvers for the principal Dirichlet eigenvalue and the torsion
//! function, plus closed-form rates of the reference domains.
//!
//! Rates are eigenvalues of `-Delta / 2` (the generator of Brownian motion);
//! the raw `-Delta` eigenvalue is twice the rate.

mod mask;
mod solver;

pub use mask::{default_bbox, rasterize, BoundingBox, GridMask};
pub use solver::{
    inside_nodes, principal_mode, principal_rate, torsion, EigResult, PrincipalMode,
    TorsionField, INNER_TOL, TORSION_TOL,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{reaper_h, truncate_u, DomainSpec};

/// First positive zero of the Bessel function `J0`, obtained by bisection on
/// its power series (see the test oracle below).
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404825557695773;

/// Best known numerical value of the torsion constant in two dimensions.
pub const BEST_KNOWN_C2: f64 = 2.0379;

/// Constant of the sharper bound for convex domains, valid if the
/// equilateral triangle is extremal: `4 pi^2 / 27`.
pub const TRIANGLE_CONSTANT: f64 = 4.0 * PI * PI / 27.0;

pub fn best_known_c2() -> f64 {
    BEST_KNOWN_C2
}

/// Explicit upper bound on the torsion constant in dimension `d`:
/// `d/8 + sqrt(5 (1 + log(2)/4) d) / 4 + 1`.
pub fn vogt_constant(d: u32) -> Result<f64> {
    if d == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    let d = d as f64;
    Ok(d / 8.0 + 0.25 * (5.0 * (1.0 + 0.25 * 2f64.ln()) * d).sqrt() + 1.0)
}

/// Rate of a `width x height` rectangle, `(pi^2/2) (1/w^2 + 1/h^2)`.
pub fn rectangle_rate(width: f64, height: f64) -> f64 {
    0.5 * PI * PI * (1.0 / (width * width) + 1.0 / (height * height))
}

/// Rate of the infinite strip of width `w`, `pi^2 / (2 w^2)`.
pub fn strip_rate(width: f64) -> f64 {
    0.5 * PI * PI / (width * width)
}

/// Rate of the rectangle `R_n` of width `2(1 - 1/n)` and height `n` that sits
/// inside the unit Grim Reaper domain on the level `h(1 - 1/n)`.
pub fn inscribed_rectangle_rate(n: u32) -> f64 {
    let n = n as f64;
    rectangle_rate(2.0 * (1.0 - 1.0 / n), n)
}

/// Top of `R_n`: `h(1 - 1/n) + n`.
pub fn inscribed_rectangle_top(n: u32) -> f64 {
    let n = n as f64;
    reaper_h(1.0 - 1.0 / n) + n
}

/// Exact rate where a formula is registered.
pub fn closed_form_rate(spec: &DomainSpec) -> Option<f64> {
    match spec {
        DomainSpec::StripRe { a, b } => Some(strip_rate(b - a)),
        DomainSpec::StripIm { c, d } => Some(strip_rate(d - c)),
        DomainSpec::Rectangle { x0, x1, y0, y1 } => Some(rectangle_rate(x1 - x0, y1 - y0)),
        DomainSpec::Disk { r, .. } => Some(0.5 * (BESSEL_J0_FIRST_ZERO / r).powi(2)),
        _ => None,
    }
}

/// Relative slack allowed when checking that rates do not grow with the
/// truncation height.
const MONOTONE_TOL: f64 = 1e-7;

/// Longitudinal rate coefficient of a channel of length `L`: `pi^2 / (2 L^2)`.
const CHANNEL_COEFF: f64 = 0.5 * PI * PI;

/// Offset `y0` with `r1 - r2 = c (1/(h1 - y0)^2 - 1/(h2 - y0)^2)`, by
/// bisection; the right side increases from 0 to infinity on `y0 < h1`.
fn channel_offset(h1: f64, r1: f64, h2: f64, r2: f64) -> Option<f64> {
    let gap = r1 - r2;
    if !(gap > 0.0) {
        return None;
    }
    let f = |y0: f64| CHANNEL_COEFF * ((h1 - y0).powi(-2) - (h2 - y0).powi(-2)) - gap;
    let mut lo = h1 - 1.0;
    while f(lo) > 0.0 {
        lo = h1 - 2.0 * (h1 - lo);
        if lo < -1e12 {
            return None;
        }
    }
    let mut hi = h1 - 1e-12 * h1.abs().max(1.0);
    if f(hi) < 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Rates of the Grim Reaper domain truncated at a list of heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSweep {
    pub scale: f64,
    pub dx: f64,
    pub heights: Vec<f64>,
    pub results: Vec<EigResult>,
    /// Rate at the largest height.
    pub at_max_height: f64,
    /// Limit of the channel model `rate(H) = L + (pi^2/2) / (H - y0)^2`
    /// fitted to the two largest heights.
    pub extrapolated: f64,
    /// Fitted offset `y0` of the channel model.
    pub channel_offset: f64,
    /// Plain Richardson limit in `1/H^2` from the two largest heights.
    pub richardson: f64,
    /// `pi^2 / (8 scale^2)`, the rate of the enclosing strip.
    pub strip_floor: f64,
    /// `(n, rate(R_n) / scale^2)` for inscribed rectangles `n = 2..=20`.
    pub rectangle_ceilings: Vec<(u32, f64)>,
    /// Floor and every ceiling bracket the extrapolated rate, and the rate at
    /// the largest height stays below the ceiling of every rectangle that fits.
    pub sandwich_holds: bool,
}

/// Principal rates of `scale * U` cut at each height in `heights`
/// (ascending), with the extrapolated limit.
pub fn rate_of_u(scale: f64, dx: f64, heights: &[f64]) -> Result<TruncationSweep> {
    if heights.len() < 2 || heights.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition(
            "need at least two strictly ascending truncation heights".into(),
        ));
    }
    let results: Vec<EigResult> = heights
        .iter()
        .map(|&h| {
            let spec = truncate_u(scale, h)?;
            let [x0, x1, y0, _] = spec.bounding_box().expect("truncated domain is bounded");
            // one shared bottom-left origin makes the masks nested
            let mask = rasterize(&spec, dx, BoundingBox::new(x0, x1, y0, h))?;
            principal_rate(&mask)
        })
        .collect::<Result<_>>()?;
    for (k, w) in results.windows(2).enumerate() {
        if w[1].rate > w[0].rate * (1.0 + MONOTONE_TOL) {
            return Err(Error::MonotonicityViolation {
                prev: w[0].rate,
                next: w[1].rate,
                height: heights[k + 1],
            });
        }
    }
    let n = heights.len();
    let (h1, h2) = (heights[n - 2], heights[n - 1]);
    let (r1, r2) = (results[n - 2].rate, results[n - 1].rate);
    let richardson = (h2 * h2 * r2 - h1 * h1 * r1) / (h2 * h2 - h1 * h1);
    let (extrapolated, channel_offset) = match channel_offset(h1, r1, h2, r2) {
        Some(y0) => (r2 - CHANNEL_COEFF / ((h2 - y0) * (h2 - y0)), y0),
        None => (richardson, f64::NAN),
    };
    let s2 = scale * scale;
    let strip_floor = strip_rate(2.0 * scale);
    let rectangle_ceilings: Vec<(u32, f64)> =
        (2..=20).map(|k| (k, inscribed_rectangle_rate(k) / s2)).collect();
    let tol = INNER_TOL * strip_floor;
    let at_max_height = r2;
    let sandwich_holds = extrapolated >= strip_floor - tol
        && rectangle_ceilings.iter().all(|&(_, c)| extrapolated <= c)
        && rectangle_ceilings
            .iter()
            .filter(|&&(k, _)| scale * inscribed_rectangle_top(k) <= h2)
            .all(|&(_, c)| at_max_height <= c);
    Ok(TruncationSweep {
        scale,
        dx,
        heights: heights.to_vec(),
        results,
        at_max_height,
        extrapolated,
        channel_offset,
        richardson,
        strip_floor,
        rectangle_ceilings,
        sandwich_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J0(x) = sum_k (-1)^k (x/2)^{2k} / (k!)^2`.
    fn bessel_j0_series(x: f64) -> f64 {
        let q = -(x * x) / 4.0;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..60 {
            term *= q / (k * k) as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn bessel_zero_oracle() {
        let (mut lo, mut hi) = (2.0, 3.0);
        assert!(bessel_j0_series(lo) > 0.0 && bessel_j0_series(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bessel_j0_series(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - BESSEL_J0_FIRST_ZERO).abs() < 1e-14, "{lo}");
        assert!((0.5 * lo * lo - 2.89159).abs() < 1e-5);
    }

    #[test]
    fn vogt_values() {
        assert!((vogt_constant(2).unwrap() - 2.1063).abs() < 1e-3);
        // direct evaluation: 1/8 + sqrt(5 (1 + ln2/4)) / 4 + 1
        let d1 = vogt_constant(1).unwrap();
        assert!((d1 - 1.7305).abs() < 1e-3, "{d1}");
        assert!(vogt_constant(0).is_err());
        assert_eq!(best_known_c2(), 2.0379);
        assert!((TRIANGLE_CONSTANT - 1.4622).abs() < 1e-4);
    }

    #[test]
    fn closed_forms() {
        let strip = DomainSpec::StripRe { a: -1.0, b: 1.0 };
        assert!((closed_form_rate(&strip).unwrap() - PI * PI / 8.0).abs() < 1e-15);
        let rect = DomainSpec::Rectangle { x0: 0.0, x1: 1.5, y0: 0.0, y1: 4.0 };
        let want = 0.5 * PI * PI * (1.0 / 2.25 + 1.0 / 16.0);
        assert!((closed_form_rate(&rect).unwrap() - want).abs() < 1e-14);
        assert!(closed_form_rate(&DomainSpec::GrimReaperU { scale: 1.0 }).is_none());
        // R_n formula
        let r4 = inscribed_rectangle_rate(4);
        assert!((r4 - 0.5 * PI * PI * (1.0 / (4.0 * 0.5625) + 1.0 / 16.0)).abs() < 1e-14);
        assert!((inscribed_rectangle_rate(10) - 1.5723).abs() < 2e-4);
    }

    #[test]
    fn rectangle_rate_separation_of_variables_matches_grid() {
        let spec = DomainSpec::Rectangle { x0: 0.0, x1: 1.5, y0: 0.0, y1: 4.0 };
        let mask = rasterize(&spec, 1.5 / 60.0, BoundingBox::new(0.0, 1.5, 0.0, 4.0)).unwrap();
        let r = principal_rate(&mask).unwrap();
        let exact = closed_form_rate(&spec).unwrap();
        assert!((r.rate - exact).abs() < 0.01 * exact, "{} vs {exact}", r.rate);
    }

    #[test]
    fn grid_monotonicity_under_inclusion() {
        let big = DomainSpec::Disk { center: crate::Point::ORIGIN, r: 1.0 };
        let small = DomainSpec::Rectangle { x0: -0.6, x1: 0.6, y0: -0.6, y1: 0.7 };
        let bb = BoundingBox::new(-1.0, 1.0, -1.0, 1.0);
        let a = rasterize(&small, 0.02, bb).unwrap();
        let b = rasterize(&big, 0.02, bb).unwrap();
        assert!(a.is_subset_of(&b));
        let (ra, rb) = (principal_rate(&a).unwrap(), principal_rate(&b).unwrap());
        assert!(ra.rate >= rb.rate - 1e-9);
    }

    #[test]
    fn second_order_convergence_on_rectangle() {
        // boundary-aligned grid: error ratio near 4 when dx halves
        let spec = DomainSpec::Rectangle { x0: -1.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        let exact = closed_form_rate(&spec).unwrap();
        let err = |dx: f64| {
            let m = rasterize(&spec, dx, BoundingBox::new(-1.0, 1.0, 0.0, 1.0)).unwrap();
            (principal_rate(&m).unwrap().rate - exact).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn channel_model_recovers_exact_limit() {
        let rate = |h: f64| 1.2 + CHANNEL_COEFF / ((h - 0.3) * (h - 0.3));
        let y0 = channel_offset(6.0, rate(6.0), 8.0, rate(8.0)).unwrap();
        assert!((y0 - 0.3).abs() < 1e-9, "{y0}");
        assert!(channel_offset(6.0, 1.0, 8.0, 1.0).is_none());
        // a pure 1/H^2 tail needs y0 = 0
        let rate = |h: f64| 1.0 + CHANNEL_COEFF / (h * h);
        assert!(channel_offset(4.0, rate(4.0), 8.0, rate(8.0)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn truncation_sweep_coarse() {
        let sweep = rate_of_u(1.0, 0.05, &[2.0, 4.0, 6.0]).unwrap();
        assert!(sweep.results.windows(2).all(|w| w[1].rate <= w[0].rate));
        assert!(sweep.at_max_height > sweep.strip_floor);
        assert!(rate_of_u(1.0, 0.05, &[2.0]).is_err());
        assert!(rate_of_u(1.0, 0.05, &[4.0, 2.0]).is_err());
    }
}
