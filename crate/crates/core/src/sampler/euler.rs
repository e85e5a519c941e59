use rand::Rng;
use rand_distr::StandardNormal;

use super::{ExitSample, RandomStream};
use crate::error::{Error, Result};
use crate::geometry::{contains, dist_to_boundary, interior_dist, nearest_boundary_point, DomainSpec, Point};

/// Bridge crossing probabilities below `exp(-BRIDGE_CUTOFF)` are treated as 0.
const BRIDGE_CUTOFF: f64 = 50.0;

/// Euler exit time with a Brownian-bridge crossing test.
///
/// Each step adds independent `N(0, dt)` increments to both coordinates. A
/// step that lands outside exits at the crossing point on the segment
/// (time interpolated along the step). A step that stays inside still exits
/// with probability `exp(-2 d0 d1 / dt)`, the chance that a bridge between the
/// endpoints touched a flat wall at distances `d0`, `d1`; such exits are
/// placed at the nearer endpoint's boundary projection at mid-step.
///
/// A path still inside at `max_time` is returned inside
/// [`Error::TimeBudgetExceeded`] with `censored = true`.
pub fn euler_exit(
    spec: &DomainSpec,
    start: Point,
    dt: f64,
    max_time: f64,
    rng: &mut RandomStream,
) -> Result<ExitSample> {
    if !contains(spec, start) {
        return Err(Error::Precondition(format!("start {start:?} is not inside the domain")));
    }
    if !(dt > 0.0) {
        return Err(Error::Precondition("dt must be positive".into()));
    }
    let sd = dt.sqrt();
    let mut p = start;
    let mut d_prev = dist_to_boundary(spec, p);
    let mut k = 0u64;
    loop {
        if k as f64 * dt >= max_time {
            return Err(Error::TimeBudgetExceeded {
                sample: ExitSample {
                    position: p,
                    time: k as f64 * dt,
                    steps: k,
                    censored: true,
                },
            });
        }
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let q = Point::new(p.x + sd * n1, p.y + sd * n2);
        k += 1;
        if !contains(spec, q) {
            let (frac, hit) = crossing(spec, p, q);
            let position = nearest_boundary_point(spec, hit);
            return Ok(ExitSample {
                position,
                time: (k as f64 - 1.0 + frac) * dt,
                steps: k,
                censored: false,
            });
        }
        let d_curr = interior_dist(spec, q);
        let exponent = 2.0 * d_prev * d_curr / dt;
        if exponent < BRIDGE_CUTOFF && rng.gen::<f64>() < (-exponent).exp() {
            let near = if d_curr <= d_prev { q } else { p };
            let position = nearest_boundary_point(spec, near);
            return Ok(ExitSample {
                position,
                time: (k as f64 - 0.5) * dt,
                steps: k,
                censored: false,
            });
        }
        p = q;
        d_prev = d_curr;
    }
}

/// Bisection for the first boundary crossing on the segment from `inside`
/// to `outside`; returns the fraction along the segment and the point.
fn crossing(spec: &DomainSpec, inside: Point, outside: Point) -> (f64, Point) {
    let at = |s: f64| {
        Point::new(
            inside.x + s * (outside.x - inside.x),
            inside.y + s * (outside.y - inside.y),
        )
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if contains(spec, at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    (s, at(s))
}
