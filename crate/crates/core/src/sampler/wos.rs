use std::f64::consts::TAU;

use rand::Rng;

use super::{ExitSample, RandomStream};
use crate::error::{Error, Result};
use crate::geometry::{contains, dist_to_boundary, nearest_boundary_point, DomainSpec, Point};

/// Largest sphere radius a walk may use; keeps steps finite in unbounded
/// domains.
pub const MAX_WOS_RADIUS: f64 = 1e3;

/// Walk-on-spheres exit position from `start`.
///
/// Jumps to a uniform point on the largest certified inscribed circle until
/// the walk is within `shell_eps` of the boundary, then snaps to the nearest
/// boundary point when the domain has a closed form for it.
pub fn wos_exit_position(
    spec: &DomainSpec,
    start: Point,
    shell_eps: f64,
    max_steps: u64,
    rng: &mut RandomStream,
) -> Result<ExitSample> {
    if !contains(spec, start) {
        return Err(Error::Precondition(format!("start {start:?} is not inside the domain")));
    }
    if !(shell_eps > 0.0) {
        return Err(Error::Precondition("shell_eps must be positive".into()));
    }
    let mut p = start;
    let mut steps = 0u64;
    loop {
        let d = dist_to_boundary(spec, p);
        if d < shell_eps {
            let position = nearest_boundary_point(spec, p);
            return Ok(ExitSample {
                position,
                time: f64::NAN,
                steps,
                censored: false,
            });
        }
        if steps >= max_steps {
            return Err(Error::MaxStepsExceeded { steps });
        }
        let r = d.min(MAX_WOS_RADIUS);
        let (s, c) = (TAU * rng.gen::<f64>()).sin_cos();
        p = Point::new(p.x + r * c, p.y + r * s);
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::reaper_h;

    #[test]
    fn exits_land_on_boundary() {
        let disk = DomainSpec::Disk { center: Point::ORIGIN, r: 1.0 };
        let mut rng = RandomStream::new(1, 0);
        for _ in 0..500 {
            let s = wos_exit_position(&disk, Point::ORIGIN, 1e-6, 10_000, &mut rng).unwrap();
            assert!((s.position.norm() - 1.0).abs() < 1e-12);
            assert!(s.time.is_nan() && s.steps > 0);
        }
        let u = DomainSpec::GrimReaperU { scale: 1.0 };
        for _ in 0..500 {
            let s = wos_exit_position(&u, Point::ORIGIN, 1e-6, 100_000, &mut rng).unwrap();
            let p = s.position;
            assert!(p.x.abs() < 1.0);
            // interior point within a few shells of the curve
            assert!(p.y - reaper_h(p.x) < 1e-4 * (1.0 + (1.5 * p.x).tan().abs()));
        }
    }

    #[test]
    fn start_in_shell_exits_immediately() {
        let strip = DomainSpec::StripRe { a: -1.0, b: 1.0 };
        let mut rng = RandomStream::new(1, 0);
        let s = wos_exit_position(&strip, Point::new(1.0 - 1e-9, 0.3), 1e-6, 10, &mut rng).unwrap();
        assert_eq!(s.steps, 0);
        assert_eq!(s.position, Point::new(1.0, 0.3));
    }

    #[test]
    fn errors() {
        let strip = DomainSpec::StripRe { a: -1.0, b: 1.0 };
        let mut rng = RandomStream::new(1, 0);
        assert!(matches!(
            wos_exit_position(&strip, Point::new(3.0, 0.0), 1e-6, 10, &mut rng),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            wos_exit_position(&DomainSpec::HalfPlane, Point::new(0.0, 1e6), 1e-9, 3, &mut rng),
            Err(Error::MaxStepsExceeded { steps: 3 })
        ));
    }
}
