use std::f64::consts::{PI, TAU};

use serde_json::json;

use super::certificate::{Certificate, Relation};
use crate::error::{Error, Result};
use crate::geometry::{polygon_nearest, DomainSpec, Point};
use crate::sampler::wos_batch;

/// `1 - (2/pi) atan(2 sqrt(r) / (1 - r))` for `0 <= r < 1`.
pub fn beurling_lower_bound(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Precondition(format!("need 0 <= r < 1, got {r}")));
    }
    Ok(1.0 - (2.0 / PI) * (2.0 * r.sqrt() / (1.0 - r)).atan())
}

/// Strict decrease of [`beurling_lower_bound`] on `n` equally spaced points
/// of `[0, 1)`. `lhs` is the largest increment between neighbours.
pub fn check_beurling_monotone(n: usize) -> Result<Certificate> {
    if n < 2 {
        return Err(Error::Precondition("need at least two grid points".into()));
    }
    let vals: Vec<f64> = (0..n)
        .map(|k| beurling_lower_bound(k as f64 / n as f64))
        .collect::<Result<_>>()?;
    let worst = vals
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Certificate {
        name: "beurling_monotone".into(),
        lhs: worst,
        rhs: 0.0,
        relation: Relation::Lt,
        slack: -worst,
        holds: worst < 0.0,
        inputs: json!({ "statement": "bound strictly decreasing in r", "grid_points": n })
            .as_object()
            .cloned()
            .unwrap_or_default(),
    })
}

/// Polygon for the disk of radius `eps` slit along `[0, eps]`: a wedge of
/// half-angle `half_angle` about the slit is removed and the circle is
/// replaced by a circumscribed `n_arc`-gon arc, so the polygon contains the
/// slit disk minus the wedge. Edges `0` and `n - 1` are the wedge sides.
pub fn slit_disk_polygon(eps: f64, half_angle: f64, n_arc: usize) -> Result<DomainSpec> {
    if !(eps > 0.0) || !(half_angle > 0.0 && half_angle < 0.5 * PI) || n_arc < 8 {
        return Err(Error::Precondition("bad slit disk parameters".into()));
    }
    let radius = eps / (PI / n_arc as f64).cos();
    let span = TAU - 2.0 * half_angle;
    let mut vertices = vec![Point::ORIGIN];
    for k in 0..=n_arc {
        let a = half_angle + span * k as f64 / n_arc as f64;
        vertices.push(Point::new(radius * a.cos(), radius * a.sin()));
    }
    let spec = DomainSpec::Polygon { vertices };
    spec.validate()?;
    Ok(spec)
}

/// Monte Carlo slit hitting frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitHitting {
    pub hits: usize,
    pub n: usize,
    pub frequency: f64,
    pub stderr: f64,
}

pub const SLIT_HALF_ANGLE: f64 = 0.05;
pub const SLIT_ARC_VERTICES: usize = 256;

/// Walk-on-spheres from `-r eps` in [`slit_disk_polygon`], counting exits
/// through the wedge sides.
pub fn slit_hitting_frequency(
    r: f64,
    eps: f64,
    n: usize,
    seed: u64,
    shell_eps: f64,
) -> Result<SlitHitting> {
    if n == 0 {
        return Err(Error::Precondition("need n >= 1".into()));
    }
    let spec = slit_disk_polygon(eps, SLIT_HALF_ANGLE, SLIT_ARC_VERTICES)?;
    let DomainSpec::Polygon { vertices } = &spec else {
        unreachable!()
    };
    let last = vertices.len() - 1;
    let exits = wos_batch(&spec, Point::new(-r * eps, 0.0), shell_eps, 1_000_000, n, seed)?;
    let hits = exits
        .iter()
        .filter(|s| {
            let (edge, _) = polygon_nearest(vertices, s.position);
            edge == 0 || edge == last
        })
        .count();
    let p = hits as f64 / n as f64;
    Ok(SlitHitting {
        hits,
        n,
        frequency: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
    })
}

/// `frequency >= beurling_lower_bound(r)`.
pub fn check_beurling_hitting(r: f64, hit: &SlitHitting) -> Result<Certificate> {
    let bound = beurling_lower_bound(r)?;
    Ok(Certificate {
        name: "beurling_hitting".into(),
        lhs: hit.frequency,
        rhs: bound,
        relation: Relation::Ge,
        slack: hit.frequency - bound,
        holds: hit.frequency >= bound,
        inputs: json!({
            "statement": "slit hitting frequency >= 1 - (2/pi) atan(2 sqrt r / (1 - r))",
            "r": r,
            "n": hit.n,
            "hits": hit.hits,
            "stderr": hit.stderr,
            "wedge_half_angle": SLIT_HALF_ANGLE,
            "arc_vertices": SLIT_ARC_VERTICES,
        })
        .as_object()
        .cloned()
        .unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::contains;

    #[test]
    fn bound_values() {
        assert_eq!(beurling_lower_bound(0.0).unwrap(), 1.0);
        let b = beurling_lower_bound(0.25).unwrap();
        assert!((b - (1.0 - (2.0 / PI) * (4.0f64 / 3.0).atan())).abs() < 1e-15);
        assert!((b - 0.4097).abs() < 1e-4);
        assert!(beurling_lower_bound(1.0 - 1e-12).unwrap() < 1e-5);
        assert!(beurling_lower_bound(1.0).is_err());
        assert!(beurling_lower_bound(-0.1).is_err());
    }

    #[test]
    fn bound_is_exact_harmonic_measure_on_the_axis() {
        // slit disk -> upper half disk (sqrt) -> quadrant: from -r the slit
        // has harmonic measure 1 - (4/pi) atan(sqrt r)
        for r in [0.01, 0.25, 0.5, 0.9] {
            let exact = 1.0 - (4.0 / PI) * f64::sqrt(r).atan();
            assert!((beurling_lower_bound(r).unwrap() - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_on_dense_grid() {
        let c = check_beurling_monotone(10_000).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn polygon_shape() {
        let spec = slit_disk_polygon(1.0, 0.05, 64).unwrap();
        assert!(contains(&spec, Point::new(-0.25, 0.0)));
        assert!(contains(&spec, Point::new(0.0, 0.99)));
        assert!(!contains(&spec, Point::new(0.5, 0.0)));
        assert!(!contains(&spec, Point::new(0.5, 0.01)));
        assert!(slit_disk_polygon(1.0, 0.0, 64).is_err());
    }

    #[test]
    fn small_hitting_run() {
        let h = slit_hitting_frequency(0.25, 1.0, 4000, 3, 1e-6).unwrap();
        assert!((h.frequency - 0.41).abs() < 5.0 * h.stderr + 0.01, "{h:?}");
    }
}
