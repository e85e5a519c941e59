use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Interval;
use crate::sampler::SurvivalCurve;

/// Law of the real part of an exit position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetDistribution {
    Uniform { a: f64, b: f64 },
    /// Density `sech(pi x / 2) / 2`.
    SechDensity,
    Cauchy { location: f64, scale: f64 },
}

impl TargetDistribution {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            TargetDistribution::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            TargetDistribution::SechDensity => {
                if x.is_nan() {
                    return f64::NAN;
                }
                (2.0 / PI) * (0.5 * PI * x).exp().atan()
            }
            TargetDistribution::Cauchy { location, scale } => {
                0.5 + ((x - location) / scale).atan() / PI
            }
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            TargetDistribution::Uniform { a, b } => Some(0.5 * (a + b)),
            TargetDistribution::SechDensity => Some(0.0),
            TargetDistribution::Cauchy { .. } => None,
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match *self {
            TargetDistribution::Uniform { a, b } => Some((b - a).powi(2) / 12.0),
            TargetDistribution::SechDensity => Some(1.0),
            TargetDistribution::Cauchy { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TargetDistribution::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            TargetDistribution::SechDensity => true,
            TargetDistribution::Cauchy { location, scale } => {
                location.is_finite() && scale.is_finite() && scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid target distribution {self:?}")))
        }
    }

    /// `uniform,a,b`, `sech`, `cauchy` or `cauchy,location,scale`.
    pub fn parse_inline(text: &str) -> Result<TargetDistribution> {
        let mut parts = text.split(',').map(str::trim);
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad number {p:?} in target {text:?}")))
            })
            .collect::<Result<_>>()?;
        let target = match (name.as_str(), nums.as_slice()) {
            ("uniform", [a, b]) => TargetDistribution::Uniform { a: *a, b: *b },
            ("sech" | "sech_density", []) => TargetDistribution::SechDensity,
            ("cauchy", []) => TargetDistribution::Cauchy { location: 0.0, scale: 1.0 },
            ("cauchy", [location, scale]) => TargetDistribution::Cauchy {
                location: *location,
                scale: *scale,
            },
            _ => return Err(Error::Usage(format!("unrecognized target {text:?}"))),
        };
        target.validate()?;
        Ok(target)
    }
}

/// Kolmogorov-Smirnov distance between the sample ECDF and `target`.
pub fn ks_statistic(samples: &[f64], target: &TargetDistribution) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Precondition("samples contain NaN".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = target.cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    });
    Ok(d)
}

/// Sorted samples paired with their ECDF heights `i / n`.
pub fn ecdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / n))
        .collect()
}

/// `(min, max)` of the samples.
pub fn empirical_support(samples: &[f64]) -> Result<Interval> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Precondition("samples contain NaN".into()));
    }
    Ok(Interval::new(lo, hi))
}

/// Empirical support of each prefix `samples[..n]` for `n` in `sizes`.
pub fn support_by_prefix(samples: &[f64], sizes: &[usize]) -> Result<Vec<Interval>> {
    sizes
        .iter()
        .map(|&n| {
            if n > samples.len() {
                return Err(Error::Precondition(format!(
                    "prefix {n} longer than the {} samples",
                    samples.len()
                )));
            }
            empirical_support(&samples[..n])
        })
        .collect()
}

/// Survival fractions kept by the rate fit.
pub const WINDOW: (f64, f64) = (1e-3, 1e-1);
const MIN_POINTS: usize = 4;

/// Exponential tail rate fitted to a survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub lambda: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Weighted least-squares slope of `-log P(t)` over the grid times where the
/// survivor fraction lies in [`WINDOW`] and `t <= max(times) / 2`.
pub fn estimate_rate(curve: &SurvivalCurve) -> Result<RateEstimate> {
    if curve.n_total == 0 {
        return Err(Error::EmptyInput);
    }
    let fractions: Vec<f64> = (0..curve.times.len()).map(|i| curve.fraction(i)).collect();
    estimate_rate_from_fractions(&curve.times, &fractions, curve.n_total as f64)
}

/// As [`estimate_rate`], on survivor fractions from `n_total` paths.
///
/// Weights are the inverse delta-method variances `n p / (1 - p)` of
/// `-log p`.
pub fn estimate_rate_from_fractions(
    times: &[f64],
    fractions: &[f64],
    n_total: f64,
) -> Result<RateEstimate> {
    if times.len() != fractions.len() {
        return Err(Error::Precondition("times and fractions differ in length".into()));
    }
    let t_max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64, f64)> = times
        .iter()
        .zip(fractions)
        .filter(|&(&t, &p)| p >= WINDOW.0 && p <= WINDOW.1 && p < 1.0 && t <= 0.5 * t_max)
        .map(|(&t, &p)| (t, -p.ln(), n_total * p / (1.0 - p)))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::WindowTooNarrow { usable: pts.len() });
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let tbar = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ybar = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - tbar).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - tbar) * (p.1 - ybar)).sum();
    if !(sxx > 0.0) {
        return Err(Error::WindowTooNarrow { usable: 1 });
    }
    let t_lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateEstimate {
        lambda: sxy / sxx,
        stderr: (1.0 / sxx).sqrt(),
        window: (t_lo, t_hi),
        n_points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ks_quantile_staircase() {
        let n = 100;
        let u = TargetDistribution::Uniform { a: -1.0, b: 1.0 };
        let xs: Vec<f64> = (1..=n).map(|i| -1.0 + 2.0 * (i as f64 - 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, &u).unwrap();
        assert!((d - 0.005).abs() < 1e-12, "{d}");
        assert!(matches!(ks_statistic(&[], &u), Err(Error::EmptyInput)));
    }

    #[test]
    fn sech_cdf_matches_quadrature() {
        let f = |x: f64| 0.5 / (0.5 * PI * x).cosh();
        let sech = TargetDistribution::SechDensity;
        let (mut acc, mut x, h) = (sech.cdf(-8.0), -8.0, 1e-4);
        while x < 3.0 - 1e-12 {
            acc += h * (f(x) + 4.0 * f(x + 0.5 * h) + f(x + h)) / 6.0;
            x += h;
            if (x - x.round()).abs() < 1e-9 {
                assert!((acc - sech.cdf(x)).abs() < 1e-10, "x={x}");
            }
        }
        assert!((sech.cdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        let u = TargetDistribution::Uniform { a: -1.0, b: 1.0 };
        assert_eq!(u.mean(), Some(0.0));
        assert!((u.variance().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let c = TargetDistribution::Cauchy { location: 0.0, scale: 1.0 };
        assert_eq!(c.variance(), None);
        assert_eq!(c.mean(), None);
        assert!((c.cdf(1.0) - 0.75).abs() < 1e-15);
        // second moment of the sech law by quadrature
        let h = 1e-3;
        let m2: f64 = (0..40_000)
            .map(|k| {
                let x = -20.0 + (k as f64 + 0.5) * h;
                x * x * 0.5 / (0.5 * PI * x).cosh() * h
            })
            .sum();
        assert!((m2 - 1.0).abs() < 1e-6, "{m2}");
    }

    #[test]
    fn parse_targets() {
        assert_eq!(
            TargetDistribution::parse_inline("uniform,-1,1").unwrap(),
            TargetDistribution::Uniform { a: -1.0, b: 1.0 }
        );
        assert_eq!(TargetDistribution::parse_inline("sech").unwrap(), TargetDistribution::SechDensity);
        assert!(TargetDistribution::parse_inline("uniform,1,-1").is_err());
        assert!(TargetDistribution::parse_inline("gamma").is_err());
        let json = serde_json::to_string(&TargetDistribution::Cauchy { location: 0.0, scale: 2.0 }).unwrap();
        assert_eq!(json, r#"{"kind":"cauchy","location":0.0,"scale":2.0}"#);
    }

    #[test]
    fn support_and_prefixes() {
        assert_eq!(empirical_support(&[0.0]).unwrap(), Interval::new(0.0, 0.0));
        assert!(empirical_support(&[]).is_err());
        let s = support_by_prefix(&[0.0, 1.0, -2.0], &[1, 3]).unwrap();
        assert_eq!(s[1], Interval::new(-2.0, 1.0));
        assert!(support_by_prefix(&[0.0], &[2]).is_err());
    }

    #[test]
    fn exact_exponential_recovered() {
        let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let fr: Vec<f64> = times.iter().map(|t| (-3.0 * t).exp()).collect();
        let est = estimate_rate_from_fractions(&times, &fr, 1e6).unwrap();
        assert!((est.lambda - 3.0).abs() < 1e-12, "{est:?}");
        assert!(est.window.0 < est.window.1);
        assert!(est.window.1 <= 2.0);
    }

    #[test]
    fn narrow_window_rejected() {
        let times = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let fr = [1.0, 0.5, 0.05, 0.02, 1e-4, 1e-5, 1e-6, 1e-7];
        assert!(matches!(
            estimate_rate_from_fractions(&times, &fr, 1e6),
            Err(Error::WindowTooNarrow { usable: 2 })
        ));
    }

    proptest! {
        #[test]
        fn ks_affine_invariance(
            xs in prop::collection::vec(-5.0f64..5.0, 1..200),
            scale in 0.1f64..10.0,
            shift in -10.0f64..10.0,
        ) {
            let t = TargetDistribution::Cauchy { location: 0.3, scale: 1.7 };
            let mapped: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let tm = TargetDistribution::Cauchy { location: scale * 0.3 + shift, scale: scale * 1.7 };
            let (a, b) = (ks_statistic(&xs, &t).unwrap(), ks_statistic(&mapped, &tm).unwrap());
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn exponential_rates_recovered(rate in 0.2f64..20.0) {
            let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01 / rate).collect();
            let fr: Vec<f64> = times.iter().map(|t| (-rate * t).exp()).collect();
            let est = estimate_rate_from_fractions(&times, &fr, 1e5).unwrap();
            prop_assert!((est.lambda - rate).abs() < 1e-9 * rate);
        }
    }
}
