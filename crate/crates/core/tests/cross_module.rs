use std::f64::consts::PI;

use csep::analysis::{check_lower_bound, check_upper_bound, TargetDistribution};
use csep::geometry::truncate_u;
use csep::sampler::{euler_batch, wos_batch, DEFAULT_MAX_STEPS, DEFAULT_MAX_TIME};
use csep::spectral::{best_known_c2, default_bbox, principal_rate, rasterize, rate_of_u, torsion};
use csep::{DomainSpec, Interval, Point};

#[test]
fn torsion_at_origin_matches_mean_exit_time_on_u() {
    let spec = truncate_u(1.0, 6.0).unwrap();
    let mask = rasterize(&spec, 0.01, default_bbox(&spec, 20.0).unwrap()).unwrap();
    let u0 = torsion(&mask).unwrap().value_at_origin;

    let unbounded = DomainSpec::GrimReaperU { scale: 1.0 };
    let exits = euler_batch(&unbounded, Point::ORIGIN, 1e-4, DEFAULT_MAX_TIME, 20_000, 31).unwrap();
    assert!(exits.iter().all(|s| !s.censored));
    let n = exits.len() as f64;
    let mean = exits.iter().map(|s| s.time).sum::<f64>() / n;
    let var = exits.iter().map(|s| (s.time - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(
        (u0 - mean).abs() < 3.0 * se + 0.01 * u0,
        "torsion {u0} vs mean exit time {mean} +- {se}"
    );
}

#[test]
fn lower_bound_slack_vanishes_in_the_truncation_limit() {
    let floor = PI * PI / 8.0;
    let support = Interval::new(-1.0, 1.0);
    let slack = |r: f64| check_lower_bound(r, support).slack;
    let heights = [2.0, 4.0, 6.0, 8.0];
    let sweeps: Vec<_> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dx| rate_of_u(1.0, dx, &heights).unwrap())
        .collect();
    // the coarsest grid may undershoot the floor slightly
    for sweep in &sweeps {
        let slacks: Vec<f64> = sweep.results.iter().map(|r| slack(r.rate)).collect();
        assert!(slacks.windows(2).all(|w| w[1] < w[0]), "dx {}: {slacks:?}", sweep.dx);
        let last = slack(sweep.extrapolated);
        assert!(last.abs() < 0.01 * floor, "dx {}: {last}", sweep.dx);
    }
    // grid rates settle as dx shrinks
    let top = |k: usize| sweeps[k].at_max_height;
    assert!((top(2) - top(1)).abs() < (top(1) - top(0)).abs());
}

#[test]
fn upper_bound_holds_on_every_closed_form_domain() {
    let cases = [
        (DomainSpec::StripRe { a: -1.0, b: 1.0 }, TargetDistribution::Uniform { a: -1.0, b: 1.0 }),
        (DomainSpec::StripIm { c: -1.0, d: 1.0 }, TargetDistribution::SechDensity),
    ];
    for (spec, target) in cases {
        let mask = rasterize(&spec, 0.02, default_bbox(&spec, 20.0).unwrap()).unwrap();
        let rate = principal_rate(&mask).unwrap().rate;
        let cert = check_upper_bound(rate, &target, best_known_c2()).unwrap();
        assert!(cert.holds, "{spec:?}: {cert:?}");
    }
}

#[test]
fn sampled_exit_variance_matches_the_target() {
    let spec = DomainSpec::GrimReaperU { scale: 1.0 };
    let exits = wos_batch(&spec, Point::ORIGIN, 1e-6, DEFAULT_MAX_STEPS, 100_000, 9).unwrap();
    let re: Vec<f64> = exits.iter().map(|s| s.position.x).collect();
    let n = re.len() as f64;
    let mean = re.iter().sum::<f64>() / n;
    let var = re.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let exact = TargetDistribution::Uniform { a: -1.0, b: 1.0 }.variance().unwrap();
    assert!((var - exact).abs() < 0.01 * exact, "{var} vs {exact}");
    assert!(mean.abs() < 0.01);
}
