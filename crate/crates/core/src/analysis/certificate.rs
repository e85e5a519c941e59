use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::stats::{empirical_support, TargetDistribution};
use crate::error::{Error, Result};
use crate::geometry::{re_projection, DomainSpec, Interval};
use crate::sampler::ExitSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "~=")]
    Approx,
}

/// Outcome of one numerical inequality check.
///
/// `slack` is signed so that `holds` is equivalent to `slack >= 0` for `<=`,
/// `>=` and `~=`, and to `slack > 0` for `<`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub slack: f64,
    pub holds: bool,
    pub inputs: Map<String, Value>,
}

impl Certificate {
    fn new(name: &str, lhs: f64, rhs: f64, relation: Relation, slack: f64, inputs: Value) -> Self {
        let holds = match relation {
            Relation::Lt => slack > 0.0,
            _ => slack >= 0.0,
        };
        let inputs = match inputs {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Certificate {
            name: name.to_string(),
            lhs,
            rhs,
            relation,
            slack,
            holds,
            inputs,
        }
    }
}

/// `rate <= c2 / Var(mu)`.
pub fn check_upper_bound(rate: f64, mu: &TargetDistribution, c2: f64) -> Result<Certificate> {
    let var = mu.variance().ok_or(Error::VarianceUndefined)?;
    let rhs = c2 / var;
    Ok(Certificate::new(
        "upper_bound",
        rate,
        rhs,
        Relation::Le,
        rhs - rate,
        json!({ "statement": "rate <= c2 / Var(mu)", "target": mu, "c2": c2, "variance": var }),
    ))
}

/// Same bound with the variance estimated from exit positions.
pub fn check_upper_bound_sampled(rate: f64, re_samples: &[f64], c2: f64) -> Result<Certificate> {
    if re_samples.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let n = re_samples.len() as f64;
    let mean = re_samples.iter().sum::<f64>() / n;
    let var = re_samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let rhs = c2 / var;
    Ok(Certificate::new(
        "upper_bound_sampled",
        rate,
        rhs,
        Relation::Le,
        rhs - rate,
        json!({ "statement": "rate <= c2 / sample variance", "c2": c2, "variance": var, "n": re_samples.len() }),
    ))
}

/// `rate >= pi^2 / (2 width^2)`; an unbounded support gives `rhs = 0`.
pub fn check_lower_bound(rate: f64, support: Interval) -> Certificate {
    let w = support.width();
    let rhs = if w.is_finite() && w > 0.0 {
        PI * PI / (2.0 * w * w)
    } else if w == 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Certificate::new(
        "lower_bound",
        rate,
        rhs,
        Relation::Ge,
        rate - rhs,
        json!({ "statement": "rate >= pi^2 / (2 (beta - alpha)^2)", "support": support }),
    )
}

/// Coordinate of an exit position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Re,
    Im,
}

/// Allowed deficit in standard errors.
pub const DAVIS_SIGMAS: f64 = 3.0;

/// `E[X^2] <= E[tau]` for the chosen coordinate `X` of the exit position
/// relative to the start, from paired samples.
///
/// `slack` is `(rhs - lhs) / se + 3` with `se` the standard error of the mean
/// of `tau - X^2`, so the check tolerates three standard errors. The inputs
/// also carry `gap_sigmas = |rhs - lhs| / se`, the distance from equality.
pub fn check_davis(samples: &[ExitSample], axis: Axis, start: crate::Point) -> Result<Certificate> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let censored = samples.iter().filter(|s| s.censored).count();
    if censored > 0 {
        return Err(Error::CensoredData { count: censored });
    }
    if samples.iter().any(|s| !s.has_time()) {
        return Err(Error::Precondition("exit times absent".into()));
    }
    let n = samples.len() as f64;
    let coord = |s: &ExitSample| match axis {
        Axis::Re => s.position.x - start.x,
        Axis::Im => s.position.y - start.y,
    };
    let lhs = samples.iter().map(|s| coord(s).powi(2)).sum::<f64>() / n;
    let rhs = samples.iter().map(|s| s.time).sum::<f64>() / n;
    let diff_mean = rhs - lhs;
    let var = samples
        .iter()
        .map(|s| (s.time - coord(s).powi(2) - diff_mean).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let se = (var / n).sqrt();
    let gap = if se > 0.0 { diff_mean.abs() / se } else { 0.0 };
    let slack = if se > 0.0 { diff_mean / se + DAVIS_SIGMAS } else { diff_mean };
    Ok(Certificate::new(
        "optional_stopping",
        lhs,
        rhs,
        Relation::Le,
        slack,
        json!({
            "statement": "E[X^2] <= E[tau]",
            "axis": axis,
            "n": samples.len(),
            "stderr": se,
            "gap_sigmas": gap,
            "sigmas_allowed": DAVIS_SIGMAS,
        }),
    ))
}

/// Tolerance rule for the support check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDensity {
    /// `5 width / sqrt(N)`.
    Generic,
    /// Exit density bounded below near the endpoints: `3 width / N`.
    BoundedBelow,
}

/// Finite endpoints of the real projection of `spec` against the
/// empirical support of the real parts of exits.
pub fn check_support_theorem(
    spec: &DomainSpec,
    samples: &[f64],
    edge: EdgeDensity,
) -> Result<Certificate> {
    let emp = empirical_support(samples)?;
    let proj = re_projection(spec);
    let n = samples.len() as f64;
    let width = if proj.width().is_finite() { proj.width() } else { emp.width() };
    let tol = match edge {
        EdgeDensity::Generic => 5.0 * width / n.sqrt(),
        EdgeDensity::BoundedBelow => 3.0 * width / n,
    };
    let mut gap: f64 = 0.0;
    if proj.lo.is_finite() {
        gap = gap.max((emp.lo - proj.lo).abs());
    }
    if proj.hi.is_finite() {
        gap = gap.max((proj.hi - emp.hi).abs());
    }
    Ok(Certificate::new(
        "support",
        gap,
        tol,
        Relation::Le,
        tol - gap,
        json!({
            "statement": "finite endpoints of Re D equal those of the exit support",
            "projection": proj,
            "empirical": emp,
            "n": samples.len(),
            "edge_density": edge,
        }),
    ))
}

/// `rate * sup u <= c2`.
pub fn check_torsion_product(rate: f64, sup_norm: f64, c2: f64) -> Certificate {
    let lhs = rate * sup_norm;
    Certificate::new(
        "torsion_spectral_product",
        lhs,
        c2,
        Relation::Le,
        c2 - lhs,
        json!({ "statement": "rate * sup u <= c2", "rate": rate, "sup_norm": sup_norm, "c2": c2 }),
    )
}
