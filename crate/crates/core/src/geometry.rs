//! Planar domain catalogue and the geometric predicates used by the samplers
//! and grid solvers.
//!
//! Every domain is an open set. Points on the boundary are outside.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the complex plane, `x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        Point::new(self.x - other.x, self.y - other.y).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn scaled(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Parametric description of a simply connected planar domain.
///
/// Serializes as a JSON object tagged by `kind`, e.g.
/// `{"kind": "grim_reaper_u", "scale": 1.0}` or `{"kind": "strip_re", "a": -1, "b": 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `{Im z > 0}`.
    HalfPlane,
    /// Vertical strip `{a < Re z < b}`.
    StripRe { a: f64, b: f64 },
    /// Horizontal strip `{c < Im z < d}`.
    StripIm { c: f64, d: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: Point, r: f64 },
    /// The domain above the Grim Reaper curve, scaled by `scale`:
    /// `{|x| < scale, y > scale * h(x / scale)}`.
    GrimReaperU { scale: f64 },
    /// [`DomainSpec::GrimReaperU`] cut off by the line `Im z = H`.
    TruncatedU {
        scale: f64,
        #[serde(rename = "H")]
        height: f64,
    },
    /// Region above the parabola `y = x^2/2 - 1/2`.
    Parabola,
    /// Simple, positively oriented polygon.
    Polygon { vertices: Vec<Point> },
}

/// Interval of the extended real line; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "ext_real")]
    pub lo: f64,
    #[serde(with = "ext_real")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// JSON has no infinities; infinite endpoints are written as the strings
/// `"-inf"` / `"inf"`.
mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("bad extended real {other:?}"))),
            },
        }
    }
}

/// Height of the Grim Reaper boundary, `h(x) = -(2/pi) log(2 cos(pi x / 2))`
/// for the unit domain. No range check.
#[inline]
pub(crate) fn reaper_h(x: f64) -> f64 {
    -(2.0 / PI) * (2.0 * (FRAC_PI_2 * x).cos()).ln()
}

/// Boundary height of the scaled domain, `scale * h(x / scale)`.
pub fn grim_reaper_height(x: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    if !(x.abs() < scale) {
        return Err(Error::Domain(format!(
            "grim reaper height undefined at |x| = {} >= scale {scale}",
            x.abs()
        )));
    }
    Ok(scale * reaper_h(x / scale))
}

/// Builds `scale * U` truncated at `Im z < height`.
pub fn truncate_u(scale: f64, height: f64) -> Result<DomainSpec> {
    let floor = grim_reaper_height(0.0, scale)?;
    if !(height > floor) {
        return Err(Error::Precondition(format!(
            "truncation height {height} must exceed the bottom of the domain {floor}"
        )));
    }
    Ok(DomainSpec::TruncatedU { scale, height })
}

/// Membership in the open domain.
pub fn contains(spec: &DomainSpec, p: Point) -> bool {
    if !p.is_finite() {
        return false;
    }
    match spec {
        DomainSpec::HalfPlane => p.y > 0.0,
        DomainSpec::StripRe { a, b } => *a < p.x && p.x < *b,
        DomainSpec::StripIm { c, d } => *c < p.y && p.y < *d,
        DomainSpec::Rectangle { x0, x1, y0, y1 } => {
            *x0 < p.x && p.x < *x1 && *y0 < p.y && p.y < *y1
        }
        DomainSpec::Disk { center, r } => p.dist(*center) < *r,
        DomainSpec::GrimReaperU { scale } => reaper_contains(p.scaled(1.0 / scale)),
        DomainSpec::TruncatedU { scale, height } => {
            p.y < *height && reaper_contains(p.scaled(1.0 / scale))
        }
        DomainSpec::Parabola => p.y > 0.5 * p.x * p.x - 0.5,
        DomainSpec::Polygon { vertices } => {
            winding_number(vertices, p) != 0 && polygon_dist(vertices, p) > 0.0
        }
    }
}

fn reaper_contains(p: Point) -> bool {
    p.x.abs() < 1.0 && p.y > reaper_h(p.x)
}

/// Lower bound on the distance from `p` to the boundary; 0 when `p` is not
/// inside. Exact except for the Grim Reaper domains and the parabola.
pub fn dist_to_boundary(spec: &DomainSpec, p: Point) -> f64 {
    if !contains(spec, p) {
        return 0.0;
    }
    interior_dist(spec, p)
}

/// [`dist_to_boundary`] for a point already known to be inside.
#[inline]
pub(crate) fn interior_dist(spec: &DomainSpec, p: Point) -> f64 {
    match spec {
        DomainSpec::HalfPlane => p.y,
        DomainSpec::StripRe { a, b } => (p.x - a).min(b - p.x),
        DomainSpec::StripIm { c, d } => (p.y - c).min(d - p.y),
        DomainSpec::Rectangle { x0, x1, y0, y1 } => {
            (p.x - x0).min(x1 - p.x).min(p.y - y0).min(y1 - p.y)
        }
        DomainSpec::Disk { center, r } => r - p.dist(*center),
        DomainSpec::GrimReaperU { scale } => scale * reaper_dist_lower(p.scaled(1.0 / scale)),
        DomainSpec::TruncatedU { scale, height } => {
            (scale * reaper_dist_lower(p.scaled(1.0 / scale))).min(height - p.y)
        }
        DomainSpec::Parabola => PARABOLA_SAFETY * parabola_dist(p),
        DomainSpec::Polygon { vertices } => polygon_dist(vertices, p),
    }
}

/// Certified lower bound on the distance from an interior point of the unit
/// Grim Reaper domain to its boundary curve.
///
/// On `[|x| - rho, |x| + rho]` the curve has slope at most
/// `tan(pi (|x| + rho) / 2)`, so it stays below the cone of that slope through
/// `(x, h(x))` and the distance is at least
/// `min(rho, gap * cos(pi (|x| + rho) / 2))` with `gap = y - h(x)`. Newton on
/// the balance equation picks a near-optimal `rho`; the iterates approach the
/// root from above, so each one yields a valid bound.
fn reaper_dist_lower(p: Point) -> f64 {
    let ax = p.x.abs();
    let room = 1.0 - ax;
    let gap = p.y - reaper_h(ax);
    if !(room > 0.0) || !(gap > 0.0) {
        return 0.0;
    }
    let mut rho = gap.min(room);
    let mut bound = 0.0_f64;
    for _ in 0..6 {
        let (s, c) = (FRAC_PI_2 * (ax + rho)).sin_cos();
        let reach = gap * c.max(0.0);
        bound = bound.max(rho.min(reach));
        let f = rho - reach;
        if f <= 1e-3 * rho {
            break;
        }
        rho -= f / (1.0 + gap * FRAC_PI_2 * s);
    }
    bound
}

const PARABOLA_SAFETY: f64 = 0.9;

/// Distance from `p` to the parabola `y = x^2/2 - 1/2`.
///
/// Foot points satisfy `t^3 + (1 - 2y) t - 2x = 0`; all real roots are
/// examined.
fn parabola_dist(p: Point) -> f64 {
    p.dist(parabola_foot(p))
}

/// Nearest point of the parabola `y = x^2/2 - 1/2`.
fn parabola_foot(p: Point) -> Point {
    let pc = 1.0 - 2.0 * p.y;
    let qc = -2.0 * p.x;
    let curve = |t: f64| Point::new(t, 0.5 * t * t - 0.5);
    let polish = |mut t: f64| {
        for _ in 0..3 {
            let f = t * t * t + pc * t + qc;
            let df = 3.0 * t * t + pc;
            if df.abs() < 1e-300 {
                break;
            }
            t -= f / df;
        }
        t
    };
    real_cubic_roots(pc, qc)
        .into_iter()
        .flatten()
        .map(|t| curve(polish(t)))
        .min_by(|a, b| p.dist(*a).total_cmp(&p.dist(*b)))
        .expect("a real cubic has a real root")
}

/// Real roots of `t^3 + p t + q = 0`.
fn real_cubic_roots(p: f64, q: f64) -> [Option<f64>; 3] {
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        [Some(t), None, None]
    } else if p == 0.0 {
        [Some(0.0), None, None]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [0.0, 1.0, 2.0].map(|k| Some(m * (theta - 2.0 * PI * k / 3.0).cos()))
    }
}

/// Nearest boundary point; numerical for the Grim Reaper curve and the
/// parabola.
pub fn nearest_boundary_point(spec: &DomainSpec, p: Point) -> Point {
    match spec {
        DomainSpec::HalfPlane => Point::new(p.x, 0.0),
        DomainSpec::StripRe { a, b } => {
            let x = if (p.x - a).abs() <= (b - p.x).abs() { *a } else { *b };
            Point::new(x, p.y)
        }
        DomainSpec::StripIm { c, d } => {
            let y = if (p.y - c).abs() <= (d - p.y).abs() { *c } else { *d };
            Point::new(p.x, y)
        }
        DomainSpec::Rectangle { x0, x1, y0, y1 } => {
            let x = p.x.clamp(*x0, *x1);
            let y = p.y.clamp(*y0, *y1);
            let cands = [
                ((x - x0).abs(), Point::new(*x0, y)),
                ((x1 - x).abs(), Point::new(*x1, y)),
                ((y - y0).abs(), Point::new(x, *y0)),
                ((y1 - y).abs(), Point::new(x, *y1)),
            ];
            cands
                .into_iter()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, q)| q)
                .expect("four candidates")
        }
        DomainSpec::Disk { center, r } => {
            let v = Point::new(p.x - center.x, p.y - center.y);
            let n = v.norm();
            if n == 0.0 {
                Point::new(center.x + r, center.y)
            } else {
                Point::new(center.x + r * v.x / n, center.y + r * v.y / n)
            }
        }
        DomainSpec::Polygon { vertices } => polygon_nearest(vertices, p).1,
        DomainSpec::GrimReaperU { scale } => reaper_foot(p.scaled(1.0 / scale)).scaled(*scale),
        DomainSpec::TruncatedU { scale, height } => {
            let foot = reaper_foot(p.scaled(1.0 / scale)).scaled(*scale);
            let top = Point::new(p.x, *height);
            if p.dist(top) < p.dist(foot) { top } else { foot }
        }
        DomainSpec::Parabola => parabola_foot(p),
    }
}

/// Foot point on the unit Grim Reaper curve: Newton's method on the
/// stationarity condition `x - px + (h(x) - py) h'(x) = 0`, started from the
/// vertical and the horizontal projections of `p`; the closest result wins.
fn reaper_foot(p: Point) -> Point {
    let lim = 1.0 - 1e-15;
    let mut starts = vec![p.x.clamp(-lim, lim)];
    let level = (-FRAC_PI_2 * p.y).exp() / 2.0;
    if level < 1.0 {
        starts.push((level.acos() / FRAC_PI_2).copysign(p.x).clamp(-lim, lim));
    }
    starts
        .into_iter()
        .map(|x0| {
            let mut x = x0;
            for _ in 0..50 {
                let (s, c) = (FRAC_PI_2 * x).sin_cos();
                let slope = s / c;
                let gap = reaper_h(x) - p.y;
                let f = x - p.x + gap * slope;
                let df = 1.0 + slope * slope + gap * FRAC_PI_2 / (c * c);
                if !(df > 0.0) {
                    break;
                }
                let next = (x - f / df).clamp(-lim, lim);
                let done = (next - x).abs() < 1e-15;
                x = next;
                if done {
                    break;
                }
            }
            Point::new(x, reaper_h(x))
        })
        .min_by(|a, b| p.dist(*a).total_cmp(&p.dist(*b)))
        .expect("at least one start")
}

/// Open interval of real parts, `Re D`.
pub fn re_projection(spec: &DomainSpec) -> Interval {
    match spec {
        DomainSpec::HalfPlane | DomainSpec::StripIm { .. } | DomainSpec::Parabola => {
            Interval::new(f64::NEG_INFINITY, f64::INFINITY)
        }
        DomainSpec::StripRe { a, b } => Interval::new(*a, *b),
        DomainSpec::Rectangle { x0, x1, .. } => Interval::new(*x0, *x1),
        DomainSpec::Disk { center, r } => Interval::new(center.x - r, center.x + r),
        DomainSpec::GrimReaperU { scale } | DomainSpec::TruncatedU { scale, .. } => {
            Interval::new(-scale, *scale)
        }
        DomainSpec::Polygon { vertices } => {
            let lo = vertices.iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
            let hi = vertices.iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max);
            Interval::new(lo, hi)
        }
    }
}

impl DomainSpec {
    /// Checks the structural invariants of each variant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        let all_finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            DomainSpec::HalfPlane | DomainSpec::Parabola => Ok(()),
            DomainSpec::StripRe { a, b } if !(all_finite(&[*a, *b]) && a < b) => {
                bad(format!("strip_re needs a < b, got a={a}, b={b}"))
            }
            DomainSpec::StripIm { c, d } if !(all_finite(&[*c, *d]) && c < d) => {
                bad(format!("strip_im needs c < d, got c={c}, d={d}"))
            }
            DomainSpec::Rectangle { x0, x1, y0, y1 }
                if !(all_finite(&[*x0, *x1, *y0, *y1]) && x0 < x1 && y0 < y1) =>
            {
                bad("rectangle needs x0 < x1 and y0 < y1".into())
            }
            DomainSpec::Disk { center, r } if !(center.is_finite() && *r > 0.0 && r.is_finite()) => {
                bad(format!("disk needs a finite center and r > 0, got r={r}"))
            }
            DomainSpec::GrimReaperU { scale } if !(*scale > 0.0 && scale.is_finite()) => {
                bad(format!("grim_reaper_u needs scale > 0, got {scale}"))
            }
            DomainSpec::TruncatedU { scale, height } => truncate_u(*scale, *height).map(|_| ()),
            DomainSpec::Polygon { vertices } => validate_polygon(vertices),
            _ => Ok(()),
        }
    }

    /// Bounding box `(x0, x1, y0, y1)` of a bounded domain.
    pub fn bounding_box(&self) -> Option<[f64; 4]> {
        match self {
            DomainSpec::Rectangle { x0, x1, y0, y1 } => Some([*x0, *x1, *y0, *y1]),
            DomainSpec::Disk { center, r } => {
                Some([center.x - r, center.x + r, center.y - r, center.y + r])
            }
            DomainSpec::TruncatedU { scale, height } => {
                Some([-scale, *scale, scale * reaper_h(0.0), *height])
            }
            DomainSpec::Polygon { vertices } => {
                let f = |sel: fn(&Point) -> f64, init: f64, op: fn(f64, f64) -> f64| {
                    vertices.iter().map(sel).fold(init, op)
                };
                Some([
                    f(|v| v.x, f64::INFINITY, f64::min),
                    f(|v| v.x, f64::NEG_INFINITY, f64::max),
                    f(|v| v.y, f64::INFINITY, f64::min),
                    f(|v| v.y, f64::NEG_INFINITY, f64::max),
                ])
            }
            _ => None,
        }
    }

    /// Characteristic length used to scale default tolerances.
    pub fn length_scale(&self) -> f64 {
        match self {
            DomainSpec::HalfPlane | DomainSpec::Parabola => 1.0,
            DomainSpec::StripRe { a, b } => b - a,
            DomainSpec::StripIm { c, d } => d - c,
            DomainSpec::Rectangle { x0, x1, y0, y1 } => (x1 - x0).min(y1 - y0),
            DomainSpec::Disk { r, .. } => 2.0 * r,
            DomainSpec::GrimReaperU { scale } | DomainSpec::TruncatedU { scale, .. } => {
                2.0 * scale
            }
            DomainSpec::Polygon { .. } => {
                let [x0, x1, y0, y1] = self.bounding_box().unwrap_or([0.0, 1.0, 0.0, 1.0]);
                (x1 - x0).max(y1 - y0)
            }
        }
    }

    /// Short name used in file names and reports.
    pub fn kind(&self) -> &'static str {
        match self {
            DomainSpec::HalfPlane => "half_plane",
            DomainSpec::StripRe { .. } => "strip_re",
            DomainSpec::StripIm { .. } => "strip_im",
            DomainSpec::Rectangle { .. } => "rectangle",
            DomainSpec::Disk { .. } => "disk",
            DomainSpec::GrimReaperU { .. } => "grim_reaper_u",
            DomainSpec::TruncatedU { .. } => "truncated_u",
            DomainSpec::Parabola => "parabola",
            DomainSpec::Polygon { .. } => "polygon",
        }
    }

    /// Parses the inline comma syntax, e.g. `strip_re,-1,1`, `grim_reaper_u`
    /// (scale defaults to 1), `disk,0,0,1`, `polygon,x1,y1,x2,y2,...`.
    /// Numbers follow the field order of the variant.
    pub fn parse_inline(text: &str) -> Result<DomainSpec> {
        let mut parts = text.split(',').map(str::trim);
        let kind = parts.next().unwrap_or_default();
        let nums: Vec<f64> = parts
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad number {s:?} in domain {text:?}")))
            })
            .collect::<Result<_>>()?;
        let want = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Usage(format!(
                    "domain {kind:?} takes {n} numbers, got {}",
                    nums.len()
                )))
            }
        };
        let spec = match kind {
            "half_plane" => want(0).map(|_| DomainSpec::HalfPlane)?,
            "parabola" => want(0).map(|_| DomainSpec::Parabola)?,
            "strip_re" => want(2).map(|_| DomainSpec::StripRe { a: nums[0], b: nums[1] })?,
            "strip_im" => want(2).map(|_| DomainSpec::StripIm { c: nums[0], d: nums[1] })?,
            "rectangle" => want(4).map(|_| DomainSpec::Rectangle {
                x0: nums[0],
                x1: nums[1],
                y0: nums[2],
                y1: nums[3],
            })?,
            "disk" => want(3).map(|_| DomainSpec::Disk {
                center: Point::new(nums[0], nums[1]),
                r: nums[2],
            })?,
            "grim_reaper_u" if nums.is_empty() => DomainSpec::GrimReaperU { scale: 1.0 },
            "grim_reaper_u" => want(1).map(|_| DomainSpec::GrimReaperU { scale: nums[0] })?,
            "truncated_u" => want(2).map(|_| DomainSpec::TruncatedU {
                scale: nums[0],
                height: nums[1],
            })?,
            "polygon" if nums.len() >= 6 && nums.len().is_multiple_of(2) => DomainSpec::Polygon {
                vertices: nums.chunks(2).map(|c| Point::new(c[0], c[1])).collect(),
            },
            "polygon" => {
                return Err(Error::Usage(
                    "polygon takes an even number (>= 6) of coordinates".into(),
                ))
            }
            other => return Err(Error::Usage(format!("unknown domain kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn validate_polygon(v: &[Point]) -> Result<()> {
    if v.len() < 3 || v.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain("polygon needs at least 3 finite vertices".into()));
    }
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::Domain(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    if signed_area(v) <= 0.0 {
        return Err(Error::Domain("polygon must be positively oriented".into()));
    }
    Ok(())
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

fn winding_number(v: &[Point], p: Point) -> i32 {
    let n = v.len();
    let mut wn = 0;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a.y <= p.y {
            if b.y > p.y && cross(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn segment_nearest(a: Point, b: Point, p: Point) -> Point {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return a;
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    Point::new(a.x + t * dx, a.y + t * dy)
}

/// Index of the nearest edge and the nearest boundary point.
pub(crate) fn polygon_nearest(v: &[Point], p: Point) -> (usize, Point) {
    let n = v.len();
    let mut best = (0, v[0], f64::INFINITY);
    for i in 0..n {
        let q = segment_nearest(v[i], v[(i + 1) % n], p);
        let d = (q.x - p.x).powi(2) + (q.y - p.y).powi(2);
        if d < best.2 {
            best = (i, q, d);
        }
    }
    (best.0, best.1)
}

fn polygon_dist(v: &[Point], p: Point) -> f64 {
    p.dist(polygon_nearest(v, p).1)
}
