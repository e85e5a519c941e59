//! Standalone SVG rendering for the CSV outputs and for domain boundaries.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{grim_reaper_height, DomainSpec, Point};
use crate::io::{fmt_f64, Table};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
/// Heat maps are binned down to at most this many cells per side.
const MAX_BINS: usize = 160;

struct Canvas {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Canvas { x: widen(x), y: widen(y), body: String::new() }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn finish(self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
        s.push_str(&self.body);
        let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
        let label = |v: f64| format!("{v:.4}");
        let _ = writeln!(s, r#"<text x="{l}" y="{}" text-anchor="start">{}</text>"#, b + 16.0, label(self.x.0));
        let _ = writeln!(s, r#"<text x="{r}" y="{}" text-anchor="end">{}</text>"#, b + 16.0, label(self.x.1));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, b, label(self.y.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, t + 10.0, label(self.y.1));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 16.0);
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
            H / 2.0,
            H / 2.0
        );
        s.push_str("</svg>\n");
        s
    }
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn column(t: &Table, name: &str) -> Result<Vec<f64>> {
    t.column(name)
        .ok_or_else(|| Error::Precondition(format!("CSV has no column {name:?}")))
}

fn ecdf_svg(xs: &[f64], fs: &[f64]) -> String {
    let mut c = Canvas::new(range(xs.iter().copied()), (0.0, 1.0));
    let mut pts = Vec::with_capacity(2 * xs.len());
    let mut prev = 0.0;
    for (&x, &f) in xs.iter().zip(fs) {
        pts.push((x, prev));
        pts.push((x, f));
        prev = f;
    }
    c.polyline(&thin(&pts, 4000), "steelblue");
    c.finish("empirical CDF", "x", "F(x)")
}

/// At most about `max` points, keeping the ends.
fn thin(pts: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if pts.len() <= max {
        return pts.to_vec();
    }
    let step = pts.len().div_ceil(max);
    let mut out: Vec<(f64, f64)> = pts.iter().step_by(step).copied().collect();
    out.push(*pts.last().unwrap());
    out
}

fn survival_svg(t: &[f64], surv: &[f64], n: &[f64]) -> String {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(surv.iter().zip(n))
        .filter(|(_, (s, _))| **s > 0.0)
        .map(|(&t, (&s, &n))| (t, (s / n).log10()))
        .collect();
    let mut c = Canvas::new(range(pts.iter().map(|p| p.0)), range(pts.iter().map(|p| p.1)));
    c.polyline(&pts, "firebrick");
    c.finish("survival", "t", "log10 P(tau > t)")
}

fn heat_svg(xs: &[f64], ys: &[f64], vs: &[f64]) -> String {
    let (xr, yr, vr) = (range(xs.iter().copied()), range(ys.iter().copied()), range(vs.iter().copied()));
    let mut c = Canvas::new(xr, yr);
    let span = (xr.1 - xr.0).max(yr.1 - yr.0).max(f64::MIN_POSITIVE);
    let cell = span / MAX_BINS as f64;
    let nx = ((xr.1 - xr.0) / cell).floor() as usize + 1;
    let ny = ((yr.1 - yr.0) / cell).floor() as usize + 1;
    let mut sum = vec![0.0; nx * ny];
    let mut cnt = vec![0u32; nx * ny];
    for ((&x, &y), &v) in xs.iter().zip(ys).zip(vs) {
        let i = (((x - xr.0) / cell) as usize).min(nx - 1);
        let j = (((y - yr.0) / cell) as usize).min(ny - 1);
        sum[j * nx + i] += v;
        cnt[j * nx + i] += 1;
    }
    let vspan = if vr.1 > vr.0 { vr.1 - vr.0 } else { 1.0 };
    let (wpx, hpx) = (c.px(xr.0 + cell) - c.px(xr.0), c.py(yr.0) - c.py(yr.0 + cell));
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if cnt[k] == 0 {
                continue;
            }
            let u = ((sum[k] / cnt[k] as f64 - vr.0) / vspan).clamp(0.0, 1.0);
            let (r, g, b) = (255.0 * u, 64.0 + 96.0 * (1.0 - (2.0 * u - 1.0).abs()), 255.0 * (1.0 - u));
            let (x0, y0) = (c.px(xr.0 + i as f64 * cell), c.py(yr.0 + (j + 1) as f64 * cell));
            let _ = writeln!(
                c.body,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="rgb({},{},{})"/>"#,
                wpx + 0.3,
                hpx + 0.3,
                r as u8,
                g as u8,
                b as u8
            );
        }
    }
    let title = format!("field, range [{}, {}]", fmt_f64(vr.0), fmt_f64(vr.1));
    c.finish(&title, "x", "y")
}

/// Picks the rendering from the CSV header: `x,ecdf`, `t,survivors,n_total`,
/// `x,y,value`, or exit samples `re,...` (ECDF of the real part).
pub fn render_svg(table: &Table, _domain: &DomainSpec) -> Result<String> {
    let has = |c: &str| table.header.iter().any(|h| h == c);
    if has("ecdf") {
        Ok(ecdf_svg(&column(table, "x")?, &column(table, "ecdf")?))
    } else if has("survivors") {
        Ok(survival_svg(&column(table, "t")?, &column(table, "survivors")?, &column(table, "n_total")?))
    } else if has("value") {
        Ok(heat_svg(&column(table, "x")?, &column(table, "y")?, &column(table, "value")?))
    } else if has("re") {
        let mut re = column(table, "re")?;
        re.sort_by(f64::total_cmp);
        let n = re.len() as f64;
        let f: Vec<f64> = (1..=re.len()).map(|i| i as f64 / n).collect();
        Ok(ecdf_svg(&re, &f))
    } else {
        Err(Error::Precondition(format!("no renderer for columns {:?}", table.header)))
    }
}

/// Boundary curves of a domain inside a viewing window.
fn boundary_curves(spec: &DomainSpec) -> (Vec<Vec<(f64, f64)>>, (f64, f64), (f64, f64)) {
    let line = |a: (f64, f64), b: (f64, f64)| vec![a, b];
    match spec {
        DomainSpec::HalfPlane => (vec![line((-3.0, 0.0), (3.0, 0.0))], (-3.0, 3.0), (-0.5, 3.0)),
        DomainSpec::StripRe { a, b } => {
            let h = 2.0 * (b - a);
            (vec![line((*a, -h), (*a, h)), line((*b, -h), (*b, h))], (a - 0.5, b + 0.5), (-h, h))
        }
        DomainSpec::StripIm { c, d } => {
            let w = 2.0 * (d - c);
            (vec![line((-w, *c), (w, *c)), line((-w, *d), (w, *d))], (-w, w), (c - 0.5, d + 0.5))
        }
        DomainSpec::Rectangle { x0, x1, y0, y1 } => (
            vec![vec![(*x0, *y0), (*x1, *y0), (*x1, *y1), (*x0, *y1), (*x0, *y0)]],
            (*x0, *x1),
            (*y0, *y1),
        ),
        DomainSpec::Disk { center, r } => {
            let pts = (0..=256)
                .map(|k| {
                    let a = TAU * k as f64 / 256.0;
                    (center.x + r * a.cos(), center.y + r * a.sin())
                })
                .collect();
            (vec![pts], (center.x - r, center.x + r), (center.y - r, center.y + r))
        }
        DomainSpec::GrimReaperU { scale } | DomainSpec::TruncatedU { scale, .. } => {
            let top = match spec {
                DomainSpec::TruncatedU { height, .. } => *height,
                _ => 4.0 * scale,
            };
            let mut curve: Vec<(f64, f64)> = (1..2000)
                .map(|k| {
                    let x = scale * (-1.0 + 2.0 * k as f64 / 2000.0);
                    (x, grim_reaper_height(x, *scale).unwrap_or(f64::INFINITY).min(top))
                })
                .collect();
            curve.insert(0, (-scale, top));
            curve.push((*scale, top));
            let mut curves = vec![curve];
            if matches!(spec, DomainSpec::TruncatedU { .. }) {
                curves.push(line((-scale, top), (*scale, top)));
            }
            let bottom = grim_reaper_height(0.0, *scale).unwrap_or(0.0);
            (curves, (-1.2 * scale, 1.2 * scale), (bottom - 0.2 * scale, top))
        }
        DomainSpec::Parabola => {
            let pts = (0..=400)
                .map(|k| {
                    let x = -3.0 + 6.0 * k as f64 / 400.0;
                    (x, 0.5 * x * x - 0.5)
                })
                .collect();
            (vec![pts], (-3.0, 3.0), (-1.0, 4.0))
        }
        DomainSpec::Polygon { vertices } => {
            let mut pts: Vec<(f64, f64)> = vertices.iter().map(|p: &Point| (p.x, p.y)).collect();
            pts.push(pts[0]);
            let xr = range(pts.iter().map(|p| p.0));
            let yr = range(pts.iter().map(|p| p.1));
            (vec![pts], xr, yr)
        }
    }
}

pub fn domain_svg(spec: &DomainSpec) -> Result<String> {
    spec.validate()?;
    let (curves, xr, yr) = boundary_curves(spec);
    // equal aspect: widen the shorter side
    let (cx, cy) = (0.5 * (xr.0 + xr.1), 0.5 * (yr.0 + yr.1));
    let aspect = (W - 2.0 * MARGIN) / (H - 2.0 * MARGIN);
    let (mut hw, mut hh) = (0.5 * (xr.1 - xr.0), 0.5 * (yr.1 - yr.0));
    if hw < hh * aspect {
        hw = hh * aspect;
    } else {
        hh = hw / aspect;
    }
    let mut c = Canvas::new((cx - hw, cx + hw), (cy - hh, cy + hh));
    for curve in &curves {
        c.polyline(curve, "black");
    }
    let (ox, oy) = (c.px(0.0), c.py(0.0));
    let _ = writeln!(c.body, r#"<circle cx="{ox:.2}" cy="{oy:.2}" r="3" fill="firebrick"/>"#);
    Ok(c.finish(&format!("domain {}", spec.kind()), "Re z", "Im z"))
}
