use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{contains, dist_to_boundary, DomainSpec, Point};

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        BoundingBox { x0, x1, y0, y1 }
    }
}

/// Uniform node grid `origin + (i dx, j dx)`, `0 <= i < nx`, `0 <= j < ny`,
/// with a flag per node. Nodes outside carry the Dirichlet value 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMask {
    pub dx: f64,
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    pub inside: Vec<bool>,
}

impl GridMask {
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + i as f64 * self.dx,
            self.origin.y + j as f64 * self.dx,
        )
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.index(i, j)]
    }

    /// Grid node closest to `p`, if `p` lies within the grid's extent.
    pub fn nearest_node(&self, p: Point) -> Option<(usize, usize)> {
        let fi = ((p.x - self.origin.x) / self.dx).round();
        let fj = ((p.y - self.origin.y) / self.dx).round();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Keeps only the 4-connected component containing node `(i0, j0)`.
    pub fn component_of(&self, i0: usize, j0: usize) -> GridMask {
        let mut keep = vec![false; self.inside.len()];
        let start = self.index(i0, j0);
        if self.inside[start] {
            let mut queue = VecDeque::from([(i0, j0)]);
            keep[start] = true;
            while let Some((i, j)) = queue.pop_front() {
                let mut visit = |a: usize, b: usize| {
                    let k = self.index(a, b);
                    if self.inside[k] && !keep[k] {
                        keep[k] = true;
                        queue.push_back((a, b));
                    }
                };
                if i > 0 {
                    visit(i - 1, j);
                }
                if i + 1 < self.nx {
                    visit(i + 1, j);
                }
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < self.ny {
                    visit(i, j + 1);
                }
            }
        }
        GridMask {
            inside: keep,
            ..self.clone()
        }
    }

    pub fn is_connected(&self) -> bool {
        let Some(first) = self.inside.iter().position(|&b| b) else {
            return false;
        };
        let comp = self.component_of(first % self.nx, first / self.nx);
        comp.count() == self.count()
    }

    /// Every other node in each direction, spacing `2 dx`.
    pub(crate) fn coarsen(&self) -> GridMask {
        let nx = self.nx.div_ceil(2);
        let ny = self.ny.div_ceil(2);
        let mut inside = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                inside[j * nx + i] = self.is_inside(2 * i, 2 * j);
            }
        }
        GridMask {
            dx: 2.0 * self.dx,
            origin: self.origin,
            nx,
            ny,
            inside,
        }
    }

    /// `true` where `self` is inside and `other` is too (same grid).
    pub fn is_subset_of(&self, other: &GridMask) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.inside.iter().zip(&other.inside).all(|(&a, &b)| !a || b)
    }
}

/// Flags the grid nodes of `bbox` lying in the open domain.
///
/// Nodes within `1e-9 dx` of the boundary count as outside, so a boundary
/// that passes through grid nodes is not blurred by rounding. When the node
/// nearest the origin is inside, only its 4-connected component is kept.
pub fn rasterize(spec: &DomainSpec, dx: f64, bbox: BoundingBox) -> Result<GridMask> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::Precondition(format!("grid spacing must be positive, got {dx}")));
    }
    if !(bbox.x1 > bbox.x0 && bbox.y1 > bbox.y0) {
        return Err(Error::Precondition("degenerate bounding box".into()));
    }
    let nx = ((bbox.x1 - bbox.x0) / dx).round() as usize + 1;
    let ny = ((bbox.y1 - bbox.y0) / dx).round() as usize + 1;
    let origin = Point::new(bbox.x0, bbox.y0);
    let guard = 1e-9 * dx;
    let mut inside = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Point::new(origin.x + i as f64 * dx, origin.y + j as f64 * dx);
            inside.push(contains(spec, p) && dist_to_boundary(spec, p) > guard);
        }
    }
    let mask = GridMask {
        dx,
        origin,
        nx,
        ny,
        inside,
    };
    let mask = match mask.nearest_node(Point::ORIGIN) {
        Some((i, j)) if mask.is_inside(i, j) => mask.component_of(i, j),
        _ => mask,
    };
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(mask)
}

/// Default computational box for a domain: its bounding box when bounded,
/// otherwise a box of `tall` widths along the unbounded direction.
pub fn default_bbox(spec: &DomainSpec, tall: f64) -> Option<BoundingBox> {
    if let Some([x0, x1, y0, y1]) = spec.bounding_box() {
        return Some(BoundingBox::new(x0, x1, y0, y1));
    }
    match spec {
        DomainSpec::StripRe { a, b } => {
            let half = 0.5 * tall * (b - a);
            Some(BoundingBox::new(*a, *b, -half, half))
        }
        DomainSpec::StripIm { c, d } => {
            let half = 0.5 * tall * (d - c);
            Some(BoundingBox::new(-half, half, *c, *d))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn strip_width() {
        let s = DomainSpec::StripRe { a: -1.0, b: 1.0 };
        let m = rasterize(&s, 0.01, BoundingBox::new(-1.0, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!(m.nx, 201);
        for j in 0..m.ny {
            let row = (0..m.nx).filter(|&i| m.is_inside(i, j)).count();
            assert_eq!(row, 199);
        }
    }

    #[test]
    fn disk_area() {
        let d = DomainSpec::Disk { center: Point::ORIGIN, r: 1.0 };
        let dx = 0.005;
        let m = rasterize(&d, dx, BoundingBox::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        let area = m.count() as f64 * dx * dx;
        assert!((area - PI).abs() < 0.01 * PI, "{area}");
    }

    #[test]
    fn truncated_u_area_matches_quadrature() {
        let (height, dx) = (6.0, 0.01);
        let spec = crate::geometry::truncate_u(1.0, height).unwrap();
        let [x0, x1, y0, y1] = spec.bounding_box().unwrap();
        let m = rasterize(&spec, dx, BoundingBox::new(x0, x1, y0, y1)).unwrap();
        for j in 0..m.ny {
            for i in 0..m.nx {
                let p = m.node(i, j);
                let above = p.x.abs() < 1.0 && p.y > crate::geometry::reaper_h(p.x) && p.y < height;
                if m.is_inside(i, j) {
                    assert!(above);
                }
            }
        }
        // area of {h(x) < y < H} by midpoint quadrature
        let n = 200_000;
        let area: f64 = (0..n)
            .map(|k| {
                let x = -1.0 + (k as f64 + 0.5) * 2.0 / n as f64;
                (height - crate::geometry::reaper_h(x)).max(0.0) * 2.0 / n as f64
            })
            .sum();
        // perimeter: two sides up to H plus top and the curve
        let perimeter = 2.0 * 2.0 * (height + 1.0) + 2.0;
        let got = m.count() as f64 * dx * dx;
        assert!((got - area).abs() < 2.0 * dx * perimeter, "{got} vs {area}");
    }

    #[test]
    fn component_selection_and_errors() {
        let d = DomainSpec::Disk { center: Point::new(5.0, 5.0), r: 0.5 };
        assert!(matches!(
            rasterize(&d, 0.1, BoundingBox::new(-1.0, 1.0, -1.0, 1.0)),
            Err(Error::EmptyMask)
        ));
        assert!(rasterize(&d, 0.0, BoundingBox::new(-1.0, 1.0, -1.0, 1.0)).is_err());
        // two squares sharing no grid edge: only the one at the origin stays
        let poly = DomainSpec::Polygon {
            vertices: vec![
                Point::new(-1.0, -1.0),
                Point::new(3.0, -1.0),
                Point::new(3.0, 1.0),
                Point::new(2.0, 1.0),
                Point::new(2.0, -0.95),
                Point::new(1.0, -0.95),
                Point::new(1.0, 1.0),
                Point::new(-1.0, 1.0),
            ],
        };
        let m = rasterize(&poly, 0.1, BoundingBox::new(-1.0, 3.0, -1.0, 1.0)).unwrap();
        assert!(m.is_connected());
        assert!(m.node(0, 0).x < 0.0);
        assert!((0..m.nx).all(|i| !(m.is_inside(i, 15) && m.node(i, 15).x > 1.5)));
    }

    #[test]
    fn coarsen_keeps_even_nodes() {
        let d = DomainSpec::Disk { center: Point::ORIGIN, r: 1.0 };
        let m = rasterize(&d, 0.05, BoundingBox::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        let c = m.coarsen();
        assert_eq!(c.dx, 0.1);
        assert_eq!((c.nx, c.ny), (21, 21));
        assert_eq!(c.is_inside(10, 10), m.is_inside(20, 20));
    }
}
