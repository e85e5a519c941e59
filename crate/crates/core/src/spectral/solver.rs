use serde::{Deserialize, Serialize};

use super::mask::GridMask;
use crate::error::{Error, Result};
use crate::geometry::Point;

const NONE: u32 = u32::MAX;

/// CG relative residual for the inner solves of inverse iteration.
pub const INNER_TOL: f64 = 1e-8;
/// CG relative residual for the torsion system.
pub const TORSION_TOL: f64 = 1e-10;
/// Outer stop: relative change of the Rayleigh quotient.
const OUTER_TOL: f64 = 1e-11;
const MAX_OUTER: usize = 20_000;
/// Levels with fewer unknowns are not coarsened further.
const COARSEST_UNKNOWNS: usize = 3_000;

/// Five-point `-Delta` on the inside nodes of a mask, zero outside.
pub(crate) struct Laplacian {
    nbr: Vec<[u32; 4]>,
    /// `(i, j)` of each unknown.
    nodes: Vec<(u32, u32)>,
    /// unknown index per grid node, `NONE` outside.
    slot: Vec<u32>,
    inv_dx2: f64,
}

impl Laplacian {
    pub(crate) fn new(mask: &GridMask) -> Self {
        let mut slot = vec![NONE; mask.inside.len()];
        let mut nodes = Vec::new();
        for j in 0..mask.ny {
            for i in 0..mask.nx {
                let k = mask.index(i, j);
                if mask.inside[k] {
                    slot[k] = nodes.len() as u32;
                    nodes.push((i as u32, j as u32));
                }
            }
        }
        let at = |i: isize, j: isize| -> u32 {
            if i < 0 || j < 0 || i >= mask.nx as isize || j >= mask.ny as isize {
                NONE
            } else {
                slot[mask.index(i as usize, j as usize)]
            }
        };
        let nbr = nodes
            .iter()
            .map(|&(i, j)| {
                let (i, j) = (i as isize, j as isize);
                [at(i - 1, j), at(i + 1, j), at(i, j - 1), at(i, j + 1)]
            })
            .collect();
        Laplacian {
            nbr,
            nodes,
            slot,
            inv_dx2: 1.0 / (mask.dx * mask.dx),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yk, nb), &xk) in y.iter_mut().zip(&self.nbr).zip(x) {
            let mut s = 4.0 * xk;
            for &n in nb {
                if n != NONE {
                    s -= x[n as usize];
                }
            }
            *yk = s * self.inv_dx2;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct CgReport {
    iterations: usize,
    residual: f64,
}

/// Conjugate gradient for `A x = b` from the initial guess in `x`, to
/// `||b - A x|| <= tol ||b||`.
fn conjugate_gradient(op: &Laplacian, b: &[f64], x: &mut [f64], tol: f64) -> Result<CgReport> {
    let n = b.len();
    let max_iter = 20 * n + 1000;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(CgReport { iterations: 0, residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = (tol * bnorm).powi(2);
    let mut it = 0;
    while rr > target {
        if it >= max_iter {
            return Err(Error::ConvergenceFailure {
                solver: "conjugate gradient",
                iterations: it,
                residual: rr.sqrt() / bnorm,
            });
        }
        op.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
        it += 1;
    }
    Ok(CgReport {
        iterations: it,
        residual: rr.sqrt() / bnorm,
    })
}

/// Principal Dirichlet eigenvalue of a grid mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    /// Eigenvalue of `-Delta / 2`, the exit-time decay rate.
    pub rate: f64,
    /// Eigenvalue of `-Delta`, always `2 * rate`.
    pub raw_eigenvalue: f64,
    /// Outer inverse-iteration steps on the finest grid.
    pub iterations: usize,
    /// `||A v - theta v|| / (theta ||v||)` for the returned vector.
    pub residual: f64,
}

impl EigResult {
    fn from_raw(raw: f64, iterations: usize, residual: f64) -> Self {
        EigResult {
            rate: 0.5 * raw,
            raw_eigenvalue: raw,
            iterations,
            residual,
        }
    }
}

/// Principal eigenpair; the vector is indexed like the mask's inside nodes in
/// row-major order, normalized to unit sup norm and positive.
pub struct PrincipalMode {
    pub result: EigResult,
    pub vector: Vec<f64>,
}

/// Smallest eigenvalue of the five-point `-Delta` with Dirichlet conditions,
/// halved.
pub fn principal_rate(mask: &GridMask) -> Result<EigResult> {
    principal_mode(mask).map(|m| m.result)
}

/// Inverse power iteration with CG inner solves, started from the
/// interpolated solution on a hierarchy of coarser grids.
pub fn principal_mode(mask: &GridMask) -> Result<PrincipalMode> {
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let mut levels = vec![mask.clone()];
    loop {
        let last = levels.last().unwrap();
        if last.count() <= COARSEST_UNKNOWNS || last.nx < 9 || last.ny < 9 {
            break;
        }
        let coarse = last.coarsen();
        if coarse.count() < 16 {
            break;
        }
        levels.push(coarse);
    }
    let mut guess: Option<Vec<f64>> = None;
    let mut result = None;
    for (depth, level) in levels.iter().enumerate().rev() {
        let op = Laplacian::new(level);
        let start = match guess.take() {
            Some(g) => g,
            None => vec![1.0; op.len()],
        };
        let (res, vec) = inverse_iteration(&op, start)?;
        if depth > 0 {
            let finer = &levels[depth - 1];
            guess = Some(prolong(level, &op, &vec, finer));
        }
        result = Some((res, vec));
    }
    let (result, mut vector) = result.expect("at least one level");
    let peak = vector.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let sign = if vector.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for v in &mut vector {
        *v *= sign / peak;
    }
    Ok(PrincipalMode { result, vector })
}

/// Inverse iteration accelerated by Rayleigh-Ritz on the span of the new
/// iterate, the current vector and the previous one.
fn inverse_iteration(op: &Laplacian, start: Vec<f64>) -> Result<(EigResult, Vec<f64>)> {
    let n = op.len();
    let mut v = start;
    if norm(&v) == 0.0 {
        v.fill(1.0);
    }
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut av = vec![0.0; n];
    op.apply(&v, &mut av);
    let mut theta = dot(&v, &av);
    let mut prev: Option<Vec<f64>> = None;
    let mut w = vec![0.0; n];
    for it in 1..=MAX_OUTER {
        for k in 0..n {
            w[k] = v[k] / theta;
        }
        conjugate_gradient(op, &v, &mut w, INNER_TOL)?;
        let mut basis = Vec::with_capacity(3);
        for cand in [Some(&w), Some(&v), prev.as_ref()].into_iter().flatten() {
            if let Some(q) = orthonormal_against(cand, &basis) {
                basis.push(q);
            }
        }
        let images: Vec<Vec<f64>> = basis
            .iter()
            .map(|q| {
                let mut aq = vec![0.0; n];
                op.apply(q, &mut aq);
                aq
            })
            .collect();
        let m = basis.len();
        let mut h = [[0.0; 3]; 3];
        for a in 0..m {
            for b in a..m {
                let x = 0.5 * (dot(&basis[a], &images[b]) + dot(&basis[b], &images[a]));
                h[a][b] = x;
                h[b][a] = x;
            }
        }
        let y = smallest_eigvec(&h, m);
        let mut next_v = vec![0.0; n];
        for (c, q) in y.iter().zip(&basis) {
            for k in 0..n {
                next_v[k] += c * q[k];
            }
        }
        let s = norm(&next_v);
        next_v.iter_mut().for_each(|x| *x /= s);
        av.fill(0.0);
        for (c, aq) in y.iter().zip(&images) {
            for k in 0..n {
                av[k] += c * aq[k] / s;
            }
        }
        let next = dot(&next_v, &av);
        let change = (next - theta).abs() / next;
        theta = next;
        prev = Some(std::mem::replace(&mut v, next_v));
        if change < OUTER_TOL && it >= 3 {
            op.apply(&v, &mut av);
            let resid = av
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - theta * x).powi(2))
                .sum::<f64>()
                .sqrt()
                / theta;
            return Ok((EigResult::from_raw(theta, it, resid), v));
        }
    }
    Err(Error::ConvergenceFailure {
        solver: "inverse iteration",
        iterations: MAX_OUTER,
        residual: f64::NAN,
    })
}

/// `x` with its components along `basis` removed (twice, for stability),
/// normalized; `None` when little is left.
fn orthonormal_against(x: &[f64], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let scale = norm(x);
    if scale == 0.0 {
        return None;
    }
    let mut y: Vec<f64> = x.iter().map(|v| v / scale).collect();
    for _ in 0..2 {
        for q in basis {
            let c = dot(&y, q);
            for (yk, qk) in y.iter_mut().zip(q) {
                *yk -= c * qk;
            }
        }
    }
    let s = norm(&y);
    if s < 1e-6 {
        return None;
    }
    y.iter_mut().for_each(|v| *v /= s);
    Some(y)
}

/// Eigenvector of the smallest eigenvalue of the leading `m x m` block of a
/// symmetric matrix, by cyclic Jacobi rotations.
fn smallest_eigvec(h: &[[f64; 3]; 3], m: usize) -> Vec<f64> {
    let mut a = *h;
    let mut vecs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..50 {
        let mut off = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 * (0..m).map(|k| a[k][k] * a[k][k]).sum::<f64>() {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q] == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in vecs.iter_mut().take(m) {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let best = (0..m)
        .min_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap())
        .unwrap();
    (0..m).map(|k| vecs[k][best]).collect()
}

/// Bilinear interpolation of a coarse-level vector onto the next finer mask.
fn prolong(coarse: &GridMask, cop: &Laplacian, cvec: &[f64], fine: &GridMask) -> Vec<f64> {
    let value = |i: usize, j: usize| -> f64 {
        if i >= coarse.nx || j >= coarse.ny {
            return 0.0;
        }
        match cop.slot[coarse.index(i, j)] {
            NONE => 0.0,
            s => cvec[s as usize],
        }
    };
    let fop = Laplacian::new(fine);
    fop.nodes
        .iter()
        .map(|&(i, j)| {
            let (i, j) = (i as usize, j as usize);
            let (ci, cj) = (i / 2, j / 2);
            match (i % 2, j % 2) {
                (0, 0) => value(ci, cj),
                (1, 0) => 0.5 * (value(ci, cj) + value(ci + 1, cj)),
                (0, 1) => 0.5 * (value(ci, cj) + value(ci, cj + 1)),
                _ => {
                    0.25 * (value(ci, cj)
                        + value(ci + 1, cj)
                        + value(ci, cj + 1)
                        + value(ci + 1, cj + 1))
                }
            }
        })
        .collect()
}

/// Discrete torsion function, `-Delta u / 2 = 1` with `u = 0` off the mask.
#[derive(Debug, Clone)]
pub struct TorsionField {
    pub mask: GridMask,
    /// Value per inside node, row-major.
    pub values: Vec<f64>,
    pub sup_norm: f64,
    /// Value at the node nearest the origin (0 when that node is outside).
    pub value_at_origin: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl TorsionField {
    /// `(x, y, u)` for every inside node.
    pub fn points(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        inside_nodes(&self.mask).zip(self.values.iter().copied())
    }

    /// Grid node where the maximum is attained.
    pub fn argmax(&self) -> Point {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
        inside_nodes(&self.mask).nth(k).expect("non-empty mask")
    }
}

/// Coordinates of inside nodes in row-major order.
pub fn inside_nodes(mask: &GridMask) -> impl Iterator<Item = Point> + '_ {
    (0..mask.ny).flat_map(move |j| {
        (0..mask.nx).filter(move |&i| mask.is_inside(i, j)).map(move |i| mask.node(i, j))
    })
}

pub fn torsion(mask: &GridMask) -> Result<TorsionField> {
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let op = Laplacian::new(mask);
    let rhs = vec![2.0; op.len()];
    let mut u = vec![0.0; op.len()];
    let report = conjugate_gradient(&op, &rhs, &mut u, TORSION_TOL)?;
    let sup_norm = u.iter().fold(0.0_f64, |m, &v| m.max(v));
    let value_at_origin = mask
        .nearest_node(Point::ORIGIN)
        .map(|(i, j)| op.slot[mask.index(i, j)])
        .filter(|&s| s != NONE)
        .map_or(0.0, |s| u[s as usize]);
    Ok(TorsionField {
        mask: mask.clone(),
        values: u,
        sup_norm,
        value_at_origin,
        iterations: report.iterations,
        residual: report.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::spectral::mask::{rasterize, BoundingBox};
    use std::f64::consts::PI;

    fn square_mask(n: usize) -> GridMask {
        // n x n interior nodes of the unit square
        let dx = 1.0 / (n + 1) as f64;
        let spec = DomainSpec::Rectangle { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        rasterize(&spec, dx, BoundingBox::new(0.0, 1.0, 0.0, 1.0)).unwrap()
    }

    #[test]
    fn square_matches_discrete_eigenvalue() {
        for n in [7, 40, 130] {
            let m = square_mask(n);
            assert_eq!(m.count(), n * n);
            let dx = m.dx;
            // exact eigenvalue of the five-point operator on an n x n grid
            let lam1 = 4.0 / (dx * dx) * (PI * dx / 2.0).sin().powi(2);
            let r = principal_rate(&m).unwrap();
            assert!((r.raw_eigenvalue - 2.0 * lam1).abs() < 1e-8 * lam1, "n={n}: {r:?}");
            assert_eq!(r.raw_eigenvalue, 2.0 * r.rate);
            assert!(r.residual < 1e-4, "{r:?}");
        }
    }

    #[test]
    fn cg_solves_small_system() {
        let m = square_mask(5);
        let op = Laplacian::new(&m);
        let b: Vec<f64> = (0..op.len()).map(|k| (k as f64).sin()).collect();
        let mut x = vec![0.0; op.len()];
        let rep = conjugate_gradient(&op, &b, &mut x, 1e-12).unwrap();
        let mut ax = vec![0.0; op.len()];
        op.apply(&x, &mut ax);
        let err = ax.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9 && rep.residual <= 1e-12);
    }

    #[test]
    fn torsion_is_nonnegative_with_interior_max() {
        let spec = DomainSpec::Disk { center: Point::ORIGIN, r: 1.0 };
        let m = rasterize(&spec, 0.02, BoundingBox::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        let t = torsion(&m).unwrap();
        assert!(t.values.iter().all(|&v| v >= 0.0));
        assert!(t.argmax().norm() < 0.05);
        assert!((t.value_at_origin - 0.5).abs() < 0.02);
        assert!(t.residual <= TORSION_TOL);
    }

    #[test]
    fn eigenvector_is_positive() {
        let spec = DomainSpec::Disk { center: Point::ORIGIN, r: 1.0 };
        let m = rasterize(&spec, 0.01, BoundingBox::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        let mode = principal_mode(&m).unwrap();
        assert!(mode.vector.iter().all(|&v| v > 0.0));
        let peak = mode.vector.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_smallest_pair() {
        let h = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let y = smallest_eigvec(&h, 3);
        // smallest eigenvalue 2 - sqrt 2, vector (1, -sqrt 2, 1) / 2
        let r = std::f64::consts::SQRT_2;
        let sign = y[0].signum();
        for (a, b) in y.iter().zip([0.5, -0.5 * r, 0.5]) {
            assert!((sign * a - b).abs() < 1e-12, "{y:?}");
        }
        let y = smallest_eigvec(&h, 1);
        assert_eq!(y, vec![1.0]);
    }
}
