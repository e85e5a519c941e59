//! The conformal map `f(z) = 2i exp(-i pi z / 2) - i` from the unit Grim
//! Reaper domain onto the upper half-plane, and the exit law it transports.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sampler::RandomStream;

pub type ComplexValue = Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `f(z) = 2i exp(-i pi z / 2) - i`. Entire; maps the unit domain onto the
/// upper half-plane and its boundary curve onto the real line.
pub fn map_u_to_h(z: ComplexValue) -> ComplexValue {
    2.0 * I * (-I * FRAC_PI_2 * z).exp() - I
}

/// `f'(z) = pi exp(-i pi z / 2)`.
pub fn map_u_to_h_derivative(z: ComplexValue) -> ComplexValue {
    PI * (-I * FRAC_PI_2 * z).exp()
}

/// Image of the point `x + i (h(x) + y)` on the translated boundary curve:
/// `e^{pi y / 2} tan(pi x / 2) + i (e^{pi y / 2} - 1)`.
pub fn foliation_image(x: f64, y: f64) -> Result<ComplexValue> {
    if !(x.abs() < 1.0) || !(y >= 0.0) {
        return Err(Error::Precondition(format!(
            "foliation needs |x| < 1 and y >= 0, got x={x}, y={y}"
        )));
    }
    let g = (FRAC_PI_2 * y).exp();
    Ok(Complex64::new(g * (FRAC_PI_2 * x).tan(), g - 1.0))
}

/// Inverse of [`map_u_to_h`] on the upper half-plane,
/// `z = (2i/pi) log((w + i) / (2i))` with the principal logarithm.
pub fn inverse_map_h_to_u(w: ComplexValue) -> Result<ComplexValue> {
    if !(w.im > 0.0) || !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Precondition(format!("inverse map needs Im w > 0, got {w}")));
    }
    Ok((2.0 / PI) * I * ((w + I) / (2.0 * I)).ln())
}

/// Boundary extension of the inverse for real `w`: the point
/// `x + i h(x)` with `tan(pi x / 2) = w`.
pub fn boundary_preimage(w: f64) -> ComplexValue {
    let x = (2.0 / PI) * w.atan();
    Complex64::new(x, crate::geometry::reaper_h(x))
}

/// CDF of `U[-1, 1]`, the law of `Re W` at the exit from the unit domain
/// started at 0.
pub fn exact_cdf_re_exit_u(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 * (x + 1.0)
    }
}

/// Pushes a half-plane exit abscissa (seen from the pole `i`) back to the
/// real part of the exit point on the Grim Reaper boundary.
pub fn cauchy_to_exit(c: f64) -> f64 {
    (2.0 / PI) * c.atan()
}

/// Standard Cauchy draw by inversion, `tan(pi (U - 1/2))`.
pub fn standard_cauchy(rng: &mut RandomStream) -> f64 {
    let u: f64 = rng.gen();
    (PI * (u - 0.5)).tan()
}

/// Exact draw of `Re W` at the exit from the unit domain, started at 0.
pub fn exact_exit_sampler_u(rng: &mut RandomStream) -> f64 {
    cauchy_to_exit(standard_cauchy(rng))
}
