//! Transverse factor A(sigma_q) = int d^2q g(q) |FT of the transverse profile|^2.

use std::f64::consts::PI;

use crate::constants::HBAR;
use crate::devices::ModeGeometry;
use crate::error::Result;
use crate::quadrature::{uniform_points, Quad};
use crate::special::{bessel_i0e, bessel_i1e};

/// Closed forms for all three geometries.
pub fn lateral_closed(geometry: &ModeGeometry, sigma_q: f64) -> f64 {
    match *geometry {
        ModeGeometry::GaussianBeam { w0, .. } => {
            let sw = w0 * sigma_q / HBAR;
            PI * PI * w0.powi(4) / (1.0 + sw * sw)
        }
        ModeGeometry::Cuboid { a, b, .. } => box_factor(a, sigma_q) * box_factor(b, sigma_q),
        ModeGeometry::Cylinder { radius, .. } => {
            let ell = HBAR / sigma_q;
            let x = (radius / ell).powi(2);
            2.0 * PI * PI * ell * ell * radius * radius * disc_bracket(x)
        }
    }
}

/// int_{-a}^{a} (a - |y|) e^{-y^2 sigma^2/(2 hbar^2)} dy, the sinc^2 factor of a hard wall.
pub fn box_factor(a: f64, sigma_q: f64) -> f64 {
    let s = a * sigma_q / HBAR;
    if s < 1e-3 {
        return a * a * (1.0 - s * s / 12.0);
    }
    let r = s / std::f64::consts::SQRT_2;
    2.0 * a * a / (s * s)
        * ((PI / 2.0).sqrt() * s * libm::erf(r) + (-0.5 * s * s).exp() - 1.0)
}

/// 1 - e^{-x}(I0(x) + I1(x)), the bracketed disc factor.
pub fn disc_bracket(x: f64) -> f64 {
    if x < 1e-4 {
        x / 2.0 - x * x / 4.0 + 5.0 * x * x * x / 48.0
    } else {
        1.0 - (bessel_i0e(x) + bessel_i1e(x))
    }
}

/// Same factor from real-space autocorrelations, integrated numerically.
pub fn lateral_quadrature(geometry: &ModeGeometry, sigma_q: f64, quad: &Quad) -> Result<f64> {
    let ell = HBAR / sigma_q;
    match *geometry {
        ModeGeometry::GaussianBeam { w0, .. } => {
            // autocorrelation of e^{-y^2/w0^2} is sqrt(pi/2) w0 e^{-d^2/(2 w0^2)}
            let width = 1.0 / (1.0 / (w0 * w0) + 1.0 / (ell * ell)).sqrt();
            let f = |d: f64| {
                (PI / 2.0).sqrt()
                    * w0
                    * (-0.5 * d * d / (w0 * w0)).exp()
                    * (-0.5 * d * d / (ell * ell)).exp()
            };
            let one = 2.0 * quad.integrate(f, &uniform_points(0.0, 14.0 * width, width))?.value;
            Ok(one * one)
        }
        ModeGeometry::Cuboid { a, b, .. } => {
            Ok(box_quadrature(a, ell, quad)? * box_quadrature(b, ell, quad)?)
        }
        ModeGeometry::Cylinder { radius, .. } => {
            let r = radius;
            let overlap = |rho: f64| {
                let u = (rho / (2.0 * r)).min(1.0);
                2.0 * r * r * u.acos() - 0.5 * rho * (4.0 * r * r - rho * rho).max(0.0).sqrt()
            };
            let f = |rho: f64| 2.0 * PI * rho * (-0.5 * rho * rho / (ell * ell)).exp() * overlap(rho);
            let top = (2.0 * r).min(14.0 * ell);
            let est = quad.integrate(f, &uniform_points(0.0, top, ell.min(r)))?;
            Ok(est.value)
        }
    }
}

fn box_quadrature(a: f64, ell: f64, quad: &Quad) -> Result<f64> {
    let f = |y: f64| 2.0 * (a - y) * (-0.5 * y * y / (ell * ell)).exp();
    let top = a.min(14.0 * ell);
    Ok(quad.integrate(f, &uniform_points(0.0, top, ell.min(a)))?.value)
}
