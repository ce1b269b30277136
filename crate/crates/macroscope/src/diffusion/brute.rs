//! Direct evaluation of U = (rho/m_e)^2 (1/2 hbar^2) int d^3q g(q) q_x^2 |u~(q)|^2
//! by nested adaptive quadrature over the raw Fourier transform of the mode.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{HBAR, M_E};
use crate::devices::ModeGeometry;
use crate::error::Result;
use crate::quadrature::{uniform_points, with_breaks, Quad};

/// Fourier transform of cos(k t) on [0, 1] at frequency z.
fn axial_transform(z: f64, ell: u32) -> Complex64 {
    let k = PI * ell as f64;
    let s = if ell % 2 == 0 { 1.0 } else { -1.0 };
    if (z - k).abs() < 1e-6 {
        return Complex64::new(0.5, 0.0);
    }
    let phase = Complex64::new(0.0, -z).exp();
    Complex64::new(0.0, -z) * (phase * s - 1.0) / (k * k - z * z)
}

/// |FT of the indicator of [0, a]|^2 at q = sigma_q*u.
fn wall_transform_sq(u: f64, s: f64, a: f64) -> f64 {
    let x = u * s;
    if x.abs() < 1e-8 {
        return a * a;
    }
    let ft = (Complex64::new(0.0, -x).exp() - 1.0) / Complex64::new(0.0, -x / a);
    ft.norm_sqr()
}

fn std_normal(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Transverse integral at a fixed q_x.
fn transverse(geometry: &ModeGeometry, sigma_q: f64, quad: &Quad) -> Result<f64> {
    match *geometry {
        ModeGeometry::GaussianBeam { w0, .. } => {
            let sw = w0 * sigma_q / HBAR;
            let f = |u: f64| {
                let ft = PI * w0 * w0 * (-0.25 * (u * sw).powi(2)).exp();
                u * (-0.5 * u * u).exp() * ft * ft
            };
            Ok(quad.integrate(f, &uniform_points(0.0, 9.5, 0.5))?.value)
        }
        ModeGeometry::Cylinder { radius, .. } => {
            let sr = radius * sigma_q / HBAR;
            let f = |u: f64| {
                let x = u * sr;
                let airy = if x < 1e-8 { 1.0 } else { 2.0 * libm::j1(x) / x };
                let ft = PI * radius * radius * airy;
                u * (-0.5 * u * u).exp() * ft * ft
            };
            let width = (PI / sr).min(0.5);
            Ok(quad.integrate(f, &uniform_points(0.0, 9.5, width))?.value)
        }
        ModeGeometry::Cuboid { a, b, .. } => {
            let (sa, sb) = (a * sigma_q / HBAR, b * sigma_q / HBAR);
            let inner = |uy: f64| -> f64 {
                let fz = |uz: f64| 2.0 * std_normal(uz) * wall_transform_sq(uz, sb, b);
                let pts = uniform_points(0.0, 9.5, (2.0 * PI / sb).min(0.5));
                match quad.integrate(fz, &pts) {
                    Ok(e) => 2.0 * std_normal(uy) * wall_transform_sq(uy, sa, a) * e.value,
                    Err(_) => f64::NAN,
                }
            };
            let pts = uniform_points(0.0, 9.5, (2.0 * PI / sa).min(0.5));
            Ok(quad.integrate(inner, &pts)?.value)
        }
    }
}

/// Brute-force U; cost grows with sigma_q times the device dimensions.
pub fn geometric_factor_brute(geometry: &ModeGeometry, density: f64, sigma_q: f64) -> Result<f64> {
    let inner_quad = Quad::rel(1e-10);
    let outer_quad = Quad { epsrel: 1e-9, max_subdivisions: 4000, ..Quad::default() };
    let len = geometry.axial_length();
    let ell = geometry.ell();
    let xi = len * sigma_q / HBAR;
    let k = PI * ell as f64;
    let f = |z: f64| -> f64 {
        let t = match transverse(geometry, sigma_q, &inner_quad) {
            Ok(t) => t,
            Err(_) => return f64::NAN,
        };
        let gauss = (-0.5 * (z / xi).powi(2)).exp() / ((2.0 * PI).sqrt() * xi);
        let phi = axial_transform(z, ell);
        0.5 * gauss * z * z * phi.norm_sqr() * t
    };
    let points = with_breaks(uniform_points(0.0, 9.5 * xi, (2.0 * PI).min(xi)), &[k]);
    let half = outer_quad.integrate(f, &points)?.value;
    Ok((density / M_E).powi(2) * 2.0 * half)
}
