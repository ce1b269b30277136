//! Longitudinal factor J_l(xi) = int dz N(z; xi) (1 - (-1)^l cos z)/(1 - k^2/z^2)^2, k = pi*l.

use std::f64::consts::PI;

use super::f_ell::{f_ell, XI_MAX, XI_MIN};
use crate::error::{Error, Result};

/// One panel per oscillation; beyond this many the integral is out of reach.
const MAX_PANELS: f64 = 2.0e6;
use crate::quadrature::{uniform_points, with_breaks, Quad};
use crate::special::sinc;

/// Integrand on z >= 0, rewritten so the double pole at z = k cancels analytically.
pub fn longitudinal_integrand(z: f64, xi: f64, ell: u32) -> f64 {
    let k = PI * ell as f64;
    let gauss = (-0.5 * (z / xi).powi(2)).exp() / ((2.0 * PI).sqrt() * xi);
    let sc = sinc(0.5 * (z - k));
    let z2 = z * z;
    gauss * z2 * z2 * sc * sc / (2.0 * (z + k).powi(2))
}

/// J by adaptive quadrature over [0, 9.5 xi], one panel per oscillation.
pub fn longitudinal_quadrature(xi: f64, ell: u32, quad: &Quad) -> Result<f64> {
    let k = PI * ell as f64;
    let top = 9.5 * xi;
    if top / (2.0 * PI) > MAX_PANELS {
        return Err(Error::Range { what: "sigma_L", value: xi, min: 0.0, max: MAX_PANELS * 2.0 * PI / 9.5 });
    }
    let points = with_breaks(uniform_points(0.0, top, (2.0 * PI).min(xi)), &[k]);
    let est = quad.integrate(|z| longitudinal_integrand(z, xi, ell), &points)?;
    Ok(2.0 * est.value)
}

/// J = xi^2 f_l(xi)/2 from the closed form.
pub fn longitudinal_analytic(xi: f64, ell: u32) -> Result<f64> {
    Ok(0.5 * xi * xi * f_ell(xi, ell)?)
}

pub fn analytic_in_range(xi: f64) -> bool {
    (XI_MIN..=XI_MAX).contains(&xi)
}
