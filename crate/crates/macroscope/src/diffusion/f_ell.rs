//! Closed form of the longitudinal function f_l(xi).
//!
//! f_l(xi) = int_0^1 (1 - xi^2 d^2) e^{-xi^2 d^2/2} [(1-d) cos(k d) - sin(k d)/k] dd, k = pi*l,
//! so that the longitudinal factor of U is xi^2 f_l(xi)/2.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::faddeeva;

pub const XI_MIN: f64 = 1e-3;
pub const XI_MAX: f64 = 1e6;

/// Above this k/xi the Faddeeva form cancels badly and the endpoint expansion takes over.
const SWITCH: f64 = 12.0;

/// f_l(xi) for xi in [1e-3, 1e6].
pub fn f_ell(xi: f64, ell: u32) -> Result<f64> {
    if !(XI_MIN..=XI_MAX).contains(&xi) {
        return Err(Error::Range { what: "xi", value: xi, min: XI_MIN, max: XI_MAX });
    }
    if ell == 0 {
        return Err(crate::error::invalid("ell", "mode index must be at least 1"));
    }
    let k = PI * ell as f64;
    Ok(if k / xi >= SWITCH { f_endpoint(xi, ell) } else { f_faddeeva(xi, ell) })
}

fn parity(ell: u32) -> f64 {
    if ell % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Moments M_n = int_0^1 d^n e^{-a d^2 + i k d} dd expressed through w(z).
fn f_faddeeva(xi: f64, ell: u32) -> f64 {
    let k = PI * ell as f64;
    let s = parity(ell);
    let a = 0.5 * xi * xi;
    let x = k / (std::f64::consts::SQRT_2 * xi);
    let y = xi / std::f64::consts::SQRT_2;
    let e1 = s * (-a).exp();
    let pre = PI.sqrt() / (std::f64::consts::SQRT_2 * xi);
    let m0 = (faddeeva(Complex64::new(x, 0.0)) - e1 * faddeeva(Complex64::new(x, y))) * pre;
    let ik = Complex64::new(0.0, k);
    let m1 = (ik * m0 - e1 + 1.0) / (2.0 * a);
    let m2 = (m0 + ik * m1 - e1) / (2.0 * a);
    (Complex64::new(2.0, -k) * m1 + ik * m2).re
}

fn binom(n: usize, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Repeated integration by parts: only endpoint derivatives of
/// r(d) = (3d - 3d^2 - 2a d^3 + 2a d^4) e^{-a d^2} survive, in powers of 1/k^2.
fn f_endpoint(xi: f64, ell: u32) -> f64 {
    let k = PI * ell as f64;
    let s = parity(ell);
    let a = 0.5 * xi * xi;
    let p0 = [0.0, 3.0, -6.0, -12.0 * a, 48.0 * a];
    let p1 = [0.0, -3.0 + 2.0 * a, -6.0 + 12.0 * a, 36.0 * a, 48.0 * a];
    const TERMS: usize = 60;
    let n_max = 2 * TERMS + 2;
    // derivatives of e^{-a d^2} at d = 0 and d = 1, scaled by k^-m
    let mut e0 = vec![0.0; n_max + 1];
    let mut e1 = vec![0.0; n_max + 1];
    e0[0] = 1.0;
    e1[0] = if a < 745.0 { (-a).exp() } else { 0.0 };
    for m in 0..n_max {
        let prev0 = if m > 0 { m as f64 * e0[m - 1] / k } else { 0.0 };
        let prev1 = if m > 0 { m as f64 * e1[m - 1] / k } else { 0.0 };
        e0[m + 1] = -2.0 * a * prev0 / k;
        e1[m + 1] = -2.0 * a * (e1[m] + prev1) / k;
    }
    let exp_a = (-a).exp();
    let first = if s < 0.0 {
        6.0 + s * exp_a * (-6.0 + 24.0 * a - 8.0 * a * a)
    } else {
        -6.0 * (-a).exp_m1() + exp_a * (24.0 * a - 8.0 * a * a)
    };
    let mut total = first / (k * k);
    let mut last = total.abs();
    for m in 2..TERMS {
        let n = 2 * m;
        let mut r0 = 0.0;
        let mut r1 = 0.0;
        let mut kp = 1.0;
        for i in 0..5 {
            let c = binom(n, i) / kp;
            r0 += c * p0[i] * e0[n - i];
            r1 += c * p1[i] * e1[n - i];
            kp *= k;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (r0 - s * r1);
        if m > 3 && term.abs() > last {
            break;
        }
        total += term;
        last = term.abs();
        if m > 2 && term.abs() < 1e-18 * total.abs() {
            break;
        }
    }
    2.0 * a / k * (total / k)
}

/// Small-xi asymptote: 15 xi^4/k^4 for even l, 12 xi^2/k^4 for odd l.
pub fn f_ell_small(xi: f64, ell: u32) -> f64 {
    let k = PI * ell as f64;
    if ell % 2 == 0 {
        15.0 * xi.powi(4) / k.powi(4)
    } else {
        12.0 * xi * xi / k.powi(4)
    }
}
