//! Geometric factor U(sigma_q) and the dimensionless diffusion rate Gamma*tau_e = U x0^2.

mod brute;
mod f_ell;
mod lateral;
mod longitudinal;

use std::f64::consts::PI;

use serde::Serialize;

pub use brute::geometric_factor_brute;
pub use f_ell::{f_ell, f_ell_small, XI_MAX, XI_MIN};
pub use lateral::{box_factor, disc_bracket, lateral_closed, lateral_quadrature};
pub use longitudinal::{longitudinal_analytic, longitudinal_integrand, longitudinal_quadrature};

use crate::constants::{HBAR, M_E};
use crate::devices::{DeviceSpec, ModeGeometry};
use crate::error::{invalid, Error, Result};
use crate::par::par_map;
use crate::quadrature::{golden_max, logspace, Quad};

/// How U is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form through f_l and w(z); Gaussian beams only.
    Analytic,
    /// Closed-form-free 1D adaptive integrals of the factorized integrand.
    Quadrature,
    /// Nested adaptive integration of the raw momentum-space integral.
    Bruteforce,
}

/// xi = L sigma_q/hbar along the mode axis.
pub fn sigma_l(geometry: &ModeGeometry, sigma_q: f64) -> f64 {
    geometry.axial_length() * sigma_q / HBAR
}

/// U(sigma_q) in 1/m^2 per unit tau_e (Gamma tau_e = U x0^2).
pub fn geometric_factor(
    geometry: &ModeGeometry,
    density: f64,
    sigma_q: f64,
    method: Method,
) -> Result<f64> {
    geometry.validate()?;
    if !(sigma_q.is_finite() && sigma_q > 0.0) {
        return Err(invalid("sigma_q", "must be finite and positive"));
    }
    let xi = sigma_l(geometry, sigma_q);
    let ell = geometry.ell();
    let pre = (density / M_E).powi(2);
    match method {
        Method::Analytic => match geometry {
            ModeGeometry::GaussianBeam { .. } => {
                Ok(pre * lateral_closed(geometry, sigma_q) * longitudinal_analytic(xi, ell)?)
            }
            _ => Err(Error::Unsupported(
                "analytic method is only available for the Gaussian-beam mode".into(),
            )),
        },
        Method::Quadrature => {
            let quad = Quad::default();
            let lat = lateral_quadrature(geometry, sigma_q, &quad)?;
            Ok(pre * lat * longitudinal_quadrature(xi, ell, &quad)?)
        }
        Method::Bruteforce => geometric_factor_brute(geometry, density, sigma_q),
    }
}

/// ln U, for parameters whose U would leave double range.
pub fn log_geometric_factor(geometry: &ModeGeometry, density: f64, sigma_q: f64) -> Result<f64> {
    let xi = sigma_l(geometry, sigma_q);
    let long = default_longitudinal(geometry, xi)?;
    Ok(2.0 * (density.ln() - M_E.ln()) + lateral_closed(geometry, sigma_q).ln() + long.ln())
}

fn default_longitudinal(geometry: &ModeGeometry, xi: f64) -> Result<f64> {
    let ell = geometry.ell();
    if matches!(geometry, ModeGeometry::GaussianBeam { .. }) && longitudinal::analytic_in_range(xi)
    {
        longitudinal_analytic(xi, ell)
    } else {
        longitudinal_quadrature(xi, ell, &Quad::default())
    }
}

/// Gamma tau_e at one sigma_q: analytic for Gaussian beams where possible, quadrature otherwise.
pub fn dimensionless_rate(device: &DeviceSpec, sigma_q: f64) -> Result<f64> {
    let g = &device.geometry;
    let xi = sigma_l(g, sigma_q);
    let u = match g {
        ModeGeometry::GaussianBeam { .. } if longitudinal::analytic_in_range(xi) => {
            geometric_factor(g, device.density, sigma_q, Method::Analytic)?
        }
        _ => geometric_factor(g, device.density, sigma_q, Method::Quadrature)?,
    };
    let x0 = device.x0();
    Ok(u * x0 * x0)
}

/// sigma_q interval; the default spans hbar/sigma_q in [1e-9, 1e-3] m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaQRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for SigmaQRange {
    fn default() -> Self {
        SigmaQRange::from_lengths(1e-9, 1e-3)
    }
}

impl SigmaQRange {
    /// Range from critical lengths hbar/sigma_q (either order).
    pub fn from_lengths(a: f64, b: f64) -> Self {
        let (lo, hi) = (HBAR / a.max(b), HBAR / a.min(b));
        SigmaQRange { min: lo, max: hi, points: 129 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max.is_finite() && self.max > self.min) {
            return Err(invalid("sigma_q range", "need 0 < min < max"));
        }
        if (self.max / self.min).log10() < 4.0 - 1e-9 {
            return Err(invalid("sigma_q range", "must span at least 4 decades"));
        }
        if self.points < 5 {
            return Err(invalid("sigma_q range", "need at least 5 scan points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPoint {
    pub sigma_q_star: f64,
    pub gamma_tau_star: f64,
}

impl MaxPoint {
    pub fn critical_length(&self) -> f64 {
        HBAR / self.sigma_q_star
    }
}

/// Sampled Gamma tau_e(sigma_q).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionCurve {
    pub sigma_q_samples: Vec<f64>,
    pub gamma_tau_samples: Vec<f64>,
    pub device_ref: String,
    pub max_point: MaxPoint,
}

impl DiffusionCurve {
    /// CSV with columns `hbar_over_sigma_q_m, gamma_tau_e`, ascending in length.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hbar_over_sigma_q_m,gamma_tau_e\n");
        for (s, g) in self.sigma_q_samples.iter().zip(&self.gamma_tau_samples).rev() {
            out.push_str(&format!("{:.9e},{:.9e}\n", HBAR / s, g));
        }
        out
    }
}

/// Curve samples on a log grid, in parallel.
pub fn scan<F>(range: &SigmaQRange, f: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let sq = logspace(range.min, range.max, range.points);
    let vals: Result<Vec<f64>> = par_map(&sq, |&s| f(s)).into_iter().collect();
    Ok((sq, vals?))
}

/// Coarse log scan followed by golden-section refinement in ln sigma_q.
pub fn maximize_curve<F>(range: &SigmaQRange, device_ref: &str, f: F) -> Result<DiffusionCurve>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    range.validate()?;
    let (sq, vals) = scan(range, &f)?;
    let n = sq.len();
    let imax = (0..n).fold(0, |best, i| if vals[i] > vals[best] { i } else { best });
    if imax == 0 {
        return Err(Error::MaxAtBoundary { edge: "small-sigma_q", length: HBAR / sq[0] });
    }
    if imax == n - 1 {
        return Err(Error::MaxAtBoundary { edge: "large-sigma_q", length: HBAR / sq[n - 1] });
    }
    let g = |ls: f64| f(ls.exp()).unwrap_or(f64::NEG_INFINITY);
    let (lo, hi) = (sq[imax - 1].ln(), sq[imax + 1].ln());
    let (ls, val) = golden_max(g, lo, hi, 1e-7);
    let (mut ls, mut val) = if val >= vals[imax] { (ls, val) } else { (sq[imax].ln(), vals[imax]) };
    // plateau: walk down while the curve stays flat to 1e-9
    let step = 1e-3;
    let curvature = (g(ls + step) + g(ls - step) - 2.0 * val).abs() / val.abs().max(f64::MIN_POSITIVE);
    if curvature < 1e-9 {
        while ls - step > sq[0].ln() {
            let v = g(ls - step);
            if (v - val).abs() > 1e-9 * val.abs() {
                break;
            }
            ls -= step;
            val = val.max(v);
        }
    }
    Ok(DiffusionCurve {
        sigma_q_samples: sq,
        gamma_tau_samples: vals,
        device_ref: device_ref.to_string(),
        max_point: MaxPoint { sigma_q_star: ls.exp(), gamma_tau_star: val },
    })
}

/// Maximum of Gamma tau_e over sigma_q for a device.
pub fn max_dimensionless_rate(device: &DeviceSpec, range: &SigmaQRange) -> Result<DiffusionCurve> {
    device.validate()?;
    maximize_curve(range, &device.name, |s| dimensionless_rate(device, s))
}

/// Closed-form approximations of Gamma tau_e.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// sigma_L << 1, even l: longitudinal factor 15 xi^6/(2 k^4).
    SmallEven,
    /// sigma_L << 1, odd l: longitudinal factor 6 xi^4/k^4.
    SmallOdd,
    /// sigma_L >> pi l: leading term, no l dependence.
    U0,
    /// Leading term plus the first resonance correction.
    U1,
    /// Peak value over sigma_q for Gaussian beams.
    MaxFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRate {
    pub gamma_tau: f64,
    /// Set when the regime's assumptions do not hold at this point.
    pub warning: Option<String>,
}

/// Gamma tau_e in one of the asymptotic regimes. Lateral factors are kept exact.
pub fn asymptotic_rate(device: &DeviceSpec, sigma_q: f64, regime: Regime) -> Result<AsymptoticRate> {
    device.validate()?;
    let g = &device.geometry;
    let ell = g.ell();
    let k = PI * ell as f64;
    let xi = sigma_l(g, sigma_q);
    let even = ell % 2 == 0;
    let x0sq = device.x0().powi(2);
    let pre = (device.density / M_E).powi(2);
    let mut warning = None;
    let long = match regime {
        Regime::SmallEven | Regime::SmallOdd => {
            if xi > 0.1 {
                warning = Some(format!("sigma_L = {xi:.3e} is not small"));
            }
            if even != (regime == Regime::SmallEven) {
                warning = Some(format!("mode index {ell} has the other parity"));
            }
            if regime == Regime::SmallEven {
                7.5 * xi.powi(6) / k.powi(4)
            } else {
                6.0 * xi.powi(4) / k.powi(4)
            }
        }
        Regime::U0 | Regime::U1 => {
            let s = if even { 1.0 } else { -1.0 };
            let lead = 1.0 - s * (-0.5 * xi * xi).exp();
            if regime == Regime::U0 {
                if xi < 3.0 * k {
                    warning = Some(format!("sigma_L = {xi:.3e} is not >> pi*l = {k:.3e}"));
                }
                lead
            } else {
                if k < 10.0 {
                    warning = Some(format!("pi*l = {k:.3e} is not >> 1"));
                }
                lead + PI.powi(3) * (ell as f64).powi(2) * (-0.5 * k * k / (xi * xi)).exp()
                    / (2.0 * (2.0 * PI).sqrt() * xi)
            }
        }
        Regime::MaxFormula => {
            let (w0, length) = match *g {
                ModeGeometry::GaussianBeam { w0, length, .. } => (w0, length),
                _ => {
                    return Err(Error::Unsupported(
                        "the peak formula assumes a Gaussian-beam mode".into(),
                    ))
                }
            };
            let lateral_ratio = k * w0 / (3f64.sqrt() * length);
            if k < 10.0 || lateral_ratio < 10.0 {
                warning = Some(format!(
                    "needs pi*l >> 1 and pi*l*w0/(sqrt(3) L) >> 1; got {k:.3e} and {lateral_ratio:.3e}"
                ));
            }
            let e3 = 3f64.exp();
            let value = (3.0 * PI / (2.0 * e3)).sqrt() * 6.0 * HBAR * device.density * length
                / (M_E * M_E * device.omega * ell as f64);
            return Ok(AsymptoticRate { gamma_tau: value, warning });
        }
    };
    Ok(AsymptoticRate { gamma_tau: pre * lateral_closed(g, sigma_q) * long * x0sq, warning })
}
