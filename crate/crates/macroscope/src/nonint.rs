//! Heating bounds from steady-state populations, and the cylinder-mode rate.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{HBAR, K_B, M_E};
use crate::devices::{csl_map, zero_point_amplitude, CollapseParams, DeviceSpec, ModeGeometry};
use crate::diffusion::{
    geometric_factor, lateral_closed, longitudinal_analytic, longitudinal_quadrature, max_dimensionless_rate,
    Method, SigmaQRange, XI_MAX, XI_MIN,
};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{with_breaks, Quad};

/// Steady state of relaxation plus diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalSteadyState {
    pub population_p1: f64,
    pub energy_e_therm: f64,
    pub temperature_t_therm: f64,
}

fn rates(gamma: f64, gamma_down: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "must be finite and non-negative"));
    }
    if !(gamma_down > 0.0 && gamma_down.is_finite()) {
        return Err(invalid("gamma_down", "must be positive"));
    }
    Ok(())
}

/// p1 = Gamma/(2 Gamma + gamma_down).
pub fn steady_population(gamma: f64, gamma_down: f64) -> Result<f64> {
    rates(gamma, gamma_down)?;
    Ok(gamma / (2.0 * gamma + gamma_down))
}

/// Gamma = p1 gamma_down/(1 - 2 p1).
pub fn invert_population(p1: f64, gamma_down: f64) -> Result<f64> {
    rates(0.0, gamma_down)?;
    if !(0.0..0.5).contains(&p1) {
        return Err(Error::PopulationOutOfRange { p1 });
    }
    Ok(p1 * gamma_down / (1.0 - 2.0 * p1))
}

pub fn steady_energy(gamma: f64, gamma_down: f64, omega: f64) -> Result<ThermalSteadyState> {
    rates(gamma, gamma_down)?;
    if !(omega > 0.0) {
        return Err(invalid("omega", "must be positive"));
    }
    Ok(ThermalSteadyState {
        population_p1: gamma / (2.0 * gamma + gamma_down),
        energy_e_therm: HBAR * omega * (1.0 + 2.0 * gamma / gamma_down) / 2.0,
        temperature_t_therm: HBAR * omega * gamma / (gamma_down * K_B),
    })
}

/// One row of the excluded region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExclusionPoint {
    pub sigma_q: f64,
    pub hbar_over_sigma_q: f64,
    pub tau_e: f64,
    pub lambda_csl: f64,
    pub r_csl: f64,
}

/// Heating bound. `None` fields mean heating excludes nothing (p1 = 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonintBound {
    pub p1: f64,
    pub gamma_bound: f64,
    pub tau_e_max: Option<f64>,
    pub sigma_q_star: f64,
    pub critical_length: f64,
    pub curve: Vec<ExclusionPoint>,
}

impl NonintBound {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("hbar_over_sigma_q_m,tau_e_s,lambda_csl_per_s,r_csl_m\n");
        for p in &self.curve {
            s.push_str(&format!("{:.9e},{:.9e},{:.9e},{:.9e}\n", p.hbar_over_sigma_q, p.tau_e, p.lambda_csl, p.r_csl));
        }
        s
    }
}

/// Attributes the whole population `p1` to diffusion and converts it to excluded tau_e(sigma_q).
pub fn nonint_exclusion(p1: f64, device: &DeviceSpec, range: &SigmaQRange) -> Result<NonintBound> {
    let gamma_bound = invert_population(p1, device.gamma_down())?;
    let curve = max_dimensionless_rate(device, range)?;
    let m = curve.max_point;
    let points = curve
        .sigma_q_samples
        .iter()
        .zip(&curve.gamma_tau_samples)
        .map(|(&sq, &gt)| {
            let tau = if gamma_bound > 0.0 { gt / gamma_bound } else { f64::INFINITY };
            let c = csl_map(tau, sq);
            ExclusionPoint { sigma_q: sq, hbar_over_sigma_q: HBAR / sq, tau_e: tau, lambda_csl: c.lambda_csl, r_csl: c.r_csl }
        })
        .collect();
    Ok(NonintBound {
        p1,
        gamma_bound,
        tau_e_max: (gamma_bound > 0.0).then(|| m.gamma_tau_star / gamma_bound),
        sigma_q_star: m.sigma_q_star,
        critical_length: m.critical_length(),
        curve: points,
    })
}

/// Homogeneous cylinder hosting cos(pi ell x/L) along its axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderRateInputs {
    pub density: f64,
    pub radius: f64,
    pub length: f64,
    pub ell: u32,
    pub omega: f64,
    pub collapse: CollapseParams,
}

impl CylinderRateInputs {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("density", self.density),
            ("radius", self.radius),
            ("length", self.length),
            ("omega", self.omega),
            ("tau_e", self.collapse.tau_e),
            ("r_csl", self.collapse.r_csl),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, "must be finite and positive"));
            }
        }
        if self.ell == 0 {
            return Err(invalid("ell", "must be at least 1"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> ModeGeometry {
        ModeGeometry::Cylinder { radius: self.radius, length: self.length, ell: self.ell }
    }

    /// Squared zero-point amplitude with m_eff = rho pi R^2 L/2.
    pub fn x0_squared(&self) -> f64 {
        let m = self.density * PI * self.radius * self.radius * self.length / 2.0;
        zero_point_amplitude(m, self.omega).powi(2)
    }

    /// Same inputs with another localization length at fixed lambda_C.
    pub fn with_r_csl(&self, r_csl: f64) -> Result<Self> {
        Ok(CylinderRateInputs { collapse: CollapseParams::from_csl(self.collapse.lambda_csl, r_csl)?, ..*self })
    }
}

/// Exact rate Gamma from the disc factor and the longitudinal closed form.
pub fn cylinder_rate_closed(inputs: &CylinderRateInputs) -> Result<f64> {
    inputs.validate()?;
    let sq = inputs.collapse.sigma_q();
    let g = inputs.geometry();
    let xi = inputs.length * sq / HBAR;
    let long = if (XI_MIN..=XI_MAX).contains(&xi) {
        longitudinal_analytic(xi, inputs.ell)?
    } else {
        longitudinal_quadrature(xi, inputs.ell, &Quad::default())?
    };
    let u = (inputs.density / M_E).powi(2) * lateral_closed(&g, sq) * long;
    let rate = u * inputs.x0_squared() / inputs.collapse.tau_e;
    if !rate.is_finite() {
        return Err(Error::Range { what: "cylinder rate", value: rate, min: 0.0, max: f64::MAX });
    }
    Ok(rate)
}

/// Same rate from nested quadrature of the raw momentum integral.
pub fn cylinder_rate_bruteforce(inputs: &CylinderRateInputs) -> Result<f64> {
    inputs.validate()?;
    let u = geometric_factor(&inputs.geometry(), inputs.density, inputs.collapse.sigma_q(), Method::Bruteforce)?;
    Ok(u * inputs.x0_squared() / inputs.collapse.tau_e)
}

/// (-8 + (8 + a^2 pi^2) cos(a pi/2))^2/(4 a^2 pi^2), with a series where it cancels.
fn cell_factor(a: f64) -> f64 {
    let u = 0.5 * PI * a;
    let n = if u.abs() < 1.0 {
        // -8 + (8 + 4u^2) cos u = sum_k c_k u^{2k}, c_k = 8(-1)^k/(2k)! - 4(-1)^k/(2k-2)!
        let u2 = u * u;
        let (mut sum, mut pow, mut fact_2k2) = (0.0, u2, 1.0);
        for k in 1..12 {
            let fact_2k = fact_2k2 * (2 * k - 1) as f64 * (2 * k) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (8.0 / fact_2k - 4.0 / fact_2k2) * pow;
            pow *= u2;
            fact_2k2 = fact_2k;
        }
        sum
    } else {
        -8.0 + (8.0 + 4.0 * u * u) * u.cos()
    };
    n * n / (4.0 * a * a * PI * PI)
}

/// Grating factor of the reference integrand. Even ell: sin^2(ell pi a/2)/cos^2(pi a/2).
/// Odd ell uses cos^2(ell pi a/2) in the numerator; the printed sin^2 form has
/// non-integrable double poles at odd a. Both ratios are evaluated as finite sums.
fn grating_factor(a: f64, ell: u32) -> f64 {
    let x = 0.5 * PI * a;
    let m = ell / 2;
    let v = if ell % 2 == 0 {
        // sin(2m x)/cos x = 2 sum_{k=1}^m (-1)^{m-k} sin((2k-1)x)
        2.0 * (1..=m)
            .map(|k| if (m - k) % 2 == 0 { 1.0 } else { -1.0 } * ((2 * k - 1) as f64 * x).sin())
            .sum::<f64>()
    } else {
        // cos((2m+1)x)/cos x = +-(1 + 2 sum_{k=1}^m (-1)^k cos(2k x))
        1.0 + 2.0 * (1..=m).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * ((2 * k) as f64 * x).cos()).sum::<f64>()
    };
    v * v
}

/// Reference integrand over a at localization length r_C.
pub fn reference_integrand(a: f64, r_csl: f64, cell_length: f64, ell: u32) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let g = r_csl * 2.0 * PI * a / cell_length;
    (-g * g).exp() * cell_factor(a) * grating_factor(a, ell)
}

/// Largest number of panels the reference integral will use.
const MAX_REFERENCE_PANELS: f64 = 1e6;

/// int over the real line of [`reference_integrand`].
pub fn reference_integral(r_csl: f64, cell_length: f64, ell: u32) -> Result<f64> {
    let (rc, d) = (r_csl, cell_length);
    // Gaussian cutoff at exp(-64); breakpoints every 1/ell resolve the grating
    // oscillations and include the odd integers where its peaks sit
    let a_max = (8.0 * d / (2.0 * PI * rc)).max(4.0);
    let panels = (a_max * ell as f64).ceil();
    if panels > MAX_REFERENCE_PANELS {
        return Err(Error::Range { what: "reference panel count", value: panels, min: 0.0, max: MAX_REFERENCE_PANELS });
    }
    let n = panels as usize;
    let a_g = d / (2.0 * PI * rc);
    let points = with_breaks(
        (0..=n).map(|k| k as f64 / ell as f64).collect(),
        &[0.25 * a_g, 0.5 * a_g, a_g, 2.0 * a_g, 4.0 * a_g],
    );
    let quad = Quad { max_subdivisions: 2000 + 4 * n, ..Quad::rel(1e-10) };
    let half = quad.integrate(|a| reference_integrand(a, rc, d, ell), &points)?.value;
    Ok(2.0 * half)
}

/// The approximate 2 Gamma of the benchmarked proposal, as an adaptive integral over a.
pub fn cylinder_rate_reference(inputs: &CylinderRateInputs) -> Result<f64> {
    inputs.validate()?;
    let (rc, ell) = (inputs.collapse.r_csl, inputs.ell);
    let d = inputs.length / ell as f64;
    let integral = reference_integral(rc, d, ell)?;
    let x = inputs.radius * inputs.radius / (2.0 * rc * rc);
    let bracket = crate::diffusion::disc_bracket(x) / 2.0;
    // lambda_C/m0^2 = 1/(tau_e m_e^2)
    let pre = inputs.x0_squared() * rc.powi(3) * inputs.density.powi(2) * inputs.radius.powi(2)
        / (2.0 * M_E * M_E * inputs.collapse.tau_e)
        * (64.0 * PI.sqrt() / d);
    Ok(pre * bracket * integral)
}

/// One row of the cylinder comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderComparison {
    pub r_csl: f64,
    pub gamma_closed: f64,
    pub two_gamma_reference: f64,
    /// closed / (reference/2)
    pub ratio: f64,
}

/// Both rates over log-spaced r_C at fixed lambda_C.
pub fn cylinder_compare(inputs: &CylinderRateInputs, r_min: f64, r_max: f64, n: usize) -> Result<Vec<CylinderComparison>> {
    crate::quadrature::logspace(r_min, r_max, n)
        .into_iter()
        .map(|rc| {
            let inp = inputs.with_r_csl(rc)?;
            let closed = cylinder_rate_closed(&inp)?;
            let reference = cylinder_rate_reference(&inp)?;
            Ok(CylinderComparison { r_csl: rc, gamma_closed: closed, two_gamma_reference: reference, ratio: closed / (0.5 * reference) })
        })
        .collect()
}

/// The two parameter sets of the benchmarked proposal at lambda_C = 1e-8 1/s (rates are linear in it).
pub fn benchmark_inputs(ell: u32) -> Result<CylinderRateInputs> {
    let length = match ell {
        1 => 1.5e-6,
        40 => 60e-6,
        _ => return Err(invalid("ell", "benchmark sets exist for ell = 1 and ell = 40")),
    };
    Ok(CylinderRateInputs {
        density: 3210.0,
        radius: 35e-6,
        length,
        ell,
        omega: 2.0 * PI * 6.33,
        collapse: CollapseParams::from_csl(1e-8, 1e-7)?,
    })
}

pub fn comparison_csv(rows: &[CylinderComparison]) -> String {
    let mut s = String::from("r_csl_m,gamma_closed_per_s,two_gamma_reference_per_s,ratio\n");
    for r in rows {
        s.push_str(&format!("{:.9e},{:.9e},{:.9e},{:.9e}\n", r.r_csl, r.gamma_closed, r.two_gamma_reference, r.ratio));
    }
    s
}
