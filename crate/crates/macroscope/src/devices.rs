//! Resonator descriptions and the oscillator quantities derived from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{AMU, HBAR, M_E};
use crate::error::{invalid, Error, Result};

/// Shape of the acoustic mode. Every variant oscillates as cos(pi*ell*x/len) along its axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeGeometry {
    /// Gaussian transverse profile exp(-r^2/w0^2).
    GaussianBeam { w0: f64, length: f64, ell: u32 },
    /// Hard-walled box; the mode runs along the thickness `h`.
    Cuboid { a: f64, b: f64, h: f64, ell: u32 },
    /// Homogeneous cylinder; the mode runs along the axis.
    Cylinder { radius: f64, length: f64, ell: u32 },
}

impl ModeGeometry {
    pub fn ell(&self) -> u32 {
        match *self {
            ModeGeometry::GaussianBeam { ell, .. }
            | ModeGeometry::Cuboid { ell, .. }
            | ModeGeometry::Cylinder { ell, .. } => ell,
        }
    }

    /// Length along the oscillation axis.
    pub fn axial_length(&self) -> f64 {
        match *self {
            ModeGeometry::GaussianBeam { length, .. } | ModeGeometry::Cylinder { length, .. } => {
                length
            }
            ModeGeometry::Cuboid { h, .. } => h,
        }
    }

    /// Mode volume, the integral of u(r)^2.
    pub fn effective_volume(&self) -> f64 {
        match *self {
            ModeGeometry::GaussianBeam { w0, length, .. } => PI * w0 * w0 * length / 4.0,
            ModeGeometry::Cuboid { a, b, h, .. } => a * b * h / 2.0,
            ModeGeometry::Cylinder { radius, length, .. } => PI * radius * radius * length / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lengths: &[(&str, f64)] = match self {
            ModeGeometry::GaussianBeam { w0, length, .. } => &[("waist", *w0), ("length", *length)],
            ModeGeometry::Cuboid { a, b, h, .. } => &[("a", *a), ("b", *b), ("h", *h)],
            ModeGeometry::Cylinder { radius, length, .. } => {
                &[("radius", *radius), ("length", *length)]
            }
        };
        for &(name, v) in lengths {
            positive(name, v)?;
        }
        if self.ell() == 0 {
            return Err(invalid("ell", "mode index must be at least 1"));
        }
        Ok(())
    }
}

/// One resonator mode with its material and coherence data. SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    pub name: String,
    pub geometry: ModeGeometry,
    /// Mass density [kg/m^3].
    pub density: f64,
    /// Angular frequency [rad/s].
    pub omega: f64,
    pub t1: f64,
    pub t2: Option<f64>,
    pub thermal_population: Option<f64>,
}

impl DeviceSpec {
    pub fn new(
        name: impl Into<String>,
        geometry: ModeGeometry,
        density: f64,
        omega: f64,
        t1: f64,
    ) -> Result<Self> {
        let spec = DeviceSpec {
            name: name.into(),
            geometry,
            density,
            omega,
            t1,
            t2: None,
            thermal_population: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_t2(mut self, t2: f64) -> Result<Self> {
        self.t2 = Some(t2);
        self.validate()?;
        Ok(self)
    }

    pub fn with_thermal_population(mut self, p1: f64) -> Result<Self> {
        self.thermal_population = Some(p1);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        positive("density", self.density)?;
        positive("omega", self.omega)?;
        positive("T1", self.t1)?;
        if let Some(t2) = self.t2 {
            positive("T2", t2)?;
            if t2 > 2.0 * self.t1 {
                return Err(Error::InconsistentCoherence { t2, two_t1: 2.0 * self.t1 });
            }
        }
        if let Some(p1) = self.thermal_population {
            if !(0.0..0.5).contains(&p1) {
                return Err(Error::PopulationOutOfRange { p1 });
            }
        }
        Ok(())
    }

    pub fn effective_mass(&self) -> f64 {
        effective_mass(&self.geometry, self.density)
    }

    /// x0 = sqrt(hbar/(m_eff*omega)).
    pub fn x0(&self) -> f64 {
        zero_point_amplitude(self.effective_mass(), self.omega)
    }

    /// Relaxation rate 1/T1.
    pub fn gamma_down(&self) -> f64 {
        1.0 / self.t1
    }

    pub fn with_density(&self, density: f64) -> Result<Self> {
        let mut d = self.clone();
        d.density = density;
        d.validate()?;
        Ok(d)
    }

    pub fn with_geometry(&self, geometry: ModeGeometry) -> Result<Self> {
        let mut d = self.clone();
        d.geometry = geometry;
        d.validate()?;
        Ok(d)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and positive, got {v}")))
    }
}

pub fn effective_mass(geometry: &ModeGeometry, density: f64) -> f64 {
    density * geometry.effective_volume()
}

pub fn zero_point_amplitude(m_eff: f64, omega: f64) -> f64 {
    (HBAR / (m_eff * omega)).sqrt()
}

/// T_phi = (1/T2 - 1/(2 T1))^-1. Returns `f64::INFINITY` when T2 = 2 T1 (no pure dephasing).
pub fn pure_dephasing_time(t1: f64, t2: f64) -> Result<f64> {
    positive("T1", t1)?;
    positive("T2", t2)?;
    if t2 > 2.0 * t1 {
        return Err(Error::InconsistentCoherence { t2, two_t1: 2.0 * t1 });
    }
    let rate = 1.0 / t2 - 0.5 / t1;
    Ok(if rate <= 0.0 { f64::INFINITY } else { 1.0 / rate })
}

/// Width of the Gaussian momentum-kick distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModificationScale {
    pub sigma_q: f64,
}

impl ModificationScale {
    pub fn new(sigma_q: f64) -> Result<Self> {
        positive("sigma_q", sigma_q)?;
        Ok(ModificationScale { sigma_q })
    }

    pub fn from_critical_length(length: f64) -> Result<Self> {
        positive("critical length", length)?;
        Ok(ModificationScale { sigma_q: HBAR / length })
    }

    /// hbar/sigma_q [m].
    pub fn critical_length(&self) -> f64 {
        HBAR / self.sigma_q
    }
}

/// Collapse-model parameters equivalent to a (tau_e, sigma_q) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseParams {
    pub tau_e: f64,
    pub lambda_csl: f64,
    pub r_csl: f64,
}

impl CollapseParams {
    pub fn from_modification(tau_e: f64, sigma_q: f64) -> Result<Self> {
        positive("tau_e", tau_e)?;
        positive("sigma_q", sigma_q)?;
        Ok(csl_map(tau_e, sigma_q))
    }

    pub fn from_csl(lambda_csl: f64, r_csl: f64) -> Result<Self> {
        positive("lambda_csl", lambda_csl)?;
        positive("r_csl", r_csl)?;
        Ok(CollapseParams { tau_e: (AMU / M_E).powi(2) / lambda_csl, lambda_csl, r_csl })
    }

    pub fn sigma_q(&self) -> f64 {
        HBAR / (std::f64::consts::SQRT_2 * self.r_csl)
    }
}

/// lambda_CSL = (u/m_e)^2/tau_e and r_C = hbar/(sqrt(2) sigma_q).
pub fn csl_map(tau_e: f64, sigma_q: f64) -> CollapseParams {
    CollapseParams {
        tau_e,
        lambda_csl: (AMU / M_E).powi(2) / tau_e,
        r_csl: HBAR / (std::f64::consts::SQRT_2 * sigma_q),
    }
}

/// Inverse of [`csl_map`]: returns (tau_e, sigma_q).
pub fn csl_unmap(lambda_csl: f64, r_csl: f64) -> (f64, f64) {
    ((AMU / M_E).powi(2) / lambda_csl, HBAR / (std::f64::consts::SQRT_2 * r_csl))
}

const UM: f64 = 1e-6;
const US: f64 = 1e-6;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 5] =
    ["hbar-2022", "phononic-crystal-2022", "saw-2018", "hbar-projected", "hbar-l8"];

/// Built-in devices. Cuboid presets use ell = 1 along the thickness.
pub fn preset(name: &str) -> Option<DeviceSpec> {
    let hbar_beam = |ell| ModeGeometry::GaussianBeam { w0: 27.0 * UM, length: 435.0 * UM, ell };
    let ghz = |f: f64| 2.0 * PI * f * 1e9;
    let spec = match name {
        "hbar-2022" => DeviceSpec {
            name: name.into(),
            geometry: hbar_beam(486),
            density: 3980.0,
            omega: ghz(5.961),
            t1: 85.8 * US,
            t2: Some(147.3 * US),
            thermal_population: Some(0.016),
        },
        "hbar-projected" => DeviceSpec {
            name: name.into(),
            geometry: hbar_beam(160),
            density: 3980.0,
            omega: ghz(2.0),
            t1: 10e-3,
            t2: None,
            thermal_population: None,
        },
        "hbar-l8" => DeviceSpec {
            name: name.into(),
            geometry: hbar_beam(8),
            density: 3980.0,
            omega: ghz(0.098),
            t1: 85.8 * US,
            t2: None,
            thermal_population: None,
        },
        "phononic-crystal-2022" => DeviceSpec {
            name: name.into(),
            geometry: ModeGeometry::Cuboid { a: 1.0 * UM, b: 1.0 * UM, h: 0.25 * UM, ell: 1 },
            density: 4650.0,
            omega: ghz(2.0),
            t1: 1.0 * US,
            t2: None,
            thermal_population: None,
        },
        "saw-2018" => DeviceSpec {
            name: name.into(),
            geometry: ModeGeometry::Cuboid { a: 75.0 * UM, b: 50.0 * UM, h: 1.0 * UM, ell: 1 },
            density: 4650.0,
            omega: ghz(4.0),
            t1: 0.150 * US,
            t2: None,
            thermal_population: None,
        },
        _ => return None,
    };
    Some(spec)
}

/// On-disk device description in human-scale units.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub name: String,
    pub geometry: GeometryConfig,
    /// Quantity with unit suffix, `"3.98 g/cm3"` or `"3980 kg/m3"`.
    pub density: String,
    /// omega/(2 pi) in GHz.
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: f64,
    #[serde(rename = "T1_us")]
    pub t1_us: f64,
    #[serde(rename = "T2_us", default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    GaussianBeam { waist_um: f64, length_um: f64, ell: u32 },
    Cuboid { a_um: f64, b_um: f64, h_um: f64, ell: u32 },
    Cylinder { radius_um: f64, length_um: f64, ell: u32 },
}

fn parse_density(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, unit) = s
        .split_once(char::is_whitespace)
        .ok_or_else(|| invalid("density", format!("missing unit suffix in {s:?}")))?;
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| invalid("density", format!("not a number: {num:?}")))?;
    match unit.trim() {
        "g/cm3" | "g/cm^3" | "g/cm³" => Ok(v * 1000.0),
        "kg/m3" | "kg/m^3" | "kg/m³" => Ok(v),
        u => Err(invalid("density", format!("unknown unit {u:?}; use g/cm3 or kg/m3"))),
    }
}

impl DeviceConfig {
    pub fn to_spec(&self) -> Result<DeviceSpec> {
        let geometry = match self.geometry {
            GeometryConfig::GaussianBeam { waist_um, length_um, ell } => {
                ModeGeometry::GaussianBeam { w0: waist_um * UM, length: length_um * UM, ell }
            }
            GeometryConfig::Cuboid { a_um, b_um, h_um, ell } => {
                ModeGeometry::Cuboid { a: a_um * UM, b: b_um * UM, h: h_um * UM, ell }
            }
            GeometryConfig::Cylinder { radius_um, length_um, ell } => {
                ModeGeometry::Cylinder { radius: radius_um * UM, length: length_um * UM, ell }
            }
        };
        let spec = DeviceSpec {
            name: self.name.clone(),
            geometry,
            density: parse_density(&self.density)?,
            omega: 2.0 * PI * self.omega_ghz * 1e9,
            t1: self.t1_us * US,
            t2: self.t2_us.map(|t| t * US),
            thermal_population: self.p1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &DeviceSpec) -> Self {
        let geometry = match spec.geometry {
            ModeGeometry::GaussianBeam { w0, length, ell } => {
                GeometryConfig::GaussianBeam { waist_um: w0 / UM, length_um: length / UM, ell }
            }
            ModeGeometry::Cuboid { a, b, h, ell } => {
                GeometryConfig::Cuboid { a_um: a / UM, b_um: b / UM, h_um: h / UM, ell }
            }
            ModeGeometry::Cylinder { radius, length, ell } => {
                GeometryConfig::Cylinder { radius_um: radius / UM, length_um: length / UM, ell }
            }
        };
        DeviceConfig {
            name: spec.name.clone(),
            geometry,
            density: format!("{} kg/m3", spec.density),
            omega_ghz: spec.omega / (2.0 * PI * 1e9),
            t1_us: spec.t1 / US,
            t2_us: spec.t2.map(|t| t / US),
            p1: spec.thermal_population,
        }
    }
}

pub fn parse_device_json(text: &str) -> Result<DeviceSpec> {
    let cfg: DeviceConfig = serde_json::from_str(text)?;
    cfg.to_spec()
}

pub fn device_to_json(spec: &DeviceSpec) -> String {
    serde_json::to_string_pretty(&DeviceConfig::from_spec(spec)).expect("config serializes")
}
