//! Bayesian estimation of the diffusion rate Gamma from Wigner snapshots.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::devices::DeviceSpec;
use crate::diffusion::{max_dimensionless_rate, SigmaQRange};
use crate::error::{invalid, Error, Result};
use crate::par::par_map;
use crate::quadrature::{golden_max, logspace, trapezoid};
use crate::wigner::{evolved_wigner_closed, symmetric_axis, EvolutionParams, OscillatorState, WignerGrid};

/// Preparation imperfections fitted at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    /// Weight of the prepared state; the rest is ground state.
    pub mixture_weight_p: f64,
    /// Phase-space rotation of each snapshot [rad].
    pub per_snapshot_rotation: Vec<f64>,
}

/// Wigner snapshots of one prepared state at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerDataset {
    pub snapshots: Vec<WignerGrid>,
    pub state_label: OscillatorState,
    pub calibration: Calibration,
}

impl WignerDataset {
    /// Dataset with the ideal calibration (p = 1, no rotations).
    pub fn new(snapshots: Vec<WignerGrid>, state_label: OscillatorState) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(invalid("snapshots", "dataset is empty"));
        }
        for w in snapshots.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(invalid("snapshots", "times must be strictly increasing"));
            }
            if !w[0].same_layout(&w[1]) {
                return Err(invalid("snapshots", "all snapshots must share one grid layout"));
            }
        }
        state_label.validate()?;
        let n = snapshots.len();
        Ok(WignerDataset {
            snapshots,
            state_label,
            calibration: Calibration { mixture_weight_p: 1.0, per_snapshot_rotation: vec![0.0; n] },
        })
    }

    pub fn with_calibration(mut self, calibration: Calibration) -> Result<Self> {
        if !(0.0..=1.0).contains(&calibration.mixture_weight_p) {
            return Err(invalid("mixture_weight_p", "must lie in [0, 1]"));
        }
        if calibration.per_snapshot_rotation.len() != self.snapshots.len() {
            return Err(invalid("per_snapshot_rotation", "need one angle per snapshot"));
        }
        self.calibration = calibration;
        Ok(self)
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn pixel_count(&self) -> usize {
        self.snapshots.iter().map(|s| s.values.len()).sum()
    }

    /// Indices of the snapshots used for inference (t > 0).
    fn inference_indices(&self) -> Vec<usize> {
        (0..self.snapshots.len()).filter(|&i| self.snapshots[i].time > 0.0).collect()
    }

    /// Concatenated pixel values of the t > 0 snapshots.
    pub fn inference_values(&self) -> Vec<f64> {
        self.inference_indices()
            .into_iter()
            .flat_map(|i| self.snapshots[i].values.iter().copied())
            .collect()
    }
}

/// Pixel noise standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub s: f64,
}

impl NoiseModel {
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid("noise s", "must be positive"));
        }
        Ok(NoiseModel { s })
    }
}

/// The pure state whose admixture with |0> is fitted.
fn base_state(state: OscillatorState) -> OscillatorState {
    match state {
        OscillatorState::Mixture { .. } => OscillatorState::FockOne,
        s => s,
    }
}

/// Where and when the model is evaluated, and with which calibration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Design {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub times: Vec<f64>,
    pub rotations: Vec<f64>,
    pub state: OscillatorState,
    pub mixture_weight_p: f64,
    pub gamma_down: f64,
}

impl Design {
    /// Design of the t > 0 snapshots of a dataset.
    pub fn from_dataset(ds: &WignerDataset, gamma_down: f64) -> Self {
        let idx = ds.inference_indices();
        let g = &ds.snapshots[0];
        Design {
            xs: g.xs.clone(),
            ps: g.ps.clone(),
            times: idx.iter().map(|&i| ds.snapshots[i].time).collect(),
            rotations: idx.iter().map(|&i| ds.calibration.per_snapshot_rotation[i]).collect(),
            state: base_state(ds.state_label),
            mixture_weight_p: ds.calibration.mixture_weight_p,
            gamma_down,
        }
    }

    pub fn pixels(&self) -> usize {
        self.xs.len() * self.ps.len() * self.times.len()
    }

    /// Prepared-state and ground-state model values, concatenated over times.
    pub fn components(&self, gamma: f64) -> (Vec<f64>, Vec<f64>) {
        let params = EvolutionParams { gamma_down: self.gamma_down, gamma };
        let mut ground = Vec::with_capacity(self.pixels());
        let mut state = Vec::with_capacity(self.pixels());
        for (&t, &theta) in self.times.iter().zip(&self.rotations) {
            let (sn, cs) = theta.sin_cos();
            for &p in &self.ps {
                for &x in &self.xs {
                    let (rx, rp) = (x * cs + p * sn, -x * sn + p * cs);
                    ground.push(evolved_wigner_closed(OscillatorState::Ground, rx, rp, t, &params));
                    state.push(evolved_wigner_closed(self.state, rx, rp, t, &params));
                }
            }
        }
        (ground, state)
    }

    /// p W_state + (1 - p) W_0 at every design pixel.
    pub fn model(&self, gamma: f64) -> Vec<f64> {
        let (g, s) = self.components(gamma);
        let p = self.mixture_weight_p;
        g.iter().zip(&s).map(|(g, s)| g + p * (s - g)).collect()
    }

    fn step(&self, gamma: f64) -> f64 {
        (1e-3 * gamma).max(1e-3 * self.gamma_down)
    }
}

/// d/dGamma of both model components; central differences with a Richardson step,
/// one-sided second order when Gamma - h < 0.
fn component_derivatives(design: &Design, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let h = design.step(gamma);
    let diff = |h: f64| -> (Vec<f64>, Vec<f64>) {
        if gamma - h >= 0.0 {
            let (g1, s1) = design.components(gamma + h);
            let (g0, s0) = design.components(gamma - h);
            let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            (d(&g1, &g0), d(&s1, &s0))
        } else {
            let (g0, s0) = design.components(gamma);
            let (g1, s1) = design.components(gamma + h);
            let (g2, s2) = design.components(gamma + 2.0 * h);
            let d = |a: &[f64], b: &[f64], c: &[f64]| {
                a.iter()
                    .zip(b)
                    .zip(c)
                    .map(|((a, b), c)| (-3.0 * a + 4.0 * b - c) / (2.0 * h))
                    .collect()
            };
            (d(&g0, &g1, &g2), d(&s0, &s1, &s2))
        }
    };
    let (ga, sa) = diff(h);
    let (gb, sb) = diff(0.5 * h);
    let rich = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    (rich(ga, gb), rich(sa, sb))
}

/// I(Gamma) = sum (dW/dGamma)^2 / s^2 over design pixels.
pub fn fisher_information(gamma: f64, design: &Design, noise: &NoiseModel) -> f64 {
    let (dg, ds) = component_derivatives(design, gamma);
    let p = design.mixture_weight_p;
    let sum: f64 = dg.iter().zip(&ds).map(|(g, s)| (g + p * (s - g)).powi(2)).sum();
    sum / (noise.s * noise.s)
}

/// Sum of Gaussian pixel log-densities over the t > 0 snapshots.
pub fn log_likelihood(ds: &WignerDataset, gamma: f64, gamma_down: f64, noise: &NoiseModel) -> f64 {
    let design = Design::from_dataset(ds, gamma_down);
    let model = design.model(gamma);
    gaussian_log_likelihood(&ds.inference_values(), &model, noise.s)
}

fn gaussian_log_likelihood(data: &[f64], model: &[f64], s: f64) -> f64 {
    let ss: f64 = data.iter().zip(model).map(|(d, m)| (d - m).powi(2)).sum();
    let n = data.len() as f64;
    -ss / (2.0 * s * s) - n * 0.5 * (2.0 * std::f64::consts::PI * s * s).ln()
}

/// Default grid: Gamma = 0 followed by 400 log-spaced rates on [1e-2, 1e5] s^-1.
pub fn default_gamma_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(logspace(1e-2, 1e5, 400));
    g
}

/// Normalized density over a Gamma grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Posterior {
    pub gamma_grid: Vec<f64>,
    pub density: Vec<f64>,
    pub log_prior: Vec<f64>,
    pub log_likelihood: Vec<f64>,
    /// Trapezoid integral of `density`; 1 up to rounding.
    pub normalization: f64,
}

impl Posterior {
    /// Posterior from log-likelihood and log-prior samples (any additive constants).
    pub fn from_log_terms(
        gamma_grid: Vec<f64>,
        log_likelihood: Vec<f64>,
        log_prior: Vec<f64>,
    ) -> Result<Self> {
        if gamma_grid.len() < 2
            || gamma_grid.len() != log_likelihood.len()
            || gamma_grid.len() != log_prior.len()
        {
            return Err(invalid("posterior", "grid and log terms must have equal length >= 2"));
        }
        if gamma_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("gamma_grid", "must be strictly increasing"));
        }
        let lp: Vec<f64> = log_likelihood.iter().zip(&log_prior).map(|(l, p)| l + p).collect();
        let top = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(invalid("posterior", "no grid point has finite posterior weight"));
        }
        let raw: Vec<f64> = lp.iter().map(|v| (v - top).exp()).collect();
        let z = trapezoid(&gamma_grid, &raw);
        let density: Vec<f64> = raw.iter().map(|v| v / z).collect();
        let normalization = trapezoid(&gamma_grid, &density);
        Ok(Posterior { gamma_grid, density, log_prior, log_likelihood, normalization })
    }

    /// Mass beyond the last grid point from a power-law fit to the last two samples.
    pub fn tail_mass(&self) -> f64 {
        let n = self.gamma_grid.len();
        let (g1, g2) = (self.gamma_grid[n - 2], self.gamma_grid[n - 1]);
        let (d1, d2) = (self.density[n - 2], self.density[n - 1]);
        if d2 == 0.0 {
            return 0.0;
        }
        if g1 <= 0.0 || d1 <= 0.0 {
            return f64::INFINITY;
        }
        let alpha = -(d2 / d1).ln() / (g2 / g1).ln();
        if alpha <= 1.0 {
            f64::INFINITY
        } else {
            d2 * g2 / (alpha - 1.0)
        }
    }

    /// Grid point of highest density.
    pub fn mode(&self) -> f64 {
        let i = (0..self.density.len())
            .fold(0, |b, i| if self.density[i] > self.density[b] { i } else { b });
        self.gamma_grid[i]
    }

    /// Mass above each grid point, accumulated from the top to keep small tails accurate.
    pub fn upper_tail(&self) -> Vec<f64> {
        let n = self.gamma_grid.len();
        let mut tail = vec![0.0; n];
        for i in (0..n - 1).rev() {
            let dx = self.gamma_grid[i + 1] - self.gamma_grid[i];
            tail[i] = tail[i + 1] + 0.5 * dx * (self.density[i] + self.density[i + 1]);
        }
        tail
    }
}

/// Smallest Gamma whose upper-tail mass is at most `p` (the 1-p quantile).
pub fn upper_quantile(posterior: &Posterior, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", "must lie in (0, 1)"));
    }
    let tail = posterior.upper_tail();
    let total = tail[0];
    let target = p * total;
    let g = &posterior.gamma_grid;
    for i in 0..g.len() - 1 {
        if tail[i + 1] <= target {
            if tail[i] <= target {
                return Ok(g[i]);
            }
            // the tail is piecewise quadratic; solve the trapezoid segment exactly
            let (d0, d1) = (posterior.density[i], posterior.density[i + 1]);
            let h = g[i + 1] - g[i];
            let need = tail[i] - target;
            let slope = (d1 - d0) / h;
            let u = if slope.abs() * h < 1e-12 * d0.abs().max(d1.abs()) {
                need / d0
            } else {
                (-d0 + (d0 * d0 + 2.0 * slope * need).max(0.0).sqrt()) / slope
            };
            return Ok(g[i] + u.clamp(0.0, h));
        }
    }
    Ok(g[g.len() - 1])
}

/// Model values and Fisher information on a Gamma grid for one design without fixing p.
pub struct ModelBank {
    pub gamma_grid: Vec<f64>,
    ground: Vec<Vec<f64>>,
    state: Vec<Vec<f64>>,
    /// sum a^2, sum a b, sum b^2 with a = dW0/dGamma, b = d(W_state - W0)/dGamma
    fisher_terms: Vec<[f64; 3]>,
}

impl ModelBank {
    pub fn new(design: &Design, gamma_grid: Vec<f64>) -> Result<Self> {
        if gamma_grid.iter().any(|&g| !(g >= 0.0 && g.is_finite())) {
            return Err(invalid("gamma_grid", "rates must be finite and non-negative"));
        }
        let rows = par_map(&gamma_grid, |&g| {
            let (w0, ws) = design.components(g);
            let (d0, ds) = component_derivatives(design, g);
            let mut terms = [0.0; 3];
            for (a, s) in d0.iter().zip(&ds) {
                let b = s - a;
                terms[0] += a * a;
                terms[1] += a * b;
                terms[2] += b * b;
            }
            (w0, ws, terms)
        });
        let mut bank = ModelBank {
            gamma_grid,
            ground: Vec::with_capacity(rows.len()),
            state: Vec::with_capacity(rows.len()),
            fisher_terms: Vec::with_capacity(rows.len()),
        };
        for (w0, ws, t) in rows {
            bank.ground.push(w0);
            bank.state.push(ws);
            bank.fisher_terms.push(t);
        }
        Ok(bank)
    }

    /// Fisher information at grid index i for weight p and noise s.
    pub fn fisher(&self, i: usize, p: f64, s: f64) -> f64 {
        let [a, b, c] = self.fisher_terms[i];
        (a + 2.0 * p * b + p * p * c) / (s * s)
    }

    /// Jeffreys-prior posterior for concatenated t > 0 pixel data.
    pub fn posterior(&self, data: &[f64], p: f64, noise: &NoiseModel) -> Result<Posterior> {
        let s = noise.s;
        let n = self.gamma_grid.len();
        let mut ll = Vec::with_capacity(n);
        let mut lprior = Vec::with_capacity(n);
        for i in 0..n {
            let (g, st) = (&self.ground[i], &self.state[i]);
            if data.len() != g.len() {
                return Err(invalid("data", "pixel count does not match the design"));
            }
            let ss: f64 = data
                .iter()
                .zip(g.iter().zip(st))
                .map(|(d, (g, st))| (d - g - p * (st - g)).powi(2))
                .sum();
            ll.push(-ss / (2.0 * s * s) - data.len() as f64 * 0.5 * (2.0 * std::f64::consts::PI * s * s).ln());
            lprior.push(0.5 * self.fisher(i, p, s).ln());
        }
        Posterior::from_log_terms(self.gamma_grid.clone(), ll, lprior)
    }
}

/// Truncation beyond the grid end tolerated by [`jeffreys_posterior`].
pub const MAX_TAIL_MASS: f64 = 1e-4;

/// Posterior with Jeffreys prior sqrt(I(Gamma)) over the t > 0 snapshots.
pub fn jeffreys_posterior(
    ds: &WignerDataset,
    gamma_grid: &[f64],
    gamma_down: f64,
    noise: &NoiseModel,
) -> Result<Posterior> {
    let design = Design::from_dataset(ds, gamma_down);
    if design.times.is_empty() {
        return Err(invalid("dataset", "no snapshots with t > 0"));
    }
    let bank = ModelBank::new(&design, gamma_grid.to_vec())?;
    let post = bank.posterior(&ds.inference_values(), design.mixture_weight_p, noise)?;
    let tail = post.tail_mass();
    if tail > MAX_TAIL_MASS {
        return Err(Error::GridBoundary { tail_mass: tail, gamma_max: gamma_grid[gamma_grid.len() - 1] });
    }
    Ok(post)
}

/// Sum of squared residuals and best weight p for data = W0 + p (W_state - W0).
fn weight_fit(data: &[f64], ground: &[f64], state: &[f64]) -> (f64, f64) {
    let (mut num, mut den) = (0.0, 0.0);
    for ((d, g), s) in data.iter().zip(ground).zip(state) {
        let b = s - g;
        num += (d - g) * b;
        den += b * b;
    }
    let p = if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 1.0 };
    let sse = data
        .iter()
        .zip(ground.iter().zip(state))
        .map(|(d, (g, s))| (d - g - p * (s - g)).powi(2))
        .sum();
    (p, sse)
}

/// Noise level from second differences along X, robust to smooth signal.
fn roughness_noise(grid: &WignerGrid) -> f64 {
    let nx = grid.xs.len();
    let mut d2: Vec<f64> = Vec::new();
    for ip in 0..grid.ps.len() {
        for ix in 1..nx - 1 {
            d2.push((grid.at(ix + 1, ip) - 2.0 * grid.at(ix, ip) + grid.at(ix - 1, ip)).abs());
        }
    }
    if d2.is_empty() {
        return 0.0;
    }
    d2.sort_by(f64::total_cmp);
    d2[d2.len() / 2] / (0.6745 * 6f64.sqrt())
}

fn snapshot_design(ds: &WignerDataset, idx: usize, theta: f64, gamma_down: f64) -> Design {
    let g = &ds.snapshots[idx];
    Design {
        xs: g.xs.clone(),
        ps: g.ps.clone(),
        times: vec![g.time],
        rotations: vec![theta],
        state: base_state(ds.state_label),
        mixture_weight_p: 1.0,
        gamma_down,
    }
}

fn best_rotation(ds: &WignerDataset, idx: usize, gamma_down: f64, fixed_p: Option<f64>) -> (f64, f64, f64) {
    let data = &ds.snapshots[idx].values;
    let eval = |theta: f64| {
        let (g, s) = snapshot_design(ds, idx, theta, gamma_down).components(0.0);
        match fixed_p {
            Some(p) => {
                let sse: f64 = data
                    .iter()
                    .zip(g.iter().zip(&s))
                    .map(|(d, (g, s))| (d - g - p * (s - g)).powi(2))
                    .sum();
                (p, sse)
            }
            None => weight_fit(data, &g, &s),
        }
    };
    let n = 180;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..n {
        let theta = -std::f64::consts::PI + (i + 1) as f64 * step;
        let sse = eval(theta).1;
        if sse < best.1 {
            best = (theta, sse);
        }
    }
    let (theta, _) = golden_max(|t| -eval(t).1, best.0 - step, best.0 + step, 1e-7);
    let theta = wrap_angle(theta);
    let (p, sse) = eval(theta);
    (theta, p, sse)
}

fn wrap_angle(t: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let w = (t + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI;
    if w <= -std::f64::consts::PI {
        w + tau
    } else {
        w
    }
}

/// Fits the prepared-state weight at t = 0 and, for superpositions, one rotation per
/// snapshot (at Gamma = 0 with relaxation rate `gamma_down`).
pub fn fit_initial_calibration(ds: &WignerDataset, gamma_down: f64) -> Result<Calibration> {
    let first = &ds.snapshots[0];
    if first.time != 0.0 {
        return Err(invalid("dataset", "calibration needs a t = 0 snapshot"));
    }
    let n = ds.snapshots.len();
    let (p, rotations, sse) = if base_state(ds.state_label) == OscillatorState::Superposition {
        let (theta0, p, sse) = best_rotation(ds, 0, gamma_down, None);
        let mut rot = vec![theta0];
        for i in 1..n {
            rot.push(best_rotation(ds, i, gamma_down, Some(p)).0);
        }
        (p, rot, sse)
    } else {
        let (g, s) = snapshot_design(ds, 0, 0.0, gamma_down).components(0.0);
        let (p, sse) = weight_fit(&first.values, &g, &s);
        (p, vec![0.0; n], sse)
    };
    let rms = (sse / first.values.len() as f64).sqrt();
    let noise = roughness_noise(first);
    if rms > 10.0 * noise && rms > 1e-9 {
        return Err(Error::CalibrationFailure { rms, noise });
    }
    Ok(Calibration { mixture_weight_p: p, per_snapshot_rotation: rotations })
}

/// Minimum pixel count for a noise estimate.
pub const MIN_NOISE_PIXELS: usize = 100;

/// Maximum-likelihood pixel standard deviation of residuals against the calibrated
/// model, pooled over all snapshots including t = 0.
pub fn estimate_noise(ds: &WignerDataset, gamma_zero_model: &EvolutionParams) -> Result<NoiseModel> {
    let n = ds.pixel_count();
    if n < MIN_NOISE_PIXELS {
        return Err(Error::InsufficientData { pixels: n, required: MIN_NOISE_PIXELS });
    }
    let mut design = Design::from_dataset(ds, gamma_zero_model.gamma_down);
    design.times = ds.times();
    design.rotations = ds.calibration.per_snapshot_rotation.clone();
    let model = design.model(gamma_zero_model.gamma);
    let data: Vec<f64> = ds.snapshots.iter().flat_map(|s| s.values.iter().copied()).collect();
    let ss: f64 = data.iter().zip(&model).map(|(d, m)| (d - m).powi(2)).sum();
    Ok(NoiseModel { s: (ss / n as f64).sqrt().max(f64::MIN_POSITIVE) })
}

/// Excluded tau_e and the macroscopicity it implies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroscopicityResult {
    pub gamma_threshold: f64,
    pub confidence: f64,
    pub sigma_q_star: f64,
    pub critical_length: f64,
    pub gamma_tau_star: f64,
    pub tau_e_excluded: f64,
    pub mu: f64,
}

/// mu = log10(max over sigma_q of Gamma tau_e(sigma_q)/Gamma_threshold in seconds).
pub fn macroscopicity(
    gamma_threshold: f64,
    device: &DeviceSpec,
    range: &SigmaQRange,
) -> Result<MacroscopicityResult> {
    if !(gamma_threshold.is_finite() && gamma_threshold > 0.0) {
        return Err(invalid("gamma_threshold", "must be positive"));
    }
    let curve = max_dimensionless_rate(device, range)?;
    let m = curve.max_point;
    let tau = m.gamma_tau_star / gamma_threshold;
    Ok(MacroscopicityResult {
        gamma_threshold,
        confidence: 0.95,
        sigma_q_star: m.sigma_q_star,
        critical_length: m.critical_length(),
        gamma_tau_star: m.gamma_tau_star,
        tau_e_excluded: tau,
        mu: tau.log10(),
    })
}

/// Rescales a threshold to another device in proportion to T1, then evaluates mu.
pub fn project_device(
    gamma_threshold_ref: f64,
    t1_ref: f64,
    device_new: &DeviceSpec,
    range: &SigmaQRange,
) -> Result<MacroscopicityResult> {
    if !(t1_ref > 0.0) {
        return Err(invalid("T1_ref", "must be positive"));
    }
    macroscopicity(gamma_threshold_ref * t1_ref / device_new.t1, device_new, range)
}

/// Square lattice [-extent, extent]^2 with n points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub extent: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { extent: 2.4, n: 41 }
    }
}

/// Standard normal deviate for (seed, snapshot, pixel); independent of evaluation order.
pub fn pixel_normal(seed: u64, snapshot: u64, pixel: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(snapshot);
    rng.set_word_pos(pixel as u128 * 4);
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Closed-form snapshots plus independent Gaussian pixel noise of std `noise`.
pub fn synthesize_dataset(
    state: OscillatorState,
    gamma: f64,
    gamma_down: f64,
    times: &[f64],
    grid: GridSpec,
    noise: f64,
    seed: u64,
) -> Result<WignerDataset> {
    let params = EvolutionParams::new(gamma_down, gamma)?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(invalid("noise", "must be non-negative"));
    }
    if grid.n < 2 || !(grid.extent > 0.0) {
        return Err(invalid("grid", "need n >= 2 and a positive extent"));
    }
    let axis = symmetric_axis(grid.extent, grid.n);
    let snapshots = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut g = WignerGrid::from_fn(axis.clone(), axis.clone(), t, |x, p| {
                evolved_wigner_closed(state, x, p, t, &params)
            });
            if noise > 0.0 {
                for (i, v) in g.values.iter_mut().enumerate() {
                    *v += noise * pixel_normal(seed, k as u64, i as u64);
                }
            }
            g
        })
        .collect();
    WignerDataset::new(snapshots, state)
}

/// Gamma that best explains Gamma = 0 superposition data whose coherences also decay
/// with pure dephasing time `t_phi`, when the model ignores dephasing.
pub fn dephasing_bias(
    t_phi: f64,
    gamma_down: f64,
    times: &[f64],
    grid: GridSpec,
    gamma_grid: &[f64],
) -> Result<f64> {
    if !(t_phi > 0.0) {
        return Err(invalid("t_phi", "must be positive"));
    }
    let params = EvolutionParams::new(gamma_down, 0.0)?;
    let axis = symmetric_axis(grid.extent, grid.n);
    let mut data = Vec::new();
    for &t in times {
        let damp = (-t / t_phi).exp();
        for &p in &axis {
            for &x in &axis {
                let pop = 0.5
                    * (evolved_wigner_closed(OscillatorState::Ground, x, p, t, &params)
                        + evolved_wigner_closed(OscillatorState::FockOne, x, p, t, &params));
                let full = evolved_wigner_closed(OscillatorState::Superposition, x, p, t, &params);
                data.push(pop + damp * (full - pop));
            }
        }
    }
    let design = Design {
        xs: axis.clone(),
        ps: axis,
        times: times.to_vec(),
        rotations: vec![0.0; times.len()],
        state: OscillatorState::Superposition,
        mixture_weight_p: 1.0,
        gamma_down,
    };
    let scores = par_map(gamma_grid, |&g| gaussian_log_likelihood(&data, &design.model(g), 1.0));
    let best = (0..scores.len()).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
    Ok(gamma_grid[best])
}
