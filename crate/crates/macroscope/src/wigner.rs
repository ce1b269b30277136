//! Wigner functions of the oscillator under relaxation gamma_down and diffusion Gamma.
//!
//! Quadratures are dimensionless: W0(X, P) = exp(-X^2 - P^2)/pi.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{bisect, logspace, trapezoid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscillatorState {
    Ground,
    FockOne,
    /// (|0> + |1>)/sqrt(2)
    Superposition,
    /// p |1><1| + (1-p) |0><0|
    Mixture { weight_p: f64 },
}

impl OscillatorState {
    pub fn validate(&self) -> Result<()> {
        if let OscillatorState::Mixture { weight_p } = self {
            if !(0.0..=1.0).contains(weight_p) {
                return Err(invalid("weight_p", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Rotationally symmetric in phase space.
    pub fn is_circular(&self) -> bool {
        !matches!(self, OscillatorState::Superposition)
    }

    /// Parses `ground`, `fock1`, `superposition` or `mixture:<p>`.
    pub fn parse(s: &str) -> Result<Self> {
        let state = match s.trim().to_ascii_lowercase().as_str() {
            "ground" | "0" => OscillatorState::Ground,
            "fock1" | "fock" | "1" => OscillatorState::FockOne,
            "superposition" | "0+1" => OscillatorState::Superposition,
            other => match other.strip_prefix("mixture:") {
                Some(p) => OscillatorState::Mixture {
                    weight_p: p.parse().map_err(|_| invalid("state", format!("bad weight {p:?}")))?,
                },
                None => return Err(invalid("state", format!("unknown state {s:?}"))),
            },
        };
        state.validate()?;
        Ok(state)
    }

    pub fn label(&self) -> String {
        match self {
            OscillatorState::Ground => "ground".into(),
            OscillatorState::FockOne => "fock1".into(),
            OscillatorState::Superposition => "superposition".into(),
            OscillatorState::Mixture { weight_p } => format!("mixture:{weight_p}"),
        }
    }
}

/// Relaxation rate and diffusion rate of the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub gamma_down: f64,
    pub gamma: f64,
}

impl EvolutionParams {
    pub fn new(gamma_down: f64, gamma: f64) -> Result<Self> {
        if !(gamma_down.is_finite() && gamma_down > 0.0) {
            return Err(invalid("gamma_down", "must be positive"));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(invalid("Gamma", "must be non-negative"));
        }
        Ok(EvolutionParams { gamma_down, gamma })
    }

    /// T~ = 1/2 + Gamma/gamma_down.
    pub fn t_tilde(&self) -> f64 {
        0.5 + self.gamma / self.gamma_down
    }

    /// R(t) = 1 + 2 (e^{gamma_down t} - 1) T~.
    pub fn r(&self, t: f64) -> f64 {
        1.0 + 2.0 * (self.gamma_down * t).exp_m1() * self.t_tilde()
    }

    /// S(t) = (1 + 2 Gamma/gamma_down)(1 - e^{-gamma_down t}).
    pub fn s(&self, t: f64) -> f64 {
        -(1.0 + 2.0 * self.gamma / self.gamma_down) * (-self.gamma_down * t).exp_m1()
    }
}

/// W at t = 0.
pub fn initial_wigner(state: OscillatorState, x: f64, p: f64) -> f64 {
    let r2 = x * x + p * p;
    let g = (-r2).exp() / PI;
    match state {
        OscillatorState::Ground => g,
        OscillatorState::FockOne => (2.0 * r2 - 1.0) * g,
        OscillatorState::Superposition => 0.5 * ((1.0 + SQRT_2 * x).powi(2) - 1.0 + 2.0 * p * p) * g,
        OscillatorState::Mixture { weight_p } => (1.0 + weight_p * (2.0 * r2 - 2.0)) * g,
    }
}

/// Steady state: Gaussian of width 1 + 2 Gamma/gamma_down.
pub fn steady_state_wigner(x: f64, p: f64, params: &EvolutionParams) -> f64 {
    let w = 2.0 * params.t_tilde();
    (-(x * x + p * p) / w).exp() / (PI * w)
}

/// Closed-form W(X, P; t). Written with R' = R e^{-gamma_down t} so nothing overflows.
pub fn evolved_wigner_closed(
    state: OscillatorState,
    x: f64,
    p: f64,
    t: f64,
    params: &EvolutionParams,
) -> f64 {
    debug_assert!(t >= 0.0);
    let gt = params.gamma_down * t;
    if gt > 700.0 {
        return steady_state_wigner(x, p, params);
    }
    let tt = params.t_tilde();
    let inv = (-gt).exp();
    let rp = inv + 2.0 * tt * (1.0 - inv);
    let r2 = x * x + p * p;
    let envelope = (-r2 / rp).exp() / PI;
    let w0 = envelope / rp;
    let w1 = || {
        let num = 4.0 * tt * tt * inv * inv + 2.0 * r2 * inv + 4.0 * tt * tt * (1.0 - 2.0 * inv)
            - inv * inv;
        num * envelope / rp.powi(3)
    };
    match state {
        OscillatorState::Ground => w0,
        OscillatorState::FockOne => w1(),
        OscillatorState::Mixture { weight_p } => weight_p * w1() + (1.0 - weight_p) * w0,
        OscillatorState::Superposition => {
            let h = (-0.5 * gt).exp();
            let num = 8f64.sqrt() * h * x * tt + 4.0 * tt * tt
                - SQRT_2 * h * inv * x * (2.0 * tt - 1.0)
                + 2.0 * tt * (2.0 * tt - 1.0) * inv * inv
                + inv * (r2 + 2.0 * tt - 8.0 * tt * tt);
            num * envelope / rp.powi(3)
        }
    }
}

/// Sampled W on a uniform (X, P) lattice. `values` is row-major with P as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Vec<f64>,
    /// Seconds since preparation.
    pub time: f64,
}

fn check_uniform(axis: &[f64], name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(invalid(name, "need at least two points"));
    }
    let d = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if !(d > 0.0) {
        return Err(invalid(name, "must be ascending"));
    }
    for (i, w) in axis.windows(2).enumerate() {
        if ((w[1] - w[0]) - d).abs() > 1e-9 * d.abs().max(1e-300) * 10.0 {
            return Err(invalid(name, format!("non-uniform spacing at index {}", i + 1)));
        }
    }
    Ok(())
}

/// n equally spaced points on [-extent, extent].
pub fn symmetric_axis(extent: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -extent + 2.0 * extent * i as f64 / (n - 1) as f64).collect()
}

impl WignerGrid {
    pub fn new(xs: Vec<f64>, ps: Vec<f64>, values: Vec<f64>, time: f64) -> Result<Self> {
        check_uniform(&xs, "X axis")?;
        check_uniform(&ps, "P axis")?;
        if values.len() != xs.len() * ps.len() {
            return Err(invalid("values", "length must equal len(xs)*len(ps)"));
        }
        Ok(WignerGrid { xs, ps, values, time })
    }

    /// Samples `f(X, P)` on the lattice.
    pub fn from_fn(xs: Vec<f64>, ps: Vec<f64>, time: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = ps.iter().flat_map(|&p| xs.iter().map(move |&x| (x, p))).map(|(x, p)| f(x, p));
        let values = values.collect();
        WignerGrid { xs, ps, values, time }
    }

    /// Square lattice over [-extent, extent]^2 with the closed-form W at time t.
    pub fn model(
        state: OscillatorState,
        params: &EvolutionParams,
        t: f64,
        extent: f64,
        n: usize,
    ) -> Self {
        let axis = symmetric_axis(extent, n);
        WignerGrid::from_fn(axis.clone(), axis, t, |x, p| {
            evolved_wigner_closed(state, x, p, t, params)
        })
    }

    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.xs.len() + ix]
    }

    pub fn dx(&self) -> f64 {
        (self.xs[self.xs.len() - 1] - self.xs[0]) / (self.xs.len() - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.ps[self.ps.len() - 1] - self.ps[0]) / (self.ps.len() - 1) as f64
    }

    pub fn same_layout(&self, other: &WignerGrid) -> bool {
        self.xs == other.xs && self.ps == other.ps
    }

    /// Trapezoid estimate of the integral of W over the lattice.
    pub fn normalization(&self) -> f64 {
        let rows: Vec<f64> = (0..self.ps.len())
            .map(|ip| trapezoid(&self.xs, &self.values[ip * self.xs.len()..(ip + 1) * self.xs.len()]))
            .collect();
        trapezoid(&self.ps, &rows)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |W| on the outer ring divided by the largest |W| anywhere.
    pub fn boundary_ratio(&self) -> f64 {
        let (nx, np) = (self.xs.len(), self.ps.len());
        let mut edge: f64 = 0.0;
        for ix in 0..nx {
            edge = edge.max(self.at(ix, 0).abs()).max(self.at(ix, np - 1).abs());
        }
        for ip in 0..np {
            edge = edge.max(self.at(0, ip).abs()).max(self.at(nx - 1, ip).abs());
        }
        edge / self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Bilinear value at (x, p); `None` outside the lattice.
    pub fn bilinear(&self, x: f64, p: f64) -> Option<f64> {
        let (fx, fp) = (self.frac_index(x, &self.xs)?, self.frac_index(p, &self.ps)?);
        let (ix, ip) = (fx.floor() as usize, fp.floor() as usize);
        let ix = ix.min(self.xs.len() - 2);
        let ip = ip.min(self.ps.len() - 2);
        let (tx, tp) = (fx - ix as f64, fp - ip as f64);
        let v00 = self.at(ix, ip);
        let v10 = self.at(ix + 1, ip);
        let v01 = self.at(ix, ip + 1);
        let v11 = self.at(ix + 1, ip + 1);
        Some((1.0 - tp) * ((1.0 - tx) * v00 + tx * v10) + tp * ((1.0 - tx) * v01 + tx * v11))
    }

    /// Cubic-convolution (Keys, a = -1/2) value at (x, p); samples beyond the lattice count as 0.
    pub fn bicubic(&self, x: f64, p: f64) -> f64 {
        let fx = (x - self.xs[0]) / self.dx();
        let fp = (p - self.ps[0]) / self.dp();
        let (nx, np) = (self.xs.len() as i64, self.ps.len() as i64);
        if fx < -2.0 || fp < -2.0 || fx > (nx + 1) as f64 || fp > (np + 1) as f64 {
            return 0.0;
        }
        let (ix, ip) = (fx.floor() as i64, fp.floor() as i64);
        let (tx, tp) = (fx - ix as f64, fp - ip as f64);
        let wx = keys_weights(tx);
        let wp = keys_weights(tp);
        let mut acc = 0.0;
        for (j, wpj) in wp.iter().enumerate() {
            let row = ip - 1 + j as i64;
            if row < 0 || row >= np {
                continue;
            }
            let mut racc = 0.0;
            for (i, wxi) in wx.iter().enumerate() {
                let col = ix - 1 + i as i64;
                if col < 0 || col >= nx {
                    continue;
                }
                racc += wxi * self.at(col as usize, row as usize);
            }
            acc += wpj * racc;
        }
        acc
    }

    fn frac_index(&self, v: f64, axis: &[f64]) -> Option<f64> {
        let d = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
        let f = (v - axis[0]) / d;
        let top = (axis.len() - 1) as f64;
        let slack = 1e-9;
        if f < -slack || f > top + slack {
            None
        } else {
            Some(f.clamp(0.0, top))
        }
    }
}

fn keys_weights(t: f64) -> [f64; 4] {
    let a = -0.5;
    let w = |s: f64| {
        let s = s.abs();
        if s <= 1.0 {
            (a + 2.0) * s * s * s - (a + 3.0) * s * s + 1.0
        } else if s < 2.0 {
            a * s * s * s - 5.0 * a * s * s + 8.0 * a * s - 4.0 * a
        } else {
            0.0
        }
    };
    [w(1.0 + t), w(t), w(1.0 - t), w(2.0 - t)]
}

/// Boundary-to-peak ratio above which [`evolve_grid_convolution`] refuses a grid.
pub const MARGIN_RATIO: f64 = 1e-5;

/// Rescale by e^{gamma_down t/2}, then blur with a Gaussian of variance S(t)/2 per axis.
pub fn evolve_grid_convolution(
    grid: &WignerGrid,
    t: f64,
    params: &EvolutionParams,
) -> Result<WignerGrid> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", "must be finite and non-negative"));
    }
    let ratio = grid.boundary_ratio();
    if ratio > MARGIN_RATIO {
        let extent = grid.xs[grid.xs.len() - 1].abs().max(grid.xs[0].abs());
        let required = extent * (MARGIN_RATIO.ln() / ratio.ln()).sqrt().max(1.0) * 1.05;
        return Err(Error::GridMargin { ratio, required_span: required });
    }
    let scale = (0.5 * params.gamma_down * t).exp();
    let mut out = grid.clone();
    out.time = grid.time + t;
    if scale != 1.0 {
        let jac = scale * scale;
        for (ip, &p) in grid.ps.iter().enumerate() {
            for (ix, &x) in grid.xs.iter().enumerate() {
                out.values[ip * grid.xs.len() + ix] = jac * grid.bicubic(x * scale, p * scale);
            }
        }
    }
    let s = params.s(t);
    if s > 0.0 {
        let sigma = (0.5 * s).sqrt();
        let nx = grid.xs.len();
        let kx = kernel(sigma, grid.dx());
        let kp = kernel(sigma, grid.dp());
        let mut tmp = vec![0.0; out.values.len()];
        for ip in 0..grid.ps.len() {
            let row = &out.values[ip * nx..(ip + 1) * nx];
            convolve_into(row, &kx, &mut tmp[ip * nx..(ip + 1) * nx]);
        }
        let np = grid.ps.len();
        let mut col = vec![0.0; np];
        let mut res = vec![0.0; np];
        for ix in 0..nx {
            for ip in 0..np {
                col[ip] = tmp[ip * nx + ix];
            }
            convolve_into(&col, &kp, &mut res);
            for ip in 0..np {
                out.values[ip * nx + ix] = res[ip];
            }
        }
    }
    Ok(out)
}

/// Discrete Gaussian weights on offsets |k d| <= 6 sigma, normalized to unit sum.
fn kernel(sigma: f64, d: f64) -> Vec<f64> {
    let half = (6.0 * sigma / d).floor() as usize;
    let mut w: Vec<f64> =
        (0..=2 * half).map(|i| (-0.5 * ((i as f64 - half as f64) * d / sigma).powi(2)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn convolve_into(src: &[f64], k: &[f64], dst: &mut [f64]) {
    let half = (k.len() / 2) as i64;
    let n = src.len() as i64;
    for i in 0..n {
        let mut acc = 0.0;
        for (j, w) in k.iter().enumerate() {
            let src_i = i + j as i64 - half;
            if src_i >= 0 && src_i < n {
                acc += w * src[src_i as usize];
            }
        }
        dst[i as usize] = acc;
    }
}

/// Grid rotated by `theta` about the origin, plus the number of samples that fell outside.
pub fn rotate_grid(grid: &WignerGrid, theta: f64) -> Result<(WignerGrid, usize)> {
    if !(theta.abs() <= PI) {
        return Err(invalid("theta", "must satisfy |theta| <= pi"));
    }
    let (sn, cs) = theta.sin_cos();
    let mut out = grid.clone();
    let mut missing = 0;
    for (ip, &p) in grid.ps.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            let sx = x * cs + p * sn;
            let sp = -x * sn + p * cs;
            out.values[ip * grid.xs.len() + ix] = match grid.bilinear(sx, sp) {
                Some(v) => v,
                None => {
                    missing += 1;
                    0.0
                }
            };
        }
    }
    Ok((out, missing))
}

/// Minimum of W over phase space through time, and when it first stops being negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityReport {
    pub times: Vec<f64>,
    pub min_values: Vec<f64>,
    pub t_star: Option<f64>,
}

/// Minimum of W(., .; t) over phase space.
pub fn min_wigner(state: OscillatorState, t: f64, params: &EvolutionParams) -> f64 {
    let w = |x: f64, p: f64| evolved_wigner_closed(state, x, p, t, params);
    if state.is_circular() {
        let radial = |r: f64| w(r, 0.0);
        let n = 120;
        let r_max = 6.0 * (2.0 * params.t_tilde()).sqrt().max(1.0);
        (0..=n).map(|i| radial(r_max * i as f64 / n as f64)).fold(f64::INFINITY, f64::min)
    } else {
        let axis = symmetric_axis(4.0, 41);
        let mut best = (0.0, 0.0, f64::INFINITY);
        for &p in &axis {
            for &x in &axis {
                let v = w(x, p);
                if v < best.2 {
                    best = (x, p, v);
                }
            }
        }
        nelder_mead_min(|x, p| w(x, p), best.0, best.1, 0.2)
    }
}

fn nelder_mead_min(f: impl Fn(f64, f64) -> f64, x0: f64, p0: f64, step: f64) -> f64 {
    let mut s = [(x0, p0), (x0 + step, p0), (x0, p0 + step)];
    let mut v = [f(s[0].0, s[0].1), f(s[1].0, s[1].1), f(s[2].0, s[2].1)];
    for _ in 0..500 {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        if (v[w] - v[b]).abs() < 1e-15 && ((s[w].0 - s[b].0).abs() + (s[w].1 - s[b].1).abs()) < 1e-10 {
            break;
        }
        let c = ((s[b].0 + s[m].0) / 2.0, (s[b].1 + s[m].1) / 2.0);
        let refl = (2.0 * c.0 - s[w].0, 2.0 * c.1 - s[w].1);
        let fr = f(refl.0, refl.1);
        if fr < v[b] {
            let exp = (3.0 * c.0 - 2.0 * s[w].0, 3.0 * c.1 - 2.0 * s[w].1);
            let fe = f(exp.0, exp.1);
            if fe < fr {
                s[w] = exp;
                v[w] = fe;
            } else {
                s[w] = refl;
                v[w] = fr;
            }
        } else if fr < v[m] {
            s[w] = refl;
            v[w] = fr;
        } else {
            let con = ((c.0 + s[w].0) / 2.0, (c.1 + s[w].1) / 2.0);
            let fc = f(con.0, con.1);
            if fc < v[w] {
                s[w] = con;
                v[w] = fc;
            } else {
                for i in [m, w] {
                    s[i] = ((s[i].0 + s[b].0) / 2.0, (s[i].1 + s[b].1) / 2.0);
                    v[i] = f(s[i].0, s[i].1);
                }
            }
        }
    }
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Samples the minimum on t = 0 plus 64 log-spaced times up to `t_max` and locates
/// the first loss of negativity by bisection to 1e-12 T1.
pub fn negativity_metrics(
    state: OscillatorState,
    params: &EvolutionParams,
    t_max: f64,
) -> Result<NegativityReport> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", "must be positive"));
    }
    state.validate()?;
    let mut times = vec![0.0];
    times.extend(logspace(t_max * 1e-6, t_max, 64));
    let min_values: Vec<f64> = times.iter().map(|&t| min_wigner(state, t, params)).collect();
    let signal = |t: f64| {
        if state.is_circular() {
            evolved_wigner_closed(state, 0.0, 0.0, t, params)
        } else {
            // rounding noise near the root must not count as negativity
            min_wigner(state, t, params) + 1e-13
        }
    };
    let mut t_star = None;
    let mut prev = (times[0], signal(times[0]));
    for &t in &times[1..] {
        let v = signal(t);
        if prev.1 < 0.0 && v >= 0.0 {
            let tol = 1e-12 / params.gamma_down;
            t_star = Some(bisect(signal, prev.0, t, tol));
            break;
        }
        prev = (t, v);
    }
    Ok(NegativityReport { times, min_values, t_star })
}
