//! Executable versions of the headline numbers, each with its tolerance and time budget.

use std::time::Instant;

use serde::Serialize;

use crate::constants::HBAR;
use crate::devices::preset;
use crate::diffusion::{
    asymptotic_rate, geometric_factor, max_dimensionless_rate, sigma_l, Method, Regime, SigmaQRange,
};
use crate::error::{Error, Result};
use crate::inference::{
    default_gamma_grid, estimate_noise, fit_initial_calibration, macroscopicity, project_device,
    synthesize_dataset, upper_quantile, Design, GridSpec, ModelBank, MAX_TAIL_MASS,
};
use crate::nonint::{benchmark_inputs, cylinder_compare, nonint_exclusion};
use crate::par::par_map;
use crate::quadrature::logspace;
use crate::wigner::{
    evolve_grid_convolution, evolved_wigner_closed, negativity_metrics, EvolutionParams, OscillatorState,
    WignerGrid,
};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} | {} | {:.2} s (budget {} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.seconds,
            self.budget_seconds
        )
    }
}

pub const CRITERIA: [(u32, &str, f64); 13] = [
    (1, "effective mass", 5.0),
    (2, "zero-point fluctuation", 5.0),
    (3, "diffusion maximum", 10.0),
    (4, "maximum closed form", 10.0),
    (5, "path equivalence", 120.0),
    (6, "Wigner convolution vs closed forms", 60.0),
    (7, "negativity lifetime", 5.0),
    (8, "macroscopicity arithmetic", 10.0),
    (9, "device projection", 30.0),
    (10, "heating bound", 10.0),
    (11, "inference coverage", 600.0),
    (12, "quantile ladder", 600.0),
    (13, "cylinder comparison", 60.0),
];

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() <= rel
}

fn check(ok: bool, detail: String) -> Result<(bool, String)> {
    Ok((ok, detail))
}

fn hbar_device() -> crate::devices::DeviceSpec {
    preset("hbar-2022").expect("built-in preset")
}

const T1_REF: f64 = 85.8e-6;

fn c1() -> Result<(bool, String)> {
    let m = hbar_device().effective_mass();
    check(within(m, 1e-9, 0.02), format!("m_eff = {:.4} ug (want 1.0 ug +- 2%)", m * 1e9))
}

fn c2() -> Result<(bool, String)> {
    let x = hbar_device().x0() / 2f64.sqrt();
    check(within(x, 1.2e-18, 0.05), format!("x0/sqrt2 = {x:.4e} m (want 1.2e-18 m +- 5%)"))
}

fn c3() -> Result<(bool, String)> {
    let m = max_dimensionless_rate(&hbar_device(), &SigmaQRange::default())?.max_point;
    let l = m.critical_length();
    let ok = within(m.gamma_tau_star, 3.5e13, 0.05) && l < 0.5e-6 * 1.5 && l > 0.5e-6 / 1.5;
    check(ok, format!("max Gamma tau_e = {:.4e} at hbar/sigma_q = {:.3e} m (want 3.5e13 +- 5% at 5e-7 m x/ 1.5)", m.gamma_tau_star, l))
}

fn c4() -> Result<(bool, String)> {
    let dev = hbar_device();
    let m = max_dimensionless_rate(&dev, &SigmaQRange::default())?.max_point;
    let f = asymptotic_rate(&dev, m.sigma_q_star, Regime::MaxFormula)?.gamma_tau;
    check(within(f, m.gamma_tau_star, 0.10), format!("closed form {f:.4e} vs scanned {:.4e} (want within 10%)", m.gamma_tau_star))
}

fn c5() -> Result<(bool, String)> {
    let dev = hbar_device();
    let lengths = logspace(1e-8, 1e-3, 20);
    let rows = par_map(&lengths, |&l| -> Result<(f64, f64, f64)> {
        let sq = HBAR / l;
        let g = &dev.geometry;
        let a = geometric_factor(g, dev.density, sq, Method::Analytic)?;
        let q = geometric_factor(g, dev.density, sq, Method::Quadrature)?;
        let b = geometric_factor(g, dev.density, sq, Method::Bruteforce)?;
        Ok((a, q, b))
    });
    let (mut dq, mut db) = (0.0f64, 0.0f64);
    for r in rows {
        let (a, q, b) = r?;
        dq = dq.max((q / a - 1.0).abs());
        db = db.max((b / a - 1.0).abs());
    }
    let xi = (sigma_l(&dev.geometry, HBAR / 1e-3), sigma_l(&dev.geometry, HBAR / 1e-8));
    check(
        dq <= 1e-5 && db <= 1e-3,
        format!(
            "20 points, hbar/sigma_q in [1e-8, 1e-3] m (xi {:.2}..{:.3e}): max rel analytic-quadrature {dq:.2e} (<= 1e-5), analytic-bruteforce {db:.2e} (<= 1e-3)",
            xi.0, xi.1
        ),
    )
}

fn c6() -> Result<(bool, String)> {
    let params = EvolutionParams::new(1.0 / 40e-6, 1e4)?;
    let mut worst = 0.0f64;
    for state in [OscillatorState::FockOne, OscillatorState::Superposition] {
        let start = WignerGrid::model(state, &params, 0.0, 6.0, 201);
        for t in [10e-6, 20e-6, 40e-6] {
            let g = evolve_grid_convolution(&start, t, &params)?;
            for (ip, &p) in g.ps.iter().enumerate() {
                for (ix, &x) in g.xs.iter().enumerate() {
                    let d = (g.at(ix, ip) - evolved_wigner_closed(state, x, p, t, &params)).abs();
                    worst = worst.max(d);
                }
            }
        }
    }
    check(worst < 1e-4, format!("gamma_down = 1/40 us, Gamma = 1e4/s, fock1 and superposition at 10/20/40 us on a +-6 grid of 201^2: max |dW| = {worst:.2e} (< 1e-4)"))
}

fn c7() -> Result<(bool, String)> {
    let params = EvolutionParams::new(1.0 / T1_REF, 0.0)?;
    let r = negativity_metrics(OscillatorState::FockOne, &params, 5.0 * T1_REF)?;
    let want = T1_REF * 2f64.ln();
    match r.t_star {
        Some(t) => check(within(t, want, 1e-6), format!("t* = {t:.9e} s vs T1 ln2 = {want:.9e} s (rel {:.1e}, want 1e-6)", (t / want - 1.0).abs())),
        None => check(false, "no sign change found".into()),
    }
}

fn c8() -> Result<(bool, String)> {
    let dev = hbar_device();
    let r = SigmaQRange::default();
    let a = macroscopicity(1.6e2, &dev, &r)?.mu;
    let b = macroscopicity(6.4e2, &dev, &r)?.mu;
    check((a - 11.3).abs() <= 0.05 && (b - 10.7).abs() <= 0.05, format!("mu(160/s) = {a:.3} (11.3 +- 0.05), mu(640/s) = {b:.3} (10.7 +- 0.05)"))
}

fn c9() -> Result<(bool, String)> {
    let r = SigmaQRange::default();
    let get = |n: &str| preset(n).ok_or_else(|| Error::Unsupported(n.into()));
    let p = project_device(1.6e2, T1_REF, &get("hbar-projected")?, &r)?;
    let c = project_device(1.6e2, T1_REF, &get("phononic-crystal-2022")?, &r)?;
    let s = project_device(1.6e2, T1_REF, &get("saw-2018")?, &r)?;
    let ok = (p.mu - 14.4).abs() <= 0.1
        && within(c.gamma_threshold, 1.37e4, 0.01)
        && (c.mu - 9.0).abs() <= 0.3
        && within(s.gamma_threshold, 9.15e4, 0.01)
        && (s.mu - 8.6).abs() <= 0.3;
    check(
        ok,
        format!(
            "projected mu = {:.3} (14.4 +- 0.1); phononic Gamma = {:.4e}/s mu = {:.3} (9.0 +- 0.3); saw Gamma = {:.4e}/s mu = {:.3} (8.6 +- 0.3)",
            p.mu, c.gamma_threshold, c.mu, s.gamma_threshold, s.mu
        ),
    )
}

fn c10() -> Result<(bool, String)> {
    let b = nonint_exclusion(0.016, &hbar_device(), &SigmaQRange::default())?;
    let tau = b.tau_e_max.unwrap_or(f64::INFINITY);
    let l = b.critical_length;
    let ok = within(tau, 1.9e11, 0.10) && l < 5e-7 * 1.5 && l > 5e-7 / 1.5;
    check(ok, format!("Gamma bound {:.1}/s, tau_e < {tau:.4e} s at hbar/sigma_q = {l:.3e} m (want 1.9e11 +- 10% at 5e-7 m x/ 1.5)", b.gamma_bound))
}

/// Summary of repeated synthetic inference at one true rate.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageSummary {
    pub gamma_true: f64,
    pub replicates: usize,
    /// Fraction of replicates whose 95% upper bound is at least gamma_true.
    pub coverage: f64,
    pub median_q95: f64,
    pub median_q999: f64,
    pub median_q1e7: f64,
    /// Every posterior had q95 < q(1-1e-3) < q(1-1e-7).
    pub ladder_ordered: bool,
}

/// Synthesizes Fock datasets (s = 0.034, snapshots at 0/10/20/40 us, T1 = 85.8 us), runs the
/// full calibration, noise and Jeffreys-posterior chain on each, and summarizes the bounds.
pub fn coverage_study(gamma_true: f64, replicates: usize, seed0: u64) -> Result<CoverageSummary> {
    let gd = 1.0 / T1_REF;
    let times = [0.0, 10e-6, 20e-6, 40e-6];
    let grid = GridSpec::default();
    let template = synthesize_dataset(OscillatorState::FockOne, 0.0, gd, &times, grid, 0.0, 0)?;
    let bank = ModelBank::new(&Design::from_dataset(&template, gd), default_gamma_grid())?;
    let seeds: Vec<u64> = (0..replicates as u64).map(|i| seed0 + i).collect();
    let rows = par_map(&seeds, |&seed| -> Result<[f64; 3]> {
        let ds = synthesize_dataset(OscillatorState::FockOne, gamma_true, gd, &times, grid, 0.034, seed)?;
        let cal = fit_initial_calibration(&ds, gd)?;
        let p = cal.mixture_weight_p;
        let ds = ds.with_calibration(cal)?;
        let noise = estimate_noise(&ds, &EvolutionParams::new(gd, 0.0)?)?;
        let post = bank.posterior(&ds.inference_values(), p, &noise)?;
        let tail = post.tail_mass();
        if tail > MAX_TAIL_MASS {
            return Err(Error::GridBoundary { tail_mass: tail, gamma_max: bank.gamma_grid[bank.gamma_grid.len() - 1] });
        }
        Ok([upper_quantile(&post, 0.05)?, upper_quantile(&post, 1e-3)?, upper_quantile(&post, 1e-7)?])
    });
    let rows: Vec<[f64; 3]> = rows.into_iter().collect::<Result<_>>()?;
    let n = rows.len();
    let median = |k: usize| {
        let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        v.sort_by(f64::total_cmp);
        if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
    };
    Ok(CoverageSummary {
        gamma_true,
        replicates: n,
        coverage: rows.iter().filter(|r| r[0] >= gamma_true).count() as f64 / n as f64,
        median_q95: median(0),
        median_q999: median(1),
        median_q1e7: median(2),
        ladder_ordered: rows.iter().all(|r| r[0] < r[1] && r[1] < r[2]),
    })
}

fn coverage_pair() -> Result<(CoverageSummary, CoverageSummary)> {
    Ok((coverage_study(0.0, 200, 1)?, coverage_study(300.0, 200, 100_001)?))
}

fn c11(pair: &(CoverageSummary, CoverageSummary)) -> (bool, String) {
    let (z, h) = pair;
    let band = |c: f64| (0.90..=1.0).contains(&c);
    let ok = band(z.coverage)
        && band(h.coverage)
        && z.median_q95 <= 1.6e2 * 4.0
        && z.median_q95 >= 1.6e2 / 4.0;
    (
        ok,
        format!(
            "coverage {:.3} at Gamma=0 and {:.3} at Gamma=300/s (0.95 +- 0.05, 200 replicates each); median 95% bound at Gamma=0: {:.1}/s (160/s x/ 4)",
            z.coverage, h.coverage, z.median_q95
        ),
    )
}

fn c12(pair: &(CoverageSummary, CoverageSummary)) -> (bool, String) {
    let (z, h) = pair;
    (
        z.ladder_ordered && h.ladder_ordered,
        format!(
            "all 400 posteriors ordered; medians at Gamma=0: {:.1} < {:.1} < {:.1} /s",
            z.median_q95, z.median_q999, z.median_q1e7
        ),
    )
}

fn c13() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for ell in [1, 40] {
        let rows = cylinder_compare(&benchmark_inputs(ell)?, 1e-9, 1e-3, 25)?;
        let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let inside = rows.iter().filter(|r| (0.75..=1.25).contains(&r.ratio)).count();
        ok &= inside == rows.len();
        parts.push(format!("ell={ell}: closed/(reference/2) spans {lo:.2e}..{hi:.2e}, {inside}/{} points in [0.75, 1.25]", rows.len()));
    }
    check(ok, format!("r_C in [1e-9, 1e-3] m; {}", parts.join("; ")))
}

fn finish(id: u32, start: Instant, r: Result<(bool, String)>) -> Criterion {
    let (_, title, budget) = CRITERIA[(id - 1) as usize];
    let seconds = start.elapsed().as_secs_f64();
    let (ok, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    let over = seconds > budget;
    Criterion {
        id,
        title,
        passed: ok && !over,
        detail: if over { format!("{detail}; over time budget") } else { detail },
        seconds,
        budget_seconds: budget,
    }
}

/// Runs the selected criteria in order (all when `ids` is empty).
pub fn run_criteria(ids: &[u32]) -> Vec<Criterion> {
    let want = |i: u32| ids.is_empty() || ids.contains(&i);
    let mut out = Vec::new();
    let singles: [(u32, fn() -> Result<(bool, String)>); 10] =
        [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8), (9, c9), (10, c10)];
    for (id, f) in singles {
        if want(id) {
            let t = Instant::now();
            out.push(finish(id, t, f()));
        }
    }
    if want(11) || want(12) {
        let t = Instant::now();
        let pair = coverage_pair();
        let secs = t.elapsed().as_secs_f64();
        for (id, f) in [(11u32, c11 as fn(&_) -> _), (12, c12)] {
            if want(id) {
                let mut c = finish(id, t, pair.as_ref().map(f).map_err(|e| Error::Unsupported(e.to_string())));
                c.seconds = secs;
                out.push(c);
            }
        }
    }
    if want(13) {
        let t = Instant::now();
        out.push(finish(13, t, c13()));
    }
    out
}

/// Row of the macroscopicity table for resonator experiments.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub experiment: &'static str,
    pub device: &'static str,
    pub year: u32,
    pub gamma_threshold: f64,
    pub mu: f64,
    pub mu_published: f64,
}

pub fn paper_table() -> Result<Vec<TableRow>> {
    let r = SigmaQRange::default();
    let rows = [
        ("Bulk acoustic waves", "hbar-2022", 2022, 11.3),
        ("Phononic crystal resonator", "phononic-crystal-2022", 2022, 9.0),
        ("Surface acoustic waves", "saw-2018", 2018, 8.6),
    ];
    rows.iter()
        .map(|&(experiment, device, year, mu_published)| {
            let dev = preset(device).ok_or_else(|| Error::Unsupported(device.into()))?;
            let m = project_device(1.6e2, T1_REF, &dev, &r)?;
            Ok(TableRow { experiment, device, year, gamma_threshold: m.gamma_threshold, mu: m.mu, mu_published })
        })
        .collect()
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = format!("{:<28} {:<22} {:>4} {:>12} {:>7} {:>9}\n", "experiment", "device", "year", "Gamma [1/s]", "mu", "published");
    for r in rows {
        s.push_str(&format!(
            "{:<28} {:<22} {:>4} {:>12.4e} {:>7.2} {:>9.1}\n",
            r.experiment, r.device, r.year, r.gamma_threshold, r.mu, r.mu_published
        ));
    }
    s
}
