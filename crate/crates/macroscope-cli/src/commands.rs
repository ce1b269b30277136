use std::path::Path;
use std::process::ExitCode;

use macroscope::constants::HBAR;
use macroscope::devices::{device_to_json, parse_device_json, preset, pure_dephasing_time, DeviceSpec, PRESET_NAMES};
use macroscope::diffusion::{
    asymptotic_rate, geometric_factor, max_dimensionless_rate, maximize_curve, DiffusionCurve, Method, Regime,
    SigmaQRange,
};
use macroscope::inference::{
    estimate_noise, fit_initial_calibration, jeffreys_posterior, macroscopicity, project_device,
    synthesize_dataset, upper_quantile, GridSpec, MacroscopicityResult,
};
use macroscope::io::{dataset_to_csv, load_dataset};
use macroscope::nonint::{benchmark_inputs, comparison_csv, cylinder_compare, nonint_exclusion};
use macroscope::quadrature::logspace;
use macroscope::reproduce::{format_table, paper_table, run_criteria};
use macroscope::wigner::{
    evolve_grid_convolution, evolved_wigner_closed, symmetric_axis, EvolutionParams, OscillatorState, WignerGrid,
};
use macroscope::inference::WignerDataset;
use serde_json::{json, Value};

use crate::run::{Run, DEFAULT_SEED};
use crate::{Cli, Cmd, DeviceArg, EvolveMethod, Format, MethodArg, RangeArgs};

pub enum Failure {
    Usage(String),
    Domain(macroscope::Error),
}

impl From<macroscope::Error> for Failure {
    fn from(e: macroscope::Error) -> Self {
        Failure::Domain(e)
    }
}

type Res<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Usage(msg.into()))
}

fn load_device(arg: &DeviceArg) -> Res<(DeviceSpec, String)> {
    if let Some(d) = preset(&arg.device) {
        let j = device_to_json(&d);
        return Ok((d, j));
    }
    let path = Path::new(&arg.device);
    if !path.exists() {
        return usage(format!(
            "unknown device `{}`: not a preset ({}) and no such file",
            arg.device,
            PRESET_NAMES.join(", ")
        ));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Domain(e.into()))?;
    let d = parse_device_json(&text)?;
    Ok((d.clone(), device_to_json(&d)))
}

fn range(r: &RangeArgs) -> Res<SigmaQRange> {
    let def = SigmaQRange::default();
    let min = match (r.sigma_q_min, r.length_max) {
        (Some(s), _) => s,
        (None, Some(l)) => HBAR / l,
        _ => def.min,
    };
    let max = match (r.sigma_q_max, r.length_min) {
        (Some(s), _) => s,
        (None, Some(l)) => HBAR / l,
        _ => def.max,
    };
    Ok(SigmaQRange { min, max, points: r.points })
}

fn range_json(r: &SigmaQRange) -> Value {
    json!({ "sigma_q_min": r.min, "sigma_q_max": r.max, "points": r.points })
}

fn parse_list(s: &str, what: &str) -> Res<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().or_else(|_| usage(format!("cannot parse `{v}` in --{what}"))))
        .collect()
}

fn parse_times(s: &str) -> Res<Vec<f64>> {
    Ok(parse_list(s, "times")?.into_iter().map(|t| t * 1e-6).collect())
}

fn parse_grid(s: &str) -> Res<GridSpec> {
    let (a, b) = s.split_once(':').ok_or_else(|| Failure::Usage("--grid expects extent:points".into()))?;
    let extent = a.trim().parse().or_else(|_| usage("--grid extent must be a number"))?;
    let n = b.trim().parse().or_else(|_| usage("--grid points must be an integer"))?;
    Ok(GridSpec { extent, n })
}

fn parse_state(s: &str) -> Res<OscillatorState> {
    OscillatorState::parse(s).or_else(|e| usage(e.to_string()))
}

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(cli: &Cli, json_value: &Value, csv: Option<&str>) {
    match (cli.format, csv) {
        (Format::Csv, Some(c)) => say(c),
        _ => say(&(serde_json::to_string_pretty(json_value).expect("json") + "\n")),
    }
}

const QUAD_TOLERANCES: &str = "quadrature rel 1e-12, golden-section ln sigma_q 1e-7";

pub fn dispatch(cli: &Cli) -> Res<ExitCode> {
    let out = &cli.out;
    match &cli.cmd {
        Cmd::Device { device } => {
            let (d, dj) = load_device(device)?;
            let t_phi = d.t2.map(|t2| pure_dephasing_time(d.t1, t2)).transpose()?;
            let report = json!({
                "device": serde_json::from_str::<Value>(&dj).expect("device json"),
                "effective_mass_kg": d.effective_mass(),
                "x0_m": d.x0(),
                "x0_over_sqrt2_m": d.x0() / 2f64.sqrt(),
                "gamma_down_per_s": d.gamma_down(),
                "T_phi_s": t_phi.map(|t| if t.is_finite() { json!(t) } else { json!("infinite") }),
            });
            let mut run = Run::new("device", json!({ "device": device.device }), out).device_json(&dj);
            run.write_json("device.json", &report)?;
            run.finish()?;
            emit(cli, &report, None);
        }
        Cmd::DiffusionCurve { device, range: r, method } => {
            let (d, dj) = load_device(device)?;
            let rg = range(r)?;
            let curve = curve_with(&d, &rg, *method)?;
            let summary = curve_summary(&curve);
            let mut run = Run::new("diffusion-curve", json!({ "range": range_json(&rg), "method": method_name(*method) }), out)
                .device_json(&dj)
                .tolerances(json!(QUAD_TOLERANCES));
            let csv = curve.to_csv();
            run.write("diffusion_curve.csv", &csv)?;
            run.write_json("diffusion_summary.json", &summary)?;
            run.finish()?;
            emit(cli, &summary, Some(&csv));
        }
        Cmd::MaxDiffusion { device, range: r } => {
            let (d, dj) = load_device(device)?;
            let rg = range(r)?;
            let curve = max_dimensionless_rate(&d, &rg)?;
            let mut summary = curve_summary(&curve);
            let m = curve.max_point;
            summary["max_formula"] = match asymptotic_rate(&d, m.sigma_q_star, Regime::MaxFormula) {
                Ok(a) => json!(a.gamma_tau),
                Err(_) => Value::Null,
            };
            summary["r_csl_star_m"] = json!(macroscope::devices::csl_map(1.0, m.sigma_q_star).r_csl);
            let mut run = Run::new("max-diffusion", json!({ "range": range_json(&rg) }), out)
                .device_json(&dj)
                .tolerances(json!(QUAD_TOLERANCES));
            run.write_json("max_diffusion.json", &summary)?;
            run.finish()?;
            emit(cli, &summary, None);
        }
        Cmd::Evolve { state, gamma, gamma_down, device, times, grid, method } => {
            let st = parse_state(state)?;
            let gd = match gamma_down {
                Some(g) => *g,
                None => load_device(device)?.0.gamma_down(),
            };
            let params = EvolutionParams::new(gd, *gamma)?;
            let ts = parse_times(times)?;
            let gs = parse_grid(grid)?;
            if gs.n < 2 {
                return usage("--grid needs at least 2 points");
            }
            let axis = symmetric_axis(gs.extent, gs.n);
            let start = WignerGrid::from_fn(axis.clone(), axis.clone(), 0.0, |x, p| evolved_wigner_closed(st, x, p, 0.0, &params));
            let mut run = Run::new(
                "evolve",
                json!({ "state": st.label(), "gamma": gamma, "gamma_down": gd, "times_s": ts, "grid": [gs.extent, gs.n], "method": matches!(method, EvolveMethod::Convolution) }),
                out,
            );
            let mut rows = Vec::new();
            for (i, &t) in ts.iter().enumerate() {
                let g = match method {
                    EvolveMethod::Closed => WignerGrid::from_fn(axis.clone(), axis.clone(), t, |x, p| evolved_wigner_closed(st, x, p, t, &params)),
                    EvolveMethod::Convolution => evolve_grid_convolution(&start, t, &params)?,
                };
                let name = format!("wigner_{i:02}_t{:.3}us.csv", t * 1e6);
                let one = WignerDataset::new(vec![g.clone()], st)?;
                run.write(&name, &dataset_to_csv(&one))?;
                let min = g.values.iter().copied().fold(f64::INFINITY, f64::min);
                rows.push(json!({ "time_s": t, "file": name, "min_value": min, "normalization": g.normalization(),
                    "origin_value": evolved_wigner_closed(st, 0.0, 0.0, t, &params) }));
            }
            let report = json!({ "state": st.label(), "gamma": gamma, "gamma_down": gd, "snapshots": rows });
            run.write_json("evolve.json", &report)?;
            run.finish()?;
            emit(cli, &report, None);
        }
        Cmd::Synth { state, gamma, device, times, grid, noise, seed } => {
            let st = parse_state(state)?;
            let (d, dj) = load_device(device)?;
            let ts = parse_times(times)?;
            let gs = parse_grid(grid)?;
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let ds = synthesize_dataset(st, *gamma, d.gamma_down(), &ts, gs, *noise, seed)?;
            let csv = dataset_to_csv(&ds);
            let mut run = Run::new(
                "synth",
                json!({ "state": st.label(), "gamma": gamma, "times_s": ts, "grid": [gs.extent, gs.n], "noise": noise }),
                out,
            )
            .seed(seed)
            .device_json(&dj);
            let path = run.write("dataset.csv", &csv)?;
            let m = run.finish()?;
            let report = json!({ "dataset": path, "pixels": ds.pixel_count(), "seed": seed, "config_hash": m.config_hash });
            emit(cli, &report, Some(&csv));
        }
        Cmd::Infer { dataset, state, device, confidence, gamma_grid } => {
            let st = state.as_deref().map(parse_state).transpose()?;
            let (d, dj) = load_device(device)?;
            let gd = d.gamma_down();
            let levels = parse_list(confidence, "confidence")?;
            if levels.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
                return usage("confidence levels must lie in (0, 1)");
            }
            let grid = parse_gamma_grid(gamma_grid)?;
            let ds = load_dataset(dataset, st)?;
            let cal = fit_initial_calibration(&ds, gd)?;
            let ds = ds.with_calibration(cal.clone())?;
            let noise = estimate_noise(&ds, &EvolutionParams::new(gd, 0.0)?)?;
            let post = jeffreys_posterior(&ds, &grid, gd, &noise)?;
            let quantiles: Vec<Value> = levels
                .iter()
                .map(|&c| Ok(json!({ "confidence": c, "gamma_per_s": upper_quantile(&post, 1.0 - c)? })))
                .collect::<Result<_, macroscope::Error>>()?;
            let mut csv = String::from("gamma_per_s,density,log_prior,log_likelihood\n");
            for i in 0..post.gamma_grid.len() {
                csv.push_str(&format!(
                    "{:.9e},{:.9e},{:.9e},{:.9e}\n",
                    post.gamma_grid[i], post.density[i], post.log_prior[i], post.log_likelihood[i]
                ));
            }
            let mut run = Run::new(
                "infer",
                json!({ "dataset_sha256": crate::run::sha256_hex(&std::fs::read(dataset).map_err(|e| Failure::Domain(e.into()))?),
                        "state": ds.state_label.label(), "confidence": levels, "gamma_grid": gamma_grid }),
                out,
            )
            .device_json(&dj)
            .tolerances(json!({ "posterior_tail_mass": macroscope::inference::MAX_TAIL_MASS }));
            let path = run.write("posterior.csv", &csv)?;
            let report = json!({
                "s": noise.s,
                "calibration": cal,
                "gamma_down_per_s": gd,
                "posterior_mode_per_s": post.mode(),
                "posterior_tail_mass": post.tail_mass(),
                "quantiles": quantiles,
                "posterior_csv": path,
            });
            run.write_json("infer.json", &report)?;
            run.finish()?;
            emit(cli, &report, Some(&csv));
        }
        Cmd::Macroscopicity { gamma, device, range: r, confidence } => {
            let (d, dj) = load_device(device)?;
            let rg = range(r)?;
            let mut m = macroscopicity(*gamma, &d, &rg)?;
            m.confidence = *confidence;
            write_macro(cli, "macroscopicity", json!({ "gamma": gamma, "range": range_json(&rg), "confidence": confidence }), &dj, &m)?;
        }
        Cmd::Project { gamma, t1_ref, device, range: r } => {
            let (d, dj) = load_device(device)?;
            let rg = range(r)?;
            let m = project_device(*gamma, t1_ref * 1e-6, &d, &rg)?;
            write_macro(cli, "project", json!({ "gamma_ref": gamma, "t1_ref_us": t1_ref, "range": range_json(&rg) }), &dj, &m)?;
        }
        Cmd::Nonint { device, p1, range: r } => {
            let (d, dj) = load_device(device)?;
            let rg = range(r)?;
            let p = match p1.or(d.thermal_population) {
                Some(p) => p,
                None => return usage("device has no thermal population; pass --p1"),
            };
            let b = nonint_exclusion(p, &d, &rg)?;
            let csv = b.to_csv();
            let mut run = Run::new("nonint", json!({ "p1": p, "range": range_json(&rg) }), out)
                .device_json(&dj)
                .tolerances(json!(QUAD_TOLERANCES));
            let path = run.write("nonint_curve.csv", &csv)?;
            let report = json!({
                "p1": p,
                "gamma_bound_per_s": b.gamma_bound,
                "tau_e_max_s": b.tau_e_max,
                "bounded": b.tau_e_max.is_some(),
                "sigma_q_star": b.sigma_q_star,
                "critical_length_m": b.critical_length,
                "curve_csv": path,
            });
            run.write_json("nonint.json", &report)?;
            run.finish()?;
            emit(cli, &report, Some(&csv));
        }
        Cmd::CylinderCompare { ell, r_min, r_max, points } => {
            let ells = if ell.is_empty() { vec![1, 40] } else { ell.clone() };
            let mut run = Run::new("cylinder-compare", json!({ "ell": ells, "r_min": r_min, "r_max": r_max, "points": points }), out)
                .tolerances(json!("reference quadrature rel 1e-10"));
            let mut summary = Vec::new();
            let mut all_csv = String::new();
            for &l in &ells {
                let inp = benchmark_inputs(l).or_else(|e| usage(e.to_string()))?;
                let rows = cylinder_compare(&inp, *r_min, *r_max, *points)?;
                let csv = comparison_csv(&rows);
                let name = format!("cylinder_ell{l}.csv");
                run.write(&name, &csv)?;
                all_csv.push_str(&csv);
                let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
                let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
                summary.push(json!({ "ell": l, "file": name, "ratio_min": lo, "ratio_max": hi }));
            }
            let report = json!({ "comparisons": summary });
            run.write_json("cylinder_compare.json", &report)?;
            run.finish()?;
            emit(cli, &report, Some(&all_csv));
        }
        Cmd::Reproduce { paper_table: table, criteria } => {
            let mut run = Run::new("reproduce", json!({ "paper_table": table, "criteria": criteria }), out);
            if *table {
                let rows = paper_table()?;
                say(&format_table(&rows));
                run.write_json("paper_table.json", &rows)?;
                run.finish()?;
                return Ok(ExitCode::SUCCESS);
            }
            let ids: Vec<u32> = match criteria {
                Some(s) => s
                    .split(',')
                    .map(|v| match v.trim().parse::<u32>() {
                        Ok(i) if (1..=13).contains(&i) => Ok(i),
                        _ => usage(format!("criterion `{v}` is not in 1..13")),
                    })
                    .collect::<Res<_>>()?,
                None => Vec::new(),
            };
            let results = run_criteria(&ids);
            for c in &results {
                say(&(c.line() + "\n"));
            }
            run.write_json("reproduce.json", &results)?;
            run.finish()?;
            if results.iter().any(|c| !c.passed) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Default => "default",
        MethodArg::Analytic => "analytic",
        MethodArg::Quadrature => "quadrature",
        MethodArg::Bruteforce => "bruteforce",
    }
}

fn curve_with(d: &DeviceSpec, rg: &SigmaQRange, m: MethodArg) -> Res<DiffusionCurve> {
    let method = match m {
        MethodArg::Default => return Ok(max_dimensionless_rate(d, rg)?),
        MethodArg::Analytic => Method::Analytic,
        MethodArg::Quadrature => Method::Quadrature,
        MethodArg::Bruteforce => Method::Bruteforce,
    };
    let x0sq = d.x0().powi(2);
    Ok(maximize_curve(rg, &d.name, |s| Ok(geometric_factor(&d.geometry, d.density, s, method)? * x0sq))?)
}

fn curve_summary(c: &DiffusionCurve) -> Value {
    json!({
        "device": c.device_ref,
        "sigma_q_star": c.max_point.sigma_q_star,
        "critical_length_m": c.max_point.critical_length(),
        "gamma_tau_star": c.max_point.gamma_tau_star,
    })
}

fn parse_gamma_grid(s: &str) -> Res<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return usage("--gamma-grid expects min:max:points");
    }
    let a: f64 = parts[0].trim().parse().or_else(|_| usage("--gamma-grid min"))?;
    let b: f64 = parts[1].trim().parse().or_else(|_| usage("--gamma-grid max"))?;
    let n: usize = parts[2].trim().parse().or_else(|_| usage("--gamma-grid points"))?;
    if !(a > 0.0 && b > a && n >= 2) {
        return usage("--gamma-grid needs 0 < min < max and at least 2 points");
    }
    let mut g = vec![0.0];
    g.extend(logspace(a, b, n));
    Ok(g)
}

fn write_macro(cli: &Cli, command: &str, config: Value, dj: &str, m: &MacroscopicityResult) -> Res<()> {
    let mut run = Run::new(command, config, &cli.out).device_json(dj).tolerances(json!(QUAD_TOLERANCES));
    run.write_json(&format!("{command}.json"), m)?;
    run.finish()?;
    emit(cli, &serde_json::to_value(m).expect("json"), None);
    Ok(())
}
