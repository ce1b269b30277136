use macroscope::devices::preset;
use macroscope::diffusion::{max_dimensionless_rate, SigmaQRange};
use macroscope::inference::*;
use macroscope::wigner::{evolved_wigner_closed, symmetric_axis, EvolutionParams, OscillatorState, WignerGrid};
use macroscope::Error;
use proptest::prelude::*;

const T1: f64 = 85.8e-6;
const GD: f64 = 1.0 / T1;
const S: f64 = 0.034;

fn times() -> Vec<f64> {
    vec![0.0, 10e-6, 20e-6, 40e-6]
}

fn fock(gamma: f64, noise: f64, seed: u64) -> WignerDataset {
    synthesize_dataset(OscillatorState::FockOne, gamma, GD, &times(), GridSpec::default(), noise, seed).unwrap()
}

fn calibrated(ds: WignerDataset) -> WignerDataset {
    let cal = fit_initial_calibration(&ds, GD).unwrap();
    ds.with_calibration(cal).unwrap()
}

fn gamma_zero() -> EvolutionParams {
    EvolutionParams::new(GD, 0.0).unwrap()
}

#[test]
fn noise_level_is_recovered_over_seeds() {
    for seed in 1..6 {
        let ds = calibrated(fock(0.0, S, seed));
        let s = estimate_noise(&ds, &gamma_zero()).unwrap().s;
        assert!((s - S).abs() < 0.002, "seed {seed}: s = {s}");
    }
}

#[test]
fn noise_free_data_has_no_residual() {
    let ds = fock(0.0, 0.0, 1);
    assert!(estimate_noise(&ds, &gamma_zero()).unwrap().s < 1e-9);
}

#[test]
fn doubled_residuals_double_the_noise() {
    let ds = fock(0.0, S, 3);
    let clean = fock(0.0, 0.0, 3);
    let mut doubled = ds.clone();
    for (snap, c) in doubled.snapshots.iter_mut().zip(&clean.snapshots) {
        for (v, m) in snap.values.iter_mut().zip(&c.values) {
            *v = m + 2.0 * (*v - m);
        }
    }
    let a = estimate_noise(&ds, &gamma_zero()).unwrap().s;
    let b = estimate_noise(&doubled, &gamma_zero()).unwrap().s;
    assert!((b / a - 2.0).abs() < 1e-12);
}

#[test]
fn too_few_pixels_is_an_error() {
    let ds = synthesize_dataset(
        OscillatorState::FockOne, 0.0, GD, &[0.0, 1e-5], GridSpec { extent: 2.0, n: 7 }, S, 1,
    )
    .unwrap();
    assert!(matches!(estimate_noise(&ds, &gamma_zero()), Err(Error::InsufficientData { .. })));
}

#[test]
fn exact_fock_grid_calibrates_to_unit_weight() {
    let cal = fit_initial_calibration(&fock(0.0, 0.0, 0), GD).unwrap();
    assert!((cal.mixture_weight_p - 1.0).abs() < 1e-9);
}

#[test]
fn mixture_weight_is_recovered() {
    let ds = synthesize_dataset(
        OscillatorState::Mixture { weight_p: 0.8 }, 0.0, GD, &times(), GridSpec::default(), S, 11,
    )
    .unwrap();
    let cal = fit_initial_calibration(&ds, GD).unwrap();
    // ordinary least squares written out by hand
    let g = &ds.snapshots[0];
    let (mut num, mut den) = (0.0, 0.0);
    for (ip, &p) in g.ps.iter().enumerate() {
        for (ix, &x) in g.xs.iter().enumerate() {
            let w0 = (-(x * x + p * p)).exp() / std::f64::consts::PI;
            let w1 = (2.0 * (x * x + p * p) - 1.0) * w0;
            num += (g.at(ix, ip) - w0) * (w1 - w0);
            den += (w1 - w0) * (w1 - w0);
        }
    }
    assert!((cal.mixture_weight_p - num / den).abs() < 1e-9);
    assert!((cal.mixture_weight_p - 0.8).abs() < 0.02, "{}", cal.mixture_weight_p);
}

fn rotated_superposition(theta: f64, noise: f64) -> WignerDataset {
    let params = gamma_zero();
    let axis = symmetric_axis(2.4, 41);
    let (sn, cs) = theta.sin_cos();
    let snaps: Vec<WignerGrid> = times()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut g = WignerGrid::from_fn(axis.clone(), axis.clone(), t, |x, p| {
                evolved_wigner_closed(OscillatorState::Superposition, x * cs + p * sn, -x * sn + p * cs, t, &params)
            });
            for (i, v) in g.values.iter_mut().enumerate() {
                *v += noise * pixel_normal(5, k as u64, i as u64);
            }
            g
        })
        .collect();
    WignerDataset::new(snaps, OscillatorState::Superposition).unwrap()
}

#[test]
fn superposition_rotation_is_recovered() {
    let cal = fit_initial_calibration(&rotated_superposition(0.3, 0.0), GD).unwrap();
    for r in &cal.per_snapshot_rotation {
        assert!((r - 0.3).abs() < 1e-6, "{r}");
    }
    assert!((cal.mixture_weight_p - 1.0).abs() < 1e-9);
    // one noisy 41x41 snapshot pins the angle to about 0.02 rad
    let cal = fit_initial_calibration(&rotated_superposition(0.3, S), GD).unwrap();
    let rot = &cal.per_snapshot_rotation;
    let mean = rot.iter().sum::<f64>() / rot.len() as f64;
    assert!((mean - 0.3).abs() < 0.02, "{rot:?}");
    assert!(rot.iter().all(|r| (r - 0.3).abs() < 0.05), "{rot:?}");
    let neg = fit_initial_calibration(&rotated_superposition(-2.0, 0.0), GD).unwrap();
    assert!((neg.per_snapshot_rotation[0] + 2.0).abs() < 1e-6);
}

#[test]
fn wrong_state_fails_calibration() {
    let axis = symmetric_axis(2.4, 41);
    let snaps = vec![
        WignerGrid::from_fn(axis.clone(), axis.clone(), 0.0, |x, p| {
            (-((x - 1.5).powi(2) + p * p)).exp() / std::f64::consts::PI
        }),
        WignerGrid::from_fn(axis.clone(), axis, 1e-5, |_, _| 0.0),
    ];
    let ds = WignerDataset::new(snaps, OscillatorState::FockOne).unwrap();
    assert!(matches!(fit_initial_calibration(&ds, GD), Err(Error::CalibrationFailure { .. })));
}

#[test]
fn likelihood_peaks_at_the_generating_rate() {
    let ds = fock(300.0, 0.0, 0);
    let noise = NoiseModel::new(S).unwrap();
    let grid: Vec<f64> = (0..=60).map(|i| 10.0 * i as f64).collect();
    let ll: Vec<f64> = grid.iter().map(|&g| log_likelihood(&ds, g, GD, &noise)).collect();
    let best = (0..ll.len()).fold(0, |b, i| if ll[i] > ll[b] { i } else { b });
    assert_eq!(grid[best], 300.0);
}

#[test]
fn constant_offset_penalty() {
    let ds = fock(100.0, 0.0, 0);
    let noise = NoiseModel::new(S).unwrap();
    let c = 0.01;
    let mut shifted = ds.clone();
    for s in shifted.snapshots.iter_mut() {
        s.values.iter_mut().for_each(|v| *v += c);
    }
    let n = ds.inference_values().len() as f64;
    let d = log_likelihood(&shifted, 100.0, GD, &noise) - log_likelihood(&ds, 100.0, GD, &noise);
    let want = -n * c * c / (2.0 * S * S);
    assert!((d - want).abs() < 1e-9 * want.abs(), "{d} {want}");
}

#[test]
fn likelihood_is_additive_over_snapshots() {
    let ds = fock(200.0, S, 4);
    let pick = |idx: &[usize]| {
        WignerDataset::new(idx.iter().map(|&i| ds.snapshots[i].clone()).collect(), ds.state_label).unwrap()
    };
    let noise = NoiseModel::new(S).unwrap();
    let all = log_likelihood(&pick(&[0, 1, 2]), 250.0, GD, &noise);
    let a = log_likelihood(&pick(&[0, 1]), 250.0, GD, &noise);
    let b = log_likelihood(&pick(&[0, 2]), 250.0, GD, &noise);
    assert!((all - a - b).abs() < 1e-9 * all.abs());
    let t0 = log_likelihood(&pick(&[0]), 250.0, GD, &noise);
    assert_eq!(t0, 0.0);
}

fn fock_design() -> Design {
    Design::from_dataset(&fock(0.0, 0.0, 0), GD)
}

#[test]
fn fisher_scales_with_inverse_noise_variance() {
    let d = fock_design();
    let a = fisher_information(150.0, &d, &NoiseModel::new(S).unwrap());
    let b = fisher_information(150.0, &d, &NoiseModel::new(2.0 * S).unwrap());
    assert!(a > 0.0);
    assert!((a / b - 4.0).abs() < 1e-12);
}

#[test]
fn fisher_matches_analytic_derivative() {
    // W1 in closed form depends on Gamma through T~ = 1/2 + Gamma/gamma_down; differentiate numerically in T~
    let d = fock_design();
    let noise = NoiseModel::new(S).unwrap();
    let gamma = 400.0;
    let model = |tt: f64| d.model((tt - 0.5) * GD);
    let tt = 0.5 + gamma / GD;
    let h = 1e-5;
    let (a, b) = (model(tt + h), model(tt - h));
    let i_tt: f64 = a.iter().zip(&b).map(|(a, b)| ((a - b) / (2.0 * h)).powi(2)).sum::<f64>() / (S * S);
    let i_g = fisher_information(gamma, &d, &noise);
    assert!((i_g * GD * GD / i_tt - 1.0).abs() < 1e-6);
}

#[test]
fn fisher_chain_rule_in_tau() {
    // Gamma = c / tau_e at fixed sigma_q
    let d = fock_design();
    let noise = NoiseModel::new(S).unwrap();
    let c = 3.5e13;
    for &gamma in &[5.0, 160.0, 2000.0] {
        let tau = c / gamma;
        let h = 1e-4 * tau;
        let (a, b) = (d.model(c / (tau + h)), d.model(c / (tau - h)));
        let i_tau: f64 = a.iter().zip(&b).map(|(a, b)| ((a - b) / (2.0 * h)).powi(2)).sum::<f64>() / (S * S);
        let dg_dtau = c / (tau * tau);
        let i_g = fisher_information(gamma, &d, &noise);
        assert!((i_g * dg_dtau * dg_dtau / i_tau - 1.0).abs() < 1e-5, "{gamma}");
    }
}

#[test]
fn fisher_at_zero_uses_one_sided_difference() {
    let d = fock_design();
    let noise = NoiseModel::new(S).unwrap();
    let i0 = fisher_information(0.0, &d, &noise);
    let i_small = fisher_information(1e-3, &d, &noise);
    assert!(i0.is_finite() && i0 > 0.0);
    assert!((i0 / i_small - 1.0).abs() < 1e-3);
}

#[test]
fn null_dataset_threshold_is_of_order_hundred() {
    let ds = calibrated(fock(0.0, S, 21));
    let noise = estimate_noise(&ds, &gamma_zero()).unwrap();
    let post = jeffreys_posterior(&ds, &default_gamma_grid(), GD, &noise).unwrap();
    assert!((post.normalization - 1.0).abs() < 1e-6);
    assert!(post.density.iter().all(|&v| v >= 0.0));
    let q = upper_quantile(&post, 0.05).unwrap();
    assert!(q > 30.0 && q < 1000.0, "{q}");
    let q3 = upper_quantile(&post, 1e-3).unwrap();
    let q7 = upper_quantile(&post, 1e-7).unwrap();
    assert!(q < q3 && q3 < q7, "{q} {q3} {q7}");
}

#[test]
fn constant_likelihood_returns_the_prior() {
    let grid = logspace_grid(1.0, 100.0, 50);
    let prior: Vec<f64> = grid.iter().map(|g| -g.ln()).collect();
    let post = Posterior::from_log_terms(grid.clone(), vec![-3.0; 50], prior).unwrap();
    let z: f64 = (1..50).map(|i| 0.5 * (grid[i] - grid[i - 1]) * (1.0 / grid[i] + 1.0 / grid[i - 1])).sum();
    for (g, d) in grid.iter().zip(&post.density) {
        assert!((d - 1.0 / g / z).abs() < 1e-12 * d);
    }
}

fn logspace_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn high_signal_mode_recovers_truth() {
    let ds = calibrated(fock(500.0, 0.005, 8));
    let grid = default_gamma_grid();
    let post = jeffreys_posterior(&ds, &grid, GD, &NoiseModel::new(0.005).unwrap()).unwrap();
    let mode = post.mode();
    let i = grid.iter().position(|&g| g == mode).unwrap();
    let j = grid.iter().position(|&g| g > 500.0).unwrap();
    assert!((i as i64 - j as i64).abs() <= 1, "mode {mode}");
}

#[test]
fn mode_converges_as_noise_shrinks() {
    let grid = default_gamma_grid();
    let mut errs = Vec::new();
    for &s in &[0.034, 0.0034, 0.00034] {
        let ds = calibrated(fock(300.0, s, 2));
        let post = jeffreys_posterior(&ds, &grid, GD, &NoiseModel::new(s).unwrap()).unwrap();
        errs.push((post.mode() - 300.0).abs() / 300.0);
    }
    assert!(errs[2] < 0.03, "{errs:?}");
    assert!(errs[1] < 0.2, "{errs:?}");
}

#[test]
fn truncated_grid_is_rejected() {
    let ds = calibrated(fock(300.0, 0.005, 3));
    let grid = logspace_grid(1e-2, 30.0, 100);
    let r = jeffreys_posterior(&ds, &grid, GD, &NoiseModel::new(0.005).unwrap());
    assert!(matches!(r, Err(Error::GridBoundary { .. })), "{r:?}");
}

#[test]
fn jeffreys_quantiles_are_reparameterization_covariant() {
    let ds = calibrated(fock(300.0, 0.01, 6));
    let noise = NoiseModel::new(0.01).unwrap();
    let design = Design::from_dataset(&ds, GD);
    let data = ds.inference_values();
    let c = 3.5e13;
    let ll = |g: f64| -> f64 {
        data.iter().zip(design.model(g)).map(|(d, m)| -(d - m).powi(2) / (2.0 * 0.01 * 0.01)).sum()
    };
    // Gamma side, through the library
    let g_grid = logspace_grid(10.0, 3e3, 600);
    let gp = Posterior::from_log_terms(
        g_grid.clone(),
        g_grid.iter().map(|&g| ll(g)).collect(),
        g_grid.iter().map(|&g| 0.5 * fisher_information(g, &design, &noise).ln()).collect(),
    )
    .unwrap();
    // tau side, prior by direct differencing in tau on an unrelated grid
    let t_grid = logspace_grid(c / 3.1e3, c / 9.0, 701);
    let prior_tau = |tau: f64| -> f64 {
        let h = 1e-4 * tau;
        let (a, b) = (design.model(c / (tau + h)), design.model(c / (tau - h)));
        let i: f64 = a.iter().zip(&b).map(|(a, b)| ((a - b) / (2.0 * h)).powi(2)).sum();
        0.5 * i.ln()
    };
    let tp = Posterior::from_log_terms(
        t_grid.clone(),
        t_grid.iter().map(|&t| ll(c / t)).collect(),
        t_grid.iter().map(|&t| prior_tau(t)).collect(),
    )
    .unwrap();
    for &p in &[0.05, 0.2, 0.5] {
        let qg = upper_quantile(&gp, p).unwrap();
        let qt = upper_quantile(&tp, 1.0 - p).unwrap();
        assert!((c / qt / qg - 1.0).abs() < 5e-3, "p={p}: {qg} vs {}", c / qt);
    }
}

#[test]
fn uniform_quantile() {
    let grid: Vec<f64> = (0..=100).map(|i| 10.0 * i as f64).collect();
    let post = Posterior::from_log_terms(grid, vec![0.0; 101], vec![0.0; 101]).unwrap();
    assert!((upper_quantile(&post, 0.05).unwrap() - 950.0).abs() < 1e-9);
    assert!((upper_quantile(&post, 0.5).unwrap() - 500.0).abs() < 1e-9);
}

#[test]
fn delta_like_density_quantiles() {
    let grid: Vec<f64> = (0..=4000).map(|i| 0.1 * i as f64).collect();
    let ll: Vec<f64> = grid.iter().map(|g| -((g - 160.0) / 0.2).powi(2) / 2.0).collect();
    let post = Posterior::from_log_terms(grid.clone(), ll, vec![0.0; grid.len()]).unwrap();
    for &p in &[0.5, 0.05, 1e-3, 1e-7] {
        let q = upper_quantile(&post, p).unwrap();
        assert!((q - 160.0).abs() < 1.5, "{p}: {q}");
    }
    assert!(upper_quantile(&post, 0.0).is_err());
    assert!(upper_quantile(&post, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn quantiles_are_ordered(mu in 1.0f64..500.0, width in 0.5f64..200.0) {
        let grid: Vec<f64> = (0..=400).map(|i| 2.5 * i as f64).collect();
        let ll: Vec<f64> = grid.iter().map(|g| -((g - mu) / width).powi(2) / 2.0).collect();
        let post = Posterior::from_log_terms(grid, ll, vec![0.0; 401]).unwrap();
        let q1 = upper_quantile(&post, 0.05).unwrap();
        let q2 = upper_quantile(&post, 1e-3).unwrap();
        let q3 = upper_quantile(&post, 1e-7).unwrap();
        prop_assert!(q1 <= q2 && q2 <= q3);
        prop_assert!((post.normalization - 1.0).abs() < 1e-6);
    }
}

#[test]
fn paper_macroscopicities() {
    let dev = preset("hbar-2022").unwrap();
    let range = SigmaQRange::default();
    let a = macroscopicity(1.6e2, &dev, &range).unwrap();
    let b = macroscopicity(6.4e2, &dev, &range).unwrap();
    assert!((a.mu - 11.3).abs() < 0.05, "{}", a.mu);
    assert!((b.mu - 10.7).abs() < 0.05, "{}", b.mu);
    let c = macroscopicity(1.6e3, &dev, &range).unwrap();
    assert!((a.mu - c.mu - 1.0).abs() < 1e-12);
    // self-consistency with an independent maximization
    let m = max_dimensionless_rate(&dev, &range).unwrap().max_point;
    assert!((a.mu - (m.gamma_tau_star / 1.6e2).log10()).abs() < 1e-12);
    assert_eq!(a.mu, a.tau_e_excluded.log10());
    assert!(macroscopicity(0.0, &dev, &range).is_err());
}

#[test]
fn projected_devices() {
    let range = SigmaQRange::default();
    let proj = project_device(1.6e2, T1, &preset("hbar-projected").unwrap(), &range).unwrap();
    assert!((proj.mu - 14.4).abs() < 0.1, "{}", proj.mu);
    let pc = project_device(1.6e2, T1, &preset("phononic-crystal-2022").unwrap(), &range).unwrap();
    assert!((pc.gamma_threshold / 1.37e4 - 1.0).abs() < 0.01);
    assert!((pc.mu - 9.0).abs() < 0.3, "{}", pc.mu);
    let saw = project_device(1.6e2, T1, &preset("saw-2018").unwrap(), &range).unwrap();
    assert!((saw.gamma_threshold / 9.15e4 - 1.0).abs() < 0.01);
    assert!((saw.mu - 8.6).abs() < 0.3, "{}", saw.mu);
}

#[test]
fn synthesis_without_noise_is_the_model() {
    let ds = fock(120.0, 0.0, 9);
    let params = EvolutionParams::new(GD, 120.0).unwrap();
    for s in &ds.snapshots {
        for (ip, &p) in s.ps.iter().enumerate() {
            for (ix, &x) in s.xs.iter().enumerate() {
                assert_eq!(s.at(ix, ip), evolved_wigner_closed(OscillatorState::FockOne, x, p, s.time, &params));
            }
        }
    }
}

#[test]
fn synthesis_is_deterministic() {
    assert_eq!(fock(50.0, S, 7), fock(50.0, S, 7));
    assert_ne!(fock(50.0, S, 7), fock(50.0, S, 8));
}

#[test]
fn synthetic_noise_has_the_requested_spread() {
    let grid = GridSpec { extent: 3.0, n: 101 };
    let clean = synthesize_dataset(OscillatorState::Ground, 0.0, GD, &[0.0], grid, 0.0, 0).unwrap();
    let noisy = synthesize_dataset(OscillatorState::Ground, 0.0, GD, &[0.0], grid, S, 12).unwrap();
    let r: Vec<f64> =
        noisy.snapshots[0].values.iter().zip(&clean.snapshots[0].values).map(|(a, b)| a - b).collect();
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let sd = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(n >= 1e4);
    assert!((sd / S - 1.0).abs() < 0.03, "{sd}");
    assert!(mean.abs() < 4.0 * S / n.sqrt());
}

#[test]
fn dataset_validation() {
    let ds = fock(0.0, 0.0, 0);
    let mut rev = ds.snapshots.clone();
    rev.swap(1, 2);
    assert!(WignerDataset::new(rev, OscillatorState::FockOne).is_err());
    let bad = Calibration { mixture_weight_p: 1.2, per_snapshot_rotation: vec![0.0; 4] };
    assert!(ds.clone().with_calibration(bad).is_err());
    let short = Calibration { mixture_weight_p: 0.5, per_snapshot_rotation: vec![0.0; 2] };
    assert!(ds.with_calibration(short).is_err());
}

#[test]
fn ignoring_dephasing_biases_superposition_rates_upward() {
    let grid = GridSpec::default();
    let t = [10e-6, 20e-6, 40e-6];
    let g = default_gamma_grid();
    let none = dephasing_bias(1e3, GD, &t, grid, &g).unwrap();
    let some = dephasing_bias(200e-6, GD, &t, grid, &g).unwrap();
    assert!(none < 1.0, "{none}");
    assert!(some > 100.0, "{some}");
}
