use std::f64::consts::PI;

use macroscope::constants::{HBAR, M_E};
use macroscope::devices::{preset, DeviceSpec, ModeGeometry};
use macroscope::diffusion::*;
use macroscope::quadrature::Quad;
use macroscope::special::faddeeva;
use num_complex::Complex64;
use proptest::prelude::*;

fn hbar_device() -> DeviceSpec {
    preset("hbar-2022").unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// (1 + xi d/dxi) of the double integral of cos(l pi p1) cos(l pi p2) e^{-xi^2 (p1-p2)^2/2}.
fn f_ell_double_integral(xi: f64, ell: u32) -> f64 {
    let k = PI * ell as f64;
    let quad = Quad { epsabs: 1e-14, epsrel: 1e-11, max_subdivisions: 2000 };
    let pts: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let inner = |p1: f64| {
        let g = |p2: f64| {
            let d = p1 - p2;
            let e = (-0.5 * xi * xi * d * d).exp();
            (k * p1).cos() * (k * p2).cos() * e * (1.0 - xi * xi * d * d)
        };
        quad.integrate(g, &pts).map_err(|e| format!("p1={p1} {e}")).unwrap().value
    };
    quad.integrate(inner, &pts).unwrap().value
}

#[test]
fn faddeeva_reference_values() {
    let w0 = faddeeva(Complex64::new(0.0, 0.0));
    assert!((w0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    // e * erfc(1)
    let w = faddeeva(Complex64::new(0.0, 1.0));
    let expected = 1f64.exp() * libm::erfc(1.0);
    assert!((w.re - expected).abs() < 1e-12 && w.im.abs() < 1e-15, "{w}");
    assert!((expected - 0.427584).abs() < 1e-6);
}

#[test]
fn faddeeva_saturates_instead_of_overflowing() {
    let (w, status) = macroscope::special::faddeeva_checked(Complex64::new(1.0, -30.0));
    assert!(w.re.is_finite() && w.im.is_finite());
    assert_eq!(status, macroscope::special::FaddeevaStatus::Saturated);
}

proptest! {
    #[test]
    fn faddeeva_reflection_symmetry(x in -20.0f64..20.0, y in -5.0f64..20.0) {
        let z = Complex64::new(x, y);
        let lhs = faddeeva(-z.conj());
        let rhs = faddeeva(z).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-300));
    }

    #[test]
    fn geometric_factor_is_non_negative(len in -8.5f64..-3.5, ell in 1u32..600) {
        let g = ModeGeometry::GaussianBeam { w0: 27e-6, length: 435e-6, ell };
        let u = geometric_factor(&g, 3980.0, HBAR / 10f64.powf(len), Method::Analytic).unwrap();
        prop_assert!(u >= 0.0);
    }
}

#[test]
fn f_ell_matches_double_integral() {
    for &(xi, ell) in &[(1.0, 2u32), (0.3, 1), (2.5, 3), (7.0, 4), (20.0, 5), (0.5, 6)] {
        let oracle = f_ell_double_integral(xi, ell);
        let got = f_ell(xi, ell).unwrap();
        assert!(rel(got, oracle) < 1e-6, "xi={xi} l={ell}: {got} vs {oracle}");
    }
}

#[test]
fn f_ell_branches_meet_smoothly() {
    // the implementation switches form at k/xi = 12
    for &ell in &[1u32, 2, 7, 486] {
        let xs = PI * ell as f64 / 12.0;
        let below = f_ell(xs * (1.0 - 1e-9), ell).unwrap();
        let above = f_ell(xs * (1.0 + 1e-9), ell).unwrap();
        assert!(rel(below, above) < 1e-8, "l={ell}: {below} vs {above}");
    }
}

#[test]
fn f_ell_vanishes_at_small_xi_and_rejects_out_of_range() {
    for ell in 1..6 {
        assert!(f_ell(1e-3, ell).unwrap().abs() < 1e-5);
    }
    assert!(matches!(f_ell(1e-4, 2), Err(macroscope::Error::Range { .. })));
    assert!(matches!(f_ell(2e6, 2), Err(macroscope::Error::Range { .. })));
    assert!(f_ell(1e6, 486).unwrap().is_finite());
}

#[test]
fn f_ell_near_resonance_matches_first_correction() {
    let ell = 486u32;
    let k = PI * ell as f64;
    let xi = k / 3f64.sqrt();
    let exact = 0.5 * xi * xi * f_ell(xi, ell).unwrap();
    let approx = 1.0 + PI.powi(3) * (ell as f64).powi(2) * (-0.5 * k * k / (xi * xi)).exp()
        / (2.0 * (2.0 * PI).sqrt() * xi);
    assert!(rel(exact, approx) < 0.1, "{exact} vs {approx}");
}

#[test]
fn small_sigma_slopes_follow_parity() {
    for &(ell, slope) in &[(2u32, 6.0), (4, 6.0), (1, 4.0), (3, 4.0)] {
        let g = ModeGeometry::GaussianBeam { w0: 27e-6, length: 435e-6, ell };
        let s1 = 1e-3 * HBAR / 435e-6;
        let s2 = 2e-3 * HBAR / 435e-6;
        let u1 = geometric_factor(&g, 3980.0, s1, Method::Quadrature).unwrap();
        let u2 = geometric_factor(&g, 3980.0, s2, Method::Quadrature).unwrap();
        let got = (u2 / u1).ln() / 2f64.ln();
        assert!((got - slope).abs() < 0.01, "l={ell}: slope {got}");
    }
}

#[test]
fn small_sigma_even_asymptote() {
    let dev = hbar_device().with_geometry(ModeGeometry::GaussianBeam {
        w0: 27e-6,
        length: 435e-6,
        ell: 486,
    });
    let dev = dev.unwrap();
    let xi = 0.01;
    let sq = xi * HBAR / 435e-6;
    let u = geometric_factor(&dev.geometry, dev.density, sq, Method::Quadrature).unwrap();
    let w0: f64 = 27e-6;
    let formula = 15.0 * 3980f64.powi(2) * w0.powi(4) * xi.powi(6)
        / (2.0 * PI * PI * M_E * M_E * 486f64.powi(4));
    assert!(rel(u, formula) < 0.05, "{u} vs {formula}");
}

#[test]
fn small_sigma_odd_asymptote_has_coefficient_six() {
    let g = ModeGeometry::GaussianBeam { w0: 27e-6, length: 435e-6, ell: 485 };
    let xi = 0.01;
    let sq = xi * HBAR / 435e-6;
    let u = geometric_factor(&g, 3980.0, sq, Method::Quadrature).unwrap();
    let w0: f64 = 27e-6;
    let formula = 6.0 * 3980f64.powi(2) * w0.powi(4) * xi.powi(4)
        / (PI * PI * M_E * M_E * 485f64.powi(4));
    assert!(rel(u, formula) < 1e-3, "{u} vs {formula}");
}

#[test]
fn analytic_and_quadrature_agree_on_paper_device() {
    let dev = hbar_device();
    for i in 0..20 {
        let len = 10f64.powf(-8.0 + 4.0 * i as f64 / 19.0);
        let sq = HBAR / len;
        let a = geometric_factor(&dev.geometry, dev.density, sq, Method::Analytic).unwrap();
        let q = geometric_factor(&dev.geometry, dev.density, sq, Method::Quadrature).unwrap();
        assert!(rel(q, a) < 1e-5, "hbar/sigma_q={len:e}: {a} vs {q}");
    }
}

#[test]
fn lateral_closed_forms_match_autocorrelation_integrals() {
    let quad = Quad::default();
    let geoms = [
        ModeGeometry::GaussianBeam { w0: 27e-6, length: 435e-6, ell: 3 },
        ModeGeometry::Cuboid { a: 75e-6, b: 50e-6, h: 1e-6, ell: 1 },
        ModeGeometry::Cylinder { radius: 35e-6, length: 1.5e-6, ell: 1 },
    ];
    for g in &geoms {
        for i in 0..13 {
            let len = 10f64.powf(-9.0 + 0.5 * i as f64);
            let sq = HBAR / len;
            let c = lateral_closed(g, sq);
            let n = lateral_quadrature(g, sq, &quad).unwrap();
            assert!(rel(c, n) < 1e-8, "{g:?} at {len:e}: {c} vs {n}");
        }
    }
}

#[test]
fn cylinder_bracket_tends_to_one() {
    assert!((disc_bracket(1e6) - 1.0).abs() < 1e-3);
    assert!(rel(disc_bracket(1e-6), 0.5e-6) < 1e-6);
}

#[test]
fn density_scaling_doubles_rate() {
    let dev = hbar_device();
    let heavy = dev.with_density(2.0 * dev.density).unwrap();
    let sq = HBAR / 0.5e-6;
    let r1 = dimensionless_rate(&dev, sq).unwrap();
    let r2 = dimensionless_rate(&heavy, sq).unwrap();
    assert!(rel(r2, 2.0 * r1) < 1e-12);
}

#[test]
fn paper_device_rate_at_half_micron() {
    let r = dimensionless_rate(&hbar_device(), HBAR / 0.5e-6).unwrap();
    assert!(rel(r, 3.5e13) < 0.05, "{r:e}");
}

#[test]
fn rate_vanishes_at_both_ends() {
    let dev = hbar_device();
    let peak = dimensionless_rate(&dev, HBAR / 0.5e-6).unwrap();
    assert!(dimensionless_rate(&dev, HBAR / 1e-3).unwrap() < 1e-6 * peak);
    assert!(dimensionless_rate(&dev, HBAR / 1e-9).unwrap() < 1e-2 * peak);
    assert!(dimensionless_rate(&dev, HBAR / 1e-15).is_err());
}

#[test]
fn analytic_rejects_other_geometries() {
    let g = ModeGeometry::Cuboid { a: 1e-6, b: 1e-6, h: 0.25e-6, ell: 1 };
    assert!(matches!(
        geometric_factor(&g, 4650.0, HBAR / 1e-6, Method::Analytic),
        Err(macroscope::Error::Unsupported(_))
    ));
}

#[test]
fn maximum_of_paper_device() {
    let dev = hbar_device();
    let curve = max_dimensionless_rate(&dev, &SigmaQRange::default()).unwrap();
    let m = curve.max_point;
    assert!(rel(m.gamma_tau_star, 3.5e13) < 0.05, "{:e}", m.gamma_tau_star);
    let len = m.critical_length();
    assert!(len > 0.5e-6 / 1.5 && len < 0.5e-6 * 1.5, "{len:e}");
    assert_eq!(curve.sigma_q_samples.len(), 129);
    assert!(curve.gamma_tau_samples.iter().all(|&g| g >= 0.0));
    // increasing well below the peak, decreasing well above
    let i_star = curve.sigma_q_samples.iter().position(|&s| s > m.sigma_q_star).unwrap();
    for i in 1..i_star.saturating_sub(8) {
        assert!(curve.gamma_tau_samples[i] > curve.gamma_tau_samples[i - 1]);
    }
    for i in (i_star + 8)..curve.sigma_q_samples.len() {
        assert!(curve.gamma_tau_samples[i] < curve.gamma_tau_samples[i - 1]);
    }
}

#[test]
fn peak_formula_close_to_scanned_maximum() {
    let dev = hbar_device();
    let m = max_dimensionless_rate(&dev, &SigmaQRange::default()).unwrap().max_point;
    let f = asymptotic_rate(&dev, m.sigma_q_star, Regime::MaxFormula).unwrap();
    assert!(f.warning.is_none());
    assert!(rel(f.gamma_tau, m.gamma_tau_star) < 0.1);
    // plug-in of sqrt(3 pi/2e^3) 6 hbar rho L/(m_e^2 omega l)
    let by_hand = (3.0 * PI / (2.0 * 1f64.exp().powi(3))).sqrt() * 6.0 * HBAR * 3980.0 * 435e-6
        / (M_E * M_E * 2.0 * PI * 5.961e9 * 486.0);
    assert!(rel(f.gamma_tau, by_hand) < 1e-12);
}

#[test]
fn resonance_correction_locates_maximum() {
    let dev = hbar_device();
    let m = max_dimensionless_rate(&dev, &SigmaQRange::default()).unwrap().max_point;
    let k = PI * 486.0;
    let sq_pred = (k / 3f64.sqrt()) * HBAR / 435e-6;
    assert!(rel(sq_pred, m.sigma_q_star) < 0.2);
    let u1 = asymptotic_rate(&dev, sq_pred, Regime::U1).unwrap();
    assert!(rel(u1.gamma_tau, m.gamma_tau_star) < 0.1);
}

#[test]
fn leading_regime_does_not_depend_on_mode_index() {
    let sq = HBAR / 1e-9;
    let a = hbar_device();
    let b = a
        .with_geometry(ModeGeometry::GaussianBeam { w0: 27e-6, length: 435e-6, ell: 487 })
        .unwrap();
    let ra = asymptotic_rate(&a, sq, Regime::U0).unwrap();
    let rb = asymptotic_rate(&b, sq, Regime::U0).unwrap();
    assert!(ra.warning.is_none());
    assert_eq!(ra.gamma_tau, rb.gamma_tau);
    let exact = dimensionless_rate(&a, sq).unwrap();
    let u1 = asymptotic_rate(&a, sq, Regime::U1).unwrap();
    assert!(rel(u1.gamma_tau, exact) < 0.05, "{} vs {exact}", u1.gamma_tau);
}

#[test]
fn asymptote_warns_outside_its_regime() {
    let r = asymptotic_rate(&hbar_device(), HBAR / 0.5e-6, Regime::SmallEven).unwrap();
    assert!(r.warning.is_some());
}

#[test]
fn low_mode_variant_peaks_higher() {
    let a = max_dimensionless_rate(&hbar_device(), &SigmaQRange::default()).unwrap();
    let b = max_dimensionless_rate(&preset("hbar-l8").unwrap(), &SigmaQRange::default()).unwrap();
    assert!(b.max_point.gamma_tau_star > a.max_point.gamma_tau_star);
    assert!(b.max_point.critical_length() > 10e-6);
}

#[test]
fn projected_device_ratio() {
    let a = max_dimensionless_rate(&hbar_device(), &SigmaQRange::default()).unwrap();
    let b =
        max_dimensionless_rate(&preset("hbar-projected").unwrap(), &SigmaQRange::default()).unwrap();
    let ratio = b.max_point.gamma_tau_star / a.max_point.gamma_tau_star;
    let scaling = (2.0 * PI * 5.961e9 / (2.0 * PI * 2e9)) * (486.0 / 160.0);
    assert!(rel(ratio, scaling) < 0.05, "{ratio} vs {scaling}");
}

#[test]
fn narrow_range_is_rejected() {
    let r = SigmaQRange::from_lengths(1e-7, 1e-5);
    assert!(max_dimensionless_rate(&hbar_device(), &r).is_err());
}

#[test]
fn boundary_maximum_is_reported() {
    let r = SigmaQRange::from_lengths(1e-5, 1e-1);
    match max_dimensionless_rate(&hbar_device(), &r) {
        Err(macroscope::Error::MaxAtBoundary { .. }) => {}
        other => panic!("expected boundary error, got {other:?}"),
    }
}

#[test]
fn curve_csv_has_expected_header() {
    let curve = max_dimensionless_rate(&hbar_device(), &SigmaQRange::default()).unwrap();
    let csv = curve.to_csv();
    assert!(csv.starts_with("hbar_over_sigma_q_m,gamma_tau_e\n"));
    assert_eq!(csv.lines().count(), 130);
}

#[test]
fn log_path_agrees_with_linear_path() {
    let dev = hbar_device();
    let sq = HBAR / 0.5e-6;
    let lin = geometric_factor(&dev.geometry, dev.density, sq, Method::Analytic).unwrap();
    let log = log_geometric_factor(&dev.geometry, dev.density, sq).unwrap();
    assert!(rel(log.exp(), lin) < 1e-12);
}
