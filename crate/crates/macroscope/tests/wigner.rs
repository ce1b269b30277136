use std::f64::consts::{LN_2, PI, SQRT_2};

use macroscope::quadrature::Quad;
use macroscope::wigner::*;
use proptest::prelude::*;

const STATES: [OscillatorState; 4] = [
    OscillatorState::Ground,
    OscillatorState::FockOne,
    OscillatorState::Superposition,
    OscillatorState::Mixture { weight_p: 0.7 },
];

fn params(t1: f64, gamma: f64) -> EvolutionParams {
    EvolutionParams::new(1.0 / t1, gamma).unwrap()
}

/// W(X,P;t) = e^{gt}/(pi S) int W(X'e^{gt/2}, P'e^{gt/2}) e^{-|X-X'|^2/S} dX'dP', by quadrature.
fn convolution_oracle(state: OscillatorState, x: f64, p: f64, t: f64, pr: &EvolutionParams) -> f64 {
    let gt = pr.gamma_down * t;
    let sc = (0.5 * gt).exp();
    let s = pr.s(t);
    let quad = Quad { epsabs: 1e-13, epsrel: 1e-10, max_subdivisions: 2000 };
    let lim = 7.0;
    let pts: Vec<f64> = (0..=14).map(|i| -lim + i as f64).collect();
    let inner = |xp: f64| {
        let g = |pp: f64| {
            initial_wigner(state, xp * sc, pp * sc)
                * (-((x - xp).powi(2) + (p - pp).powi(2)) / s).exp()
        };
        quad.integrate(g, &pts).unwrap().value
    };
    gt.exp() / (PI * s) * quad.integrate(inner, &pts).unwrap().value
}

#[test]
fn initial_values() {
    assert!((initial_wigner(OscillatorState::FockOne, 0.0, 0.0) + 1.0 / PI).abs() < 1e-15);
    let v = initial_wigner(OscillatorState::Superposition, -1.0 / SQRT_2, 0.0);
    assert!((v + (-0.5f64).exp() / (2.0 * PI)).abs() < 1e-15);
    let g = WignerGrid::from_fn(symmetric_axis(5.0, 201), symmetric_axis(5.0, 201), 0.0, |x, p| {
        initial_wigner(OscillatorState::Ground, x, p)
    });
    assert!((g.normalization() - 1.0).abs() < 1e-6);
}

#[test]
fn closed_forms_match_convolution_integral() {
    let pr = params(40e-6, 1e4);
    for state in STATES {
        for &(x, p, t) in &[(0.0, 0.0, 10e-6), (0.7, -0.3, 40e-6), (-1.1, 0.5, 25e-6), (1.5, 1.2, 80e-6)]
        {
            let closed = evolved_wigner_closed(state, x, p, t, &pr);
            let oracle = convolution_oracle(state, x, p, t, &pr);
            assert!((closed - oracle).abs() < 1e-9, "{state:?} ({x},{p},{t}): {closed} vs {oracle}");
        }
    }
}

#[test]
fn pure_relaxation_populations() {
    // e^{-gt} |1><1| + (1 - e^{-gt}) |0><0|
    let pr = params(85.8e-6, 0.0);
    let t = 30e-6;
    let e = (-t / 85.8e-6f64).exp();
    for &(x, p) in &[(0.0, 0.0), (0.4, 1.0), (-2.0, 0.1)] {
        let r2: f64 = x * x + p * p;
        let expect = ((1.0 - e) + e * (2.0 * r2 - 1.0)) * (-r2).exp() / PI;
        let got = evolved_wigner_closed(OscillatorState::FockOne, x, p, t, &pr);
        assert!((got - expect).abs() < 1e-14);
    }
}

proptest! {
    #[test]
    fn continuous_at_time_zero(x in -3.0f64..3.0, p in -3.0f64..3.0, g in 0.0f64..1e5) {
        let pr = params(85.8e-6, g);
        for state in STATES {
            let a = evolved_wigner_closed(state, x, p, 0.0, &pr);
            let b = initial_wigner(state, x, p);
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-12));
        }
    }

    #[test]
    fn relaxes_to_ground_state(x in -3.0f64..3.0, p in -3.0f64..3.0) {
        let pr = params(85.8e-6, 0.0);
        for state in STATES {
            let a = evolved_wigner_closed(state, x, p, 1.0, &pr);
            prop_assert!((a - initial_wigner(OscillatorState::Ground, x, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn mixtures_evolve_linearly(x in -3.0f64..3.0, p in -3.0f64..3.0, w in 0.0f64..1.0, t in 0.0f64..2e-4) {
        let pr = params(40e-6, 3e3);
        let mix = evolved_wigner_closed(OscillatorState::Mixture { weight_p: w }, x, p, t, &pr);
        let lin = w * evolved_wigner_closed(OscillatorState::FockOne, x, p, t, &pr)
            + (1.0 - w) * evolved_wigner_closed(OscillatorState::Ground, x, p, t, &pr);
        prop_assert!((mix - lin).abs() < 1e-14);
    }
}

#[test]
fn steady_state_is_broadened_gaussian() {
    let pr = params(40e-6, 2e4);
    let width: f64 = 1.0 + 2.0 * 2e4 * 40e-6;
    for state in STATES {
        let w = evolved_wigner_closed(state, 0.8, -0.4, 1e-2, &pr);
        let g = (-(0.8f64.powi(2) + 0.4f64.powi(2)) / width).exp() / (PI * width);
        assert!((w - g).abs() < 1e-12);
        // the large-time branch agrees with the formula
        let far = evolved_wigner_closed(state, 0.8, -0.4, 1.0, &pr);
        assert!((far - g).abs() < 1e-15);
    }
}

#[test]
fn params_invariants() {
    let pr = params(40e-6, 1e4);
    assert_eq!(pr.r(0.0), 1.0);
    assert_eq!(pr.s(0.0), 0.0);
    assert!((pr.s(1.0) - (1.0 + 2.0 * 1e4 * 40e-6)).abs() < 1e-12);
    assert!(EvolutionParams::new(0.0, 1.0).is_err());
    assert!(EvolutionParams::new(1.0, -1.0).is_err());
}

#[test]
fn convolution_matches_closed_form_fock() {
    let pr = params(40e-6, 1e4);
    let g0 = WignerGrid::model(OscillatorState::FockOne, &pr, 0.0, 4.0, 161);
    let evolved = evolve_grid_convolution(&g0, 40e-6, &pr).unwrap();
    let closed = WignerGrid::model(OscillatorState::FockOne, &pr, 40e-6, 4.0, 161);
    let dev = evolved.values.iter().zip(&closed.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev < 1e-4, "max deviation {dev:e}");
    assert!((evolved.normalization() - g0.normalization()).abs() < 1e-4);
}

#[test]
fn convolution_matches_closed_form_superposition() {
    let pr = params(40e-6, 1e4);
    let g0 = WignerGrid::model(OscillatorState::Superposition, &pr, 0.0, 4.0, 161);
    let evolved = evolve_grid_convolution(&g0, 40e-6, &pr).unwrap();
    let closed = WignerGrid::model(OscillatorState::Superposition, &pr, 40e-6, 4.0, 161);
    let dev = evolved.values.iter().zip(&closed.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev < 1e-4, "max deviation {dev:e}");
}

#[test]
fn convolution_identity_at_zero_time() {
    let pr = params(40e-6, 1e4);
    let g0 = WignerGrid::model(OscillatorState::FockOne, &pr, 0.0, 5.0, 101);
    let same = evolve_grid_convolution(&g0, 0.0, &pr).unwrap();
    for (a, b) in same.values.iter().zip(&g0.values) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn convolution_semigroup() {
    let pr = params(40e-6, 1e4);
    let g0 = WignerGrid::model(OscillatorState::FockOne, &pr, 0.0, 7.0, 141);
    let a = evolve_grid_convolution(&g0, 15e-6, &pr).unwrap();
    let ab = evolve_grid_convolution(&a, 25e-6, &pr).unwrap();
    let direct = evolve_grid_convolution(&g0, 40e-6, &pr).unwrap();
    let dev = ab.values.iter().zip(&direct.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(dev < 2e-4, "{dev:e}");
}

#[test]
fn convolution_refuses_truncated_grid() {
    let pr = params(40e-6, 1e4);
    let g0 = WignerGrid::model(OscillatorState::FockOne, &pr, 0.0, 2.0, 41);
    match evolve_grid_convolution(&g0, 10e-6, &pr) {
        Err(macroscope::Error::GridMargin { required_span, .. }) => assert!(required_span > 2.0),
        other => panic!("expected margin error, got {other:?}"),
    }
}

#[test]
fn rotations() {
    let pr = params(40e-6, 0.0);
    let fock = WignerGrid::model(OscillatorState::FockOne, &pr, 10e-6, 3.0, 61);
    let (same, _) = rotate_grid(&fock, 0.0).unwrap();
    for (a, b) in same.values.iter().zip(&fock.values) {
        assert!((a - b).abs() < 1e-12);
    }
    let (flipped, _) = rotate_grid(&fock, PI).unwrap();
    for (a, b) in flipped.values.iter().zip(&fock.values) {
        assert!((a - b).abs() < 1e-9);
    }
    let sup = WignerGrid::model(OscillatorState::Superposition, &pr, 10e-6, 3.0, 61);
    let theta = PI / 2.0;
    let (rot, missing) = rotate_grid(&sup, theta).unwrap();
    assert_eq!(missing, 0);
    let mut dev: f64 = 0.0;
    for (ip, &p) in sup.ps.iter().enumerate() {
        for (ix, &x) in sup.xs.iter().enumerate() {
            let (s, c) = theta.sin_cos();
            let expect = evolved_wigner_closed(
                OscillatorState::Superposition,
                x * c + p * s,
                -x * s + p * c,
                10e-6,
                &pr,
            );
            dev = dev.max((rot.at(ix, ip) - expect).abs());
        }
    }
    assert!(dev < 1e-3, "{dev:e}");
    let (_, missing) = rotate_grid(&sup, 0.3).unwrap();
    assert!(missing > 0);
    assert!(rotate_grid(&sup, 4.0).is_err());
}

#[test]
fn fock_negativity_lifetime_is_t1_ln2() {
    let t1 = 85.8e-6;
    let rep = negativity_metrics(OscillatorState::FockOne, &params(t1, 0.0), 1e-3).unwrap();
    let t_star = rep.t_star.unwrap();
    assert!((t_star - t1 * LN_2).abs() < 1e-6 * t1 * LN_2, "{t_star:e}");
    assert!((rep.min_values[0] + 1.0 / PI).abs() < 1e-12);
}

#[test]
fn diffusion_shortens_negativity() {
    let t1 = 85.8e-6;
    let mut last = f64::INFINITY;
    for g in [0.0, 100.0, 1e3, 1e4, 100.0 / t1] {
        let t = negativity_metrics(OscillatorState::FockOne, &params(t1, g), 1e-3).unwrap().t_star.unwrap();
        assert!(t < last);
        last = t;
    }
}

#[test]
fn ground_state_never_negative() {
    let rep = negativity_metrics(OscillatorState::Ground, &params(85.8e-6, 1e3), 1e-3).unwrap();
    assert!(rep.t_star.is_none());
    assert!(rep.min_values.iter().all(|&v| v >= 0.0));
}

#[test]
fn superposition_negativity() {
    let pr = params(85.8e-6, 0.0);
    let rep = negativity_metrics(OscillatorState::Superposition, &pr, 1e-3).unwrap();
    let mut brute = f64::INFINITY;
    for i in 0..=800 {
        for j in 0..=800 {
            let (x, p) = (-2.0 + i as f64 * 0.005, -2.0 + j as f64 * 0.005);
            brute = brute.min(initial_wigner(OscillatorState::Superposition, x, p));
        }
    }
    assert!(rep.min_values[0] <= brute + 1e-12);
    assert!((rep.min_values[0] - brute).abs() < 1e-4);
    assert!(rep.min_values[0] < -(-0.5f64).exp() / (2.0 * PI));
    let t = rep.t_star.unwrap();
    assert!(min_wigner(OscillatorState::Superposition, t * 0.999, &pr) < 0.0);
    assert!(min_wigner(OscillatorState::Superposition, t * 1.001, &pr) >= -1e-12);
}

#[test]
fn state_names_round_trip() {
    for s in STATES {
        assert_eq!(OscillatorState::parse(&s.label()).unwrap(), s);
    }
    assert!(OscillatorState::parse("mixture:1.5").is_err());
}
