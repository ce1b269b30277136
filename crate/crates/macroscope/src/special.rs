//! Special functions: Faddeeva w(z), exponentially scaled Bessel I0/I1, sinc.

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;

/// Whether a Faddeeva value had to be clamped to stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaddeevaStatus {
    Ok,
    Saturated,
}

/// w(z) = exp(-z^2) erfc(-iz).
pub fn faddeeva(z: Complex64) -> Complex64 {
    faddeeva_checked(z).0
}

/// Like [`faddeeva`], but clamps overflowing components to +/-f64::MAX and reports it.
pub fn faddeeva_checked(z: Complex64) -> (Complex64, FaddeevaStatus) {
    let w = z.w();
    if w.re.is_finite() && w.im.is_finite() {
        return (w, FaddeevaStatus::Ok);
    }
    let clamp = |v: f64| {
        if v.is_nan() {
            f64::MAX
        } else {
            v.clamp(-f64::MAX, f64::MAX)
        }
    };
    (Complex64::new(clamp(w.re), clamp(w.im)), FaddeevaStatus::Saturated)
}

/// sin(x)/x with the removable point handled by its Taylor series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// e^{-x} I0(x) for x >= 0.
pub fn bessel_i0e(x: f64) -> f64 {
    scaled_bessel(x, 0)
}

/// e^{-x} I1(x) for x >= 0.
pub fn bessel_i1e(x: f64) -> f64 {
    scaled_bessel(x, 1)
}

fn scaled_bessel(x: f64, nu: u32) -> f64 {
    let x = x.abs();
    if x < 30.0 {
        let q = 0.25 * x * x;
        let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
        let mut sum = term;
        let mut k = 1.0;
        loop {
            term *= q / (k * (k + nu as f64));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}
