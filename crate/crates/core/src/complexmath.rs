//! Principal-branch powers and the real gamma function.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Points closer than this to the positive real axis count as lying on it.
const AXIS_TOL: f64 = 1e-300;

/// `(-z)^beta` on the principal branch, `Arg(-z) ∈ (-π, π]`.
///
/// The branch cut of `(-z)^beta` is `z ∈ [0, +∞)`, which every admissible
/// contour avoids. Evaluated as `exp(beta * Log(-z))` with the modulus and
/// phase split so that conjugate arguments give exactly conjugate results.
pub fn neg_power(z: Complex, beta: f64) -> Result<Complex> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exponent must be finite, got {beta}"
        )));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Overflow(format!("non-finite argument {z}")));
    }
    if z.im.abs() <= AXIS_TOL && z.re >= 0.0 {
        return Err(Error::Domain(format!(
            "(-z)^beta is evaluated on its branch cut at z = {z}"
        )));
    }
    let w = -z;
    let ln_abs = w.norm().ln();
    let arg = w.im.atan2(w.re);
    let modulus = (beta * ln_abs).exp();
    if !modulus.is_finite() {
        return Err(Error::Overflow(format!(
            "|(-z)^beta| exceeds the floating-point range at z = {z}, beta = {beta}"
        )));
    }
    let theta = beta * arg;
    Ok(Complex::new(modulus * theta.cos(), modulus * theta.sin()))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x > 0` (Lanczos, g = 7, nine coefficients).
///
/// Arguments below 1/2 are lifted with `Γ(x) = Γ(x + 1) / x`, so the
/// reflection formula stays available as an independent check.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "gamma is implemented for finite x > 0, got {x}"
        )));
    }
    if x < 0.5 {
        return Ok(lanczos(x + 1.0) / x);
    }
    let value = lanczos(x);
    if !value.is_finite() {
        return Err(Error::Overflow(format!("gamma({x}) overflows")));
    }
    Ok(value)
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * series
}
