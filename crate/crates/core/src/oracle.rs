//! Reference values that do not go through the contour engine.
//!
//! Closed forms for the two builtin families, and a brute-force evaluation
//! of the defining limit
//!
//! ```text
//! D(ε) = ∫_ε^∞ x^(α−1−n) f(x) dx − Σ_{k<n} ε^(α−n+k) f^(k)(0) / (k! (n−α−k))
//! ```
//!
//! For `f = Σ a_m x^m` near zero the residual is
//! `D(ε) − I = −Σ_{m≥n} a_m ε^(α+m−n) / (α+m−n)`, so the limit is
//! extrapolated with the model `D(ε) = I + Σ_j c_j ε^(α+j)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::complexmath::{gamma, Complex};
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::quadrature::FpProblem;
use crate::sum::CompensatedSum;

fn check(n: u32, alpha: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter("alpha must be in (0,1)".into()));
    }
    Ok(())
}

/// `fp ∫₀^∞ x^(α−1−n) / (1+x²) dx`
pub fn closed_form_i(n: u32, alpha: f64) -> Result<f64> {
    check(n, alpha)?;
    let m = n / 2;
    let half_pi = PI / 2.0;
    Ok(if n % 2 == 0 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sign * half_pi / (PI * alpha / 2.0).sin()
    } else {
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        sign * half_pi / (PI * alpha / 2.0).cos()
    })
}

/// `fp ∫₀^∞ x^(α−1−n) e^(−x) dx = (−1)^n Γ(α) / ((1−α)(2−α)⋯(n−α))`
pub fn closed_form_ii(n: u32, alpha: f64) -> Result<f64> {
    check(n, alpha)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let denom: f64 = (1..=n).map(|j| j as f64 - alpha).product();
    Ok(sign * gamma(alpha)? / denom)
}

/// Closed form attached to a builtin integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    Runge,
    ExpDecay,
}

impl ClosedForm {
    pub fn for_builtin(name: &str) -> Option<ClosedForm> {
        match name {
            "runge" => Some(ClosedForm::Runge),
            "expdecay" => Some(ClosedForm::ExpDecay),
            _ => None,
        }
    }

    pub fn value(self, n: u32, alpha: f64) -> Result<f64> {
        match self {
            ClosedForm::Runge => closed_form_i(n, alpha),
            ClosedForm::ExpDecay => closed_form_ii(n, alpha),
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `Σ_{k<n} ε^(α−n+k) f^(k)(0) / (k! (n−α−k))`, real part of the derivatives.
pub fn regularization_sum(f: &Integrand, n: u32, alpha: f64, eps: f64) -> Result<f64> {
    check(n, alpha)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let mut acc = CompensatedSum::new();
    for k in 0..n as usize {
        let d = f.derivative_at_zero(k)?.re;
        if d == 0.0 {
            continue;
        }
        let p = alpha - n as f64 + k as f64;
        acc += eps.powf(p) * d / (factorial(k) * (n as f64 - alpha - k as f64));
    }
    Ok(acc.value())
}

const TAIL_START_H: f64 = 0.25;
const TAIL_FINEST_H: f64 = 1.0 / 1024.0;
const TAIL_REL_TOL: f64 = 1e-13;
const TAIL_MAX_T: f64 = 6.0;

/// `∫_ε^∞ x^β f(x) dx` by the trapezoidal rule after `x = ε(1 + e^(sinh t))`,
/// halving the mesh until two levels agree to `1e-13` relative.
pub fn tail_integral(f: &Integrand, beta: f64, eps: f64) -> Result<f64> {
    let mut prev = tail_trapezoid(f, beta, eps, TAIL_START_H)?;
    let mut h = TAIL_START_H;
    loop {
        h /= 2.0;
        let cur = tail_trapezoid(f, beta, eps, h)?;
        if (cur - prev).abs() <= TAIL_REL_TOL * cur.abs() {
            return Ok(cur);
        }
        if h <= TAIL_FINEST_H {
            return Err(Error::NoConvergence {
                message: format!(
                    "tail integral at eps = {eps} not self-consistent: {cur} vs {prev}"
                ),
                history: Vec::new(),
            });
        }
        prev = cur;
    }
}

fn tail_term(f: &Integrand, beta: f64, eps: f64, t: f64) -> Result<Option<f64>> {
    let e = t.sinh().exp();
    let x = eps * (1.0 + e);
    if !x.is_finite() {
        return Ok(None);
    }
    let fx = match f.eval(Complex::new(x, 0.0)) {
        Ok(v) => v.re,
        Err(Error::Overflow(_)) => return Ok(None),
        Err(err) => return Err(err),
    };
    let v = x.powf(beta) * fx * eps * e * t.cosh();
    Ok(v.is_finite().then_some(v))
}

fn tail_trapezoid(f: &Integrand, beta: f64, eps: f64, h: f64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    acc += tail_term(f, beta, eps, 0.0)?.unwrap_or(0.0);
    for sign in [1.0, -1.0] {
        let mut k = 1usize;
        loop {
            let t = sign * k as f64 * h;
            if t.abs() > TAIL_MAX_T {
                break;
            }
            let Some(v) = tail_term(f, beta, eps, t)? else {
                break;
            };
            acc += v;
            if k > 10 && v.abs() < 1e-20 * acc.value().abs() {
                break;
            }
            k += 1;
        }
    }
    Ok(h * acc.value())
}

/// The `ε` values at which `D(ε)` is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSchedule {
    eps: Vec<f64>,
    extrapolate: bool,
}

/// Below this the regularization sum cancels away every digit.
pub const MIN_EPSILON: f64 = 1e-8;

impl EpsilonSchedule {
    pub fn new(eps: Vec<f64>, extrapolate: bool) -> Result<Self> {
        if eps.len() < 2 {
            return Err(Error::InvalidParameter(
                "epsilon schedule needs at least two values".into(),
            ));
        }
        if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidParameter(
                "epsilon values must be positive".into(),
            ));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter(
                "epsilon schedule must be strictly decreasing".into(),
            ));
        }
        if *eps.last().unwrap() < MIN_EPSILON {
            return Err(Error::InvalidParameter(format!(
                "smallest epsilon must be >= {MIN_EPSILON:e}"
            )));
        }
        Ok(EpsilonSchedule { eps, extrapolate })
    }

    /// `first · ratio^j`, `j = 0 … len−1`.
    pub fn geometric(first: f64, ratio: f64, len: usize) -> Result<Self> {
        Self::new(
            (0..len).map(|j| first * ratio.powi(j as i32)).collect(),
            true,
        )
    }

    /// `1e-2, 1e-3, …, 1e-6`. Usable for `n = 1`; for larger `n` the
    /// subtraction loses too many digits at the small end.
    pub fn decades() -> Self {
        Self::geometric(1e-2, 0.1, 5).unwrap()
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn extrapolate(&self) -> bool {
        self.extrapolate
    }

    pub fn without_extrapolation(mut self) -> Self {
        self.extrapolate = false;
        self
    }
}

impl Default for EpsilonSchedule {
    /// `0.5 · 4^(−j)`, `j = 0 … 5`.
    fn default() -> Self {
        Self::geometric(0.5, 0.25, 6).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonLimit {
    pub value: f64,
    pub est_error: f64,
    /// `(ε, D(ε))` for every schedule entry.
    pub raw: Vec<(f64, f64)>,
}

/// `D(ε)` at a single `ε`.
pub fn epsilon_difference(p: &FpProblem, eps: f64) -> Result<f64> {
    let f = p.integrand();
    let tail = tail_integral(f, p.exponent(), eps)?;
    Ok(tail - regularization_sum(f, p.n(), p.alpha(), eps)?)
}

/// Brute-force value of the finite-part integral from its definition.
pub fn fp_epsilon_limit(p: &FpProblem, s: &EpsilonSchedule) -> Result<EpsilonLimit> {
    if !p.integrand().real_on_axis() {
        return Err(Error::InvalidParameter(format!(
            "the epsilon-limit oracle needs an integrand real on the axis; `{}` is not",
            p.integrand().name()
        )));
    }
    let raw = s
        .eps()
        .iter()
        .map(|&e| Ok((e, epsilon_difference(p, e)?)))
        .collect::<Result<Vec<_>>>()?;
    let m = raw.len();
    let (value, previous) = if s.extrapolate() {
        (
            extrapolate(&raw, p.alpha())?,
            extrapolate(&raw[..m - 1], p.alpha())?,
        )
    } else {
        (raw[m - 1].1, raw[m - 2].1)
    };
    let est_error = (value - previous).abs();
    if est_error > 1e-5 * value.abs() {
        return Err(Error::NoConvergence {
            message: format!("epsilon-limit extrapolants have not settled: {value} vs {previous}"),
            history: Vec::new(),
        });
    }
    Ok(EpsilonLimit {
        value,
        est_error,
        raw,
    })
}

/// Solves `D_i = I + Σ_{j<m−1} c_j ε_i^(α+j)` for `I`.
fn extrapolate(raw: &[(f64, f64)], alpha: f64) -> Result<f64> {
    let m = raw.len();
    let mut a = DMatrix::from_fn(m, m, |i, j| {
        if j == 0 {
            1.0
        } else {
            raw[i].0.powf(alpha + (j - 1) as f64)
        }
    });
    // equilibrate columns; the powers span many decades
    for j in 1..m {
        let s = a.column(j).amax();
        a.column_mut(j).unscale_mut(s);
    }
    let b = DVector::from_iterator(m, raw.iter().map(|r| r.1));
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular extrapolation system".into()))?;
    Ok(x[0])
}
