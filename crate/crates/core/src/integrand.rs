//! Analytic integrands `f(z)` and their Taylor data at the origin.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::complexmath::Complex;
use crate::error::{Error, Result};
use crate::expr::Expr;

pub type EvalFn = dyn Fn(Complex) -> Result<Complex> + Send + Sync;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["runge", "expdecay"];

/// Number of stored derivatives for builtins; higher orders use the
/// Cauchy-circle rule.
const STORED_DERIVATIVES: usize = 21;

/// Large enough that the `k!/r^k` roundoff stays near 1e-11 up to `k = 6`;
/// the cross-check on `r/2` flags singularities between the circles.
pub const CAUCHY_RADIUS: f64 = 0.5;
pub const CAUCHY_NODES: usize = 64;

/// An analytic function `f` on a neighbourhood of `[0, ∞)`.
///
/// The decay requirement `f(x) = O(x^(n−α−ε))` is not checked here; the
/// quadrature engine's term monitor catches integrands that violate it.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    eval: Arc<EvalFn>,
    real_on_axis: bool,
    known_poles: Vec<Complex>,
    derivatives_at_zero: Vec<Complex>,
}

impl Integrand {
    /// A user function with no metadata; `real_on_axis` defaults to false.
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(Complex) -> Result<Complex> + Send + Sync + 'static,
    {
        Integrand {
            name: name.into(),
            eval: Arc::new(f),
            real_on_axis: false,
            known_poles: Vec::new(),
            derivatives_at_zero: Vec::new(),
        }
    }

    /// Parses `src` with [`Expr::parse`]. The integrand is taken to be real
    /// on the real axis iff the source never mentions `i`.
    pub fn from_expr(src: &str) -> Result<Self> {
        let expr = Expr::parse(src)?;
        let real = !expr.uses_imaginary_unit();
        Ok(Integrand::new(src.trim(), move |z| expr.eval(z)).with_real_on_axis(real))
    }

    pub fn with_real_on_axis(mut self, real: bool) -> Self {
        self.real_on_axis = real;
        self
    }

    pub fn with_poles(mut self, poles: Vec<Complex>) -> Self {
        self.known_poles = poles;
        self
    }

    /// `f^(k)(0)` for `k = 0, 1, …, derivatives.len() − 1`.
    pub fn with_derivatives(mut self, derivatives: Vec<Complex>) -> Self {
        self.derivatives_at_zero = derivatives;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn real_on_axis(&self) -> bool {
        self.real_on_axis
    }

    pub fn known_poles(&self) -> &[Complex] {
        &self.known_poles
    }

    pub fn stored_derivatives(&self) -> &[Complex] {
        &self.derivatives_at_zero
    }

    pub fn eval(&self, z: Complex) -> Result<Complex> {
        (self.eval)(z)
    }

    /// `f^(k)(0)`: the stored value when there is one, otherwise the
    /// Cauchy-circle estimate.
    pub fn derivative_at_zero(&self, k: usize) -> Result<Complex> {
        match self.derivatives_at_zero.get(k) {
            Some(&d) => Ok(d),
            None => cauchy_derivative(self, k, CAUCHY_RADIUS, CAUCHY_NODES),
        }
    }

    /// Spot-checks `f(conj z) = conj f(z)` at the given points.
    pub fn satisfies_reflection(&self, points: &[Complex], rel_tol: f64) -> Result<bool> {
        for &z in points {
            let a = self.eval(z)?;
            let b = self.eval(z.conj())?;
            if (b - a.conj()).norm() > rel_tol * a.norm() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("real_on_axis", &self.real_on_axis)
            .field("known_poles", &self.known_poles)
            .field("stored_derivatives", &self.derivatives_at_zero.len())
            .finish()
    }
}

fn finite(z: Complex, name: &str, at: Complex) -> Result<Complex> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Overflow(format!("{name} at z = {at}")))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `runge`: `1/(1+z²)`, `expdecay`: `e^(−z)`.
pub fn builtin(name: &str) -> Result<Integrand> {
    match name {
        "runge" => {
            let derivatives = (0..STORED_DERIVATIVES)
                .map(|k| {
                    if k % 2 == 1 {
                        Complex::new(0.0, 0.0)
                    } else {
                        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        Complex::new(sign * factorial(k), 0.0)
                    }
                })
                .collect();
            Ok(Integrand::new("runge", |z: Complex| {
                let d = Complex::new(1.0, 0.0) + z * z;
                if d.re == 0.0 && d.im == 0.0 {
                    return Err(Error::Eval(format!("pole of 1/(1+z^2) at z = {z}")));
                }
                finite(d.inv(), "1/(1+z^2)", z)
            })
            .with_real_on_axis(true)
            .with_poles(vec![Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)])
            .with_derivatives(derivatives))
        }
        "expdecay" => {
            let derivatives = (0..STORED_DERIVATIVES)
                .map(|k| Complex::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect();
            Ok(
                Integrand::new("expdecay", |z: Complex| finite((-z).exp(), "exp(-z)", z))
                    .with_real_on_axis(true)
                    .with_derivatives(derivatives),
            )
        }
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Trapezoidal rule for `k!/(2πi) ∮_{|z|=r} f(z) z^(−k−1) dz`, cross-checked
/// against the same rule on radius `r/2`.
pub fn cauchy_derivative(f: &Integrand, k: usize, radius: f64, nodes: usize) -> Result<Complex> {
    let (outer, outer_max) = circle_coefficient(f, k, radius, nodes)?;
    let (inner, inner_max) = circle_coefficient(f, k, radius / 2.0, nodes)?;
    let kf = factorial(k);
    let a = outer * kf;
    let b = inner * kf;
    // roundoff floor of the smaller circle
    let noise =
        nodes as f64 * f64::EPSILON * kf * outer_max.max(inner_max) / (radius / 2.0).powi(k as i32);
    let diff = (a - b).norm();
    if diff > 1e-8 * a.norm().max(b.norm()) + noise {
        return Err(Error::Numerical(format!(
            "Cauchy-circle estimates of f^({k})(0) disagree: {a} (r = {radius}) vs {b} (r = {})",
            radius / 2.0
        )));
    }
    Ok(a)
}

/// Taylor coefficient `a_k` and `max |f|` on the circle.
fn circle_coefficient(
    f: &Integrand,
    k: usize,
    radius: f64,
    nodes: usize,
) -> Result<(Complex, f64)> {
    let mut acc = crate::sum::CompensatedComplexSum::new();
    let mut max = 0.0f64;
    for j in 0..nodes {
        let theta = 2.0 * PI * j as f64 / nodes as f64;
        let z = Complex::from_polar(radius, theta);
        let v = f.eval(z)?;
        max = max.max(v.norm());
        acc += v * Complex::from_polar(1.0, -(k as f64) * theta);
    }
    Ok((acc.value() / (nodes as f64 * radius.powi(k as i32)), max))
}
