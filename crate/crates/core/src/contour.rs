//! Integration paths around the positive real axis.
//!
//! The shipped family is
//!
//! ```text
//! φ(u) = (w / iπ) Log((1 + iw) / (1 − iw)) = (2/π) w arctan(w),   w = u + iδ
//! ```
//!
//! For `0 < δ < 1` it crosses the real axis once, on the negative side, and
//! approaches `u ± iδ − 2/π` as `u → ±∞`. Increasing `u` runs along the
//! lower branch from `+∞`, so the counterclockwise loop around `[0, ∞)` is
//! the path traversed with *decreasing* `u`.
//!
//! Custom paths implement [`ContourPath`]. The representation is only valid
//! if the integrand is analytic on and inside the path; that is the caller's
//! responsibility.

use std::f64::consts::PI;
use std::fmt;

use crate::complexmath::Complex;
use crate::error::{Error, Result};
use crate::transform::DeTransform;

/// Parameterised closed path around `[0, +∞)`.
pub trait ContourPath: fmt::Debug + Send + Sync {
    fn phi(&self, u: f64) -> Result<Complex>;

    fn phi_prime(&self, u: f64) -> Result<Complex>;

    /// `φ(−u) = conj φ(u)` for all `u`.
    fn is_symmetric(&self) -> bool;

    /// Distance scale used when flagging integrand poles close to the path.
    fn clearance(&self) -> f64;
}

/// The arctan contour with vertical offset `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    delta: f64,
}

/// Largest |u| at which the closed form is evaluated.
const MAX_PARAMETER: f64 = 1e300;

impl Contour {
    pub const DEFAULT_DELTA: f64 = 0.5;

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "contour delta must be in (0,1), got {delta}"
            )));
        }
        let c = Contour { delta };
        c.check_invariants()?;
        Ok(c)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Samples the path through the default DE transform on `v ∈ [−6, 6]`
    /// and checks that it stays off `[0, ∞)` and is conjugate-symmetric.
    pub fn check_invariants(&self) -> Result<()> {
        let t = DeTransform::SinhSinh;
        for i in 0..=1000 {
            let v = -6.0 + 12.0 * i as f64 / 1000.0;
            let u = t.psi(v)?;
            let z = self.phi(u)?;
            if z.im == 0.0 && z.re >= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "contour touches the positive real axis at u = {u}"
                )));
            }
            let mirror = self.phi(-u)?;
            if (mirror - z.conj()).norm() > 1e-13 * (1.0 + z.norm()) {
                return Err(Error::InvalidParameter(format!(
                    "contour is not conjugate-symmetric at u = {u}"
                )));
            }
        }
        Ok(())
    }

    /// `Log(1 + iw) − Log(1 − iw)`; both arguments lie in the right half
    /// plane, so this equals the principal log of the quotient.
    fn log_ratio(&self, u: f64) -> (Complex, Complex) {
        let w = Complex::new(u, self.delta);
        let a = Complex::new(1.0 - self.delta, u);
        let b = Complex::new(1.0 + self.delta, -u);
        (w, a.ln() - b.ln())
    }
}

impl Default for Contour {
    fn default() -> Self {
        Contour {
            delta: Self::DEFAULT_DELTA,
        }
    }
}

fn check_parameter(u: f64) -> Result<()> {
    if u.is_finite() && u.abs() <= MAX_PARAMETER {
        Ok(())
    } else {
        Err(Error::Overflow(format!("contour parameter u = {u}")))
    }
}

/// `1/z` without squaring `|z|` (Smith's method).
fn recip(z: Complex) -> Complex {
    if z.re.abs() >= z.im.abs() {
        let r = z.im / z.re;
        let d = z.re + z.im * r;
        Complex::new(1.0 / d, -r / d)
    } else {
        let r = z.re / z.im;
        let d = z.re * r + z.im;
        Complex::new(r / d, -1.0 / d)
    }
}

fn finite(z: Complex, what: &str, u: f64) -> Result<Complex> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Overflow(format!("{what} at u = {u}")))
    }
}

impl ContourPath for Contour {
    fn phi(&self, u: f64) -> Result<Complex> {
        check_parameter(u)?;
        let (w, log) = self.log_ratio(u);
        // w Log(..) / (iπ) = −i w Log(..) / π
        let z = Complex::new(0.0, -1.0 / PI) * (w * log);
        finite(z, "φ", u)
    }

    fn phi_prime(&self, u: f64) -> Result<Complex> {
        check_parameter(u)?;
        let (w, log) = self.log_ratio(u);
        // φ' = (2/π)(arctan w + w / (1 + w²)), w / (1 + w²) = 1 / (w + 1/w)
        let arctan_term = Complex::new(0.0, -1.0 / PI) * log;
        let rational = recip(w + recip(w)) * (2.0 / PI);
        finite(arctan_term + rational, "φ'", u)
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn clearance(&self) -> f64 {
        self.delta
    }
}

/// A quadrature node: the contour point and its combined weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    /// `φ(ψ(v))`
    pub z: Complex,
    /// `φ'(ψ(v)) ψ'(v)`
    pub w: Complex,
}

/// Fused sampling point and weight for the transformed abscissa `v`.
pub fn node(c: &dyn ContourPath, t: DeTransform, v: f64) -> Result<Node> {
    let u = t.psi(v)?;
    let dpsi = t.psi_prime(v)?;
    let z = c.phi(u)?;
    let w = finite(c.phi_prime(u)? * dpsi, "node weight", u)?;
    Ok(Node { z, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c() -> Contour {
        Contour::new(0.5).unwrap()
    }

    #[test]
    fn crosses_axis_at_closed_form_point() {
        // w = i/2: (1 + iw)/(1 − iw) = 1/3, φ = (i/2)(−ln 3)/(iπ)
        let z = c().phi(0.0).unwrap();
        assert_relative_eq!(z.re, -(3.0f64).ln() / (2.0 * PI), max_relative = 1e-15);
        assert!(z.im.abs() < 1e-16);
    }

    #[test]
    fn conjugate_symmetry() {
        let z = c().phi(1.7).unwrap();
        let m = c().phi(-1.7).unwrap();
        assert!((m - z.conj()).norm() <= 1e-15 * z.norm());
    }

    #[test]
    fn asymptotic_offset() {
        let z = c().phi(50.0).unwrap();
        assert!((z.im - 0.5).abs() < 0.05, "{z}");
        assert!((z.re - (50.0 - 2.0 / PI)).abs() < 0.05, "{z}");
    }

    #[test]
    fn derivative_at_origin_is_imaginary() {
        let d = c().phi_prime(0.0).unwrap();
        assert!(d.re.abs() <= 1e-16, "{d}");
        assert!(d.im != 0.0);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-5;
        for u in [-2.5, -0.8, 0.0, 0.8, 3.0] {
            let fd = (c().phi(u + h).unwrap() - c().phi(u - h).unwrap()) / (2.0 * h);
            let d = c().phi_prime(u).unwrap();
            assert!((fd - d).norm() <= 1e-8 * d.norm(), "u = {u}: {fd} vs {d}");
        }
    }

    #[test]
    fn derivative_antisymmetry() {
        let d = c().phi_prime(1.2).unwrap();
        let m = c().phi_prime(-1.2).unwrap();
        assert!((m + d.conj()).norm() <= 1e-15 * d.norm());
    }

    #[test]
    fn node_at_origin() {
        let n = node(&c(), DeTransform::SinhSinh, 0.0).unwrap();
        assert_eq!(n.z, c().phi(0.0).unwrap());
        assert_eq!(n.w, c().phi_prime(0.0).unwrap());
    }

    #[test]
    fn node_mirror() {
        let t = DeTransform::SinhSinh;
        let a = node(&c(), t, 0.9).unwrap();
        let b = node(&c(), t, -0.9).unwrap();
        assert!((b.z - a.z.conj()).norm() <= 1e-15 * a.z.norm());
        assert!((b.w + a.w.conj()).norm() <= 1e-15 * a.w.norm());
    }

    #[test]
    fn node_far_out() {
        // ψ(3) = sinh(sinh 3) ≈ 2.1e4
        let n = node(&c(), DeTransform::SinhSinh, 3.0).unwrap();
        assert!(n.z.re > 1e3, "{}", n.z);
    }

    #[test]
    fn huge_parameters_overflow() {
        assert!(matches!(c().phi(1e301), Err(Error::Overflow(_))));
        assert!(matches!(
            c().phi_prime(f64::INFINITY),
            Err(Error::Overflow(_))
        ));
        assert!(c().phi(1e200).is_ok());
        assert!(c().phi_prime(-1e200).is_ok());
    }

    #[test]
    fn delta_validated() {
        for d in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(Contour::new(d).is_err(), "{d}");
        }
        for d in [0.05, 0.25, 0.75, 0.95] {
            Contour::new(d).unwrap();
        }
    }
}
