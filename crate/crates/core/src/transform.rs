//! Double-exponential variable transforms for integrals over the real line.
//!
//! `SinhSinh` (`u = sinh(sinh v)`) suits integrands with algebraic decay,
//! `Sinh` (`u = sinh v`) integrands that already decay exponentially.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest argument for which `cosh` stays inside double precision.
const OVERFLOW_GUARD: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DeTransform {
    #[default]
    SinhSinh,
    Sinh,
}

impl DeTransform {
    /// `ψ(v)`. Odd in `v`, bit-for-bit.
    pub fn psi(self, v: f64) -> Result<f64> {
        let a = v.abs();
        let value = match self {
            DeTransform::SinhSinh => {
                let inner = a.sinh();
                guard(self, v, inner)?;
                inner.sinh()
            }
            DeTransform::Sinh => {
                guard(self, v, a)?;
                a.sinh()
            }
        };
        Ok(value.copysign(v))
    }

    /// `ψ'(v) > 0`. Even in `v`, bit-for-bit.
    pub fn psi_prime(self, v: f64) -> Result<f64> {
        let a = v.abs();
        match self {
            DeTransform::SinhSinh => {
                let inner = a.sinh();
                guard(self, v, inner)?;
                Ok(a.cosh() * inner.cosh())
            }
            DeTransform::Sinh => {
                guard(self, v, a)?;
                Ok(a.cosh())
            }
        }
    }
}

fn guard(t: DeTransform, v: f64, arg: f64) -> Result<()> {
    if arg.is_finite() && arg <= OVERFLOW_GUARD {
        Ok(())
    } else {
        Err(Error::Overflow(format!("{t} transform at v = {v}")))
    }
}

impl fmt::Display for DeTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeTransform::SinhSinh => "sinh-sinh",
            DeTransform::Sinh => "sinh",
        })
    }
}

impl FromStr for DeTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinh-sinh" | "sinhsinh" => Ok(DeTransform::SinhSinh),
            "sinh" => Ok(DeTransform::Sinh),
            other => Err(Error::InvalidParameter(format!(
                "unknown transform `{other}` (expected `sinh-sinh` or `sinh`)"
            ))),
        }
    }
}
