//! The finite-part engine.
//!
//! With nodes `(z_k, w_k) = node(C, ψ, kh)` and
//! `g_k = (−z_k)^(α−1−n) f(z_k) w_k`, the full rule is
//!
//! ```text
//! I ≈ (−1)^n h / (2i sin πα) · Σ_{k=−N₋}^{N₊} g_k
//! ```
//!
//! The sign is `(−1)^(n+1)` from the loop representation times `−1`: the
//! shipped contours run clockwise for increasing parameter, so the positive
//! loop is the parameter integral taken from `+∞` down to `−∞`.
//!
//! When `f` is real on the real axis and the contour is conjugate-symmetric,
//! `g_{−k} = −conj(g_k)` and the rule folds to
//!
//! ```text
//! I ≈ (−1)^n h / sin πα · Im{ g_0 / 2 + Σ_{k=1}^{N} g_k }
//! ```
//!
//! Each side of the sum stops at the first term whose scaled size
//! `(h / sin πα)|g_k|` drops below `tol · |running value|`.

use std::f64::consts::PI;
use std::fmt;

use crate::complexmath::{neg_power, Complex};
use crate::contour::{node, ContourPath};
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::sum::{CompensatedComplexSum, CompensatedSum};
use crate::transform::DeTransform;

/// Lower bound on `|partial|` in the truncation test, so that an all-zero
/// start does not stop the sum at once.
pub const PARTIAL_FLOOR: f64 = 1e-280;

/// Consecutive growing terms that count as divergence.
pub const GROWTH_LIMIT: usize = 10;

/// Below this `sin πα` the prefactor amplifies quadrature noise.
const ILL_CONDITIONED_SIN: f64 = 0.05;

/// `|Im| ≤ REAL_TOL · |Re|` reports a real value.
const REAL_TOL: f64 = 1e-8;

/// Coarsest and finest meshes of [`auto_mesh`].
const AUTO_MESH_START: f64 = 0.5;
const AUTO_MESH_FINEST: f64 = 1.0 / 256.0;

/// `fp ∫₀^∞ x^(α−1−n) f(x) dx`.
#[derive(Debug, Clone)]
pub struct FpProblem {
    n: u32,
    alpha: f64,
    f: Integrand,
}

impl FpProblem {
    pub fn new(n: u32, alpha: f64, f: Integrand) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter("alpha must be in (0,1)".into()));
        }
        Ok(FpProblem { n, alpha, f })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn integrand(&self) -> &Integrand {
        &self.f
    }

    /// `α − 1 − n`
    pub fn exponent(&self) -> f64 {
        self.alpha - 1.0 - self.n as f64
    }

    pub fn sin_pi_alpha(&self) -> f64 {
        (PI * self.alpha).sin()
    }

    /// `(−1)^n`, see the module docs.
    fn orientation_sign(&self) -> f64 {
        if self.n % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureParams {
    pub h: f64,
    pub trunc_rel_tol: f64,
    /// Maximum retained terms per side.
    pub n_cap: usize,
    /// Keep a [`TermRecord`] for every evaluated term.
    pub record_trace: bool,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams {
            h: 1.0 / 16.0,
            trunc_rel_tol: 1e-15,
            n_cap: 10_000,
            record_trace: false,
        }
    }
}

impl QuadratureParams {
    pub fn new(h: f64) -> Result<Self> {
        let q = QuadratureParams {
            h,
            ..Default::default()
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mesh h must be in (0,1], got {}",
                self.h
            )));
        }
        if !(self.trunc_rel_tol > 0.0 && self.trunc_rel_tol < 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "truncation tolerance must be in (0,1e-3), got {}",
                self.trunc_rel_tol
            )));
        }
        if self.n_cap == 0 {
            return Err(Error::InvalidParameter("n_cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    TolReached,
    /// A node left the floating-point range before the tolerance was met.
    Underflow,
    CapHit,
}

impl Termination {
    fn severity(self) -> u8 {
        match self {
            Termination::TolReached => 0,
            Termination::Underflow => 1,
            Termination::CapHit => 2,
        }
    }

    fn worst(self, other: Termination) -> Termination {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::TolReached => "tol-reached",
            Termination::Underflow => "underflow",
            Termination::CapHit => "cap-hit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "k > 0",
            Side::Minus => "k < 0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formula {
    /// Symmetric when the integrand is real on the axis and the contour is
    /// symmetric, full otherwise.
    #[default]
    Auto,
    Full,
    Symmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The full rule returned a value with a non-negligible imaginary part.
    ComplexValue {
        re: f64,
        im: f64,
    },
    IllConditionedAlpha {
        sin_pi_alpha: f64,
    },
    PoleNearContour {
        pole: Complex,
        distance: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ComplexValue { re, im } => {
                write!(f, "result is complex ({re} {im:+}i); integrand may not be real on the axis")
            }
            Warning::IllConditionedAlpha { sin_pi_alpha } => write!(
                f,
                "sin(pi*alpha) = {sin_pi_alpha:.3e} is small; the 1/sin(pi*alpha) factor amplifies rounding"
            ),
            Warning::PoleNearContour { pole, distance } => write!(
                f,
                "integrand pole {pole} lies {distance:.3} from the contour samples; consider a smaller delta"
            ),
        }
    }
}

/// One evaluated term, kept when [`QuadratureParams::record_trace`] is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermRecord {
    pub side: Side,
    pub k: usize,
    /// `(h / sin πα) |g_k|`
    pub scaled: f64,
    /// `|running value|` the term was tested against.
    pub partial: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    /// The approximation; its imaginary part is zeroed when negligible.
    pub value: Complex,
    /// Imaginary part before zeroing (always 0 for the symmetric rule).
    pub imag_residual: f64,
    pub h: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    /// Integrand evaluations, including the discarded term of each side.
    pub evaluations: usize,
    pub est_error: Option<f64>,
    pub termination: Termination,
    pub termination_plus: Termination,
    pub termination_minus: Termination,
    /// `Full` or `Symmetric`, never `Auto`.
    pub formula: Formula,
    pub warnings: Vec<Warning>,
    pub trace: Vec<TermRecord>,
}

impl QuadratureResult {
    /// Sampling points of the (unfolded) trapezoidal sum.
    pub fn n_total(&self) -> usize {
        self.n_plus + self.n_minus + 1
    }

    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// A row of a mesh-halving sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshStep {
    pub h: f64,
    pub n_total: usize,
    pub evaluations: usize,
    pub value: Complex,
    /// `|value(h) − value(2h)|`
    pub est_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationDecision {
    Keep,
    Stop,
}

/// Stop iff `(h / sin πα)|term| < tol · max(|partial|, PARTIAL_FLOOR)`.
pub fn truncation_check(
    term: Complex,
    partial: f64,
    h: f64,
    alpha: f64,
    tol: f64,
) -> TruncationDecision {
    let scaled = h / (PI * alpha).sin() * term.norm();
    if scaled < tol * partial.abs().max(PARTIAL_FLOOR) {
        TruncationDecision::Stop
    } else {
        TruncationDecision::Keep
    }
}

/// Per-problem evaluation state shared by both rules.
struct Sampler<'a> {
    problem: &'a FpProblem,
    contour: &'a dyn ContourPath,
    transform: DeTransform,
    exponent: f64,
    nearest_pole: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(problem: &'a FpProblem, contour: &'a dyn ContourPath, transform: DeTransform) -> Self {
        Sampler {
            problem,
            contour,
            transform,
            exponent: problem.exponent(),
            nearest_pole: vec![f64::INFINITY; problem.f.known_poles().len()],
        }
    }

    /// `g(v)`, or `None` once the node leaves the floating-point range.
    fn term(&mut self, v: f64) -> Result<Option<Complex>> {
        let nd = match node(self.contour, self.transform, v) {
            Ok(nd) => nd,
            Err(Error::Overflow(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        for (d, pole) in self
            .nearest_pole
            .iter_mut()
            .zip(self.problem.f.known_poles())
        {
            *d = d.min((nd.z - pole).norm());
        }
        let power = match neg_power(nd.z, self.exponent) {
            Ok(p) => p,
            Err(Error::Overflow(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let fz = match self.problem.f.eval(nd.z) {
            Ok(v) => v,
            Err(Error::Overflow(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let g = power * fz * nd.w;
        if g.re.is_finite() && g.im.is_finite() {
            Ok(Some(g))
        } else {
            Ok(None)
        }
    }

    fn centre(&mut self) -> Result<Complex> {
        self.term(0.0)?.ok_or_else(|| {
            Error::Overflow("integrand overflows at the contour's axis crossing".into())
        })
    }

    fn warnings(&self) -> Vec<Warning> {
        let mut w = Vec::new();
        let s = self.problem.sin_pi_alpha();
        if s < ILL_CONDITIONED_SIN {
            w.push(Warning::IllConditionedAlpha { sin_pi_alpha: s });
        }
        for (&distance, &pole) in self.nearest_pole.iter().zip(self.problem.f.known_poles()) {
            if distance < self.contour.clearance() {
                w.push(Warning::PoleNearContour { pole, distance });
            }
        }
        w
    }
}

/// Truncation and divergence bookkeeping for one side of the sum.
struct SideState {
    side: Side,
    retained: usize,
    prev_mag: f64,
    streak: usize,
    done: Option<Termination>,
}

impl SideState {
    fn new(side: Side, centre_mag: f64) -> Self {
        SideState {
            side,
            retained: 0,
            prev_mag: centre_mag,
            streak: 0,
            done: None,
        }
    }

    /// Runs the truncation test on `g` (the candidate for index `k`) and
    /// returns whether it joins the sum.
    fn admit(
        &mut self,
        k: usize,
        g: Complex,
        partial: f64,
        problem: &FpProblem,
        q: &QuadratureParams,
        trace: &mut Vec<TermRecord>,
    ) -> Result<bool> {
        let decision = truncation_check(g, partial, q.h, problem.alpha, q.trunc_rel_tol);
        let kept = decision == TruncationDecision::Keep;
        if q.record_trace {
            trace.push(TermRecord {
                side: self.side,
                k,
                scaled: q.h / problem.sin_pi_alpha() * g.norm(),
                partial,
                kept,
            });
        }
        if !kept {
            self.done = Some(Termination::TolReached);
            return Ok(false);
        }
        let mag = g.norm();
        if mag > self.prev_mag {
            self.streak += 1;
            if self.streak >= GROWTH_LIMIT {
                return Err(Error::Divergence { side: self.side, k });
            }
        } else {
            self.streak = 0;
        }
        self.prev_mag = mag;
        self.retained += 1;
        Ok(true)
    }

    fn termination(&self) -> Termination {
        self.done.unwrap_or(Termination::CapHit)
    }
}

/// Two-sided rule; valid for any analytic `f` and any admissible contour.
pub fn fp_integral_full(
    p: &FpProblem,
    c: &dyn ContourPath,
    t: DeTransform,
    q: &QuadratureParams,
) -> Result<QuadratureResult> {
    q.validate()?;
    let mut sampler = Sampler::new(p, c, t);
    let h = q.h;
    // (−1)^n h / (2i sin πα) = −i (−1)^n h / (2 sin πα)
    let prefactor = Complex::new(0.0, -p.orientation_sign() * h / (2.0 * p.sin_pi_alpha()));

    let g0 = sampler.centre()?;
    let mut sum = CompensatedComplexSum::new();
    sum += g0;
    let mut evaluations = 1;
    let mut trace = Vec::new();
    let mut sides = [
        SideState::new(Side::Plus, g0.norm()),
        SideState::new(Side::Minus, g0.norm()),
    ];

    let mut k = 0;
    while sides.iter().any(|s| s.done.is_none()) {
        k += 1;
        for side in sides.iter_mut() {
            if side.done.is_some() {
                continue;
            }
            if side.retained >= q.n_cap {
                side.done = Some(Termination::CapHit);
                continue;
            }
            let v = match side.side {
                Side::Plus => k as f64 * h,
                Side::Minus => -(k as f64) * h,
            };
            evaluations += 1;
            let Some(g) = sampler.term(v)? else {
                side.done = Some(Termination::Underflow);
                continue;
            };
            let partial = (prefactor * sum.value()).norm();
            if side.admit(k, g, partial, p, q, &mut trace)? {
                sum += g;
            }
        }
    }

    let raw = prefactor * sum.value();
    let mut warnings = sampler.warnings();
    let value = if raw.im.abs() <= REAL_TOL * raw.re.abs() {
        Complex::new(raw.re, 0.0)
    } else {
        warnings.push(Warning::ComplexValue {
            re: raw.re,
            im: raw.im,
        });
        raw
    };
    let [plus, minus] = sides;
    Ok(QuadratureResult {
        value,
        imag_residual: raw.im,
        h,
        n_plus: plus.retained,
        n_minus: minus.retained,
        evaluations,
        est_error: None,
        termination: plus.termination().worst(minus.termination()),
        termination_plus: plus.termination(),
        termination_minus: minus.termination(),
        formula: Formula::Full,
        warnings,
        trace,
    })
}

/// Folded rule for integrands real on the axis over symmetric contours.
/// Uses about half the evaluations of [`fp_integral_full`].
pub fn fp_integral_symmetric(
    p: &FpProblem,
    c: &dyn ContourPath,
    t: DeTransform,
    q: &QuadratureParams,
) -> Result<QuadratureResult> {
    q.validate()?;
    if !p.f.real_on_axis() {
        return Err(Error::Symmetry(format!(
            "integrand `{}` is not flagged real on the real axis",
            p.f.name()
        )));
    }
    if !c.is_symmetric() {
        return Err(Error::Symmetry("contour is not conjugate-symmetric".into()));
    }
    let mut sampler = Sampler::new(p, c, t);
    let h = q.h;
    let prefactor = p.orientation_sign() * h / p.sin_pi_alpha();

    let g0 = sampler.centre()?;
    let mut acc = CompensatedSum::new();
    acc += 0.5 * g0.im;
    let mut evaluations = 1;
    let mut trace = Vec::new();
    let mut side = SideState::new(Side::Plus, g0.norm());

    let mut k = 0;
    while side.done.is_none() {
        k += 1;
        if side.retained >= q.n_cap {
            side.done = Some(Termination::CapHit);
            break;
        }
        evaluations += 1;
        let Some(g) = sampler.term(k as f64 * h)? else {
            side.done = Some(Termination::Underflow);
            break;
        };
        let partial = (prefactor * acc.value()).abs();
        if side.admit(k, g, partial, p, q, &mut trace)? {
            acc += g.im;
        }
    }

    let termination = side.termination();
    Ok(QuadratureResult {
        value: Complex::new(prefactor * acc.value(), 0.0),
        imag_residual: 0.0,
        h,
        n_plus: side.retained,
        n_minus: side.retained,
        evaluations,
        est_error: None,
        termination,
        termination_plus: termination,
        termination_minus: termination,
        formula: Formula::Symmetric,
        warnings: sampler.warnings(),
        trace,
    })
}

/// Dispatches on `formula`.
pub fn fp_integral(
    p: &FpProblem,
    c: &dyn ContourPath,
    t: DeTransform,
    q: &QuadratureParams,
    formula: Formula,
) -> Result<QuadratureResult> {
    match resolve(formula, p, c) {
        Formula::Symmetric => fp_integral_symmetric(p, c, t, q),
        _ => fp_integral_full(p, c, t, q),
    }
}

fn resolve(formula: Formula, p: &FpProblem, c: &dyn ContourPath) -> Formula {
    match formula {
        Formula::Auto if p.f.real_on_axis() && c.is_symmetric() => Formula::Symmetric,
        Formula::Auto => Formula::Full,
        other => other,
    }
}

/// Mesh-halving driver with the automatic formula choice.
pub fn auto_mesh(
    p: &FpProblem,
    c: &dyn ContourPath,
    t: DeTransform,
    target_rel: f64,
) -> Result<(QuadratureResult, Vec<MeshStep>)> {
    auto_mesh_with(p, c, t, target_rel, Formula::Auto)
}

/// Halves `h` from 1/2 until `|value(h) − value(2h)| ≤ target_rel · |value(h)|`.
///
/// Gives up with [`Error::NoConvergence`] when the estimate stops shrinking
/// above the target (a rounding plateau) or after `h = 2^-8`.
pub fn auto_mesh_with(
    p: &FpProblem,
    c: &dyn ContourPath,
    t: DeTransform,
    target_rel: f64,
    formula: Formula,
) -> Result<(QuadratureResult, Vec<MeshStep>)> {
    if !(1e-13..=1e-2).contains(&target_rel) {
        return Err(Error::InvalidParameter(format!(
            "target relative error must be in [1e-13, 1e-2], got {target_rel}"
        )));
    }
    let mut history: Vec<MeshStep> = Vec::new();
    let mut h = AUTO_MESH_START;
    let mut prev: Option<(Complex, Option<f64>)> = None;
    loop {
        let q = QuadratureParams::new(h)?;
        let mut r = fp_integral(p, c, t, &q, formula)?;
        let est = prev.map(|(v, _)| (r.value - v).norm());
        r.est_error = est;
        history.push(MeshStep {
            h,
            n_total: r.n_total(),
            evaluations: r.evaluations,
            value: r.value,
            est_error: est,
        });
        if let Some(e) = est {
            if e <= target_rel * r.value.norm() {
                return Ok((r, history));
            }
            if let Some((_, Some(prev_est))) = prev {
                if e >= prev_est {
                    return Err(Error::NoConvergence {
                        message: format!(
                            "error estimate plateaued at {e:.3e} (relative {:.3e}) above the target {target_rel:.1e}",
                            e / r.value.norm()
                        ),
                        history,
                    });
                }
            }
        }
        if h / 2.0 < AUTO_MESH_FINEST {
            return Err(Error::NoConvergence {
                message: format!("target {target_rel:.1e} not reached by h = {h}"),
                history,
            });
        }
        prev = Some((r.value, est));
        h /= 2.0;
    }
}
