//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p fpquad-cli --test acceptance`.

use std::f64::consts::PI;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use fpquad::{
    auto_mesh, builtin, closed_form_i, fp_epsilon_limit, fp_integral_full, fp_integral_symmetric,
    gamma, neg_power, node, ClosedForm, Complex, Contour, DeTransform, EpsilonSchedule, FpProblem,
    QuadratureParams, Side,
};
use fpquad_cli::{repro_file_name, sweep, ProblemArgs, DEFAULT_LEVELS, REPRO_FAMILIES, REPRO_N};

const BUILTINS: [&str; 2] = ["runge", "expdecay"];
const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

type Outcome = Result<String, String>;

fn problem(name: &str, n: u32, alpha: f64) -> FpProblem {
    FpProblem::new(n, alpha, builtin(name).expect("builtin")).expect("problem")
}

fn exact(name: &str, n: u32, alpha: f64) -> f64 {
    ClosedForm::for_builtin(name)
        .unwrap()
        .value(n, alpha)
        .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn closed_form_reproduction() -> Outcome {
    let start = Instant::now();
    let c = Contour::default();
    let mut worst = 0.0f64;
    for name in BUILTINS {
        for n in 1..=3 {
            let (r, _) = auto_mesh(&problem(name, n, 0.5), &c, DeTransform::SinhSinh, 1e-10)
                .map_err(|e| format!("{name} n={n}: {e}"))?;
            let err = rel(r.value.re, exact(name, n, 0.5));
            ensure(err <= 1e-9, || {
                format!("{name} n={n}: rel error {err:.2e} > 1e-9")
            })?;
            worst = worst.max(err);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.2}s"))?;
    Ok(format!("max rel error {worst:.2e} (tol 1e-9), {secs:.3}s"))
}

fn exponential_convergence() -> Outcome {
    let s = ProblemArgs {
        f: "expdecay".into(),
        n: 1,
        alpha: 0.5,
        delta: Contour::DEFAULT_DELTA,
        transform: DeTransform::SinhSinh,
        force_full: false,
        real_on_axis: None,
    }
    .setup()
    .map_err(|e| e.to_string())?;
    let rows = sweep(&s, DEFAULT_LEVELS, exact("expdecay", 1, 0.5)).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for w in rows.windows(2) {
        if w[0].rel_error >= 1e-11 {
            let bound = w[0].rel_error.powf(1.3);
            ensure(w[1].rel_error <= bound, || {
                format!(
                    "h = {}: err {:.2e} > err(2h)^1.3 = {bound:.2e}",
                    w[1].h, w[1].rel_error
                )
            })?;
            checked += 1;
        }
    }
    let reached = rows
        .iter()
        .find(|r| r.rel_error <= 1e-10)
        .ok_or("rel error never reached 1e-10")?;
    ensure(reached.h > 0.5f64.powi(7), || {
        format!("1e-10 first reached at h = {}", reached.h)
    })?;
    Ok(format!(
        "{checked} pairs with err(h/2) <= err(h)^1.3, 1e-10 reached at h = 2^{}",
        reached.h.log2()
    ))
}

fn representation_correctness() -> Outcome {
    let start = Instant::now();
    let c = Contour::default();
    let q = QuadratureParams::default();
    let s = EpsilonSchedule::default();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for name in BUILTINS {
        for n in 1..=3 {
            for alpha in ALPHAS {
                let p = problem(name, n, alpha);
                let engine = fp_integral_full(&p, &c, DeTransform::SinhSinh, &q)
                    .map_err(|e| format!("{name} n={n} α={alpha}: {e}"))?
                    .value
                    .re;
                let oracle = fp_epsilon_limit(&p, &s)
                    .map_err(|e| format!("{name} n={n} α={alpha}: oracle: {e}"))?
                    .value;
                let closed = exact(name, n, alpha);
                for (what, a, b) in [
                    ("engine/closed", engine, closed),
                    ("oracle/closed", oracle, closed),
                    ("engine/oracle", engine, oracle),
                ] {
                    let err = rel(a, b);
                    ensure(err <= 1e-5, || {
                        format!("{name} n={n} α={alpha}: {what} {err:.2e}")
                    })?;
                    worst = worst.max(err);
                }
                cases += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{cases} cases, max pairwise rel diff {worst:.2e} (tol 1e-5), {secs:.2}s"
    ))
}

fn symmetry_reduction() -> Outcome {
    let c = Contour::default();
    let q = QuadratureParams::default();
    let t = DeTransform::SinhSinh;
    let mut worst = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for name in BUILTINS {
        for n in 1..=3 {
            for alpha in ALPHAS {
                let p = problem(name, n, alpha);
                let full = fp_integral_full(&p, &c, t, &q).map_err(|e| e.to_string())?;
                let sym = fp_integral_symmetric(&p, &c, t, &q).map_err(|e| e.to_string())?;
                let err = rel(sym.value.re, full.value.re);
                let ratio = sym.evaluations as f64 / full.evaluations as f64;
                ensure(err <= 1e-13, || {
                    format!("{name} n={n} α={alpha}: {err:.2e}")
                })?;
                ensure(ratio <= 0.55, || {
                    format!("{name} n={n} α={alpha}: work ratio {ratio:.3}")
                })?;
                worst = worst.max(err);
                worst_ratio = worst_ratio.max(ratio);
            }
        }
    }
    // (−1)^m for n = 2m, (−1)^(m+1) for n = 2m+1
    let signs = [-1.0, -1.0, 1.0, 1.0];
    for (n, sign) in (1..=4).zip(signs) {
        let v = fp_integral_symmetric(&problem("runge", n, 0.5), &c, t, &q)
            .map_err(|e| e.to_string())?;
        let cf = closed_form_i(n, 0.5).map_err(|e| e.to_string())?;
        ensure(v.value.re.signum() == sign && cf.signum() == sign, || {
            format!("n = {n}: engine {} closed form {cf}", v.value.re)
        })?;
    }
    Ok(format!(
        "max rel diff {worst:.2e} (tol 1e-13), max work ratio {worst_ratio:.3} (limit 0.55), sign pattern - - + +"
    ))
}

fn invariant_suites() -> Outcome {
    // neg_power conjugation on 10^4 deterministic samples
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut uniform = move |lo: f64, hi: f64| {
        state = state
            .wrapping_mul(6_364_136_223_846_793_005)
            .wrapping_add(1_442_695_040_888_963_407);
        lo + (hi - lo) * ((state >> 11) as f64 / (1u64 << 53) as f64)
    };
    let mut conj_worst = 0.0f64;
    let mut samples = 0;
    while samples < 10_000 {
        let z = Complex::new(uniform(-50.0, 50.0), uniform(-50.0, 50.0));
        if z.im.abs() < 1e-6 && z.re >= 0.0 {
            continue;
        }
        let beta = uniform(-3.0, 3.0);
        let a = neg_power(z, beta).map_err(|e| e.to_string())?;
        let b = neg_power(z.conj(), beta).map_err(|e| e.to_string())?;
        let err = (b - a.conj()).norm() / a.norm();
        ensure(err <= 1e-14, || {
            format!("neg_power conjugation at {z}, β={beta}: {err:.2e}")
        })?;
        conj_worst = conj_worst.max(err);
        samples += 1;
    }

    let t = DeTransform::SinhSinh;
    let c = Contour::default();
    let mut sym_worst = 0.0f64;
    for i in 0..1000 {
        let v = -6.0 + 12.0 * i as f64 / 999.0;
        let a = node(&c, t, v).map_err(|e| e.to_string())?;
        let b = node(&c, t, -v).map_err(|e| e.to_string())?;
        ensure(!(a.z.im == 0.0 && a.z.re >= 0.0), || {
            format!("contour hits [0,∞) at v = {v}")
        })?;
        let err =
            ((b.z - a.z.conj()).norm() / a.z.norm()).max((b.w + a.w.conj()).norm() / a.w.norm());
        ensure(err <= 1e-13, || {
            format!("node symmetry at v = {v}: {err:.2e}")
        })?;
        sym_worst = sym_worst.max(err);
    }

    let d = 1e-5;
    let mut fd_worst = 0.0f64;
    for tr in [DeTransform::SinhSinh, DeTransform::Sinh] {
        for i in 0..100 {
            let v = -3.0 + 6.0 * i as f64 / 99.0;
            let fd = (tr.psi(v + d).map_err(|e| e.to_string())?
                - tr.psi(v - d).map_err(|e| e.to_string())?)
                / (2.0 * d);
            let dp = tr.psi_prime(v).map_err(|e| e.to_string())?;
            let err = (dp - fd).abs() / dp;
            ensure(err <= 1e-6, || {
                format!("{tr} derivative at v = {v}: {err:.2e}")
            })?;
            fd_worst = fd_worst.max(err);
        }
    }

    let mut gamma_worst = 0.0f64;
    for j in 1..=9 {
        let x = j as f64 / 10.0;
        let lhs =
            gamma(x).map_err(|e| e.to_string())? * gamma(1.0 - x).map_err(|e| e.to_string())?;
        let rhs = PI / (PI * x).sin();
        let err = ((lhs - rhs) / rhs).abs();
        ensure(err <= 1e-12, || {
            format!("gamma reflection at {x}: {err:.2e}")
        })?;
        gamma_worst = gamma_worst.max(err);
    }
    Ok(format!(
        "conjugation {conj_worst:.1e}, node symmetry {sym_worst:.1e}, transform FD {fd_worst:.1e}, gamma reflection {gamma_worst:.1e}"
    ))
}

fn truncation_conformance() -> Outcome {
    let c = Contour::default();
    let mut retained = 0;
    let mut sides = 0;
    for name in BUILTINS {
        for n in 1..=3 {
            for alpha in ALPHAS {
                let p = problem(name, n, alpha);
                let q = QuadratureParams::default().with_trace();
                for r in [
                    fp_integral_full(&p, &c, DeTransform::SinhSinh, &q)
                        .map_err(|e| e.to_string())?,
                    fp_integral_symmetric(&p, &c, DeTransform::SinhSinh, &q)
                        .map_err(|e| e.to_string())?,
                ] {
                    for side in [Side::Plus, Side::Minus] {
                        let recs: Vec<_> = r.trace.iter().filter(|t| t.side == side).collect();
                        let Some((last, kept)) = recs.split_last() else {
                            continue;
                        };
                        for t in kept {
                            ensure(t.kept && t.scaled >= 1e-15 * t.partial, || {
                                format!("{name} n={n} α={alpha}: {t:?}")
                            })?;
                        }
                        ensure(!last.kept && last.scaled < 1e-15 * last.partial, || {
                            format!("{name} n={n} α={alpha}: first discarded {last:?}")
                        })?;
                        retained += kept.len();
                        sides += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{retained} retained terms and {sides} first-discarded terms checked"
    ))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fpquad");
    let dirs = [
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    ];
    for d in &dirs {
        let status = Command::new(bin)
            .args(["repro", "--out-dir"])
            .arg(d.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!("repro exited with {}", status.status)
        })?;
    }
    let mut files = 0;
    for (family, _) in REPRO_FAMILIES {
        for n in REPRO_N {
            let name = repro_file_name(family, n);
            let a = fs::read(dirs[0].path().join(&name)).map_err(|e| format!("{name}: {e}"))?;
            let b = fs::read(dirs[1].path().join(&name)).map_err(|e| format!("{name}: {e}"))?;
            ensure(a == b, || format!("{name} differs between runs"))?;
            files += 1;
        }
    }
    Ok(format!("{files} CSV files byte-identical across two runs"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("closed-form reproduction", closed_form_reproduction),
        ("exponential convergence", exponential_convergence),
        ("representation correctness", representation_correctness),
        ("symmetry reduction", symmetry_reduction),
        ("branch and contour invariants", invariant_suites),
        ("truncation-rule conformance", truncation_conformance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {} {name}: {why}", i + 1);
                failed += 1;
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
