use fpquad::{
    auto_mesh, builtin, fp_epsilon_limit, fp_integral_full, fp_integral_symmetric, ClosedForm,
    Contour, DeTransform, EpsilonSchedule, FpProblem, QuadratureParams, Side,
};

const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];
const BUILTINS: [&str; 2] = ["runge", "expdecay"];

fn problem(name: &str, n: u32, alpha: f64) -> FpProblem {
    FpProblem::new(n, alpha, builtin(name).unwrap()).unwrap()
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

#[test]
fn auto_mesh_reaches_closed_forms() {
    let c = Contour::default();
    for name in BUILTINS {
        for n in 1..=4 {
            for alpha in ALPHAS {
                let (r, _) = auto_mesh(&problem(name, n, alpha), &c, DeTransform::SinhSinh, 1e-10)
                    .unwrap_or_else(|e| panic!("{name} n={n} α={alpha}: {e}"));
                let err = rel(r.value.re, exact(name, n, alpha));
                assert!(err <= 1e-9, "{name} n={n} α={alpha}: {err:e}");
            }
        }
    }
}

#[test]
fn full_and_symmetric_agree() {
    let c = Contour::default();
    let q = QuadratureParams::default();
    for name in BUILTINS {
        for n in 1..=3 {
            for alpha in ALPHAS {
                let p = problem(name, n, alpha);
                let full = fp_integral_full(&p, &c, DeTransform::SinhSinh, &q).unwrap();
                let sym = fp_integral_symmetric(&p, &c, DeTransform::SinhSinh, &q).unwrap();
                assert!(
                    rel(sym.value.re, full.value.re) <= 1e-13,
                    "{name} n={n} α={alpha}"
                );
                assert!(full.imag_residual.abs() <= 1e-10 * full.value.re.abs());
                assert!(sym.evaluations as f64 <= 0.55 * full.evaluations as f64);
            }
        }
    }
}

#[test]
fn exponential_convergence() {
    let c = Contour::default();
    for name in BUILTINS {
        for n in 1..=3 {
            let p = problem(name, n, 0.5);
            let reference = exact(name, n, 0.5);
            let errs: Vec<f64> = (1..=6)
                .map(|j| {
                    let q = QuadratureParams::new(0.5f64.powi(j)).unwrap();
                    rel(
                        fp_integral_symmetric(&p, &c, DeTransform::SinhSinh, &q)
                            .unwrap()
                            .value
                            .re,
                        reference,
                    )
                })
                .collect();
            for w in errs.windows(2) {
                if w[0] >= 1e-11 {
                    assert!(w[1] <= w[0].powf(1.3), "{name} n={n}: {errs:?}");
                }
            }
        }
    }
}

#[test]
fn results_are_bit_identical() {
    let c = Contour::default();
    let q = QuadratureParams::default();
    let p = problem("runge", 3, 0.25);
    let a = fp_integral_full(&p, &c, DeTransform::SinhSinh, &q).unwrap();
    let b = fp_integral_full(&p, &c, DeTransform::SinhSinh, &q).unwrap();
    assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
    assert_eq!(a.imag_residual.to_bits(), b.imag_residual.to_bits());
}

#[test]
fn truncation_trace_conforms() {
    let c = Contour::default();
    for name in BUILTINS {
        for alpha in ALPHAS {
            let p = problem(name, 2, alpha);
            let q = QuadratureParams::new(0.125).unwrap().with_trace();
            for r in [
                fp_integral_full(&p, &c, DeTransform::SinhSinh, &q).unwrap(),
                fp_integral_symmetric(&p, &c, DeTransform::SinhSinh, &q).unwrap(),
            ] {
                for side in [Side::Plus, Side::Minus] {
                    let recs: Vec<_> = r.trace.iter().filter(|t| t.side == side).collect();
                    if recs.is_empty() {
                        continue;
                    }
                    let (last, kept) = recs.split_last().unwrap();
                    for t in kept {
                        assert!(t.kept && t.scaled >= 1e-15 * t.partial, "{t:?}");
                    }
                    assert!(!last.kept && last.scaled < 1e-15 * last.partial, "{last:?}");
                }
            }
        }
    }
}

#[test]
fn engine_oracle_and_closed_form_agree() {
    let c = Contour::default();
    let q = QuadratureParams::default();
    let s = EpsilonSchedule::default();
    for name in BUILTINS {
        for n in 1..=3 {
            for alpha in ALPHAS {
                let p = problem(name, n, alpha);
                let engine = fp_integral_full(&p, &c, DeTransform::SinhSinh, &q)
                    .unwrap()
                    .value
                    .re;
                let oracle = fp_epsilon_limit(&p, &s).unwrap().value;
                let closed = exact(name, n, alpha);
                assert!(rel(engine, closed) <= 1e-5, "{name} n={n} α={alpha}");
                assert!(
                    rel(oracle, closed) <= 1e-5,
                    "{name} n={n} α={alpha}: {oracle}"
                );
                assert!(rel(engine, oracle) <= 1e-5, "{name} n={n} α={alpha}");
            }
        }
    }
}

#[test]
fn sign_pattern_of_family_i() {
    let c = Contour::default();
    let q = QuadratureParams::default();
    let expected = [-1.0, -1.0, 1.0, 1.0];
    for (n, sign) in (1..=4).zip(expected) {
        let v = fp_integral_symmetric(&problem("runge", n, 0.5), &c, DeTransform::SinhSinh, &q)
            .unwrap();
        assert_eq!(v.value.re.signum(), sign, "n = {n}");
    }
}
