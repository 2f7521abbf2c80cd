//! Acceptance run: every criterion prints one PASS/FAIL line, the process
//! exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use gkl::geometry::{ChartMatrix, Shape};
use gkl::jets::C64;
use gkl::kernels::audit::curvature_origin_check;
use gkl::kernels::binomial;
use gkl::kernels::koppelman::{fubini_study_factor, koppelman_function_check};
use gkl::kernels::p0_and_proportionality;
use gkl::quadrature::{integrate, invariant_density, normalized_density, total_volume, QuadratureSpec};
use gkl::sampling::{gaussian_chart, gaussian_pairs, rng_for};
use gkl::suite::{origin_triples, run_check, Check, CheckReport, KOPPELMAN_POINTS};

const SEED: u64 = 2024;

fn shapes() -> [Shape; 3] {
    [Shape::new(1, 2).unwrap(), Shape::new(1, 3).unwrap(), Shape::new(2, 4).unwrap()]
}

fn cp(n: usize) -> Shape {
    Shape::new(1, n + 1).unwrap()
}

/// Outcome of one criterion.
struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn from_reports(reports: &[CheckReport]) -> Verdict {
        let failed: Vec<String> = reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("{} Gr({},{}) r={:?}: {:?} {}", r.check, r.k, r.big_n, r.r, r.max_residual, r.note.clone().unwrap_or_default()))
            .collect();
        let worst = reports
            .iter()
            .filter_map(|r| r.max_residual.map(|x| x / r.tolerance))
            .fold(0.0, f64::max);
        Verdict {
            pass: failed.is_empty(),
            detail: if failed.is_empty() {
                format!("{} reports, worst residual/tol {worst:.2e}", reports.len())
            } else {
                failed.join("; ")
            },
        }
    }
}

fn checks(check: Check, shapes: &[Shape], rs: &[i32], points: usize, tol: Option<f64>) -> Vec<CheckReport> {
    let mut out = Vec::new();
    for &shape in shapes {
        let tol = tol.unwrap_or_else(|| check.default_tolerance(shape));
        if check.per_r() {
            for &r in rs {
                out.extend(run_check(check, shape, Some(r), points, SEED, tol));
            }
        } else {
            out.extend(run_check(check, shape, None, points, SEED, tol));
        }
    }
    out
}

fn pointwise_algebra() -> Verdict {
    let mut reports = Vec::new();
    reports.extend(checks(Check::DeltaSigma, &shapes(), &[], 100, Some(1e-10)));
    reports.extend(checks(Check::Weight, &shapes(), &[0, 1, 2], 100, Some(1e-9)));
    reports.extend(checks(Check::Bianchi, &shapes(), &[], 100, Some(1e-9)));
    reports.extend(checks(Check::NablaU, &shapes(), &[], 100, Some(1e-8)));
    Verdict::from_reports(&reports)
}

fn off_diagonal_koppelman() -> Verdict {
    Verdict::from_reports(&checks(Check::DbarK, &shapes(), &[0, 1, 2], 50, Some(1e-7)))
}

fn chern_form() -> Verdict {
    Verdict::from_reports(&checks(Check::ChernForm, &shapes(), &[], 20, Some(1e-10)))
}

fn vanishing() -> Verdict {
    let reports = checks(Check::Vanish, &shapes(), &[-2, -1, 0, 1, 2], 50, Some(1e-10));
    let cases: std::collections::BTreeSet<&str> = reports.iter().map(|r| r.check.as_str()).collect();
    let mut v = Verdict::from_reports(&reports);
    if cases.len() != 5 {
        v.pass = false;
        v.detail = format!("only cases {cases:?} audited");
    }
    v
}

fn proportionality() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1, 2] {
        let shape = cp(n);
        for r in 1..=3 {
            let pairs = gaussian_pairs(shape, SEED + r as u64, 20);
            match p0_and_proportionality(shape, &pairs, r) {
                Ok(p) => {
                    let expected = binomial((n + r as usize) as u64, n as u64);
                    let mismatch = (p.constant - expected).norm() / expected;
                    let ok = p.dispersion <= 1e-8 && mismatch <= 1e-8 && p.excluded == 0;
                    pass &= ok;
                    parts.push(format!("CP{n} r={r}: C={:.6} (binom {expected}) disp {:.1e}", p.constant.re, p.dispersion));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("CP{n} r={r}: {e}"));
                }
            }
        }
    }
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn bergman() -> Verdict {
    let mut reports = checks(Check::Bergman, &[cp(1)], &[1, 2, 3], 5, Some(1e-6));
    reports.extend(checks(Check::Bergman, &[cp(2)], &[1, 2], 5, Some(1e-5)));
    reports.extend(checks(Check::Bergman, &[Shape::new(2, 4).unwrap()], &[1], 1, Some(2e-2)));
    let mut v = Verdict::from_reports(&reports);
    if v.pass {
        let gr = reports.last().and_then(|r| r.note.clone()).unwrap_or_default();
        v.detail = format!("{}; Gr(2,4) {gr}", v.detail);
    }
    v
}

fn invariance() -> Verdict {
    Verdict::from_reports(&checks(Check::Invariance, &shapes(), &[-1, 0, 1, 2], 20, Some(1e-8)))
}

fn curvature_origin() -> Verdict {
    let shape = Shape::new(2, 4).unwrap();
    match curvature_origin_check(shape, &origin_triples(shape, SEED, 20)) {
        Ok(rep) => Verdict {
            pass: rep.residual <= 1e-10,
            detail: format!(
                "residual {:.2e} against -ZYW-WYZ (v = Z, u = -Y^T); literal ZYW-WYZ residual {:.2e} (info)",
                rep.residual, rep.literal_residual
            ),
        },
        Err(e) => Verdict {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn koppelman_functions() -> Verdict {
    let shape = cp(1);
    let spec = QuadratureSpec::monte_carlo(100_000, SEED).with_epsilon(1e-3).with_tolerance(5e-2);
    let mut pass = true;
    let mut parts = Vec::new();
    for (re, im) in KOPPELMAN_POINTS {
        let z = ChartMatrix::from_flat(shape, &[C64::new(re, im)]).unwrap();
        match koppelman_function_check(shape, &z, &fubini_study_factor, &spec) {
            Ok(pt) => {
                pass &= pt.residual() <= 5e-2;
                parts.push(format!("z0={}: residual {:.2e}", C64::new(re, im), pt.residual()));
            }
            Err(e) => {
                pass = false;
                parts.push(e.to_string());
            }
        }
    }
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn oracles() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;

    let mut worst_fd: f64 = 0.0;
    for i in 0..50 {
        let mut rng = rng_for(SEED, i);
        let e = common::Expr::random(&mut rng, 4);
        let z: Vec<C64> = (0..common::VARS).map(|_| gkl::sampling::complex_normal(&mut rng) * 0.6).collect();
        worst_fd = worst_fd.max(common::fd_deviation(&e, &z));
    }
    pass &= worst_fd <= 1e-6;
    parts.push(format!("jets vs FD {worst_fd:.1e}"));

    let shape = cp(1);
    let gauss = QuadratureSpec::gauss(64);
    let mc = QuadratureSpec::monte_carlo(100_000, SEED);
    let integrands: [(&str, fn(C64) -> C64); 5] = [
        ("1", |_| C64::new(1.0, 0.0)),
        ("|z|^2/(1+|z|^2)", |z| C64::new(z.norm_sqr() / (1.0 + z.norm_sqr()), 0.0)),
        ("1/(1+|z|^2)^2", |z| C64::new((1.0 + z.norm_sqr()).powi(-2), 0.0)),
        ("z^2/(1+|z|^2)", |z| z * z / (1.0 + z.norm_sqr())),
        ("Re z/(1+|z|^2)^1/2", |z| C64::new(z.re / (1.0 + z.norm_sqr()).sqrt(), 0.0)),
    ];
    let mut worst_sigma: f64 = 0.0;
    for (name, f) in integrands {
        let h = |z: &ChartMatrix| f(z.matrix()[(0, 0)]);
        match (integrate(shape, &gauss, &h), integrate(shape, &mc, &h)) {
            (Ok(g), Ok(m)) => {
                let bar = (g.error * g.error + m.error * m.error).sqrt().max(f64::MIN_POSITIVE);
                worst_sigma = worst_sigma.max((g.value - m.value).norm() / bar);
            }
            (g, m) => {
                pass = false;
                parts.push(format!("{name}: {:?} {:?}", g.err(), m.err()));
            }
        }
    }
    pass &= worst_sigma <= 3.0;
    parts.push(format!("gauss vs MC worst {worst_sigma:.2} sigma"));

    let gr = Shape::new(2, 4).unwrap();
    let ratios: Vec<f64> = (0..20)
        .map(|i| {
            let z = gaussian_chart(gr, &mut rng_for(SEED + 1, i));
            let det = normalized_density(gr, z.matrix()) * total_volume(gr);
            invariant_density(gr, &z).unwrap() / det
        })
        .collect();
    let spread = ratios.iter().map(|q| (q - ratios[0]).abs() / ratios[0]).fold(0.0, f64::max);
    pass &= spread <= 1e-10 && (ratios[0] - 1.0).abs() <= 1e-10;
    parts.push(format!("density ratio spread {spread:.1e}"));

    let origin = invariant_density(shape, &ChartMatrix::zeros(shape)).unwrap();
    pass &= (origin - std::f64::consts::FRAC_1_PI).abs() <= 1e-14;
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("pointwise algebra", pointwise_algebra),
        ("off-diagonal dbar K + P = 0", off_diagonal_koppelman),
        ("Chern form", chern_form),
        ("vanishing audit", vanishing),
        ("proportionality", proportionality),
        ("Bergman reproduction", bergman),
        ("invariance", invariance),
        ("curvature at origin", curvature_origin),
        ("Koppelman for functions", koppelman_functions),
        ("oracles", oracles),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        failures += !v.pass as usize;
        println!(
            "{} [{:>2}] {name} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
