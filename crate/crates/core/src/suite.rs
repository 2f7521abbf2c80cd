//! Named verification checks and their reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, ChartMatrix, PairTransition, PointPair, Seeded, Shape};
use crate::jets::{Jet, C64};
use crate::kernels::audit::{curvature_origin_check, vanish_audit, VanishCase};
use crate::kernels::bergman::{analytic_constant, bergman_reproduce, calibrate_constant, Section};
use crate::kernels::koppelman::{fubini_study_factor, koppelman_function_check};
use crate::kernels::{
    binomial, chern_form, k_weighted, k_weighted_values, p0_and_proportionality, p_weighted,
    p_weighted_values, supercurvature, u_form,
};
use crate::quadrature::{map_indices, QuadratureSpec};
use crate::sampling::{complex_normal, derive_seed, gaussian_chart, gaussian_pairs, haar_unitary, rng_for};
use crate::superalg::{Multivector, Vars};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    DeltaSigma,
    Weight,
    Bianchi,
    NablaU,
    DbarK,
    Invariance,
    Vanish,
    Proportionality,
    Bergman,
    CurvatureOrigin,
    KoppelmanFn,
    ChernForm,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::DeltaSigma,
        Check::Weight,
        Check::Bianchi,
        Check::NablaU,
        Check::DbarK,
        Check::Invariance,
        Check::Vanish,
        Check::Proportionality,
        Check::Bergman,
        Check::CurvatureOrigin,
        Check::KoppelmanFn,
        Check::ChernForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::DeltaSigma => "delta-sigma",
            Check::Weight => "weight",
            Check::Bianchi => "bianchi",
            Check::NablaU => "nabla-u",
            Check::DbarK => "dbar-k",
            Check::Invariance => "invariance",
            Check::Vanish => "vanish",
            Check::Proportionality => "proportionality",
            Check::Bergman => "bergman",
            Check::CurvatureOrigin => "curvature-origin",
            Check::KoppelmanFn => "koppelman-fn",
            Check::ChernForm => "chern-form",
        }
    }

    pub fn default_tolerance(self, shape: Shape) -> f64 {
        match self {
            Check::DeltaSigma | Check::Vanish | Check::CurvatureOrigin | Check::ChernForm => 1e-10,
            Check::Weight | Check::Bianchi => 1e-9,
            Check::NablaU | Check::Invariance | Check::Proportionality => 1e-8,
            Check::DbarK => 1e-7,
            Check::Bergman if gauss_bergman(shape) => 1e-6,
            Check::Bergman => 2e-2,
            Check::KoppelmanFn => 5e-2,
        }
    }

    /// Whether the check is repeated for every `r`.
    pub fn per_r(self) -> bool {
        matches!(
            self,
            Check::Weight | Check::DbarK | Check::Invariance | Check::Vanish | Check::Proportionality | Check::Bergman
        )
    }

    pub fn supports(self, shape: Shape) -> bool {
        match self {
            Check::KoppelmanFn => shape.k == 1 && shape.big_n == 2,
            _ => true,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }
}

/// Resolves check names; `all` expands to every check the shape supports.
pub fn resolve_checks(names: &[String], shape: Shape) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(Check::ALL.into_iter().filter(|c| c.supports(shape)));
            continue;
        }
        let check: Check = name.parse()?;
        if !check.supports(shape) {
            return Err(Error::UnsupportedShape {
                k: shape.k,
                big_n: shape.big_n,
                reason: "the Koppelman function check runs on CP^1 only",
            });
        }
        out.push(check);
    }
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|c| seen.insert(*c));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub k: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<i32>,
    pub points: usize,
    /// `None` when the check could not be evaluated.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl CheckReport {
    fn new(check: &str, shape: Shape, r: Option<i32>, seed: u64, tolerance: f64) -> Self {
        CheckReport {
            check: check.to_string(),
            k: shape.k,
            big_n: shape.big_n,
            r,
            points: 0,
            max_residual: None,
            tolerance,
            pass: false,
            seed,
            note: None,
            wall_time: None,
        }
    }

    fn finish(mut self, outcome: Result<(f64, usize)>) -> Self {
        match outcome {
            Ok((residual, points)) => {
                self.max_residual = Some(residual);
                self.points = points;
                self.pass = residual <= self.tolerance;
            }
            Err(e) => self.note = Some(format!("error: {e}")),
        }
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        if self.note.is_none() {
            self.note = Some(note.into());
        }
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.r.map(|r| format!(" r={r}")).unwrap_or_default();
        let res = self
            .max_residual
            .map(|x| format!("{x:.3e}"))
            .unwrap_or_else(|| "n/a".into());
        write!(
            f,
            "{} {:<18} Gr({},{}){r:<5} points={:<4} residual={res} tol={:.0e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.k,
            self.big_n,
            self.points,
            self.tolerance
        )?;
        if let Some(t) = self.wall_time {
            write!(f, " t={t:.3}s")?;
        }
        if let Some(note) = &self.note {
            write!(f, "  [{note}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub k: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub r: Vec<i32>,
    pub checks: Vec<String>,
    pub points: usize,
    pub seed: u64,
    /// Overrides every check's default tolerance.
    pub tol: Option<f64>,
    #[serde(skip)]
    pub timings: bool,
}

impl SuiteConfig {
    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.k, self.big_n)
    }
}

/// The JSON document written by `gkl verify --out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
    pub config: SuiteConfig,
    pub version: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let shape = config.shape()?;
    let checks = resolve_checks(&config.checks, shape)?;
    let mut out = Vec::new();
    for check in checks {
        let rs: Vec<Option<i32>> = if check.per_r() {
            config.r.iter().map(|&r| Some(r)).collect()
        } else {
            vec![None]
        };
        for r in rs {
            let start = config.timings.then(Instant::now);
            let tol = config.tol.unwrap_or_else(|| check.default_tolerance(shape));
            let mut reports = run_check(check, shape, r, config.points, config.seed, tol);
            if let Some(start) = start {
                let secs = start.elapsed().as_secs_f64() / reports.len().max(1) as f64;
                for rep in &mut reports {
                    rep.wall_time = Some(secs);
                }
            }
            out.extend(reports);
        }
    }
    Ok(out)
}

pub fn suite_report(config: &SuiteConfig) -> Result<SuiteReport> {
    Ok(SuiteReport {
        checks: run_suite(config)?,
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Runs one check; most produce a single report, `vanish` one per case.
pub fn run_check(check: Check, shape: Shape, r: Option<i32>, points: usize, seed: u64, tol: f64) -> Vec<CheckReport> {
    let base = CheckReport::new(check.name(), shape, r, seed, tol);
    let r0 = r.unwrap_or(0);
    let pairs = || gaussian_pairs(shape, derive_seed(seed, check as u64), points);
    match check {
        Check::DeltaSigma => vec![base.finish(per_pair(&pairs(), |p| delta_sigma_residual(shape, p)))],
        Check::Weight => vec![base.finish(per_pair(&pairs(), |p| weight_residual(shape, p, r0)))],
        Check::Bianchi => vec![base.finish(per_pair(&pairs(), |p| bianchi_residual(shape, p)))],
        Check::NablaU => vec![base.finish(per_pair(&pairs(), |p| nabla_u_residual(shape, p)))],
        Check::DbarK => vec![base.finish(per_pair(&pairs(), |p| dbar_k_residual(shape, p, r0)))],
        Check::ChernForm => vec![base.finish(per_pair(&pairs(), |p| chern_form_residual(shape, p)))],
        Check::Invariance => {
            let ps = pairs();
            let us = seeded_unitaries(shape, derive_seed(seed, 1000 + check as u64), ps.len());
            let outcome = map_indices(ps.len(), |i| invariance_residual(shape, &ps[i], &us[i], r0));
            vec![base.finish(max_of(outcome))]
        }
        Check::Vanish => vanish_reports(shape, r0, &pairs(), seed, tol),
        Check::Proportionality if r0 < 0 => vec![CheckReport {
            pass: true,
            max_residual: Some(0.0),
            ..base
        }
        .with_note("skipped: the closed form is stated for r >= 0")],
        Check::Proportionality => {
            let ps = pairs();
            match p0_and_proportionality(shape, &ps, r0) {
                Ok(prop) => {
                    let mut residual = prop.dispersion;
                    let mut note = format!("C = {:.12}", prop.constant.re);
                    if shape.k == 1 {
                        let expected = binomial(shape.n() as u64 + r0.max(0) as u64, shape.n() as u64);
                        residual = residual.max((prop.constant - expected).norm() / expected);
                        note.push_str(&format!(", binom(n+r,n) = {expected}"));
                    }
                    if prop.excluded > 0 {
                        note.push_str(&format!(", {} pairs with vanishing closed form", prop.excluded));
                    }
                    vec![base.finish(Ok((residual, prop.ratios.len()))).with_note(note)]
                }
                Err(e) => vec![base.finish(Err(e))],
            }
        }
        Check::Bergman => vec![bergman_report(base, shape, r0, seed)],
        Check::CurvatureOrigin => {
            let triples = origin_triples(shape, derive_seed(seed, check as u64), points);
            match curvature_origin_check(shape, &triples) {
                Ok(rep) => vec![base
                    .finish(Ok((rep.residual, rep.triples)))
                    .with_note(format!("literal ZYW-WYZ residual {:.3e}", rep.literal_residual))],
                Err(e) => vec![base.finish(Err(e))],
            }
        }
        Check::KoppelmanFn => vec![koppelman_report(base, shape, seed)],
    }
}

fn max_of(outcomes: Vec<Result<f64>>) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let count = outcomes.len();
    for o in outcomes {
        let x = o?;
        if x.is_nan() {
            return Err(Error::ArithmeticDomain("residual is NaN"));
        }
        worst = worst.max(x);
    }
    Ok((worst, count))
}

fn per_pair(pairs: &[PointPair], f: impl Fn(&PointPair) -> Result<f64> + Sync + Send) -> Result<(f64, usize)> {
    max_of(map_indices(pairs.len(), |i| f(&pairs[i])))
}

fn nabla(m: &Multivector, eta: &[Jet]) -> Result<Multivector> {
    Ok(m.delta_eta(eta).sub(&m.dbar(Vars::Both)?))
}

fn relative(res: f64, scale: f64) -> f64 {
    res / scale.max(f64::MIN_POSITIVE)
}

/// `|δ_η σ − 1|`.
pub fn delta_sigma_residual(shape: Shape, pair: &PointPair) -> Result<f64> {
    let s = Seeded::new(shape, pair, 1);
    let d = geometry::sigma(&s)?.delta_eta(&geometry::eta(&s));
    Ok(d.values().sub(&Multivector::one(shape.n())).max_value())
}

/// `∇_η G`, `∇_η g^r` and `(g^r)_{0,0}(z, z) − 1`.
pub fn weight_residual(shape: Shape, pair: &PointPair, r: i32) -> Result<f64> {
    let pair = if r < 0 { pair.swapped() } else { pair.clone() };
    let s = Seeded::new(shape, &pair, 2);
    let eta = geometry::eta(&s);
    let mut worst: f64 = 0.0;
    for entry in geometry::weight_g(&s)?.entries() {
        worst = worst.max(nabla(entry, &eta)?.values().max_value());
    }
    let g = geometry::weight_l_power(&s, r)?;
    worst = worst.max(nabla(&g, &eta)?.values().max_value() / g.max_value().max(1.0));
    let diag = Seeded::new(shape, &PointPair::new(pair.z.clone(), pair.z.clone()), 1);
    let gd = geometry::weight_l_power(&diag, r)?;
    Ok(worst.max((gd.scalar_part() - 1.0).norm()))
}

/// `∇_η S` for the supercurvature.
pub fn bianchi_residual(shape: Shape, pair: &PointPair) -> Result<f64> {
    let s = Seeded::new(shape, pair, 2);
    let sc = supercurvature(&s)?;
    Ok(nabla(&sc, &geometry::eta(&s))?.values().max_value())
}

/// `|∇_η u − 1|`.
pub fn nabla_u_residual(shape: Shape, pair: &PointPair) -> Result<f64> {
    let s = Seeded::new(shape, pair, 2);
    let u = u_form(&s)?;
    let d = nabla(&u, &geometry::eta(&s))?;
    Ok(d.values().sub(&Multivector::one(shape.n())).max_value())
}

/// `|∂̄K_{g^r} + P_{g^r}|` relative to the largest component of `P`.
pub fn dbar_k_residual(shape: Shape, pair: &PointPair, r: i32) -> Result<f64> {
    let s = Seeded::new(shape, pair, 2);
    let s = if r < 0 { s.swapped() } else { s };
    let k = k_weighted(&s, r.abs())?;
    let p = p_weighted(&s, r.abs())?.values();
    let res = k.dbar(Vars::Both)?.values().add(&p).max_value();
    Ok(relative(res, p.max_value()))
}

/// `|P_1 − det(iΘ_E / 2π)|` relative to the Chern form.
pub fn chern_form_residual(shape: Shape, pair: &PointPair) -> Result<f64> {
    let s = Seeded::new(shape, pair, 1);
    let p = p_weighted(&s, 0)?.values();
    let c = chern_form(&s)?.values();
    Ok(relative(p.sub(&c).max_value(), c.max_value()))
}

/// Relative invariance defect of `γ₀ + γ₁`, `σ`, `|η|²`, `P_{g^r}` and
/// `K_{g^r}` under `l ∈ U(N)`, frames transported by the transition maps.
pub fn invariance_residual(shape: Shape, pair: &PointPair, l: &DMatrix<C64>, r: i32) -> Result<f64> {
    let t = PairTransition::new(shape, l, pair)?;
    let maps = t.pullback_maps();
    let s = Seeded::new(shape, pair, 1);
    let sp = Seeded::new(shape, &t.image(), 1);
    let rel = |a: &Multivector<C64>, b: &Multivector<C64>| relative(a.sub(b).max_value(), a.max_value());

    let nrm = geometry::eta_norm_sq(&s)?;
    let mut worst = (nrm - geometry::eta_norm_sq(&sp)?).abs() / nrm;
    let g = geometry::weight_g(&s)?.map_coeff(|c| c.value());
    let gp = t.pull_hom(&geometry::weight_g(&sp)?.map_coeff(|c| c.value()));
    worst = worst.max(relative(g.sub(&gp)?.max_magnitude(), g.max_magnitude()));
    let sg = geometry::sigma(&s)?.values();
    worst = worst.max(rel(&sg, &geometry::sigma(&sp)?.values().substitute(&maps)));
    let line = t.line_factor(r);
    let p = p_weighted_values(&s, r)?;
    worst = worst.max(rel(&p, &p_weighted_values(&sp, r)?.substitute(&maps).scale(line)));
    let k = k_weighted_values(&s, r)?;
    worst = worst.max(rel(&k, &k_weighted_values(&sp, r)?.substitute(&maps).scale(line)));
    Ok(worst)
}

/// Haar unitaries from per-index streams.
pub fn seeded_unitaries(shape: Shape, master: u64, count: usize) -> Vec<DMatrix<C64>> {
    (0..count)
        .map(|i| haar_unitary(shape.big_n, &mut rng_for(master, i as u64)))
        .collect()
}

/// Random `(Y, Z, W)` with `Y` of size `k×(N−k)` and `Z, W` chart-shaped.
pub fn origin_triples(shape: Shape, master: u64, count: usize) -> Vec<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    (0..count)
        .map(|i| {
            let mut rng = rng_for(master, i as u64);
            let y = DMatrix::from_fn(shape.k, shape.rows(), |_, _| complex_normal(&mut rng));
            let z = gaussian_chart(shape, &mut rng).matrix().clone();
            let w = gaussian_chart(shape, &mut rng).matrix().clone();
            (y, z, w)
        })
        .collect()
}

fn vanish_reports(shape: Shape, r: i32, pairs: &[PointPair], seed: u64, tol: f64) -> Vec<CheckReport> {
    match vanish_audit(shape, r, pairs) {
        Ok(reps) => reps
            .into_iter()
            .map(|rep| {
                let name = format!("vanish-{}", rep.case.label());
                let mut out = CheckReport::new(&name, shape, Some(r), seed, tol).finish(Ok((rep.max_relative, rep.points)));
                if rep.case == VanishCase::A {
                    let keys: Vec<String> = rep
                        .key_set
                        .iter()
                        .map(|(a, b, c, d)| format!("({a},{b};{c},{d})"))
                        .collect();
                    out.note = Some(format!("bidegrees {}", keys.join(" ")));
                } else if let Some(w) = rep.worst {
                    out.note = Some(format!("worst bidegree {:?}", w.as_tuple()));
                }
                out
            })
            .collect(),
        Err(e) => vec![CheckReport::new("vanish", shape, Some(r), seed, tol).finish(Err(e))],
    }
}

/// Whether the Bergman check runs on the Gauss rule with the closed-form
/// constant (`CP^1`, `CP^2`) rather than Monte Carlo with calibration.
pub fn gauss_bergman(shape: Shape) -> bool {
    shape.k == 1 && shape.n() <= 2
}

/// Number of Monte Carlo samples used by the calibrated Bergman check.
pub const BERGMAN_MC_SAMPLES: usize = 200_000;

/// Gauss nodes per axis used by the Bergman check.
pub const BERGMAN_GAUSS_NODES: usize = 24;

/// Test sections for `L^{-r}`: `1`, `z_11` and `z_{N−k,1}^r` on `CP^n`;
/// products of `r` Plücker minors otherwise.
pub fn bergman_sections(shape: Shape, r: i32) -> Vec<Section> {
    let r = r.max(1) as usize;
    if shape.k == 1 {
        return vec![
            Section::constant(),
            Section::monomial(vec![[1, 1, 1]]),
            Section::monomial(vec![[shape.rows() as u32, 1, r as u32]]),
        ];
    }
    let k = shape.k;
    // rows {1..k−1, k+1} give ±z_{1,k}; rows {N−k+1..N} the bottom minor
    let mut first: Vec<usize> = (1..k).collect();
    first.push(k + 1);
    let last: Vec<usize> = (shape.big_n - k + 1..=shape.big_n).collect();
    vec![Section::pluecker(vec![first; r]), Section::pluecker(vec![last; r])]
}

/// Test points: seeded Gaussian points of scale ½ on the Gauss path, one
/// fixed point with entries of modulus near one on the Monte Carlo path.
pub fn bergman_points(shape: Shape, seed: u64) -> Vec<ChartMatrix> {
    if gauss_bergman(shape) {
        return (0..5)
            .map(|i| {
                let z = gaussian_chart(shape, &mut rng_for(seed, i));
                ChartMatrix::new(shape, z.matrix() * C64::new(0.5, 0.0)).expect("finite")
            })
            .collect();
    }
    const PATTERN: [f64; 4] = [0.6, 0.8, -0.5, 0.7];
    let m = DMatrix::from_fn(shape.rows(), shape.k, |i, j| {
        C64::new(PATTERN[shape.index(i, j) % PATTERN.len()], 0.1)
    });
    vec![ChartMatrix::new(shape, m).expect("finite")]
}

fn bergman_report(base: CheckReport, shape: Shape, r: i32, seed: u64) -> CheckReport {
    if r < 1 {
        return CheckReport {
            pass: true,
            max_residual: Some(0.0),
            ..base
        }
        .with_note("skipped: the Bergman projection needs r >= 1");
    }
    let gauss = gauss_bergman(shape);
    let spec = if gauss {
        QuadratureSpec::gauss(BERGMAN_GAUSS_NODES)
    } else {
        QuadratureSpec::monte_carlo(BERGMAN_MC_SAMPLES, derive_seed(seed, 77))
    };
    let constant = match analytic_constant(shape, r).filter(|_| gauss) {
        Some(c) => Ok(c),
        None => calibrate_constant(shape, r, &spec),
    };
    let constant = match constant {
        Ok(c) => c,
        Err(e) => return base.finish(Err(e)),
    };
    let points = bergman_points(shape, derive_seed(seed, Check::Bergman as u64));
    let sections = bergman_sections(shape, r);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for zeta in &points {
        for sec in &sections {
            let exact = sec.eval(zeta);
            match bergman_reproduce(shape, r, sec, zeta, &spec, constant) {
                Ok(est) => worst = worst.max(relative((est.value - exact).norm(), exact.norm())),
                Err(e) => return base.finish(Err(e)),
            }
            count += 1;
        }
    }
    let how = if gauss { "analytic" } else { "calibrated" };
    base.finish(Ok((worst, count)))
        .with_note(format!("C = {constant:.6} ({how})"))
}

/// Points at which the Koppelman function check is evaluated on `CP^1`.
pub const KOPPELMAN_POINTS: [(f64, f64); 3] = [(0.0, 0.0), (0.5, -0.2), (-1.0, 0.7)];

pub const KOPPELMAN_SAMPLES: usize = 100_000;

fn koppelman_report(base: CheckReport, shape: Shape, seed: u64) -> CheckReport {
    let spec = QuadratureSpec::monte_carlo(KOPPELMAN_SAMPLES, derive_seed(seed, Check::KoppelmanFn as u64))
        .with_epsilon(1e-3)
        .with_tolerance(base.tolerance.max(f64::MIN_POSITIVE));
    let mut worst: f64 = 0.0;
    for (re, im) in KOPPELMAN_POINTS {
        let z = match ChartMatrix::from_flat(shape, &[C64::new(re, im)]) {
            Ok(z) => z,
            Err(e) => return base.finish(Err(e)),
        };
        match koppelman_function_check(shape, &z, &fubini_study_factor, &spec) {
            Ok(pt) => worst = worst.max(pt.residual()),
            Err(e) => return base.finish(Err(e)),
        }
    }
    base.finish(Ok((worst, KOPPELMAN_POINTS.len())))
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`, `-i` without spaces.
pub fn parse_complex(text: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("`{text}` is not a complex literal like 0.3+0.1i"));
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            t => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[i..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Parses a row-major matrix: rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str, rows: usize, cols: usize) -> Result<DMatrix<C64>> {
    let parsed: Vec<Vec<C64>> = text
        .split(';')
        .map(|row| row.split(',').map(parse_complex).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    if parsed.len() != rows || parsed.iter().any(|row| row.len() != cols) {
        return Err(Error::Parse(format!("expected a {rows}x{cols} matrix, got `{text}`")));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| parsed[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.3+0.1i").unwrap(), C64::new(0.3, 0.1));
        assert_eq!(parse_complex("-2-i").unwrap(), C64::new(-2.0, -1.0));
        assert_eq!(parse_complex("1e-3-2E+1i").unwrap(), C64::new(1e-3, -20.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("4.5").unwrap(), C64::new(4.5, 0.0));
        assert_eq!(parse_complex("-0.5i").unwrap(), C64::new(0.0, -0.5));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("0.3 + 0.1i").is_err());
    }

    #[test]
    fn matrix_literal() {
        let m = parse_matrix("1,2i;3,-1+i", 2, 2).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, 2.0));
        assert_eq!(m[(1, 1)], C64::new(-1.0, 1.0));
        assert!(parse_matrix("1,2;3", 2, 2).is_err());
    }

    #[test]
    fn check_names() {
        let shape = Shape::new(2, 4).unwrap();
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!(matches!("bogus".parse::<Check>(), Err(Error::UnknownCheck(_))));
        let all = resolve_checks(&["all".into()], shape).unwrap();
        assert!(!all.contains(&Check::KoppelmanFn));
        assert!(resolve_checks(&["koppelman-fn".into()], shape).is_err());
        let twice = resolve_checks(&["weight".into(), "weight".into()], shape).unwrap();
        assert_eq!(twice, vec![Check::Weight]);
    }

    #[test]
    fn plucker_rows_for_gr24() {
        let shape = Shape::new(2, 4).unwrap();
        assert_eq!(
            bergman_sections(shape, 1),
            vec![Section::pluecker(vec![vec![1, 3]]), Section::pluecker(vec![vec![3, 4]])]
        );
    }
}
