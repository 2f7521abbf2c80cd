//! Invariant measure and integration over a Grassmannian chart.
//!
//! All integrals are taken against the normalized invariant probability
//! measure `μ`. Two schemes are available: a tensor Gauss rule in polar
//! chart coordinates (`n ≤ 2`) and Monte Carlo over Haar samples.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Bundle, ChartMatrix, PointPair, Seeded, Shape, Side};
use crate::jets::C64;
use crate::sampling::{haar_sample, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    GaussChart,
    MonteCarloHaar,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" | "gauss-chart" => Ok(Scheme::GaussChart),
            "mc" | "monte-carlo" | "monte-carlo-haar" => Ok(Scheme::MonteCarloHaar),
            other => Err(Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Gauss nodes per axis (radial and angular, per complex coordinate).
    pub nodes: usize,
    pub samples: usize,
    pub seed: u64,
    /// Exclusion radius around a singular point.
    pub epsilon: f64,
    /// Accepted error estimate, relative to `max(1, |value|)`.
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn gauss(nodes: usize) -> Self {
        QuadratureSpec {
            scheme: Scheme::GaussChart,
            nodes,
            samples: 0,
            seed: 0,
            epsilon: 0.0,
            tolerance: 1e-6,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            scheme: Scheme::MonteCarloHaar,
            nodes: 0,
            samples,
            seed,
            epsilon: 0.0,
            tolerance: 2e-2,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            Scheme::GaussChart if self.nodes < 2 => {
                Err(Error::UnsupportedQuadrature("gauss rule needs at least 2 nodes".into()))
            }
            Scheme::MonteCarloHaar if self.samples < 2 => {
                Err(Error::UnsupportedQuadrature("monte carlo needs at least 2 samples".into()))
            }
            _ if !(0.0..0.1).contains(&self.epsilon) => Err(Error::UnsupportedQuadrature(
                "exclusion radius must lie in [0, 0.1)".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Integral estimate with its error estimate (coarser-rule difference for
/// Gauss, standard error for Monte Carlo).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
    pub evaluated: usize,
    pub excluded: usize,
}

/// Density of `((i/2π) ∂∂̄ log det(I + z*z))^n` with respect to Lebesgue
/// measure `Π (i/2) dz ∧ dz̄`, from the jet Hessian: `n! det(g) / π^n`.
pub fn invariant_density(shape: Shape, z: &ChartMatrix) -> Result<f64> {
    let n = shape.n();
    let s = Seeded::new(shape, &PointPair::new(z.clone(), z.clone()), 2);
    let f = geometry::metric(&s, Bundle::H(Side::Z))?.det()?.ln()?;
    let hess = DMatrix::from_fn(n, n, |a, b| f.d2(a, n + b).unwrap_or_default());
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(fact * hess.determinant().re / PI.powi(n as i32))
}

/// Total mass of `((i/2π) ∂∂̄ log det(I + z*z))^n`, the Plücker degree
/// `n! Π_{i<k} i! / (N−k+i)!`.
pub fn total_volume(shape: Shape) -> f64 {
    let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
    let rows = shape.rows();
    (0..shape.k).fold(fact(shape.n()), |acc, i| acc * fact(i) / fact(rows + i))
}

/// Closed form of the normalized invariant density,
/// `n! / (π^n vol) · det(I + z*z)^{-N}`.
pub fn normalized_density(shape: Shape, z: &DMatrix<C64>) -> f64 {
    let n = shape.n();
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    let m = DMatrix::<C64>::identity(shape.k, shape.k) + z.adjoint() * z;
    fact / (PI.powi(n as i32) * total_volume(shape)) * m.determinant().re.powi(-(shape.big_n as i32))
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut out: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v = eig.eigenvectors[(0, i)];
            ((x + 1.0) / 2.0, v * v)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Nodes of the chart rule in joint polar coordinates: `T = |z|²` with
/// `T = s/(1−s)` and `s` Gauss–Legendre, the direction split as
/// `|z_1|² = uT` (`u` Gauss–Legendre) for `n = 2`, phases by midpoint
/// trapezoid. Returns points and Lebesgue weights.
fn chart_rule(n: usize, m: usize) -> Vec<(Vec<C64>, f64)> {
    let gl = gauss_legendre(m);
    let dphi = 2.0 * PI / m as f64;
    let phases: Vec<C64> = (0..m).map(|j| C64::from_polar(1.0, (j as f64 + 0.5) * dphi)).collect();
    let mut out = Vec::with_capacity(m.pow(2 * n as u32));
    for &(s, ws) in &gl {
        let t = s / (1.0 - s);
        let dt = ws / ((1.0 - s) * (1.0 - s));
        match n {
            // dλ = ½ dT dφ
            1 => {
                for p in &phases {
                    out.push((vec![p * t.sqrt()], 0.5 * dt * dphi));
                }
            }
            // dλ = ¼ T dT du dφ₁ dφ₂
            _ => {
                for &(u, wu) in &gl {
                    let (r1, r2) = ((u * t).sqrt(), ((1.0 - u) * t).sqrt());
                    let w = 0.25 * t * dt * wu * dphi * dphi;
                    for p1 in &phases {
                        for p2 in &phases {
                            out.push((vec![p1 * r1, p2 * r2], w));
                        }
                    }
                }
            }
        }
    }
    out
}

type Integrand<'a> = dyn Fn(&ChartMatrix) -> C64 + Sync + 'a;

/// `∫ f dμ`.
pub fn integrate(shape: Shape, spec: &QuadratureSpec, f: &Integrand<'_>) -> Result<Estimate> {
    integrate_excluding(shape, spec, None, f)
}

/// `∫ f dμ` with the ball `|z − center| < ε` removed.
pub fn integrate_excluding(
    shape: Shape,
    spec: &QuadratureSpec,
    center: Option<&ChartMatrix>,
    f: &Integrand<'_>,
) -> Result<Estimate> {
    spec.validate()?;
    let excluded = |z: &ChartMatrix| match center {
        Some(c) if spec.epsilon > 0.0 => (z.matrix() - c.matrix()).norm() < spec.epsilon,
        _ => false,
    };
    let est = match spec.scheme {
        Scheme::GaussChart => {
            let fine = gauss_chart(shape, spec.nodes, &excluded, f)?;
            let coarse = gauss_chart(shape, (2 * spec.nodes / 3).max(2), &excluded, f)?;
            Estimate {
                error: (fine.value - coarse.value).norm(),
                ..fine
            }
        }
        Scheme::MonteCarloHaar => monte_carlo(shape, spec.samples, spec.seed, &excluded, f),
    };
    let bound = spec.tolerance * est.value.norm().max(1.0);
    if !(est.error <= bound) {
        return Err(Error::NonConvergence {
            estimate: est.error,
            tolerance: bound,
        });
    }
    Ok(est)
}

fn gauss_chart(
    shape: Shape,
    m: usize,
    excluded: &(dyn Fn(&ChartMatrix) -> bool + Sync),
    f: &Integrand<'_>,
) -> Result<Estimate> {
    let n = shape.n();
    if n > 2 {
        return Err(Error::UnsupportedQuadrature(format!(
            "gauss-chart supports n <= 2, shape has n = {n}"
        )));
    }
    let rule = chart_rule(n, m);
    let total = rule.len();
    let eval = |idx: usize| -> (C64, bool) {
        let (coords, weight) = &rule[idx];
        let weight = *weight;
        let z = ChartMatrix::from_flat(shape, coords).expect("finite node");
        if excluded(&z) {
            return (C64::new(0.0, 0.0), true);
        }
        let density = normalized_density(shape, z.matrix());
        (f(&z) * (weight * density), false)
    };
    let values = map_indices(total, eval);
    let mut value = C64::new(0.0, 0.0);
    let mut skipped = 0;
    for (v, ex) in values {
        value += v;
        skipped += ex as usize;
    }
    Ok(Estimate {
        value,
        error: 0.0,
        evaluated: total - skipped,
        excluded: skipped,
    })
}

fn monte_carlo(
    shape: Shape,
    samples: usize,
    seed: u64,
    excluded: &(dyn Fn(&ChartMatrix) -> bool + Sync),
    f: &Integrand<'_>,
) -> Estimate {
    let eval = |i: usize| -> Option<C64> {
        let z = haar_sample(shape, &mut rng_for(seed, i as u64));
        (!excluded(&z)).then(|| f(&z))
    };
    let values = map_indices(samples, eval);
    // excluded samples count as zero so the estimate stays one of ∫ f dμ
    let mut sum = C64::new(0.0, 0.0);
    let mut skipped = 0;
    for v in &values {
        match v {
            Some(x) => sum += x,
            None => skipped += 1,
        }
    }
    let mean = sum / samples as f64;
    let mut var = 0.0;
    for v in &values {
        var += (v.unwrap_or_default() - mean).norm_sqr();
    }
    var /= (samples - 1) as f64;
    Estimate {
        value: mean,
        error: (var / samples as f64).sqrt(),
        evaluated: samples - skipped,
        excluded: skipped,
    }
}

/// Evaluates `f(0..count)` in parallel when available; the output order is
/// the index order, so reductions over it are schedule independent.
pub fn map_indices<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}
