//! Bergman projection for holomorphic sections of `L^{-r}`:
//! `f(ζ) = C ∫ f(z) det γ₀(z, ζ)^r dμ(z)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{ChartMatrix, Shape};
use crate::jets::C64;
use crate::quadrature::{integrate, Estimate, QuadratureSpec};

use super::binomial;

/// A polynomial section in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Section {
    /// `c · Π z_ij^e`; indices are 1-based `(i, j)` with `i ≤ N−k`, `j ≤ k`.
    Monomial {
        exponents: Vec<[u32; 3]>,
        #[serde(default = "unit", with = "pair")]
        coefficient: C64,
    },
    /// `c · Π det (I; z)[rows]`; rows are 1-based indices into `1..=N`.
    Pluecker {
        rows: Vec<Vec<usize>>,
        #[serde(default = "unit", with = "pair")]
        coefficient: C64,
    },
}

fn unit() -> C64 {
    C64::new(1.0, 0.0)
}

mod pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([c.re, c.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

impl Section {
    pub fn constant() -> Self {
        Section::Monomial {
            exponents: Vec::new(),
            coefficient: unit(),
        }
    }

    pub fn monomial(exponents: Vec<[u32; 3]>) -> Self {
        Section::Monomial {
            exponents,
            coefficient: unit(),
        }
    }

    pub fn pluecker(rows: Vec<Vec<usize>>) -> Self {
        Section::Pluecker {
            rows,
            coefficient: unit(),
        }
    }

    /// Rejects malformed indices and sections of too high degree for `L^{-r}`.
    pub fn validate(&self, shape: Shape, r: i32) -> Result<()> {
        match self {
            Section::Monomial { exponents, .. } => {
                let mut degree = 0;
                for &[i, j, e] in exponents {
                    if i == 0 || j == 0 || i as usize > shape.rows() || j as usize > shape.k {
                        return Err(Error::InvalidSection(format!(
                            "entry ({i},{j}) outside a {}x{} chart",
                            shape.rows(),
                            shape.k
                        )));
                    }
                    degree += e;
                }
                if degree as i64 > r as i64 {
                    return Err(Error::InvalidSection(format!(
                        "monomial of degree {degree} is not a section of L^-{r}"
                    )));
                }
            }
            Section::Pluecker { rows, .. } => {
                if rows.len() as i64 > r as i64 {
                    return Err(Error::InvalidSection(format!(
                        "{} minors exceed r = {r}",
                        rows.len()
                    )));
                }
                for set in rows {
                    let mut sorted = set.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() != shape.k || sorted.iter().any(|&x| x == 0 || x > shape.big_n) {
                        return Err(Error::InvalidSection(format!(
                            "row set {set:?} must be {} distinct indices in 1..={}",
                            shape.k, shape.big_n
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: &ChartMatrix) -> C64 {
        match self {
            Section::Monomial {
                exponents,
                coefficient,
            } => exponents.iter().fold(*coefficient, |acc, &[i, j, e]| {
                acc * z.matrix()[(i as usize - 1, j as usize - 1)].powu(e)
            }),
            Section::Pluecker { rows, coefficient } => {
                let h = z.homogeneous();
                rows.iter().fold(*coefficient, |acc, set| {
                    let k = set.len();
                    let minor = DMatrix::from_fn(k, k, |a, b| h[(set[a] - 1, b)]);
                    acc * minor.determinant()
                })
            }
        }
    }
}

/// Parses a section file: one section object, an array of them, or
/// `{"sections": [...]}`.
pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::InvalidSection(e.to_string()))?;
    let list = match v {
        Value::Array(items) => items,
        Value::Object(ref map) if map.contains_key("sections") => match &map["sections"] {
            Value::Array(items) => items.clone(),
            _ => return Err(Error::InvalidSection("`sections` must be an array".into())),
        },
        other => vec![other],
    };
    list.into_iter()
        .map(|item| serde_json::from_value(item).map_err(|e| Error::InvalidSection(e.to_string())))
        .collect()
}

/// `det γ₀(z, ζ) = det(I + z*ζ) / det(I + z*z)`.
pub fn det_gamma0(z: &DMatrix<C64>, w: &DMatrix<C64>) -> C64 {
    let k = z.ncols();
    let id = DMatrix::<C64>::identity(k, k);
    (&id + z.adjoint() * w).determinant() / (&id + z.adjoint() * z).determinant()
}

/// Reproducing constant known in closed form: `binom(n + r, n)` on `CP^n`.
pub fn analytic_constant(shape: Shape, r: i32) -> Option<f64> {
    (shape.k == 1 && r >= 0).then(|| binomial(shape.n() as u64 + r as u64, shape.n() as u64))
}

/// Calibrates `C` so that `f ≡ 1` is reproduced at `ζ = 0`:
/// `C = 1 / ∫ det(I + z*z)^{-r} dμ`.
pub fn calibrate_constant(shape: Shape, r: i32, spec: &QuadratureSpec) -> Result<f64> {
    let zero = ChartMatrix::zeros(shape);
    let est = integrate(shape, spec, &|z| det_gamma0(z.matrix(), zero.matrix()).powi(r))?;
    Ok(1.0 / est.value.re)
}

/// `C ∫ f(z) det γ₀(z, ζ)^r dμ(z)`; the error estimate is scaled by `C`.
pub fn bergman_reproduce(
    shape: Shape,
    r: i32,
    section: &Section,
    zeta: &ChartMatrix,
    spec: &QuadratureSpec,
    constant: f64,
) -> Result<Estimate> {
    if r < 1 {
        return Err(Error::InvalidSection("the Bergman projection needs r >= 1".into()));
    }
    section.validate(shape, r)?;
    let est = integrate(shape, spec, &|z| {
        section.eval(z) * det_gamma0(z.matrix(), zeta.matrix()).powi(r)
    })?;
    Ok(Estimate {
        value: est.value * constant,
        error: est.error * constant,
        ..est
    })
}
