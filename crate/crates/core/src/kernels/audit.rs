//! Bidegree audit of `P_{g^r}` and the curvature identity at the origin.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{self, Bundle, ChartMatrix, PointPair, Seeded, Shape};
use crate::jets::C64;
use crate::superalg::{family_mask, BidegreeKey, GenKind, Multivector};

use super::p_weighted_values;

/// The five cases of the vanishing theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VanishCase {
    /// `r = 0`: only `p′ = q′`, `p″ = q″` survive.
    A,
    /// `r ≥ 0`: no component with `q″ > p″`.
    B,
    /// `r > 0`: no component with `q′ − p′ > rk`.
    C,
    /// `r < 0`: no component with `q′ > p′`.
    D,
    /// `r < 0`: no component with `q″ − p″ > |r|k`.
    E,
}

impl VanishCase {
    pub fn label(self) -> &'static str {
        match self {
            VanishCase::A => "a",
            VanishCase::B => "b",
            VanishCase::C => "c",
            VanishCase::D => "d",
            VanishCase::E => "e",
        }
    }

    pub fn applicable(r: i32) -> Vec<VanishCase> {
        match r.signum() {
            0 => vec![VanishCase::A, VanishCase::B],
            1 => vec![VanishCase::B, VanishCase::C],
            _ => vec![VanishCase::D, VanishCase::E],
        }
    }

    /// Whether a component of bidegree `key` is forbidden.
    pub fn forbids(self, key: &BidegreeKey, r: i32, k: usize) -> bool {
        let (pz, qz, pw, qw) = (
            key.p_z as i64,
            key.q_z as i64,
            key.p_w as i64,
            key.q_w as i64,
        );
        let rk = r.unsigned_abs() as i64 * k as i64;
        match self {
            VanishCase::A => pz != qz || pw != qw,
            VanishCase::B => qw > pw,
            VanishCase::C => qz - pz > rk,
            VanishCase::D => qz > pz,
            VanishCase::E => qw - pw > rk,
        }
    }
}

/// Audit outcome for one case over all sampled pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct VanishReport {
    pub case: VanishCase,
    /// Largest forbidden component magnitude relative to the pair's scale.
    pub max_relative: f64,
    /// Key of the worst forbidden component, if any was nonzero.
    pub worst: Option<BidegreeKey>,
    /// `(p′, q′, p″, q″)` of every nonzero component seen.
    pub key_set: BTreeSet<(u8, u8, u8, u8)>,
    pub points: usize,
}

/// Checks every applicable case on the bidegree table of `P_{g^r}`.
pub fn vanish_audit(shape: Shape, r: i32, pairs: &[PointPair]) -> Result<Vec<VanishReport>> {
    let cases = VanishCase::applicable(r);
    let mut reports: Vec<VanishReport> = cases
        .iter()
        .map(|&case| VanishReport {
            case,
            max_relative: 0.0,
            worst: None,
            key_set: BTreeSet::new(),
            points: pairs.len(),
        })
        .collect();
    for pair in pairs {
        let s = Seeded::new(shape, pair, 1);
        let p = p_weighted_values(&s, r)?;
        let scale = p.max_value();
        if scale == 0.0 {
            continue;
        }
        for (key, comp) in p.bidegree_split() {
            let mag = comp.max_value() / scale;
            for rep in reports.iter_mut() {
                rep.key_set.insert((key.p_z, key.q_z, key.p_w, key.q_w));
                if rep.case.forbids(&key, r, shape.k) && mag > rep.max_relative {
                    rep.max_relative = mag;
                    rep.worst = Some(key);
                }
            }
        }
    }
    Ok(reports)
}

/// Outcome of the curvature identity at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureOriginReport {
    /// Residual against `(ρ ⊗ τ*)′([Y, Z]) W = −ZYW − WYZ`.
    pub residual: f64,
    /// Residual against the literal display `ZYW − WYZ`, for reference.
    pub literal_residual: f64,
    pub triples: usize,
}

/// `Θ_E(0)` pulled back to the diagonal and evaluated on the holomorphic
/// direction `v` and the antiholomorphic direction `ū`, applied to `w`.
/// All three are `(N−k)×k` chart matrices.
pub fn curvature_on_diagonal(
    shape: Shape,
    theta: &crate::superalg::HomMatrix<C64>,
    v: &DMatrix<C64>,
    u: &DMatrix<C64>,
    w: &DMatrix<C64>,
) -> DMatrix<C64> {
    let n = shape.n();
    let flat = |m: &DMatrix<C64>| -> Vec<C64> {
        (0..n).map(|i| m[(i / shape.k, i % shape.k)]).collect()
    };
    let (vf, uf, wf) = (flat(v), flat(u), flat(w));
    let holo = family_mask(GenKind::Dz, n) | family_mask(GenKind::Dw, n);
    let anti = family_mask(GenKind::DzBar, n) | family_mask(GenKind::DwBar, n);
    let contract = |form: &Multivector<C64>| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (mask, c) in form.terms() {
            let (h, a) = (mask & holo, mask & anti);
            if h.count_ones() != 1 || a.count_ones() != 1 {
                continue;
            }
            let (hb, ab) = (h.trailing_zeros() as usize, a.trailing_zeros() as usize);
            let sign = if hb < ab { 1.0 } else { -1.0 };
            acc += c * vf[hb % n] * uf[ab % n] * sign;
        }
        acc
    };
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, wj) in wf.iter().enumerate() {
            *o += contract(theta.get(i, j)) * wj;
        }
    }
    DMatrix::from_fn(shape.rows(), shape.k, |i, j| out[shape.index(i, j)])
}

/// Checks `Θ_E(p₀)(Y, Z) W` at the origin for the given triples. `Y` is
/// `k×(N−k)`, `Z` and `W` are `(N−k)×k`; the chart identification is
/// `v = Z`, `u = −Yᵗ`.
pub fn curvature_origin_check(
    shape: Shape,
    triples: &[(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)],
) -> Result<CurvatureOriginReport> {
    let origin = PointPair::new(ChartMatrix::zeros(shape), ChartMatrix::zeros(shape));
    let s = Seeded::new(shape, &origin, 2);
    let theta = geometry::curvature(&s, Bundle::E)?.map_coeff(|c| c.value());
    let mut residual: f64 = 0.0;
    let mut literal: f64 = 0.0;
    for (y, z, w) in triples {
        let lhs = curvature_on_diagonal(shape, &theta, z, &(-y.transpose()), w);
        let zyw = z * y * w;
        let wyz = w * y * z;
        let expected = -&zyw - &wyz;
        let display = &zyw - &wyz;
        let scale = max_abs(&expected).max(1.0);
        residual = residual.max(max_abs(&(&lhs - &expected)) / scale);
        literal = literal.max(max_abs(&(&lhs - &display)) / max_abs(&display).max(1.0));
    }
    Ok(CurvatureOriginReport {
        residual,
        literal_residual: literal,
        triples: triples.len(),
    })
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_table() {
        let key = BidegreeKey {
            p_z: 0,
            q_z: 2,
            p_w: 1,
            q_w: 1,
            d_e: 0,
            d_estar: 0,
        };
        assert!(VanishCase::A.forbids(&key, 0, 1));
        assert!(!VanishCase::B.forbids(&key, 1, 1));
        assert!(VanishCase::C.forbids(&key, 1, 1));
        assert!(!VanishCase::C.forbids(&key, 2, 1));
        assert!(VanishCase::D.forbids(&key, -1, 1));
        assert!(!VanishCase::E.forbids(&key, -1, 1));
    }

    #[test]
    fn zero_directions_give_zero() {
        let shape = Shape::new(2, 4).unwrap();
        let z0 = DMatrix::<C64>::zeros(2, 2);
        let one = DMatrix::<C64>::identity(2, 2);
        let rep = curvature_origin_check(shape, &[(z0.clone(), one.clone(), one.clone()), (one.clone(), z0, one.clone())]).unwrap();
        assert_eq!(rep.residual, 0.0);
    }
}
